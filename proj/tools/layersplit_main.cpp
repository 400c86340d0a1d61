// Copyright 2026 The layersplit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// layersplit: command-line front end.
//
// Exit codes: 0 success, 1 infeasible, 2 invalid input or arguments,
// 3 internal consistency failure.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "layersplit.hpp"

namespace {

using namespace layersplit;

constexpr int kExitOk = 0;
constexpr int kExitInfeasible = 1;
constexpr int kExitInvalid = 2;
constexpr int kExitInternal = 3;

/// Human output carries 6 decimals.
json num(double v) {
  if (std::isinf(v)) return "inf";
  double r = std::round(v * 1e6) / 1e6;
  if (r == 0) r = 0;  // no "-0"
  return r;
}

std::string full(double v) {
  if (std::isinf(v)) return "inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct ScenarioFlags {
  std::string objective = "latency";
  bool training = false;
  double rho = 0;
  std::optional<double> battery;
  std::optional<double> cloud_time;
  std::optional<double> qos;
  bool larac = false;
  bool oracle = false;
  bool compress = false;
  int quantize_bits = 8;
  double default_cr = 1.0;
  std::optional<int> batch;

  void attach(CLI::App& cmd) {
    cmd.add_option("--objective", objective, "latency or energy")
        ->check(CLI::IsMember({"latency", "energy"}));
    cmd.add_flag("--training", training, "schedule a training step (forward and backward pass)");
    cmd.add_option("--rho", rho, "fraction of weights refreshed per training step")
        ->check(CLI::Range(0.0, 1.0));
    cmd.add_option("--battery", battery, "mobile energy budget in mJ (latency objective)");
    cmd.add_option("--cloud-time", cloud_time, "cloud busy-time budget in ms (latency objective)");
    cmd.add_option("--qos", qos, "latency deadline in ms (energy objective)");
    cmd.add_flag("--larac", larac, "use the Lagrangian approximation for bounded scenarios");
    cmd.add_flag("--oracle", oracle)->group("");
    cmd.add_flag("--compress", compress, "quantize and compress transferred tensors");
    cmd.add_option("--quantize-bits", quantize_bits, "bits per value when compressing")
        ->check(CLI::IsMember({4, 8, 16, 32}));
    cmd.add_option("--default-cr", default_cr, "compression ratio for layers without one");
    cmd.add_option("--batch", batch, "batch size (selects the matching profile set)");
  }

  ScenarioSpec spec() const {
    ScenarioSpec s;
    s.mode = training ? Mode::training : Mode::inference;
    s.objective = parse_metric(objective);
    s.update_fraction = rho;
    int bounds = 0;
    if (battery) {
      s.constraint = ConstraintKind::battery;
      s.bound = *battery;
      ++bounds;
    }
    if (cloud_time) {
      s.constraint = ConstraintKind::cloud_time;
      s.bound = *cloud_time;
      ++bounds;
    }
    if (qos) {
      s.constraint = ConstraintKind::qos;
      s.bound = *qos;
      ++bounds;
    }
    if (bounds > 1) throw ArgumentError("give at most one of --battery, --cloud-time, --qos");
    if (larac && oracle) throw ArgumentError("--larac and --oracle are exclusive");
    s.solver = larac ? SolverKind::larac : oracle ? SolverKind::oracle : SolverKind::exact;
    s.compression.enabled = compress;
    s.compression.quantize_bits = quantize_bits;
    s.compression.default_ratio = default_cr;
    s.validate();
    return s;
  }

  ProblemInstance instance(const std::string& path) const {
    ProblemInstance inst = load_instance_file(path);
    if (batch) inst = with_batch(inst, *batch);
    return inst;
  }
};

void write_output(const std::string& text, const std::string& out) {
  if (out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(out, std::ios::binary);
  if (!f) throw ArgumentError("cannot write '" + out + "'");
  f << text;
}

json costs_json(const ScheduleCosts& c) {
  return {{"latency_ms", num(c.total(Metric::latency))},
          {"energy_mJ", num(c.total(Metric::energy))},
          {"cloud_time_ms", num(c.cloud_time_ms)}};
}

json breakdown_json(const CostBreakdown& b) {
  return {{"computation", num(b.computation)},
          {"upload", num(b.upload)},
          {"download", num(b.download)},
          {"weight_download", num(b.weight_download)},
          {"compression_overhead", num(b.compression_overhead)}};
}

json schedule_json(const std::vector<Segment>& segs, const Evaluation& ev,
                   const ScenarioSpec& spec) {
  json runs = json::array();
  for (const auto& s : segs) {
    runs.push_back({{"first", s.first}, {"last", s.last}, {"platform", std::string(to_string(s.platform))}});
  }
  json j{{"segments", format_segments(segs)},
         {"runs", runs},
         {"pattern", schedule_pattern(segs)},
         {"total_cost", num(ev.objective)},
         {"breakdown", breakdown_json(ev.breakdown(spec.objective))},
         {"costs", costs_json(ev.costs)}};
  if (ev.resource) j["total_resource"] = num(*ev.resource);
  return j;
}

std::string csv_header() {
  return "scenario,objective,constraint,total,computation,upload,download,weight_download,"
         "pattern,latency_improvement_pct,energy_improvement_pct,cloud_workload_reduction_pct\n";
}

std::string csv_row(const ScenarioSpec& spec, const std::vector<Segment>& segs,
                    const Evaluation& ev, const std::optional<Report>& report) {
  const CostBreakdown& b = ev.breakdown(spec.objective);
  std::ostringstream os;
  os << spec.name() << ',' << to_string(spec.objective) << ',' << to_string(spec.constraint);
  if (spec.constraint != ConstraintKind::none) os << ':' << full(spec.bound);
  os << ',' << full(ev.objective) << ',' << full(b.computation) << ',' << full(b.upload) << ','
     << full(b.download) << ',' << full(b.weight_download) << ',' << schedule_pattern(segs);
  if (report) {
    os << ',' << full(report->latency_improvement_pct) << ','
       << full(report->energy_improvement_pct) << ','
       << full(report->cloud_workload_reduction_pct);
  } else {
    os << ",,,";
  }
  os << '\n';
  return os.str();
}

void print_warnings(const ProblemInstance& inst) {
  for (const auto& w : inst.warnings) std::cerr << "warning: " << w << '\n';
}

int report_infeasible(const InfeasibleError& e, const ScenarioSpec& spec) {
  json j{{"status", "infeasible"}, {"scenario", spec.name()}, {"message", e.what()}};
  if (e.min_resource()) {
    j["min_resource"] = num(*e.min_resource());
    if (auto r = spec.resource_metric()) j["resource_metric"] = std::string(to_string(*r));
  }
  std::cout << j.dump(2) << '\n';
  std::cerr << "infeasible: " << e.what();
  if (e.min_resource()) std::cerr << " (minimum achievable " << full(*e.min_resource()) << ")";
  std::cerr << '\n';
  return kExitInfeasible;
}

int cmd_solve(const std::string& path, const ScenarioFlags& flags, const std::string& format,
              const std::string& out) {
  const ScenarioSpec spec = flags.spec();
  const ProblemInstance inst = flags.instance(path);
  print_warnings(inst);
  ScenarioResult r;
  try {
    r = solve_scenario(inst, spec);
  } catch (const InfeasibleError& e) {
    return report_infeasible(e, spec);
  }
  const Evaluation ev = evaluate_schedule(inst, r.schedule.segments, spec);
  if (!nearly_equal(ev.objective, r.schedule.total_cost, 1e-9)) {
    throw ConsistencyError("solver cost " + full(r.schedule.total_cost) +
                           " differs from re-evaluation " + full(ev.objective));
  }
  if (!ev.feasible) throw ConsistencyError("solver returned a schedule that breaks the bound");

  if (format == "csv") {
    write_output(csv_header() + csv_row(spec, r.schedule.segments, ev, r.report), out);
    return kExitOk;
  }
  json j{{"status", "optimal"},
         {"instance", inst.name},
         {"scenario", spec_to_json(spec)},
         {"schedule", schedule_json(r.schedule.segments, ev, spec)},
         {"report",
          {{"mobile_only", costs_json(r.report.mobile_only)},
           {"cloud_only", costs_json(r.report.cloud_only)},
           {"joint", costs_json(r.report.joint)},
           {"latency_improvement_pct", num(r.report.latency_improvement_pct)},
           {"energy_improvement_pct", num(r.report.energy_improvement_pct)},
           {"cloud_workload_reduction_pct", num(r.report.cloud_workload_reduction_pct)}}}};
  if (r.lower_bound) {
    j["status"] = "feasible";
    j["lower_bound"] = num(*r.lower_bound);
  }
  write_output(j.dump(2) + "\n", out);
  return kExitOk;
}

int cmd_evaluate(const std::string& path, const std::string& schedule, const ScenarioFlags& flags,
                 const std::string& format, const std::string& out) {
  const ScenarioSpec spec = flags.spec();
  const ProblemInstance inst = flags.instance(path);
  print_warnings(inst);
  const auto segs = parse_segments(schedule);
  const Evaluation ev = evaluate_schedule(inst, segs, spec);
  if (format == "csv") {
    write_output(csv_header() + csv_row(spec, segs, ev, std::nullopt), out);
    return kExitOk;
  }
  json j{{"status", ev.feasible ? "feasible" : "violates_bound"},
         {"instance", inst.name},
         {"scenario", spec_to_json(spec)},
         {"schedule", schedule_json(segs, ev, spec)},
         {"ilp_objective", num(ev.ilp_objective)}};
  write_output(j.dump(2) + "\n", out);
  return kExitOk;
}

int cmd_export(const std::string& path, const ScenarioFlags& flags, const std::string& out) {
  const ScenarioSpec spec = flags.spec();
  const ProblemInstance inst = flags.instance(path);
  print_warnings(inst);
  write_output(export_ilp(inst, spec), out);
  return kExitOk;
}

template <typename T>
std::vector<T> parse_list(const std::string& text, const char* what) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::istringstream is(item);
    T v{};
    if (!(is >> v) || !is.eof()) throw ArgumentError(std::string("bad value '") + item + "' in " + what);
    out.push_back(v);
  }
  if (out.empty()) throw ArgumentError(std::string(what) + " needs at least one value");
  return out;
}

QueryPoint parse_query(const std::string& text) {
  QueryPoint p;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ArgumentError("query items look like axis=value");
    std::string axis = item.substr(0, eq);
    const std::string value = item.substr(eq + 1);
    if (axis == "uplink") axis = "uplink_mbps";
    if (axis == "downlink") axis = "downlink_mbps";
    if (axis == "rho") axis = "update_fraction";
    if (axis == "link") {
      p[axis] = value;
      continue;
    }
    try {
      std::size_t used = 0;
      const double v = std::stod(value, &used);
      if (used != value.size()) throw std::invalid_argument("trailing");
      p[axis] = v;
    } catch (const std::logic_error&) {
      throw ArgumentError("query value '" + value + "' is not a number");
    }
  }
  return p;
}

json cell_json(const LookupCell& c) {
  json point = json::object();
  if (c.point.link) point["link"] = *c.point.link;
  if (c.point.uplink_mbps) point["uplink_mbps"] = *c.point.uplink_mbps;
  if (c.point.downlink_mbps) point["downlink_mbps"] = *c.point.downlink_mbps;
  if (c.point.batch) point["batch"] = *c.point.batch;
  if (c.point.update_fraction) point["update_fraction"] = *c.point.update_fraction;
  json j{{"point", point}, {"feasible", c.feasible}};
  if (c.feasible) {
    j["segments"] = format_segments(c.segments);
    j["pattern"] = schedule_pattern(c.segments);
    j["total_cost"] = num(c.total_cost);
    if (c.total_resource) j["total_resource"] = num(*c.total_resource);
    j["latency_ms"] = num(c.latency_ms);
    j["energy_mJ"] = num(c.energy_mJ);
    j["cloud_time_ms"] = num(c.cloud_time_ms);
  } else if (c.min_resource) {
    j["min_resource"] = num(*c.min_resource);
  }
  return j;
}

struct SweepFlags {
  std::string uplink, downlink, links, batches, rhos;
  std::size_t cap = kDefaultCellCap;
  unsigned threads = 0;
  std::string query;
  std::string table;
};

int cmd_sweep(const std::string& path, const ScenarioFlags& flags, const SweepFlags& sf,
              const std::string& out) {
  const ProblemInstance inst = flags.instance(path);
  if (!sf.query.empty()) {
    if (sf.table.empty()) throw ArgumentError("--query needs --table");
    std::ifstream in(sf.table);
    if (!in) throw ArgumentError("cannot read table '" + sf.table + "'");
    json doc;
    try {
      doc = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ParseError("$", std::string("malformed JSON: ") + e.what());
    }
    const LookupTable t = table_from_json(doc);
    check_table_instance(t, inst);
    write_output(cell_json(query_lookup(t, parse_query(sf.query))).dump(2) + "\n", out);
    return kExitOk;
  }
  if (out.empty()) throw ArgumentError("sweep needs --out for the table file");
  print_warnings(inst);
  const ScenarioSpec spec = flags.spec();
  SweepAxes axes;
  if (!sf.uplink.empty()) axes.uplink_mbps = parse_list<double>(sf.uplink, "--uplink");
  if (!sf.downlink.empty()) axes.downlink_mbps = parse_list<double>(sf.downlink, "--downlink");
  if (!sf.links.empty()) axes.links = parse_list<std::string>(sf.links, "--links");
  if (!sf.batches.empty()) axes.batches = parse_list<int>(sf.batches, "--batches");
  if (!sf.rhos.empty()) axes.update_fractions = parse_list<double>(sf.rhos, "--rhos");
  const LookupTable t = sweep_lookup(inst, axes, spec, sf.cap, sf.threads);
  write_output(table_to_json(t).dump(2) + "\n", out);
  std::size_t feasible = 0;
  for (const auto& c : t.cells) feasible += c.feasible ? 1 : 0;
  std::cout << json{{"cells", t.cells.size()}, {"feasible", feasible}, {"table", out}}.dump(2)
            << '\n';
  return kExitOk;
}

int cmd_synth(const std::string& shape, int layers, std::uint64_t seed, const std::string& link,
              const std::string& out) {
  const SynthShape s = parse_synth_shape(shape);
  auto preset = LinkProfile::preset(link);
  if (!preset) throw ArgumentError("unknown link preset '" + link + "'");
  const ProblemInstance inst = synth_benchmark(s, layers, seed, *preset);
  write_output(to_document(inst).dump(2) + "\n", out);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"layersplit: layer-level mobile/cloud partitioning of neural networks"};
  app.require_subcommand(1);

  std::string instance, format = "json", out, schedule;
  ScenarioFlags flags;
  SweepFlags sweep;
  std::string shape;
  int layers = 0;
  std::uint64_t seed = 0;
  std::string link = "WiFi";

  auto add_common = [&](CLI::App* cmd, bool with_format) {
    cmd->add_option("--instance", instance, "profile document (JSON)")->required();
    flags.attach(*cmd);
    if (with_format) {
      cmd->add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    }
    cmd->add_option("--out", out, "output file (default: standard output)");
  };

  auto* solve = app.add_subcommand("solve", "find the optimal schedule for a scenario");
  add_common(solve, true);
  auto* evaluate = app.add_subcommand("evaluate", "recompute the costs of a given schedule");
  add_common(evaluate, true);
  evaluate->add_option("--schedule", schedule, "segments, e.g. C1-2,M3-3")->required();
  auto* exp = app.add_subcommand("export-ilp", "write the integer program in LP format");
  add_common(exp, false);
  auto* sw = app.add_subcommand("sweep", "build or query a lookup table over a parameter grid");
  add_common(sw, false);
  sw->add_option("--uplink", sweep.uplink, "comma-separated uplink rates (Mbps)");
  sw->add_option("--downlink", sweep.downlink, "comma-separated downlink rates (Mbps)");
  sw->add_option("--links", sweep.links, "comma-separated link presets (3G,4G,WiFi)");
  sw->add_option("--batches", sweep.batches, "comma-separated batch sizes");
  sw->add_option("--rhos", sweep.rhos, "comma-separated update fractions (training)");
  sw->add_option("--cap", sweep.cap, "maximum number of cells");
  sw->add_option("--threads", sweep.threads, "worker threads (default: all cores)");
  sw->add_option("--query", sweep.query, "axis=value list to look up, e.g. uplink=5.85");
  sw->add_option("--table", sweep.table, "table file to query");
  auto* synth = app.add_subcommand("synth", "write a synthetic benchmark profile document");
  synth->add_option("--shape", shape, "discriminative, generative or autoencoder")->required();
  synth->add_option("--layers", layers, "number of layers (>= 2)")->required();
  synth->add_option("--seed", seed, "generator seed");
  synth->add_option("--link", link, "link preset stored in the document");
  synth->add_option("--out", out, "output file (default: standard output)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  std::optional<ScenarioSpec> spec_for_errors;
  try {
    if (*solve) return cmd_solve(instance, flags, format, out);
    if (*evaluate) return cmd_evaluate(instance, schedule, flags, format, out);
    if (*exp) return cmd_export(instance, flags, out);
    if (*sw) return cmd_sweep(instance, flags, sweep, out);
    if (*synth) return cmd_synth(shape, layers, seed, link, out);
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const ConsistencyError& e) {
    std::cerr << "internal consistency error: " << e.what() << '\n';
    return kExitInternal;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitInvalid;
}
