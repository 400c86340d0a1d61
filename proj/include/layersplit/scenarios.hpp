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

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <tuple>
#include <variant>
#include <vector>

#include "layersplit/brute_force.hpp"
#include "layersplit/document.hpp"
#include "layersplit/evaluate.hpp"
#include "layersplit/graph.hpp"
#include "layersplit/solver.hpp"

namespace layersplit {

/// Joint schedule against both single-platform baselines of the same
/// instance. Percentages are in [0, 100] scale.
struct Report {
  ScheduleCosts mobile_only;
  ScheduleCosts cloud_only;
  ScheduleCosts joint;
  double latency_improvement_pct = 0;
  double energy_improvement_pct = 0;
  double cloud_workload_reduction_pct = 0;
};

struct ScenarioResult {
  Schedule schedule;
  Report report;
  std::optional<double> lower_bound;  // LARAC only
};

namespace detail {

inline double improvement_pct(double joint, double a, double b) {
  const double best = std::min(a, b);
  if (!std::isfinite(best) || best <= 0) return 0.0;
  return (best - joint) / best * 100.0;
}

}  // namespace detail

inline Report make_report(const ProblemCosts& costs, const std::vector<Segment>& joint) {
  const int n = costs.size();
  Report r;
  r.mobile_only = schedule_costs(costs, {{1, n, Platform::mobile}});
  r.cloud_only = schedule_costs(costs, {{1, n, Platform::cloud}});
  r.joint = schedule_costs(costs, joint);
  r.latency_improvement_pct = detail::improvement_pct(
      r.joint.total(Metric::latency), r.mobile_only.total(Metric::latency),
      r.cloud_only.total(Metric::latency));
  r.energy_improvement_pct = detail::improvement_pct(
      r.joint.total(Metric::energy), r.mobile_only.total(Metric::energy),
      r.cloud_only.total(Metric::energy));
  const double full = r.cloud_only.cloud_time_ms;
  r.cloud_workload_reduction_pct = full > 0 ? (1.0 - r.joint.cloud_time_ms / full) * 100.0 : 0.0;
  return r;
}

/// Solves one scenario: unconstrained specs take the plain shortest path,
/// bounded ones the exact label-setting search (or LARAC when selected).
inline ScenarioResult solve_scenario(const ProblemInstance& instance, const ScenarioSpec& spec) {
  spec.validate();
  const ProblemInstance inst = prepare_instance(instance, spec);
  const auto resource = spec.resource_metric();
  ScenarioResult out;
  if (spec.solver == SolverKind::oracle) {
    out.schedule = brute_force(inst, spec.mode, spec.objective, resource, spec.resource_bound(),
                               spec.update_fraction);
  } else {
    const ScheduleGraph g =
        build_graph(inst, spec.mode, spec.objective, resource, spec.update_fraction);
    if (!resource) {
      out.schedule = shortest_schedule(g);
    } else if (spec.solver == SolverKind::larac) {
      auto r = larac_schedule(g, spec.bound);
      out.schedule = std::move(r.schedule);
      out.lower_bound = r.lower_bound;
    } else {
      out.schedule = constrained_schedule(g, spec.bound);
    }
  }
  out.report = make_report(ProblemCosts(inst, spec.mode, spec.update_fraction),
                           out.schedule.segments);
  return out;
}

// ---------------------------------------------------------------------------
// Lookup table

inline constexpr std::size_t kDefaultCellCap = 10000;

/// Swept parameters. An empty axis keeps the instance's own value.
struct SweepAxes {
  std::vector<double> uplink_mbps;
  std::vector<double> downlink_mbps;
  std::vector<std::string> links;
  std::vector<int> batches;
  std::vector<double> update_fractions;

  std::size_t cell_count() const {
    auto dim = [](std::size_t s) { return s == 0 ? std::size_t{1} : s; };
    return dim(uplink_mbps.size()) * dim(downlink_mbps.size()) * dim(links.size()) *
           dim(batches.size()) * dim(update_fractions.size());
  }
};

struct CellPoint {
  std::optional<std::string> link;
  std::optional<double> uplink_mbps;
  std::optional<double> downlink_mbps;
  std::optional<int> batch;
  std::optional<double> update_fraction;
};

struct LookupCell {
  CellPoint point;
  bool feasible = true;
  std::vector<Segment> segments;
  double total_cost = 0;
  std::optional<double> total_resource;
  double latency_ms = 0;
  double energy_mJ = 0;
  double cloud_time_ms = 0;
  std::optional<double> min_resource;  // set on infeasible cells
};

struct LookupTable {
  SweepAxes axes;
  ScenarioSpec spec;
  std::string instance_hash;
  std::vector<LookupCell> cells;  // row-major over link, uplink, downlink, batch, rho
};

/// Instance for one point: link preset first, then rate overrides, then the
/// batch's profile set.
inline ProblemInstance instance_at(const ProblemInstance& base, const CellPoint& p) {
  ProblemInstance inst = base;
  if (p.link || p.uplink_mbps || p.downlink_mbps) {
    LinkProfile link = base.link;
    if (p.link) {
      auto preset = LinkProfile::preset(*p.link);
      if (!preset) throw ArgumentError("unknown link preset '" + *p.link + "'");
      link = *preset;
    }
    if (p.uplink_mbps) link.uplink_mbps = *p.uplink_mbps;
    if (p.downlink_mbps) link.downlink_mbps = *p.downlink_mbps;
    inst = with_link(base, link);
  }
  if (p.batch) inst = with_batch(inst, *p.batch);
  return inst;
}

namespace detail {

inline std::vector<CellPoint> enumerate_points(const SweepAxes& ax) {
  std::vector<CellPoint> pts{CellPoint{}};
  auto expand = [&pts](std::size_t count, auto&& set) {
    if (count == 0) return;
    std::vector<CellPoint> next;
    for (const auto& p : pts)
      for (std::size_t k = 0; k < count; ++k) {
        CellPoint q = p;
        set(q, k);
        next.push_back(q);
      }
    pts = std::move(next);
  };
  expand(ax.links.size(), [&](CellPoint& p, std::size_t k) { p.link = ax.links[k]; });
  expand(ax.uplink_mbps.size(), [&](CellPoint& p, std::size_t k) { p.uplink_mbps = ax.uplink_mbps[k]; });
  expand(ax.downlink_mbps.size(),
         [&](CellPoint& p, std::size_t k) { p.downlink_mbps = ax.downlink_mbps[k]; });
  expand(ax.batches.size(), [&](CellPoint& p, std::size_t k) { p.batch = ax.batches[k]; });
  expand(ax.update_fractions.size(),
         [&](CellPoint& p, std::size_t k) { p.update_fraction = ax.update_fractions[k]; });
  return pts;
}

}  // namespace detail

/// Solves every grid cell. Cells run on a small thread pool and each writes
/// only its own slot, so the table does not depend on scheduling order.
/// Every solved cell is re-checked with `evaluate_schedule`.
inline LookupTable sweep_lookup(const ProblemInstance& instance, const SweepAxes& axes,
                                const ScenarioSpec& spec, std::size_t cap = kDefaultCellCap,
                                unsigned threads = 0) {
  const std::size_t count = axes.cell_count();
  if (count > cap) {
    throw ArgumentError("sweep needs " + std::to_string(count) + " cells but the cap is " +
                        std::to_string(cap) + "; raise the cap to at least " +
                        std::to_string(count));
  }
  if (!axes.update_fractions.empty() && spec.mode != Mode::training) {
    throw ArgumentError("an update-fraction axis needs a training scenario");
  }
  for (const auto& name : axes.links) {
    if (!LinkProfile::preset(name)) throw ArgumentError("unknown link preset '" + name + "'");
  }
  spec.validate();

  LookupTable table;
  table.axes = axes;
  table.spec = spec;
  table.instance_hash = instance_hash(instance);
  const auto points = detail::enumerate_points(axes);
  table.cells.resize(points.size());
  std::vector<std::exception_ptr> errors(points.size());

  auto run = [&](std::size_t k) {
    LookupCell& cell = table.cells[k];
    cell.point = points[k];
    try {
      const ProblemInstance inst = instance_at(instance, points[k]);
      ScenarioSpec s = spec;
      if (points[k].update_fraction) s.update_fraction = *points[k].update_fraction;
      const ScenarioResult r = solve_scenario(inst, s);
      const Evaluation ev = evaluate_schedule(inst, r.schedule.segments, s);
      if (!ev.feasible) throw ConsistencyError("sweep cell schedule fails re-validation");
      cell.segments = r.schedule.segments;
      cell.total_cost = r.schedule.total_cost;
      cell.total_resource = r.schedule.total_resource;
      cell.latency_ms = ev.costs.total(Metric::latency);
      cell.energy_mJ = ev.costs.total(Metric::energy);
      cell.cloud_time_ms = ev.costs.cloud_time_ms;
    } catch (const InfeasibleError& e) {
      cell.feasible = false;
      cell.min_resource = e.min_resource();
    } catch (...) {
      errors[k] = std::current_exception();
    }
  };

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, points.size()));
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t k = next++; k < points.size(); k = next++) run(k);
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return table;
}

/// A query coordinate. Numeric axes take doubles; `link` takes a preset name.
using AxisValue = std::variant<double, std::string>;
using QueryPoint = std::map<std::string, AxisValue>;

/// Nearest cell under per-axis range-normalized Euclidean distance. Ties go
/// to the cell with the lower axis values. Points outside an axis' range,
/// unknown link names and missing coordinates for multi-valued axes raise
/// RangeError.
inline const LookupCell& query_lookup(const LookupTable& table, const QueryPoint& point) {
  static const std::vector<std::string> kAxes{"link", "uplink_mbps", "downlink_mbps", "batch",
                                              "update_fraction"};
  for (const auto& [name, _] : point) {
    if (std::find(kAxes.begin(), kAxes.end(), name) == kAxes.end()) {
      throw RangeError("unknown axis '" + name + "'");
    }
  }
  auto numeric = [&](const std::string& name, const std::vector<double>& values,
                     auto&& cell_value) -> std::function<double(const LookupCell&)> {
    auto it = point.find(name);
    if (values.empty()) {
      if (it != point.end()) throw RangeError("axis '" + name + "' was not swept");
      return nullptr;
    }
    if (it == point.end()) {
      if (values.size() > 1) throw RangeError("query must give a value for axis '" + name + "'");
      return nullptr;
    }
    if (!std::holds_alternative<double>(it->second)) {
      throw RangeError("axis '" + name + "' takes a number");
    }
    const double x = std::get<double>(it->second);
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    if (!(x >= *lo && x <= *hi)) {
      throw RangeError("value for '" + name + "' lies outside [" + detail::format_number(*lo) +
                       ", " + detail::format_number(*hi) + "]");
    }
    const double range = *hi - *lo;
    return [=](const LookupCell& c) {
      const double v = cell_value(c);
      return range > 0 ? (v - x) / range : 0.0;
    };
  };

  std::vector<double> batches(table.axes.batches.begin(), table.axes.batches.end());
  std::vector<std::function<double(const LookupCell&)>> dist;
  dist.push_back(numeric("uplink_mbps", table.axes.uplink_mbps,
                         [](const LookupCell& c) { return *c.point.uplink_mbps; }));
  dist.push_back(numeric("downlink_mbps", table.axes.downlink_mbps,
                         [](const LookupCell& c) { return *c.point.downlink_mbps; }));
  dist.push_back(numeric("batch", batches,
                         [](const LookupCell& c) { return static_cast<double>(*c.point.batch); }));
  dist.push_back(numeric("update_fraction", table.axes.update_fractions,
                         [](const LookupCell& c) { return *c.point.update_fraction; }));

  std::optional<std::string> link;
  if (auto it = point.find("link"); it != point.end()) {
    if (table.axes.links.empty()) throw RangeError("axis 'link' was not swept");
    if (!std::holds_alternative<std::string>(it->second)) throw RangeError("axis 'link' takes a name");
    link = std::get<std::string>(it->second);
    if (std::find(table.axes.links.begin(), table.axes.links.end(), *link) ==
        table.axes.links.end()) {
      throw RangeError("link '" + *link + "' is not in the table");
    }
  } else if (table.axes.links.size() > 1) {
    throw RangeError("query must give a value for axis 'link'");
  }

  // Lower axis values first, in the same axis order as the distance terms.
  auto key = [](const LookupCell& c) {
    return std::tuple{c.point.uplink_mbps.value_or(0), c.point.downlink_mbps.value_or(0),
                      c.point.batch.value_or(0), c.point.update_fraction.value_or(0)};
  };
  const LookupCell* best = nullptr;
  double best_d = kUnreachable;
  for (const auto& c : table.cells) {
    if (link && c.point.link != link) continue;
    double d = 0;
    for (const auto& f : dist)
      if (f) d += f(c) * f(c);
    const bool better = !best || d < best_d || (d == best_d && key(c) < key(*best));
    if (better) {
      best = &c;
      best_d = d;
    }
  }
  if (!best) throw RangeError("table has no cells");
  return *best;
}

// ---------------------------------------------------------------------------
// Persistence

namespace detail {

inline json segments_json(const std::vector<Segment>& segs) {
  json arr = json::array();
  for (const auto& s : segs) {
    arr.push_back({{"first", s.first},
                   {"last", s.last},
                   {"platform", std::string(to_string(s.platform))}});
  }
  return arr;
}

inline std::vector<Segment> segments_from_json(const Reader& r) {
  std::vector<Segment> out;
  for (std::size_t k = 0; k < r.size(); ++k) {
    const Reader s = r.index(k);
    s.expect_object({"first", "last", "platform"});
    out.push_back({static_cast<int>(s.at("first").integer()),
                   static_cast<int>(s.at("last").integer()),
                   parse_platform(s.at("platform").string())});
  }
  return out;
}

}  // namespace detail

inline json spec_to_json(const ScenarioSpec& s) {
  json skip = json::array();
  for (auto k : s.compression.skip_kinds) skip.push_back(std::string(to_string(k)));
  return {{"mode", std::string(to_string(s.mode))},
          {"objective", std::string(to_string(s.objective))},
          {"constraint", std::string(to_string(s.constraint))},
          {"bound", detail::number_json(s.bound)},
          {"update_fraction", s.update_fraction},
          {"solver", std::string(to_string(s.solver))},
          {"compression",
           {{"enabled", s.compression.enabled},
            {"quantize_bits", s.compression.quantize_bits},
            {"default_ratio", s.compression.default_ratio},
            {"skip_kinds", skip}}}};
}

inline ScenarioSpec spec_from_json(const detail::Reader& r) {
  r.expect_object({"mode", "objective", "constraint", "bound", "update_fraction", "solver",
                   "compression"});
  ScenarioSpec s;
  s.mode = parse_mode(r.at("mode").string());
  s.objective = parse_metric(r.at("objective").string());
  s.constraint = parse_constraint_kind(r.at("constraint").string());
  s.bound = r.at("bound").number();
  s.update_fraction = r.at("update_fraction").number();
  s.solver = parse_solver_kind(r.at("solver").string());
  const auto c = r.at("compression");
  c.expect_object({"enabled", "quantize_bits", "default_ratio", "skip_kinds"});
  s.compression.enabled = c.at("enabled").boolean();
  s.compression.quantize_bits = static_cast<int>(c.at("quantize_bits").integer());
  s.compression.default_ratio = c.at("default_ratio").number();
  s.compression.skip_kinds.clear();
  const auto kinds = c.at("skip_kinds");
  for (std::size_t k = 0; k < kinds.size(); ++k) {
    auto kind = parse_layer_kind(kinds.index(k).string());
    if (!kind) kinds.index(k).fail("unknown layer kind");
    s.compression.skip_kinds.insert(*kind);
  }
  return s;
}

inline json table_to_json(const LookupTable& t) {
  json axes = json::object();
  if (!t.axes.links.empty()) axes["link"] = t.axes.links;
  if (!t.axes.uplink_mbps.empty()) axes["uplink_mbps"] = t.axes.uplink_mbps;
  if (!t.axes.downlink_mbps.empty()) axes["downlink_mbps"] = t.axes.downlink_mbps;
  if (!t.axes.batches.empty()) axes["batch"] = t.axes.batches;
  if (!t.axes.update_fractions.empty()) axes["update_fraction"] = t.axes.update_fractions;
  json cells = json::array();
  for (const auto& c : t.cells) {
    json point = json::object();
    if (c.point.link) point["link"] = *c.point.link;
    if (c.point.uplink_mbps) point["uplink_mbps"] = *c.point.uplink_mbps;
    if (c.point.downlink_mbps) point["downlink_mbps"] = *c.point.downlink_mbps;
    if (c.point.batch) point["batch"] = *c.point.batch;
    if (c.point.update_fraction) point["update_fraction"] = *c.point.update_fraction;
    json cell{{"point", point}, {"feasible", c.feasible}};
    if (c.feasible) {
      cell["segments"] = detail::segments_json(c.segments);
      cell["pattern"] = schedule_pattern(c.segments);
      cell["total_cost"] = c.total_cost;
      if (c.total_resource) cell["total_resource"] = *c.total_resource;
      cell["latency_ms"] = c.latency_ms;
      cell["energy_mJ"] = c.energy_mJ;
      cell["cloud_time_ms"] = c.cloud_time_ms;
    } else if (c.min_resource) {
      cell["min_resource"] = *c.min_resource;
    }
    cells.push_back(std::move(cell));
  }
  return {{"axes", axes},
          {"instance_hash", t.instance_hash},
          {"spec", spec_to_json(t.spec)},
          {"cells", cells}};
}

inline LookupTable table_from_json(const json& doc) {
  using detail::Reader;
  const Reader root(doc, "$");
  root.expect_object({"axes", "instance_hash", "spec", "cells"});
  LookupTable t;
  const Reader axes = root.at("axes");
  axes.expect_object({"link", "uplink_mbps", "downlink_mbps", "batch", "update_fraction"});
  auto numbers = [&](std::string_view key, std::vector<double>& out) {
    if (!axes.has(key)) return;
    const Reader a = axes.at(key);
    for (std::size_t k = 0; k < a.size(); ++k) out.push_back(a.index(k).number());
  };
  numbers("uplink_mbps", t.axes.uplink_mbps);
  numbers("downlink_mbps", t.axes.downlink_mbps);
  numbers("update_fraction", t.axes.update_fractions);
  if (axes.has("batch")) {
    const Reader a = axes.at("batch");
    for (std::size_t k = 0; k < a.size(); ++k)
      t.axes.batches.push_back(static_cast<int>(a.index(k).integer()));
  }
  if (axes.has("link")) {
    const Reader a = axes.at("link");
    for (std::size_t k = 0; k < a.size(); ++k) t.axes.links.push_back(a.index(k).string());
  }
  t.instance_hash = root.at("instance_hash").string();
  t.spec = spec_from_json(root.at("spec"));
  const Reader cells = root.at("cells");
  for (std::size_t k = 0; k < cells.size(); ++k) {
    const Reader c = cells.index(k);
    c.expect_object({"point", "feasible", "segments", "pattern", "total_cost", "total_resource",
                     "latency_ms", "energy_mJ", "cloud_time_ms", "min_resource"});
    LookupCell cell;
    const Reader p = c.at("point");
    p.expect_object({"link", "uplink_mbps", "downlink_mbps", "batch", "update_fraction"});
    if (p.has("link")) cell.point.link = p.at("link").string();
    if (p.has("uplink_mbps")) cell.point.uplink_mbps = p.at("uplink_mbps").number();
    if (p.has("downlink_mbps")) cell.point.downlink_mbps = p.at("downlink_mbps").number();
    if (p.has("batch")) cell.point.batch = static_cast<int>(p.at("batch").integer());
    if (p.has("update_fraction")) cell.point.update_fraction = p.at("update_fraction").number();
    cell.feasible = c.at("feasible").boolean();
    if (cell.feasible) {
      cell.segments = detail::segments_from_json(c.at("segments"));
      cell.total_cost = c.at("total_cost").number();
      if (c.has("total_resource")) cell.total_resource = c.at("total_resource").number();
      cell.latency_ms = c.at("latency_ms").number();
      cell.energy_mJ = c.at("energy_mJ").number();
      cell.cloud_time_ms = c.at("cloud_time_ms").number();
    } else if (c.has("min_resource")) {
      cell.min_resource = c.at("min_resource").number();
    }
    t.cells.push_back(std::move(cell));
  }
  if (t.cells.size() != t.axes.cell_count()) {
    throw ParseError("$.cells", "cell count does not match the axes");
  }
  return t;
}

/// Rejects a table built for a different instance.
inline void check_table_instance(const LookupTable& t, const ProblemInstance& inst) {
  const std::string h = instance_hash(inst);
  if (h != t.instance_hash) {
    throw ValidationError("lookup table was built for instance " + t.instance_hash +
                          ", not " + h);
  }
}

}  // namespace layersplit
