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

// Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "support.hpp"

namespace {

using namespace layersplit;
using layersplit::testing::random_instance;
using layersplit::testing::RandomOptions;

// Pinned tolerances.
constexpr double kOracleRel = 1e-9;
constexpr double kIlpRel = 1e-6;
constexpr double kPowerRel = 1e-6;
constexpr double kPerfBudgetSeconds = 1.0;

class Check {
 public:
  void expect(bool ok, const std::string& what) {
    ++count_;
    if (!ok && failures_.size() < 5) failures_.push_back(what);
    failed_ += ok ? 0 : 1;
  }
  bool ok() const { return failed_ == 0; }
  std::string summary() const {
    std::ostringstream os;
    os << count_ << " checks";
    if (failed_) {
      os << ", " << failed_ << " failed:";
      for (const auto& f : failures_) os << " [" << f << "]";
    }
    return os.str();
  }

 private:
  int count_ = 0;
  int failed_ = 0;
  std::vector<std::string> failures_;
};

bool rel_eq(double a, double b, double rel) {
  if (a == b) return true;
  return std::abs(a - b) <= rel * std::max({1.0, std::abs(a), std::abs(b)});
}

std::string describe(const std::string& tag, std::uint64_t seed, const Schedule& a,
                     const Schedule& b) {
  std::ostringstream os;
  os << tag << " seed " << seed << ": " << format_segments(a.segments) << "=" << a.total_cost
     << " vs " << format_segments(b.segments) << "=" << b.total_cost;
  return os.str();
}

RandomOptions unconstrained_options(std::uint64_t seed) {
  RandomOptions o;
  o.n = 2 + static_cast<int>(seed % 11);
  o.dyadic = seed % 2 == 0;
  return o;
}

// Criterion 2 cases, shared with criterion 6.
struct ConstrainedCase {
  std::uint64_t seed;
  ProblemInstance inst;
  ScenarioSpec spec;
  bool feasible;
  Schedule exact;
};

std::vector<ConstrainedCase>& constrained_cases() {
  static std::vector<ConstrainedCase> cases;
  return cases;
}

double min_resource_by_enumeration(const ProblemInstance& inst, Metric objective,
                                   Metric resource) {
  try {
    brute_force(inst, Mode::inference, objective, resource, -1.0);
  } catch (const InfeasibleError& e) {
    return e.min_resource().value();
  }
  throw ConsistencyError("negative bound accepted");
}

std::string criterion1(Check& c) {
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    const auto inst = random_instance(seed, unconstrained_options(seed));
    for (Metric m : {Metric::latency, Metric::energy}) {
      const Schedule g = shortest_schedule(build_graph(inst, Mode::inference, m));
      const Schedule b = brute_force(inst, Mode::inference, m);
      c.expect(rel_eq(g.total_cost, b.total_cost, kOracleRel) && g.segments == b.segments,
               describe(std::string(to_string(m)), seed, g, b));
    }
  }
  return "200 random instances, both objectives, graph vs enumeration";
}

std::string criterion2(Check& c) {
  auto& cases = constrained_cases();
  cases.clear();
  int infeasible = 0;
  for (std::uint64_t k = 0; k < 100; ++k) {
    const std::uint64_t seed = 1000 + k;
    RandomOptions o;
    o.n = 2 + static_cast<int>(k % 9);
    o.dyadic = k % 3 == 0;
    auto inst = random_instance(seed, o);
    testing::Random rng(seed * 7 + 1);

    ScenarioSpec spec;
    const bool make_infeasible = k % 5 == 0;
    // Cloud time has a zero floor (mobile-only), so infeasible cases avoid it.
    const int kind = make_infeasible ? static_cast<int>(k / 5 % 2) * 2 : static_cast<int>(k % 3);
    if (kind == 0) {
      spec.objective = Metric::latency;
      spec.constraint = ConstraintKind::battery;
    } else if (kind == 1) {
      spec.objective = Metric::latency;
      spec.constraint = ConstraintKind::cloud_time;
    } else {
      spec.objective = Metric::energy;
      spec.constraint = ConstraintKind::qos;
    }
    const Metric res = *spec.resource_metric();
    const Schedule free = brute_force(inst, Mode::inference, spec.objective, res);
    const double r_opt = *free.total_resource;
    const double r_min = min_resource_by_enumeration(inst, spec.objective, res);
    spec.bound = make_infeasible ? r_min * rng.uniform(0.5, 0.99)
                                 : r_min + (r_opt - r_min) * rng.uniform(0, 1);

    const ScheduleGraph g = build_graph(inst, Mode::inference, spec.objective, res);
    std::optional<Schedule> exact, oracle;
    std::optional<double> exact_min, oracle_min;
    try {
      exact = constrained_schedule(g, spec.bound);
    } catch (const InfeasibleError& e) {
      exact_min = e.min_resource();
    }
    try {
      oracle = brute_force(inst, Mode::inference, spec.objective, res, spec.bound);
    } catch (const InfeasibleError& e) {
      oracle_min = e.min_resource();
    }
    const std::string tag = spec.name() + " seed " + std::to_string(seed);
    if (exact && oracle) {
      c.expect(rel_eq(exact->total_cost, oracle->total_cost, kOracleRel) &&
                   exact->segments == oracle->segments,
               describe(spec.name(), seed, *exact, *oracle));
      c.expect(*exact->total_resource <= spec.bound * (1 + 1e-12), tag + " bound respected");
    } else {
      c.expect(!exact && !oracle, tag + " feasibility disagrees");
      c.expect(exact_min && oracle_min && rel_eq(*exact_min, *oracle_min, kOracleRel),
               tag + " minimum resource disagrees");
      infeasible += 1;
    }
    c.expect(make_infeasible == !oracle.has_value(), tag + " case design");
    cases.push_back({seed, inst, spec, exact.has_value(), exact.value_or(Schedule{})});
  }
  c.expect(infeasible == 20, "expected 20 infeasible cases, got " + std::to_string(infeasible));
  return "100 bounded instances (" + std::to_string(infeasible) + " infeasible)";
}

std::string criterion3(Check& c) {
  const auto inst = testing::toy3();
  auto solve = [&](Metric obj, ConstraintKind k, double bound) {
    ScenarioSpec s;
    s.objective = obj;
    s.constraint = k;
    s.bound = bound;
    return solve_scenario(inst, s);
  };
  const auto lat = solve(Metric::latency, ConstraintKind::none, 0);
  c.expect(lat.schedule.total_cost == 13.5, "latency optimum 13.5");
  c.expect(schedule_pattern(lat.schedule) == "C→M", "latency pattern C→M");
  c.expect(solve(Metric::energy, ConstraintKind::none, 0).schedule.total_cost == 23,
           "energy optimum 23");
  const auto& r = lat.report;
  c.expect(r.cloud_only.total(Metric::latency) == 15 && r.cloud_only.total(Metric::energy) == 24,
           "cloud-only 15/24");
  c.expect(r.mobile_only.total(Metric::latency) == 16 && r.mobile_only.total(Metric::energy) == 32,
           "mobile-only 16/32");
  c.expect(solve(Metric::latency, ConstraintKind::battery, 24).schedule.total_cost == 13.5,
           "battery(24) 13.5");
  c.expect(solve(Metric::energy, ConstraintKind::qos, 14).schedule.total_cost == 23, "QoS(14) 23");
  bool infeasible = false;
  try {
    solve(Metric::energy, ConstraintKind::qos, 10);
  } catch (const InfeasibleError& e) {
    infeasible = e.min_resource() && *e.min_resource() == 13.5;
  }
  c.expect(infeasible, "QoS(10) infeasible with minimum 13.5");
  c.expect(rel_eq(r.latency_improvement_pct, 10.0, 1e-12), "latency improvement 10%");
  c.expect(rel_eq(r.cloud_workload_reduction_pct, 100.0 / 3.0, 1e-12),
           "cloud workload reduction 33.3%");
  return "fixture optima, baselines, bounded scenarios and report";
}

std::string criterion4(Check& c) {
  for (std::uint64_t k = 0; k < 50; ++k) {
    const std::uint64_t seed = 5000 + k;
    RandomOptions o;
    o.n = 3 + static_cast<int>(k % 8);
    o.dyadic = k % 2 == 1;
    o.residual = true;
    const auto inst = random_instance(seed, o);
    c.expect(inst.residual_blocks.size() == 1, "one block");
    const Metric m = k % 2 ? Metric::energy : Metric::latency;
    const Schedule g = shortest_schedule(build_graph(inst, Mode::inference, m));
    const Schedule b = brute_force(inst, Mode::inference, m);
    c.expect(rel_eq(g.total_cost, b.total_cost, kOracleRel) && g.segments == b.segments,
             describe("residual", seed, g, b));
  }
  return "50 single-block residual instances vs enumeration with skip charging";
}

// Inference instance whose chain is the unrolled training chain of `inst`.
ProblemInstance unrolled_training(const ProblemInstance& inst) {
  const ProblemCosts costs(inst, Mode::training, 0.0);
  const int n2 = costs.size();
  ProblemInstance out;
  out.name = inst.name + "-unrolled";
  out.link = inst.link;
  out.mobile_idle_power_mW = inst.mobile_idle_power_mW;
  for (int k = 1; k <= n2; ++k) {
    LayerSpec l;
    l.index = k;
    l.name = "p" + std::to_string(k);
    l.input_bytes = 4;
    l.output_bytes = 4;
    out.layers.push_back(l);
  }
  for (int i = 1; i <= n2; ++i) {
    for (int j = i; j <= n2; ++j) {
      out.mobile_profile.entries[{i, j}] = {costs.exec(i, j, Platform::mobile, Metric::latency),
                                            costs.exec(i, j, Platform::mobile, Metric::energy)};
      out.cloud_profile.entries[{i, j}] = {costs.exec(i, j, Platform::cloud, Metric::latency),
                                           0.0};
    }
  }
  ExplicitTransfers x;
  const double batch = inst.batch();
  auto entry = [&](const Charge& ch) {
    return TransferEntry{ch.value(Metric::latency) / batch, ch.value(Metric::energy) / batch};
  };
  x.upload_input = entry(costs.upload_input());
  for (int j = 1; j < n2; ++j) {
    x.upload[j] = entry(costs.upload_after(j));
    x.download[j] = entry(costs.download_after(j));
  }
  x.download[n2] = {0, 0};
  out.explicit_transfers = x;
  out.finalize();
  return out;
}

std::string criterion5(Check& c) {
  const auto inst = testing::toy3();
  const int n = inst.layer_count();
  const auto unrolled = unrolled_training(inst);
  for (Metric m : {Metric::latency, Metric::energy}) {
    const Schedule t = shortest_schedule(build_graph(inst, Mode::training, m, std::nullopt, 0.0));
    const Schedule u = shortest_schedule(build_graph(unrolled, Mode::inference, m));
    c.expect(rel_eq(t.total_cost, u.total_cost, kOracleRel) && t.segments == u.segments,
             describe("rho=0 " + std::string(to_string(m)), 0, t, u));
  }
  const std::vector<double> rhos{0, 0.25, 0.5, 0.75, 1.0};
  std::vector<Schedule> best;
  for (double rho : rhos) {
    best.push_back(shortest_schedule(build_graph(inst, Mode::training, Metric::latency,
                                                 std::nullopt, rho)));
    const Schedule b = brute_force(inst, Mode::training, Metric::latency, std::nullopt,
                                   std::nullopt, rho);
    c.expect(rel_eq(best.back().total_cost, b.total_cost, kOracleRel),
             "training oracle at rho " + std::to_string(rho));
  }
  auto backward_on_mobile = [&](const Schedule& s) {
    for (int b = n + 1; b <= 2 * n; ++b)
      if (platform_of(s.segments, b) != Platform::mobile) return false;
    return true;
  };
  std::optional<std::size_t> plateau;
  for (std::size_t k = 0; k < rhos.size(); ++k) {
    if (k > 0) {
      c.expect(best[k].total_cost >= best[k - 1].total_cost - 1e-12,
               "cost non-decreasing at rho " + std::to_string(rhos[k]));
    }
    if (!plateau && backward_on_mobile(best[k])) plateau = k;
  }
  c.expect(plateau.has_value() && *plateau > 0 && *plateau < rhos.size() - 1,
           "plateau reached inside the sweep");
  if (plateau) {
    for (std::size_t k = *plateau; k < rhos.size(); ++k) {
      c.expect(best[k].total_cost == best[*plateau].total_cost && backward_on_mobile(best[k]),
               "constant after plateau at rho " + std::to_string(rhos[k]));
    }
  }
  std::ostringstream os;
  os << "rho sweep";
  for (std::size_t k = 0; k < rhos.size(); ++k) os << " " << rhos[k] << ":" << best[k].total_cost;
  if (plateau) os << ", constant from rho " << rhos[*plateau];
  return os.str();
}

std::string criterion6(Check& c) {
  int feasible = 0;
  for (const auto& cc : constrained_cases()) {
    if (!cc.feasible) continue;
    ++feasible;
    const Metric res = *cc.spec.resource_metric();
    const ScheduleGraph g = build_graph(cc.inst, Mode::inference, cc.spec.objective, res);
    const std::string tag = cc.spec.name() + " seed " + std::to_string(cc.seed);
    try {
      const LaracResult l = larac_schedule(g, cc.spec.bound);
      const double exact = cc.exact.total_cost;
      c.expect(l.lower_bound <= exact * (1 + kOracleRel) + kOracleRel, tag + " lower bound");
      c.expect(exact <= l.schedule.total_cost * (1 + kOracleRel) + kOracleRel, tag + " upper");
      c.expect(*l.schedule.total_resource <= cc.spec.bound * (1 + 1e-12), tag + " feasible");
    } catch (const InfeasibleError&) {
      c.expect(false, tag + " LARAC reported infeasible");
    }
  }
  return std::to_string(feasible) + " feasible bounded instances";
}

std::string criterion7(Check& c) {
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    const auto inst = random_instance(seed, unconstrained_options(seed));
    for (Metric m : {Metric::latency, Metric::energy}) {
      ScenarioSpec spec;
      spec.objective = m;
      const Schedule s = shortest_schedule(build_graph(inst, Mode::inference, m));
      const LinearProgram lp = build_ilp(inst, spec);
      const auto check = check_assignment(
          lp, schedule_assignment(s.segments, inst.layer_count(), inst.residual_blocks));
      c.expect(check.violated.empty() && check.unknown.empty(),
               "ilp rows seed " + std::to_string(seed));
      c.expect(rel_eq(check.objective, s.total_cost, kIlpRel),
               "ilp objective seed " + std::to_string(seed));
      if (seed % 20 == 0) {
        const LinearProgram back = parse_lp(write_lp(lp));
        c.expect(back.rows.size() == lp.rows.size() && back.binaries == lp.binaries,
                 "lp text round trip seed " + std::to_string(seed));
      }
    }
  }
  const auto big = synth_benchmark(SynthShape::discriminative, 21, 7);
  const LinearProgram lp = build_ilp(big, ScenarioSpec{});
  c.expect(lp.binaries.size() == 924, "N=21 declares " + std::to_string(lp.binaries.size()));
  return "optimal binaries satisfy all rows; N=21 declares " + std::to_string(lp.binaries.size()) +
         " binaries";
}

ProblemInstance scaled_costs(const ProblemInstance& inst, double lambda) {
  ProblemInstance out = inst;
  for (auto* prof : {&out.mobile_profile, &out.cloud_profile}) {
    for (auto& [_, e] : prof->entries) {
      e.latency_ms *= lambda;
      e.energy_mJ *= lambda;
    }
  }
  auto& x = *out.explicit_transfers;
  auto scale = [&](TransferEntry& e) {
    e.latency_ms *= lambda;
    e.energy_mJ *= lambda;
  };
  scale(x.upload_input);
  for (auto& [_, e] : x.upload) scale(e);
  for (auto& [_, e] : x.download) scale(e);
  out.finalize();
  return out;
}

std::string criterion8(Check& c) {
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    const auto inst = random_instance(seed, unconstrained_options(seed));
    const ProblemCosts costs(inst, Mode::inference);
    const int n = inst.layer_count();
    const auto mobile = schedule_costs(costs, {{1, n, Platform::mobile}});
    const auto cloud = schedule_costs(costs, {{1, n, Platform::cloud}});
    for (Metric m : {Metric::latency, Metric::energy}) {
      const Schedule s = shortest_schedule(build_graph(inst, Mode::inference, m));
      c.expect(s.total_cost <= std::min(mobile.total(m), cloud.total(m)) * (1 + 1e-12),
               "dominates baselines seed " + std::to_string(seed));
      // Powers of two keep dyadic instances exact; others use continuous costs.
      const double lambda = seed % 2 == 0 ? 4.0 : 3.7;
      const Schedule t =
          shortest_schedule(build_graph(scaled_costs(inst, lambda), Mode::inference, m));
      c.expect(rel_eq(t.total_cost, lambda * s.total_cost, kOracleRel) && t.segments == s.segments,
               "cost scaling seed " + std::to_string(seed));
    }
  }
  for (std::uint64_t seed = 300; seed < 350; ++seed) {
    RandomOptions o;
    o.n = 2 + static_cast<int>(seed % 11);
    o.link_model = true;
    const auto inst = random_instance(seed, o);
    double prev = std::numeric_limits<double>::infinity();
    for (double f : {1.0, 1.25, 2.0, 4.0, 16.0}) {
      LinkProfile l = inst.link;
      l.uplink_mbps *= f;
      l.downlink_mbps *= f;
      const double v =
          shortest_schedule(build_graph(with_link(inst, l), Mode::inference, Metric::latency))
              .total_cost;
      c.expect(v <= prev * (1 + 1e-12), "rate scaling seed " + std::to_string(seed));
      prev = v;
    }
  }
  for (const auto& link : {LinkProfile::cellular_3g(), LinkProfile::cellular_4g(),
                           LinkProfile::wifi()}) {
    for (Direction d : {Direction::up, Direction::down}) {
      const std::uint64_t a = 123456, b = 7890124;
      const auto ta = transfer_cost(link, a, d), tb = transfer_cost(link, b, d);
      const auto tab = transfer_cost(link, a + b, d), t3 = transfer_cost(link, 3 * a, d);
      c.expect(rel_eq(tab.latency_ms, ta.latency_ms + tb.latency_ms, 1e-12) &&
                   rel_eq(tab.energy_mJ, ta.energy_mJ + tb.energy_mJ, 1e-12),
               "transfer additivity " + link.name);
      c.expect(rel_eq(t3.latency_ms, 3 * ta.latency_ms, 1e-12) &&
                   rel_eq(t3.energy_mJ, 3 * ta.energy_mJ, 1e-12),
               "transfer homogeneity " + link.name);
      c.expect(transfer_cost(link, 0, d).latency_ms == 0, "empty transfer " + link.name);
    }
  }
  return "baseline dominance, cost scaling, link-rate monotonicity, transfer linearity";
}

std::string criterion9(Check& c) {
  const double up3 = link_power(LinkProfile::cellular_3g(), Direction::up);
  const double down4 = link_power(LinkProfile::cellular_4g(), Direction::down);
  c.expect(rel_eq(up3, 1773.758, kPowerRel), "3G uplink power");
  c.expect(rel_eq(down4, 2003.1472, kPowerRel), "4G downlink power");
  char buf[96];
  std::snprintf(buf, sizeof buf, "3G up %.4f mW, 4G down %.4f mW", up3, down4);
  return buf;
}

std::string criterion10(Check& c) {
  struct Expect {
    SynthShape shape;
    int n;
    std::vector<std::string> patterns;
  };
  const std::vector<Expect> expects{{SynthShape::discriminative, 21, {"M→C", "C"}},
                                    {SynthShape::generative, 10, {"C→M"}},
                                    {SynthShape::autoencoder, 32, {"M→C→M"}}};
  std::ostringstream os;
  for (const auto& e : expects) {
    const auto inst = synth_benchmark(e.shape, e.n, 7);
    const auto p = schedule_pattern(
        shortest_schedule(build_graph(inst, Mode::inference, Metric::latency)));
    c.expect(std::find(e.patterns.begin(), e.patterns.end(), p) != e.patterns.end(),
             std::string(to_string(e.shape)) + " gave " + p);
    os << to_string(e.shape) << " " << p << "; ";
    // Smaller variants cross-checked by enumeration.
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const auto small = synth_benchmark(e.shape, 12, seed);
      const Schedule g = shortest_schedule(build_graph(small, Mode::inference, Metric::latency));
      const Schedule b = brute_force(small, Mode::inference, Metric::latency);
      c.expect(rel_eq(g.total_cost, b.total_cost, kOracleRel) && g.segments == b.segments,
               describe(std::string(to_string(e.shape)) + " N=12", seed, g, b));
      c.expect(std::find(e.patterns.begin(), e.patterns.end(), schedule_pattern(g)) !=
                   e.patterns.end(),
               std::string(to_string(e.shape)) + " N=12 seed " + std::to_string(seed) +
                   " gave " + schedule_pattern(g));
    }
  }
  std::string s = os.str();
  return s.substr(0, s.size() - 2);
}

std::string criterion11(Check& c) {
  const auto inst = synth_benchmark(SynthShape::discriminative, 70, 1);
  const auto t0 = std::chrono::steady_clock::now();
  const ScheduleGraph g = build_graph(inst, Mode::inference, Metric::latency);
  const Schedule s = shortest_schedule(g);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  c.expect(secs < kPerfBudgetSeconds, "took " + std::to_string(secs) + " s");
  c.expect(!s.segments.empty(), "schedule found");
  char buf[128];
  std::snprintf(buf, sizeof buf, "N=70: %zu edges, build+solve %.4f s", g.edges().size(), secs);
  return buf;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<std::string(Check&)>>> criteria{
      {"oracle equivalence, unconstrained", criterion1},
      {"oracle equivalence, constrained", criterion2},
      {"TOY3 fixture exactness", criterion3},
      {"residual transform equivalence", criterion4},
      {"training graph and update-fraction plateau", criterion5},
      {"LARAC sandwich", criterion6},
      {"ILP export consistency", criterion7},
      {"property suite", criterion8},
      {"power-model values", criterion9},
      {"qualitative patterns", criterion10},
      {"performance", criterion11},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Check c;
    std::string detail;
    try {
      detail = criteria[k].second(c);
    } catch (const std::exception& e) {
      c.expect(false, std::string("exception: ") + e.what());
    }
    const bool ok = c.ok();
    failed += ok ? 0 : 1;
    std::printf("[%s] %2zu %s: %s (%s)\n", ok ? "PASS" : "FAIL", k + 1, criteria[k].first,
                detail.c_str(), c.summary().c_str());
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
