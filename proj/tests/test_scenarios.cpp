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

#include <gtest/gtest.h>

#include "support.hpp"

namespace layersplit {
namespace {

TEST(Spec, Validation) {
  ScenarioSpec s;
  EXPECT_NO_THROW(s.validate());
  EXPECT_EQ(s.name(), "inference-latency-none");
  s.constraint = ConstraintKind::qos;
  EXPECT_THROW(s.validate(), ValidationError);
  s.objective = Metric::energy;
  s.bound = 5;
  EXPECT_NO_THROW(s.validate());
  s.constraint = ConstraintKind::battery;
  EXPECT_THROW(s.validate(), ValidationError);
  ScenarioSpec t;
  t.update_fraction = 0.5;
  EXPECT_THROW(t.validate(), ValidationError);
  t.mode = Mode::training;
  EXPECT_NO_THROW(t.validate());
  t.update_fraction = 1.5;
  EXPECT_THROW(t.validate(), ValidationError);
}

TEST(Report, Toy3Numbers) {
  const auto r = solve_scenario(testing::toy3(), ScenarioSpec{});
  EXPECT_EQ(r.report.joint.total(Metric::latency), 13.5);
  EXPECT_DOUBLE_EQ(r.report.latency_improvement_pct, 10.0);
  EXPECT_DOUBLE_EQ(r.report.energy_improvement_pct, 100.0 / 24.0);
  EXPECT_DOUBLE_EQ(r.report.cloud_workload_reduction_pct, 100.0 / 3.0);
  EXPECT_FALSE(r.lower_bound);
}

TEST(Report, ImprovementsNonNegative) {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    const auto inst = testing::random_instance(seed, {.n = 2 + static_cast<int>(seed % 8)});
    for (Metric m : {Metric::latency, Metric::energy}) {
      ScenarioSpec s;
      s.objective = m;
      const auto r = solve_scenario(inst, s);
      const double pct = m == Metric::latency ? r.report.latency_improvement_pct
                                              : r.report.energy_improvement_pct;
      EXPECT_GE(pct, -1e-9) << seed;
    }
  }
}

TEST(Scenario, SolverKindsAgree) {
  const auto inst = testing::random_instance(77, {.n = 8});
  ScenarioSpec s;
  s.objective = Metric::energy;
  s.constraint = ConstraintKind::qos;
  const ScheduleGraph g = build_graph(inst, Mode::inference, Metric::latency);
  s.bound = shortest_schedule(g).total_cost * 1.3;
  const auto exact = solve_scenario(inst, s);
  s.solver = SolverKind::oracle;
  const auto oracle = solve_scenario(inst, s);
  EXPECT_EQ(exact.schedule.segments, oracle.schedule.segments);
  s.solver = SolverKind::larac;
  const auto larac = solve_scenario(inst, s);
  ASSERT_TRUE(larac.lower_bound);
  EXPECT_LE(*larac.lower_bound, exact.schedule.total_cost + 1e-9);
  EXPECT_GE(larac.schedule.total_cost, exact.schedule.total_cost - 1e-9);
}

TEST(Scenario, CompressionIsApplied) {
  auto inst = synth_benchmark(SynthShape::discriminative, 10, 4, LinkProfile::cellular_3g());
  ScenarioSpec s;
  const auto raw = solve_scenario(inst, s);
  s.compression.enabled = true;
  const auto packed = solve_scenario(inst, s);
  EXPECT_LE(packed.schedule.total_cost, raw.schedule.total_cost);
  EXPECT_EQ(evaluate_schedule(inst, packed.schedule.segments, s).objective,
            packed.schedule.total_cost);
}

SweepAxes small_axes() {
  SweepAxes ax;
  ax.links = {"3G", "4G", "WiFi"};
  ax.uplink_mbps = {1, 5, 20};
  return ax;
}

TEST(Sweep, CellsAndOrder) {
  const auto inst = synth_benchmark(SynthShape::generative, 8, 3);
  const auto t = sweep_lookup(inst, small_axes(), ScenarioSpec{}, 100, 1);
  ASSERT_EQ(t.cells.size(), 9u);
  EXPECT_EQ(*t.cells[0].point.link, "3G");
  EXPECT_EQ(*t.cells[1].point.uplink_mbps, 5);
  EXPECT_EQ(*t.cells[3].point.link, "4G");
  const auto par = sweep_lookup(inst, small_axes(), ScenarioSpec{}, 100, 4);
  EXPECT_EQ(table_to_json(t).dump(), table_to_json(par).dump());
  for (const auto& c : t.cells) {
    const auto direct = solve_scenario(instance_at(inst, c.point), ScenarioSpec{});
    EXPECT_EQ(c.segments, direct.schedule.segments);
    EXPECT_EQ(c.total_cost, direct.schedule.total_cost);
  }
}

TEST(Sweep, CapAndAxisErrors) {
  const auto inst = synth_benchmark(SynthShape::generative, 6, 3);
  EXPECT_THROW(sweep_lookup(inst, small_axes(), ScenarioSpec{}, 8), ArgumentError);
  SweepAxes rho;
  rho.update_fractions = {0, 1};
  EXPECT_THROW(sweep_lookup(inst, rho, ScenarioSpec{}), ArgumentError);
  SweepAxes bad;
  bad.links = {"5G"};
  EXPECT_THROW(sweep_lookup(inst, bad, ScenarioSpec{}), ArgumentError);
}

TEST(Sweep, InfeasibleCellsAreRecorded) {
  const auto inst = testing::toy3();
  ScenarioSpec s;
  s.objective = Metric::energy;
  s.constraint = ConstraintKind::qos;
  s.bound = 14;
  SweepAxes ax;
  ax.uplink_mbps = {0.5, 5.85};
  const auto t = sweep_lookup(inst, ax, s);
  ASSERT_EQ(t.cells.size(), 2u);
  EXPECT_FALSE(t.cells[0].feasible);
  EXPECT_TRUE(t.cells[0].min_resource);
  EXPECT_TRUE(t.cells[1].feasible);
  EXPECT_EQ(t.cells[1].total_cost, 23);
}

TEST(Sweep, TrainingRhoAxis) {
  ScenarioSpec s;
  s.mode = Mode::training;
  SweepAxes ax;
  ax.update_fractions = {0, 0.25, 0.5, 0.75, 1};
  const auto t = sweep_lookup(testing::toy3(), ax, s);
  for (std::size_t k = 1; k < t.cells.size(); ++k)
    EXPECT_GE(t.cells[k].total_cost, t.cells[k - 1].total_cost);
  EXPECT_EQ(t.cells[2].total_cost, t.cells[4].total_cost);
}

TEST(Query, NearestCellAndErrors) {
  const auto inst = synth_benchmark(SynthShape::generative, 8, 3);
  const auto t = sweep_lookup(inst, small_axes(), ScenarioSpec{});
  const auto& c = query_lookup(t, {{"link", std::string("4G")}, {"uplink_mbps", 6.0}});
  EXPECT_EQ(*c.point.link, "4G");
  EXPECT_EQ(*c.point.uplink_mbps, 5);
  // Equidistant between 1 and 5: the lower value wins.
  EXPECT_EQ(*query_lookup(t, {{"link", std::string("3G")}, {"uplink_mbps", 3.0}}).point.uplink_mbps, 1);
  EXPECT_THROW(query_lookup(t, {{"link", std::string("4G")}, {"uplink_mbps", 25.0}}), RangeError);
  EXPECT_THROW(query_lookup(t, {{"uplink_mbps", 5.0}}), RangeError);
  EXPECT_THROW(query_lookup(t, {{"link", std::string("5G")}, {"uplink_mbps", 5.0}}), RangeError);
  EXPECT_THROW(query_lookup(t, {{"link", std::string("4G")}, {"uplink_mbps", 5.0}, {"batch", 2.0}}),
               RangeError);
  EXPECT_THROW(query_lookup(t, {{"colour", 1.0}}), RangeError);
}

TEST(Table, PersistenceAndHash) {
  const auto inst = synth_benchmark(SynthShape::autoencoder, 8, 3);
  ScenarioSpec s;
  s.objective = Metric::latency;
  s.constraint = ConstraintKind::battery;
  s.bound = 2000;
  const auto t = sweep_lookup(inst, small_axes(), s);
  const auto text = table_to_json(t).dump();
  const auto back = table_from_json(json::parse(text));
  EXPECT_EQ(table_to_json(back).dump(), text);
  EXPECT_EQ(back.spec.name(), s.name());
  EXPECT_NO_THROW(check_table_instance(back, inst));
  EXPECT_THROW(check_table_instance(back, synth_benchmark(SynthShape::autoencoder, 8, 4)),
               ValidationError);
  auto broken = json::parse(text);
  broken.erase("cells");
  EXPECT_THROW(table_from_json(broken), ParseError);
}

}  // namespace
}  // namespace layersplit
