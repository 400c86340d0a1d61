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

#include <cmath>
#include <optional>

#include "layersplit/ilp.hpp"

namespace layersplit {

struct Evaluation {
  ScheduleCosts costs;
  double objective = 0;
  std::optional<double> resource;
  /// Scenario bound (and unreachable transfers) respected.
  bool feasible = true;
  double ilp_objective = 0;

  const CostBreakdown& breakdown(Metric m) const { return costs.breakdown(m); }
};

inline constexpr double kIlpTolerance = 1e-6;

/// Recomputes a schedule's costs without the graph, then sets the exported
/// program's binaries and checks every row and the objective against it.
/// Structural rows that fail, or an objective mismatch beyond 1e-6 relative,
/// raise ConsistencyError; a violated scenario bound only clears `feasible`.
inline Evaluation evaluate_schedule(const ProblemInstance& instance,
                                    const std::vector<Segment>& segments,
                                    const ScenarioSpec& spec) {
  spec.validate();
  const ProblemInstance inst = prepare_instance(instance, spec);
  const ProblemCosts costs(inst, spec.mode, spec.update_fraction);
  validate_tiling(segments, costs.size());

  Evaluation ev;
  ev.costs = schedule_costs(costs, segments);
  ev.objective = ev.costs.total(spec.objective);
  if (auto r = spec.resource_metric()) {
    ev.resource = ev.costs.total(*r);
    ev.feasible = within_bound(*ev.resource, spec.bound);
  }
  if (!std::isfinite(ev.objective)) ev.feasible = false;

  const LinearProgram lp = build_ilp(instance, spec);
  const Assignment a = schedule_assignment(segments, costs.size(), costs.blocks());
  const AssignmentCheck chk = check_assignment(lp, a, kIlpTolerance);
  ev.ilp_objective = chk.objective;
  if (!chk.unknown.empty()) {
    throw ConsistencyError("schedule sets undeclared binary " + chk.unknown.front());
  }
  const std::string scenario_row(to_string(spec.constraint));
  for (const auto& name : chk.violated) {
    if (name == scenario_row || name.rfind("fix_", 0) == 0 || name.rfind("bnd_", 0) == 0) {
      ev.feasible = false;
      continue;
    }
    throw ConsistencyError("schedule " + format_segments(segments) + " violates program row " +
                           name);
  }
  if (std::isfinite(ev.objective) && !nearly_equal(ev.objective, chk.objective, kIlpTolerance)) {
    std::ostringstream os;
    os.precision(17);
    os << "objective " << ev.objective << " disagrees with the program's " << chk.objective;
    throw ConsistencyError(os.str());
  }
  return ev;
}

inline Evaluation evaluate_schedule(const ProblemInstance& instance, const Schedule& schedule,
                                    const ScenarioSpec& spec) {
  return evaluate_schedule(instance, schedule.segments, spec);
}

}  // namespace layersplit
