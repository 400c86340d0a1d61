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
#include <cstdint>
#include <optional>
#include <vector>

#include "layersplit/schedule.hpp"

// Exhaustive reference solver. It never looks at the graph: every platform
// assignment is scored through `schedule_costs`.
namespace layersplit {

inline constexpr int kBruteForceMaxInference = 16;
inline constexpr int kBruteForceMaxTraining = 8;

/// Collapses a per-position platform mask (bit p-1 set = cloud) into runs.
inline std::vector<Segment> runs_from_mask(std::uint32_t mask, int n) {
  std::vector<Segment> segs;
  for (int p = 1; p <= n; ++p) {
    const Platform pl = (mask >> (p - 1)) & 1u ? Platform::cloud : Platform::mobile;
    if (!segs.empty() && segs.back().platform == pl) {
      segs.back().last = p;
    } else {
      segs.push_back({p, p, pl});
    }
  }
  return segs;
}

/// Enumerates all 2^n assignments and returns the cheapest one whose resource
/// stays within `bound`, under the same tie-breaking as the graph solvers.
inline Schedule brute_force(const ProblemInstance& inst, Mode mode, Metric objective,
                            std::optional<Metric> resource = std::nullopt,
                            std::optional<double> bound = std::nullopt,
                            double update_fraction = 0.0) {
  if (objective == Metric::cloud_time) throw ArgumentError("objective must be latency or energy");
  if (bound && !resource) throw ArgumentError("a bound needs a resource metric");
  const int limit = mode == Mode::inference ? kBruteForceMaxInference : kBruteForceMaxTraining;
  if (inst.layer_count() > limit) {
    throw ArgumentError("brute force is limited to " + std::to_string(limit) + " layers in " +
                        std::string(to_string(mode)) + " mode");
  }
  const ProblemCosts costs(inst, mode, update_fraction);
  const int n = costs.size();

  std::optional<Schedule> best;
  std::optional<TieKey> best_tie;
  double min_res = kUnreachable;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    auto segs = runs_from_mask(mask, n);
    const ScheduleCosts sc = schedule_costs(costs, segs);
    const double cost = sc.total(objective);
    const double res = resource ? sc.total(*resource) : 0.0;
    if (!std::isfinite(cost) || !std::isfinite(res)) continue;
    min_res = std::min(min_res, res);
    if (bound && !within_bound(res, *bound)) continue;
    const TieKey tie = tie_key(segs);
    bool better = !best;
    if (!better) {
      if (cost != best->total_cost) {
        better = cost < best->total_cost;
      } else if (const int c = tie.compare(*best_tie); c != 0) {
        better = c < 0;
      } else {
        better = segs < best->segments;
      }
    }
    if (!better) continue;
    Schedule s;
    s.segments = std::move(segs);
    s.total_cost = cost;
    if (resource) s.total_resource = res;
    s.breakdown = sc.breakdown(objective);
    s.mode = mode;
    s.objective = objective;
    s.resource_metric = resource;
    best = std::move(s);
    best_tie = tie;
  }
  if (!best) {
    if (bound) {
      throw InfeasibleError("no schedule satisfies the resource bound",
                            std::isfinite(min_res) ? std::optional<double>(min_res) : std::nullopt);
    }
    throw InfeasibleError("no schedule with finite cost exists", std::nullopt);
  }
  return *best;
}

}  // namespace layersplit
