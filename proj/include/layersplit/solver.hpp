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
#include <cmath>
#include <vector>

#include "layersplit/graph.hpp"

// Solvers over the scheduling DAG: exact unconstrained shortest path, exact
// resource-constrained shortest path (label setting), and LARAC.
namespace layersplit {

namespace detail {

inline std::vector<int> walk_back(const std::vector<int>& pred, int node) {
  std::vector<int> path;
  for (int v = node; v >= 0; v = pred[v]) path.push_back(v);
  std::reverse(path.begin(), path.end());
  return path;
}

inline TieKey extend(TieKey k, const GraphNode& to) {
  if (to.role == NodeRole::group) {
    ++k.segments;
    if (to.platform == Platform::mobile) k.mobile_layers += to.last - to.first + 1;
  }
  return k;
}

inline Schedule schedule_from_path(const ScheduleGraph& g, const std::vector<int>& path) {
  Schedule s;
  s.segments = g.decode(path);
  s.mode = g.mode();
  s.objective = g.objective();
  s.resource_metric = g.resource_metric();
  double resource = 0;
  for (std::size_t k = 0; k + 1 < path.size(); ++k) {
    for (const auto& e : g.out_edges(path[k])) {
      if (e.to != path[k + 1]) continue;
      s.total_cost += e.cost;
      resource += e.resource;
      s.breakdown.computation += e.parts.computation;
      s.breakdown.upload += e.parts.upload;
      s.breakdown.download += e.parts.download;
      s.breakdown.weight_download += e.parts.weight_download;
      s.breakdown.compression_overhead += e.parts.compression_overhead;
      break;
    }
  }
  if (g.resource_metric()) s.total_resource = resource;
  return s;
}

/// Single-pass DAG relaxation on a lexicographic key
/// (primary, secondary, tie key, segment list). Edges whose primary or
/// secondary weight is unreachable are skipped. Returns the node path or an
/// empty vector when F cannot be reached.
template <typename Primary, typename Secondary>
std::vector<int> lexicographic_shortest(const ScheduleGraph& g, Primary&& primary,
                                        Secondary&& secondary) {
  const std::size_t n = g.nodes().size();
  std::vector<double> p(n, kUnreachable), q(n, kUnreachable);
  std::vector<TieKey> tie(n);
  std::vector<int> pred(n, -1);
  std::vector<char> reached(n, 0);
  reached[g.source()] = 1;
  p[g.source()] = 0;
  q[g.source()] = 0;

  auto prefix = [&](int via, int node) {
    std::vector<int> path = walk_back(pred, via);
    path.push_back(node);
    return g.decode(path);
  };

  for (int u : g.topo_order()) {
    if (!reached[u]) continue;
    for (const GraphEdge& e : g.out_edges(u)) {
      const double wp = primary(e);
      const double wq = secondary(e);
      if (!std::isfinite(wp) || !std::isfinite(wq)) continue;
      const double np = p[u] + wp;
      const double nq = q[u] + wq;
      const TieKey nt = extend(tie[u], g.nodes()[e.to]);
      const int v = e.to;
      bool better = false;
      if (!reached[v] || np < p[v]) {
        better = true;
      } else if (np == p[v]) {
        if (nq < q[v]) {
          better = true;
        } else if (nq == q[v]) {
          const int c = nt.compare(tie[v]);
          if (c < 0) {
            better = true;
          } else if (c == 0) {
            better = prefix(u, v) < prefix(pred[v], v);
          }
        }
      }
      if (better) {
        reached[v] = 1;
        p[v] = np;
        q[v] = nq;
        tie[v] = nt;
        pred[v] = u;
      }
    }
  }
  if (!reached[g.sink()]) return {};
  return walk_back(pred, g.sink());
}

inline double min_resource(const ScheduleGraph& g) {
  auto path = lexicographic_shortest(
      g, [](const GraphEdge& e) { return e.resource; },
      [](const GraphEdge& e) { return e.cost; });
  if (path.empty()) return kUnreachable;
  return schedule_from_path(g, path).total_resource.value_or(0.0);
}

}  // namespace detail

/// Minimum-cost schedule. Ties go to fewer segments, then more mobile layers,
/// then the lexicographically smallest segment list.
inline Schedule shortest_schedule(const ScheduleGraph& g) {
  auto path = detail::lexicographic_shortest(
      g, [](const GraphEdge& e) { return e.cost; }, [](const GraphEdge&) { return 0.0; });
  if (path.empty()) throw InfeasibleError("no schedule with finite cost exists", std::nullopt);
  return detail::schedule_from_path(g, path);
}

/// Exact minimum-cost schedule with total resource <= bound.
///
/// Labels are propagated in topological order. A label is discarded when
/// another label at the same node is no worse in cost, resource, segment count
/// and mobile layer count (ties on all four fall to the segment list), or when
/// its resource already exceeds the bound (see `within_bound`). Dominance
/// compares resource values exactly.
inline Schedule constrained_schedule(const ScheduleGraph& g, double bound) {
  if (!g.resource_metric()) throw ArgumentError("graph carries no resource weights");
  if (!(bound >= 0)) throw ArgumentError("bound must be >= 0");

  struct Label {
    int node;
    double cost;
    double resource;
    TieKey tie;
    int pred;  // index into the arena
    bool alive;
  };
  std::vector<Label> arena;
  std::vector<std::vector<int>> at(g.nodes().size());
  arena.push_back({g.source(), 0.0, 0.0, {}, -1, true});
  at[g.source()].push_back(0);

  auto segments_of = [&](int label) {
    std::vector<int> path;
    for (int l = label; l >= 0; l = arena[l].pred) path.push_back(arena[l].node);
    std::reverse(path.begin(), path.end());
    return g.decode(path);
  };
  // <0 if a is at least as good as b in every respect (a dominates b).
  auto dominates = [&](const Label& a, int a_idx, const Label& b, int b_idx) {
    if (a.cost > b.cost || a.resource > b.resource) return false;
    if (a.tie.segments > b.tie.segments || a.tie.mobile_layers < b.tie.mobile_layers) return false;
    if (a.cost == b.cost && a.resource == b.resource && a.tie.compare(b.tie) == 0) {
      return segments_of(a_idx) <= segments_of(b_idx);
    }
    return true;
  };

  for (int u : g.topo_order()) {
    for (int li : at[u]) {
      if (!arena[li].alive) continue;
      for (const GraphEdge& e : g.out_edges(u)) {
        if (!std::isfinite(e.cost) || !std::isfinite(e.resource)) continue;
        const Label& from = arena[li];
        Label cand{e.to, from.cost + e.cost, from.resource + e.resource,
                   detail::extend(from.tie, g.nodes()[e.to]), li, true};
        if (!within_bound(cand.resource, bound)) continue;
        const int cand_idx = static_cast<int>(arena.size());
        arena.push_back(cand);
        bool dominated = false;
        for (int other : at[e.to]) {
          if (arena[other].alive && dominates(arena[other], other, arena[cand_idx], cand_idx)) {
            dominated = true;
            break;
          }
        }
        if (dominated) {
          arena.pop_back();
          continue;
        }
        auto& list = at[e.to];
        for (int other : list) {
          if (arena[other].alive && dominates(arena[cand_idx], cand_idx, arena[other], other)) {
            arena[other].alive = false;
          }
        }
        std::erase_if(list, [&](int l) { return !arena[l].alive; });
        list.push_back(cand_idx);
      }
    }
  }

  int best = -1;
  for (int li : at[g.sink()]) {
    if (!arena[li].alive) continue;
    if (best < 0) {
      best = li;
      continue;
    }
    const Label& a = arena[li];
    const Label& b = arena[best];
    bool better = false;
    if (a.cost != b.cost) {
      better = a.cost < b.cost;
    } else if (const int c = a.tie.compare(b.tie); c != 0) {
      better = c < 0;
    } else {
      better = segments_of(li) < segments_of(best);
    }
    if (better) best = li;
  }
  if (best < 0) {
    const double floor = detail::min_resource(g);
    throw InfeasibleError("no schedule satisfies the resource bound", floor);
  }
  std::vector<int> path;
  for (int l = best; l >= 0; l = arena[l].pred) path.push_back(arena[l].node);
  std::reverse(path.begin(), path.end());
  return detail::schedule_from_path(g, path);
}

struct LaracResult {
  Schedule schedule;
  double lower_bound = 0;
  int iterations = 0;
};

/// Lagrangian relaxation of the resource bound (LARAC). Keeps a feasible
/// path and an infeasible one, moves the multiplier to where their
/// aggregated weights cross, and stops when no path beats that line, when a
/// path repeats, or after 64 rounds. The bound returned is the best
/// Lagrangian value seen; the schedule is the best feasible path seen.
inline LaracResult larac_schedule(const ScheduleGraph& g, double bound) {
  if (!g.resource_metric()) throw ArgumentError("graph carries no resource weights");
  if (!(bound >= 0)) throw ArgumentError("bound must be >= 0");
  constexpr int kMaxIterations = 64;

  const auto cost_path = detail::lexicographic_shortest(
      g, [](const GraphEdge& e) { return e.cost; }, [](const GraphEdge&) { return 0.0; });
  if (cost_path.empty()) throw InfeasibleError("no schedule with finite cost exists", std::nullopt);
  Schedule pc = detail::schedule_from_path(g, cost_path);
  if (within_bound(*pc.total_resource, bound)) return {pc, pc.total_cost, 0};

  const auto res_path = detail::lexicographic_shortest(
      g, [](const GraphEdge& e) { return e.resource; }, [](const GraphEdge& e) { return e.cost; });
  Schedule pr = detail::schedule_from_path(g, res_path);
  if (!within_bound(*pr.total_resource, bound)) {
    throw InfeasibleError("no schedule satisfies the resource bound", *pr.total_resource);
  }

  double lower = pc.total_cost;
  int iter = 0;
  while (iter < kMaxIterations) {
    ++iter;
    const double denom = *pc.total_resource - *pr.total_resource;
    if (!(denom > 0)) break;
    const double lambda = (pr.total_cost - pc.total_cost) / denom;
    const auto path = detail::lexicographic_shortest(
        g, [lambda](const GraphEdge& e) { return e.cost + lambda * e.resource; },
        [](const GraphEdge& e) { return e.resource; });
    Schedule q = detail::schedule_from_path(g, path);
    const double lq = q.total_cost + lambda * *q.total_resource;
    lower = std::max(lower, lq - lambda * bound);
    const double line = pc.total_cost + lambda * *pc.total_resource;
    if (nearly_equal(lq, line, 1e-12) || lq >= line) break;
    if (q.segments == pc.segments || q.segments == pr.segments) break;
    if (within_bound(*q.total_resource, bound)) {
      pr = std::move(q);
    } else {
      pc = std::move(q);
    }
  }
  return {pr, lower, iter};
}

}  // namespace layersplit
