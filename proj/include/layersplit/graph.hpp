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
#include <limits>
#include <ostream>
#include <span>
#include <vector>

#include "layersplit/schedule.hpp"

// The scheduling graph: one node per (layer group, platform), source S and
// sink F. Each S->F path is one schedule; the cost of executing a node is
// folded into its incoming edge so solvers see a plain edge-weighted DAG.
namespace layersplit {

enum class NodeRole { source, sink, group };

/// source_entry: S into the first group. EU: mobile group into a cloud group
/// (upload). ED: cloud group into a mobile group (download). sink_exit: last
/// group into F.
enum class EdgeKind { source_entry, EU, ED, sink_exit };

/// Which platform ran the skip source, for groups strictly inside a residual
/// block.
enum class SkipTag { none, source_mobile, source_cloud };

inline std::string_view to_string(EdgeKind k) {
  switch (k) {
    case EdgeKind::source_entry: return "source_entry";
    case EdgeKind::EU: return "EU";
    case EdgeKind::ED: return "ED";
    case EdgeKind::sink_exit: return "sink_exit";
  }
  return "?";
}

struct GraphNode {
  int id = 0;
  NodeRole role = NodeRole::group;
  Platform platform = Platform::mobile;
  int first = 0;
  int last = 0;
  SkipTag tag = SkipTag::none;
};

struct GraphEdge {
  int from = 0;
  int to = 0;
  double cost = 0;
  double resource = 0;
  EdgeKind kind = EdgeKind::source_entry;
  /// Objective cost split by category; `parts.total()` equals `cost`.
  CostBreakdown parts;
};

class ScheduleGraph {
 public:
  const std::vector<GraphNode>& nodes() const { return nodes_; }
  const std::vector<GraphEdge>& edges() const { return edges_; }
  std::span<const GraphEdge> out_edges(int node) const {
    return {edges_.data() + offsets_[node], edges_.data() + offsets_[node + 1]};
  }
  /// Node ids are assigned in topological order (by first layer).
  const std::vector<int>& topo_order() const { return topo_; }
  int source() const { return 0; }
  int sink() const { return static_cast<int>(nodes_.size()) - 1; }

  Mode mode() const { return mode_; }
  Metric objective() const { return objective_; }
  std::optional<Metric> resource_metric() const { return resource_; }
  double update_fraction() const { return rho_; }
  /// Number of chain positions (N, or 2N in training).
  int size() const { return size_; }
  const std::vector<ResidualBlock>& blocks() const { return blocks_; }

  /// Group nodes along a node path, which are the schedule's maximal runs.
  std::vector<Segment> decode(const std::vector<int>& path) const {
    std::vector<Segment> segs;
    for (int id : path) {
      const GraphNode& n = nodes_[id];
      if (n.role == NodeRole::group) segs.push_back({n.first, n.last, n.platform});
    }
    return segs;
  }

  /// Debug dump: node table, then "from to cost resource kind" per edge.
  void dump(std::ostream& os) const {
    os << "# nodes: " << nodes_.size() << "\n";
    for (const auto& n : nodes_) {
      os << "node " << n.id << ' ';
      if (n.role == NodeRole::source) {
        os << "S\n";
      } else if (n.role == NodeRole::sink) {
        os << "F\n";
      } else {
        os << platform_letter(n.platform) << ' ' << n.first << ' ' << n.last;
        if (n.tag == SkipTag::source_mobile) os << " src=M";
        if (n.tag == SkipTag::source_cloud) os << " src=C";
        os << '\n';
      }
    }
    os << "# edges: " << edges_.size() << "\n";
    for (const auto& e : edges_) {
      os << e.from << ' ' << e.to << ' ' << e.cost << ' ' << e.resource << ' '
         << to_string(e.kind) << '\n';
    }
  }

 private:
  friend ScheduleGraph build_schedule_graph(const ProblemCosts&, Metric, std::optional<Metric>,
                                            const std::vector<ResidualBlock>&);

  std::vector<GraphNode> nodes_;
  std::vector<GraphEdge> edges_;
  std::vector<std::size_t> offsets_;
  std::vector<int> topo_;
  Mode mode_ = Mode::inference;
  Metric objective_ = Metric::latency;
  std::optional<Metric> resource_;
  double rho_ = 0;
  int size_ = 0;
  std::vector<ResidualBlock> blocks_;
};

/// Builds the graph over `costs`, tracking the listed residual blocks. Within
/// a block the groups strictly between source and sink are duplicated into
/// two chains (skip source on mobile / on cloud); the edge into the group
/// holding the sink pays the skip tensor's transfer when platforms differ.
inline ScheduleGraph build_schedule_graph(const ProblemCosts& costs, Metric objective,
                                          std::optional<Metric> resource,
                                          const std::vector<ResidualBlock>& blocks) {
  if (objective == Metric::cloud_time) throw ArgumentError("objective must be latency or energy");
  const int n = costs.size();
  ScheduleGraph g;
  g.mode_ = costs.mode();
  g.objective_ = objective;
  g.resource_ = resource;
  g.rho_ = costs.update_fraction();
  g.size_ = n;
  g.blocks_ = blocks;

  auto inside_block = [&](int first, int last) -> int {
    for (std::size_t b = 0; b < blocks.size(); ++b)
      if (blocks[b].source_layer < first && last < blocks[b].sink_layer) return static_cast<int>(b);
    return -1;
  };

  // Nodes grouped by (first layer, platform) for successor lookup.
  std::vector<std::vector<int>> starting(static_cast<std::size_t>(2 * (n + 2)));
  auto bucket = [](int first, Platform p) {
    return static_cast<std::size_t>(2 * first + (p == Platform::cloud ? 1 : 0));
  };
  std::vector<int> node_block;
  g.nodes_.push_back({0, NodeRole::source, Platform::mobile, 0, 0, SkipTag::none});
  node_block.push_back(-1);
  for (int i = 1; i <= n; ++i) {
    for (int j = i; j <= n; ++j) {
      for (Platform p : {Platform::mobile, Platform::cloud}) {
        const int b = inside_block(i, j);
        auto add = [&](SkipTag tag) {
          const int id = static_cast<int>(g.nodes_.size());
          g.nodes_.push_back({id, NodeRole::group, p, i, j, tag});
          node_block.push_back(b);
          starting[bucket(i, p)].push_back(id);
        };
        if (b < 0) {
          add(SkipTag::none);
        } else {
          add(SkipTag::source_mobile);
          add(SkipTag::source_cloud);
        }
      }
    }
  }
  const int sink = static_cast<int>(g.nodes_.size());
  g.nodes_.push_back({sink, NodeRole::sink, Platform::mobile, n + 1, n + 1, SkipTag::none});
  node_block.push_back(-1);

  auto weight = [&](Metric m, const GraphNode* from, const GraphNode& to) {
    CostBreakdown w;
    auto add = [&](const Charge& c, double CostBreakdown::*field) {
      w.*field += c.transfer(m);
      w.compression_overhead += c.overhead(m);
    };
    if (to.role == NodeRole::group) w.computation += costs.exec(to.first, to.last, to.platform, m);
    if (from == nullptr) {
      if (to.platform == Platform::cloud) add(costs.upload_input(), &CostBreakdown::upload);
      return w;
    }
    if (from->platform == Platform::cloud) {
      add(costs.weight_download(from->first, from->last), &CostBreakdown::weight_download);
    }
    if (to.role == NodeRole::sink) {
      if (from->platform == Platform::cloud) add(costs.final_download(), &CostBreakdown::download);
      return w;
    }
    if (from->platform == Platform::mobile)
      add(costs.upload_after(from->last), &CostBreakdown::upload);
    else
      add(costs.download_after(from->last), &CostBreakdown::download);
    return w;
  };

  auto source_platform = [&](const GraphNode& from, const ResidualBlock& b) {
    if (from.first <= b.source_layer) return from.platform;
    return from.tag == SkipTag::source_mobile ? Platform::mobile : Platform::cloud;
  };

  g.offsets_.assign(g.nodes_.size() + 1, 0);
  auto emit = [&](int from, int to, EdgeKind kind, const CostBreakdown& skip, double skip_res) {
    const GraphNode* f = from == 0 ? nullptr : &g.nodes_[from];
    const GraphNode& t = g.nodes_[to];
    GraphEdge e{from, to, 0.0, 0.0, kind, weight(objective, f, t)};
    e.parts.upload += skip.upload;
    e.parts.download += skip.download;
    e.parts.compression_overhead += skip.compression_overhead;
    e.cost = e.parts.total();
    if (resource) e.resource = weight(*resource, f, t).total() + skip_res;
    g.edges_.push_back(e);
  };

  for (int id : starting[bucket(1, Platform::mobile)]) emit(0, id, EdgeKind::source_entry, {}, 0);
  for (int id : starting[bucket(1, Platform::cloud)]) emit(0, id, EdgeKind::source_entry, {}, 0);
  g.offsets_[1] = g.edges_.size();

  for (int x = 1; x < sink; ++x) {
    const GraphNode& from = g.nodes_[x];
    if (from.last == n) {
      emit(x, sink, EdgeKind::sink_exit, {}, 0);
    } else {
      const Platform to_platform = other(from.platform);
      for (int y : starting[bucket(from.last + 1, to_platform)]) {
        const GraphNode& to = g.nodes_[y];
        bool allowed = true;
        CostBreakdown skip_cost;
        double skip_res = 0;
        for (std::size_t b = 0; b < blocks.size(); ++b) {
          const ResidualBlock& blk = blocks[b];
          if (node_block[y] == static_cast<int>(b)) {
            const SkipTag want = source_platform(from, blk) == Platform::mobile
                                     ? SkipTag::source_mobile
                                     : SkipTag::source_cloud;
            if (to.tag != want) allowed = false;
          } else if (to.first > blk.source_layer && to.first <= blk.sink_layer &&
                     blk.sink_layer <= to.last) {
            const Platform src = source_platform(from, blk);
            if (src != to.platform) {
              const Charge c = costs.skip_transfer(
                  blk, src == Platform::mobile ? Direction::up : Direction::down);
              (src == Platform::mobile ? skip_cost.upload : skip_cost.download) +=
                  c.transfer(objective);
              skip_cost.compression_overhead += c.overhead(objective);
              if (resource) skip_res += c.value(*resource);
            }
          }
        }
        if (allowed) {
          emit(x, y,
               from.platform == Platform::mobile ? EdgeKind::EU : EdgeKind::ED, skip_cost, skip_res);
        }
      }
    }
    g.offsets_[x + 1] = g.edges_.size();
  }
  g.offsets_[sink + 1] = g.edges_.size();

  g.topo_.resize(g.nodes_.size());
  for (std::size_t k = 0; k < g.topo_.size(); ++k) g.topo_[k] = static_cast<int>(k);
  return g;
}

/// Plain inference graph; residual blocks are added with `expand_residual`.
inline ScheduleGraph build_inference_graph(const ProblemInstance& inst, Metric objective,
                                           std::optional<Metric> resource = std::nullopt) {
  return build_schedule_graph(ProblemCosts(inst, Mode::inference), objective, resource, {});
}

/// Graph over the forward chain followed by its mirrored backward pass.
/// Cloud groups covering backward positions pay the download of the
/// refreshed fraction of the weights they updated.
inline ScheduleGraph build_training_graph(const ProblemInstance& inst, Metric objective,
                                          double update_fraction,
                                          std::optional<Metric> resource = std::nullopt) {
  return build_schedule_graph(ProblemCosts(inst, Mode::training, update_fraction), objective,
                              resource, {});
}

/// Adds tracking of one skip connection to an inference graph.
inline ScheduleGraph expand_residual(const ScheduleGraph& graph, const ResidualBlock& block,
                                     const ProblemInstance& inst) {
  if (graph.mode() != Mode::inference) {
    throw UnsupportedTopologyError("residual blocks are not supported in training graphs");
  }
  const int n = inst.layer_count();
  if (block.source_layer < 1 || block.sink_layer > n || block.sink_layer - block.source_layer < 2) {
    throw ArgumentError("residual block (" + std::to_string(block.source_layer) + "," +
                        std::to_string(block.sink_layer) + ") is invalid for " +
                        std::to_string(n) + " layers");
  }
  std::vector<ResidualBlock> blocks = graph.blocks();
  for (const auto& b : blocks) {
    if (b == block) throw ArgumentError("residual block already expanded");
    if (b.source_layer < block.sink_layer && block.source_layer < b.sink_layer) {
      throw UnsupportedTopologyError("overlapping or nested residual blocks are not supported");
    }
  }
  blocks.push_back(block);
  std::sort(blocks.begin(), blocks.end(),
            [](const auto& a, const auto& b) { return a.source_layer < b.source_layer; });
  return build_schedule_graph(ProblemCosts(inst, Mode::inference), graph.objective(),
                              graph.resource_metric(), blocks);
}

/// Complete graph for a mode, with every declared residual block tracked.
inline ScheduleGraph build_graph(const ProblemInstance& inst, Mode mode, Metric objective,
                                 std::optional<Metric> resource = std::nullopt,
                                 double update_fraction = 0.0) {
  if (mode == Mode::training) return build_training_graph(inst, objective, update_fraction, resource);
  ScheduleGraph g = build_inference_graph(inst, objective, resource);
  for (const auto& b : inst.residual_blocks) g = expand_residual(g, b, inst);
  return g;
}

}  // namespace layersplit
