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

#include <memory>

#include "layersplit/cost_model.hpp"

namespace layersplit {

/// One transfer's cost, with compression overhead kept apart so that cost
/// breakdowns can report it separately.
struct Charge {
  double latency_ms = 0;
  double energy_mJ = 0;
  double overhead_latency_ms = 0;
  double overhead_energy_mJ = 0;

  double transfer(Metric m) const {
    switch (m) {
      case Metric::latency: return latency_ms;
      case Metric::energy: return energy_mJ;
      case Metric::cloud_time: return 0.0;
    }
    return 0.0;
  }
  double overhead(Metric m) const {
    switch (m) {
      case Metric::latency: return overhead_latency_ms;
      case Metric::energy: return overhead_energy_mJ;
      case Metric::cloud_time: return 0.0;
    }
    return 0.0;
  }
  double value(Metric m) const { return transfer(m) + overhead(m); }
};

/// Every primitive cost of one problem in one mode: grouped execution over the
/// chain 1..n (n = N, or 2N when the backward pass is appended) and the
/// transfers a platform switch after each position causes.
///
/// In training mode position b > N is the backward pass of forward layer
/// 2N+1-b. The gradient leaving position b has the size of that layer's
/// input, so transfers after b reuse tensor 2N-b.
class ProblemCosts {
 public:
  ProblemCosts(const ProblemInstance& inst, Mode mode, double update_fraction = 0.0)
      : inst_(&inst), mode_(mode), rho_(update_fraction), layers_(inst.layer_count()) {
    if (!inst.finalized()) throw Error("instance not finalized");
    if (!(update_fraction >= 0.0 && update_fraction <= 1.0)) {
      throw ArgumentError("update_fraction must lie in [0,1]");
    }
    if (mode == Mode::inference) {
      size_ = layers_;
      mobile_ = &inst.grids(Platform::mobile);
      cloud_ = &inst.grids(Platform::cloud);
      return;
    }
    if (!inst.residual_blocks.empty()) {
      throw UnsupportedTopologyError("residual blocks are not supported in training mode");
    }
    size_ = 2 * layers_;
    std::vector<std::string> issues;
    training_ = std::make_shared<std::pair<PlatformGrids, PlatformGrids>>(
        training_grids(inst.mobile_profile, inst.grids(Platform::mobile), issues),
        training_grids(inst.cloud_profile, inst.grids(Platform::cloud), issues));
    if (!issues.empty()) throw ValidationError(issues);
    mobile_ = &training_->first;
    cloud_ = &training_->second;
  }

  // Keeps a pointer to the instance, so temporaries are refused.
  ProblemCosts(ProblemInstance&&, Mode, double = 0.0) = delete;

  const ProblemInstance& instance() const { return *inst_; }
  Mode mode() const { return mode_; }
  double update_fraction() const { return rho_; }
  int layer_count() const { return layers_; }
  int size() const { return size_; }

  /// Residual blocks charged by this view (none in training mode).
  const std::vector<ResidualBlock>& blocks() const {
    static const std::vector<ResidualBlock> none;
    return mode_ == Mode::inference ? inst_->residual_blocks : none;
  }

  double exec(int i, int j, Platform p, Metric m) const {
    const PlatformGrids& g = p == Platform::mobile ? *mobile_ : *cloud_;
    switch (m) {
      case Metric::latency: return g.latency.at(i, j);
      case Metric::energy:
        if (p == Platform::mobile) return g.energy.at(i, j);
        return inst_->mobile_idle_power_mW * g.latency.at(i, j) / 1000.0;
      case Metric::cloud_time: return p == Platform::cloud ? g.latency.at(i, j) : 0.0;
    }
    return 0.0;
  }

  Charge upload_input() const { return tensor_charge(0, Direction::up); }
  Charge upload_after(int j) const { return tensor_charge(tensor_after(j), Direction::up); }
  Charge download_after(int j) const { return tensor_charge(tensor_after(j), Direction::down); }

  /// Result returned to the mobile when the chain ends on the cloud. Training
  /// returns nothing but refreshed weights.
  Charge final_download() const {
    if (mode_ == Mode::training) return {};
    return tensor_charge(layers_, Direction::down);
  }

  /// Weights refreshed by a cloud run over positions i..j, downloaded once.
  Charge weight_download(int i, int j) const {
    if (mode_ == Mode::inference || rho_ == 0.0) return {};
    const int first = std::max(i, layers_ + 1);
    if (first > j) return {};
    const auto& x = inst_->explicit_transfers;
    Charge out;
    double link_bytes = 0;
    for (int b = first; b <= j; ++b) {
      const int f = 2 * layers_ + 1 - b;
      if (x) {
        auto it = x->download_weights.find(f);
        if (it != x->download_weights.end()) {
          if (inst_->link.offline && (it->second.latency_ms > 0 || it->second.energy_mJ > 0)) {
            return {kUnreachable, kUnreachable, 0, 0};
          }
          out.latency_ms += rho_ * it->second.latency_ms;
          out.energy_mJ += rho_ * it->second.energy_mJ;
          continue;
        }
      }
      link_bytes += rho_ * static_cast<double>(inst_->layers[f - 1].weight_bytes);
    }
    if (link_bytes > 0) {
      const auto t = detail::transfer_fractional(inst_->link, link_bytes, Direction::down);
      out.latency_ms += t.latency_ms;
      out.energy_mJ += t.energy_mJ;
    }
    return out;
  }

  /// Skip tensor of a residual block crossing platforms.
  Charge skip_transfer(const ResidualBlock& b, Direction dir) const {
    return tensor_charge(b.source_layer, dir);
  }

  /// Tensor index moved by a switch after chain position j.
  int tensor_after(int j) const { return j <= layers_ ? j : 2 * layers_ - j; }

  Charge tensor_charge(int k, Direction dir) const {
    const double batch = inst_->batch();
    Charge c;
    if (const auto& x = inst_->explicit_transfers) {
      const TransferEntry* e = nullptr;
      if (k == 0) {
        if (dir == Direction::down) throw Error("the network input is never downloaded");
        e = &x->upload_input;
      } else {
        const auto& table = dir == Direction::up ? x->upload : x->download;
        auto it = table.find(k);
        if (it == table.end()) {
          throw ValidationError("explicit_transfers." +
                                std::string(dir == Direction::up ? "upload" : "download") +
                                "[" + std::to_string(k) + "] is required");
        }
        e = &it->second;
      }
      if (inst_->link.offline) return {kUnreachable, kUnreachable, 0, 0};
      c.latency_ms = e->latency_ms * batch;
      c.energy_mJ = e->energy_mJ * batch;
    } else {
      const auto t = transfer_cost(inst_->link, inst_->tensor_wire_bytes(k) * inst_->batch(), dir);
      c.latency_ms = t.latency_ms;
      c.energy_mJ = t.energy_mJ;
    }
    if (inst_->tensor_compressed(k)) {
      auto it = inst_->compression_overhead.find(k);
      if (it != inst_->compression_overhead.end()) {
        c.overhead_latency_ms = it->second.latency_ms * batch;
        c.overhead_energy_mJ = it->second.energy_mJ * batch;
      }
    }
    return c;
  }

 private:
  PlatformGrids training_grids(const GroupedProfile& prof, const PlatformGrids& forward,
                               std::vector<std::string>& issues) const {
    const int n = layers_;
    const double factor = inst_->training.backward_factor;
    const bool mirror = inst_->training.mirror;
    auto lookup = [&](bool latency) {
      return [&, latency](int i, int j) -> std::optional<double> {
        auto it = prof.entries.find({i, j});
        if (it != prof.entries.end()) return latency ? it->second.latency_ms : it->second.energy_mJ;
        if (j <= n) return (latency ? forward.latency : forward.energy).at(i, j);
        if (mirror && i > n) {
          const CostGrid& g = latency ? forward.latency : forward.energy;
          return factor * g.at(2 * n + 1 - j, 2 * n + 1 - i);
        }
        return std::nullopt;
      };
    };
    const std::string label = std::string(to_string(prof.platform)) + " backward";
    auto lat = detail::fill_grid(2 * n, lookup(true), label + " latency");
    auto en = detail::fill_grid(2 * n, lookup(false), label + " energy");
    for (auto* b : {&lat, &en}) {
      for (auto& s : b->issues) issues.push_back(s + " (enable mirroring or profile it)");
    }
    return {std::move(lat.grid), std::move(en.grid)};
  }

  const ProblemInstance* inst_;
  Mode mode_;
  double rho_;
  int layers_;
  int size_ = 0;
  const PlatformGrids* mobile_ = nullptr;
  const PlatformGrids* cloud_ = nullptr;
  std::shared_ptr<std::pair<PlatformGrids, PlatformGrids>> training_;
};

}  // namespace layersplit
