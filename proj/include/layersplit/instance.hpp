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

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "layersplit/common.hpp"

// Problem description: the layer chain, its grouped execution profiles on both
// platforms, and the link between them.
namespace layersplit {

enum class LayerKind { conv, fc, pool, relu, lrn, drop, deconv, lstm, soft, other };

inline std::string_view to_string(LayerKind k) {
  switch (k) {
    case LayerKind::conv: return "conv";
    case LayerKind::fc: return "fc";
    case LayerKind::pool: return "pool";
    case LayerKind::relu: return "relu";
    case LayerKind::lrn: return "lrn";
    case LayerKind::drop: return "drop";
    case LayerKind::deconv: return "deconv";
    case LayerKind::lstm: return "lstm";
    case LayerKind::soft: return "soft";
    case LayerKind::other: return "other";
  }
  return "other";
}

inline std::optional<LayerKind> parse_layer_kind(std::string_view s) {
  for (auto k : {LayerKind::conv, LayerKind::fc, LayerKind::pool, LayerKind::relu,
                 LayerKind::lrn, LayerKind::drop, LayerKind::deconv, LayerKind::lstm,
                 LayerKind::soft, LayerKind::other}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

struct LayerSpec {
  int index = 0;  // 1-based
  std::string name;
  LayerKind kind = LayerKind::other;
  std::uint64_t input_bytes = 0;
  std::uint64_t output_bytes = 0;
  std::uint64_t weight_bytes = 0;
  bool compressible = true;
  std::optional<double> zero_ratio;
  std::optional<double> compression_ratio;
};

/// Skip connection: the output of `source_layer` is also consumed by
/// `sink_layer`.
struct ResidualBlock {
  int source_layer = 0;
  int sink_layer = 0;

  int block_size() const { return sink_layer - source_layer + 1; }
  bool operator==(const ResidualBlock&) const = default;
};

struct ExecCost {
  double latency_ms = 0;
  double energy_mJ = 0;
};

/// Execution cost of every consecutive layer group (i..j), measured as a unit.
struct GroupedProfile {
  Platform platform = Platform::mobile;
  int batch_size = 1;
  std::map<std::pair<int, int>, ExecCost> entries;
};

struct LinkProfile {
  std::string name = "custom";
  double uplink_mbps = 0;
  double downlink_mbps = 0;
  double alpha_u = 0;  // mW per Mbps
  double alpha_d = 0;  // mW per Mbps
  double beta = 0;     // mW
  double rtt_ms = 0;
  bool offline = false;

  static LinkProfile cellular_3g() {
    return {"3G", 1.1, 2.0275, 868.98, 122.12, 817.88, 0, false};
  }
  static LinkProfile cellular_4g() {
    return {"4G", 5.85, 13.76, 438.39, 51.97, 1288.04, 0, false};
  }
  static LinkProfile wifi() { return {"WiFi", 18.88, 54.97, 283.17, 137.01, 132.86, 0, false}; }

  /// Network presets by name ("3G", "4G", "WiFi").
  static std::optional<LinkProfile> preset(std::string_view name) {
    if (name == "3G") return cellular_3g();
    if (name == "4G") return cellular_4g();
    if (name == "WiFi" || name == "wifi" || name == "Wi-Fi") return wifi();
    return std::nullopt;
  }
};

struct TransferEntry {
  double latency_ms = 0;
  double energy_mJ = 0;
};

/// Directly supplied transfer costs, bypassing the link model. `upload[k]` and
/// `download[k]` move the output of layer k; `download_weights[k]` is the cost
/// of downloading all weights of layer k.
struct ExplicitTransfers {
  TransferEntry upload_input;
  std::map<int, TransferEntry> upload;
  std::map<int, TransferEntry> download;
  std::map<int, TransferEntry> download_weights;
};

/// Cost of compressing and decompressing one transfer of a tensor.
struct CompressionOverhead {
  double latency_ms = 0;
  double energy_mJ = 0;
};

/// How backward-pass costs are obtained when the profile lacks them.
struct TrainingPolicy {
  bool mirror = true;
  double backward_factor = 2.0;
};

struct ProfileSet {
  GroupedProfile mobile;
  GroupedProfile cloud;
};

/// Dense upper-triangular (i..j) cost table over 1..n.
class CostGrid {
 public:
  CostGrid() = default;
  explicit CostGrid(int n) : n_(n), values_(static_cast<std::size_t>(n + 1) * (n + 1), 0.0) {}

  int size() const { return n_; }
  double at(int i, int j) const { return values_[index(i, j)]; }
  double& at(int i, int j) { return values_[index(i, j)]; }

 private:
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(i) * (n_ + 1) + static_cast<std::size_t>(j);
  }
  int n_ = 0;
  std::vector<double> values_;
};

/// Latency and energy grids of one platform with gaps filled in.
struct PlatformGrids {
  CostGrid latency;
  CostGrid energy;
};

namespace detail {

struct GridBuild {
  CostGrid grid;
  std::vector<std::string> issues;
  std::vector<std::string> warnings;
};

/// Fills absent (i, j) entries with the cheapest two-way split. `known(i, j)`
/// returns the profiled value if any. Warns when a profiled group costs more
/// than some split of it, which points at measurement noise.
template <typename Known>
GridBuild fill_grid(int n, Known&& known, std::string_view label) {
  GridBuild out{CostGrid(n), {}, {}};
  int violations = 0;
  std::string first_violation;
  for (int len = 1; len <= n; ++len) {
    for (int i = 1; i + len - 1 <= n; ++i) {
      const int j = i + len - 1;
      double best_split = kUnreachable;
      for (int k = i; k < j; ++k) {
        best_split = std::min(best_split, out.grid.at(i, k) + out.grid.at(k + 1, j));
      }
      std::optional<double> v = known(i, j);
      if (v) {
        out.grid.at(i, j) = *v;
        if (len > 1 && *v > best_split) {
          if (violations++ == 0) {
            std::ostringstream os;
            os << label << " (" << i << "," << j << ") = " << *v
               << " exceeds its cheapest split " << best_split;
            first_violation = os.str();
          }
        }
      } else if (len == 1) {
        std::ostringstream os;
        os << label << " entry (" << i << "," << i << ") is missing";
        out.issues.push_back(os.str());
        out.grid.at(i, j) = kUnreachable;
      } else {
        out.grid.at(i, j) = best_split;
      }
    }
  }
  if (violations > 0) {
    std::ostringstream os;
    os << "grouped cost exceeds a sub-segmentation in " << violations << " "
       << label << " entr" << (violations == 1 ? "y" : "ies") << "; first: "
       << first_violation;
    out.warnings.push_back(os.str());
  }
  return out;
}

}  // namespace detail

struct ProblemInstance {
  std::string name;
  std::vector<LayerSpec> layers;
  std::vector<ResidualBlock> residual_blocks;
  GroupedProfile mobile_profile{Platform::mobile, 1, {}};
  GroupedProfile cloud_profile{Platform::cloud, 1, {}};
  /// Profiles measured at other batch sizes; selected by `with_batch`.
  std::vector<ProfileSet> alternate_profiles;
  LinkProfile link;
  double mobile_idle_power_mW = 0;
  /// Keyed by tensor index: 0 is the network input, k the output of layer k.
  std::map<int, CompressionOverhead> compression_overhead;
  std::optional<ExplicitTransfers> explicit_transfers;
  TrainingPolicy training;

  /// Per-sample bytes on the wire per tensor (0..N) once compression has been
  /// applied; empty means raw sizes.
  std::vector<std::uint64_t> wire_bytes;
  /// Tensors that travel compressed and therefore pay the overhead.
  std::vector<bool> compressed_tensors;

  std::vector<std::string> warnings;

  int layer_count() const { return static_cast<int>(layers.size()); }
  int batch() const { return mobile_profile.batch_size; }

  /// Raw per-sample size of tensor k (0 = input of layer 1).
  std::uint64_t tensor_bytes(int k) const {
    return k == 0 ? layers.front().input_bytes : layers[k - 1].output_bytes;
  }
  std::uint64_t tensor_wire_bytes(int k) const {
    return wire_bytes.empty() ? tensor_bytes(k) : wire_bytes[k];
  }
  bool tensor_compressed(int k) const {
    return !compressed_tensors.empty() && compressed_tensors[k];
  }

  /// Filled grouped-cost grids over 1..N (built by `finalize`).
  const PlatformGrids& grids(Platform p) const {
    if (!grids_) throw Error("instance not finalized");
    return p == Platform::mobile ? grids_->first : grids_->second;
  }

  bool finalized() const { return grids_ != nullptr; }

  /// Validates every invariant and builds the cost grids. Throws
  /// ValidationError listing all failures.
  void finalize();

 private:
  std::shared_ptr<const std::pair<PlatformGrids, PlatformGrids>> grids_;
};

namespace detail {

inline void check_profile(const GroupedProfile& prof, int n, std::string_view label,
                          std::vector<std::string>& issues) {
  if (prof.batch_size < 1) {
    issues.push_back(std::string(label) + " batch_size must be positive");
  }
  for (const auto& [key, cost] : prof.entries) {
    const auto [i, j] = key;
    std::ostringstream where;
    where << label << " entry (" << i << "," << j << ")";
    if (i < 1 || j < i || j > 2 * n) issues.push_back(where.str() + " has an invalid span");
    if (!(cost.latency_ms >= 0)) issues.push_back(where.str() + " latency_ms must be >= 0");
    if (!(cost.energy_mJ >= 0)) issues.push_back(where.str() + " energy_mJ must be >= 0");
  }
}

inline PlatformGrids build_forward_grids(const GroupedProfile& prof, int n,
                                         std::vector<std::string>& issues,
                                         std::vector<std::string>& warnings) {
  const std::string name(to_string(prof.platform));
  auto lookup = [&](bool latency) {
    return [&prof, latency](int i, int j) -> std::optional<double> {
      auto it = prof.entries.find({i, j});
      if (it == prof.entries.end()) return std::nullopt;
      return latency ? it->second.latency_ms : it->second.energy_mJ;
    };
  };
  auto lat = fill_grid(n, lookup(true), name + " latency");
  auto en = fill_grid(n, lookup(false), name + " energy");
  issues.insert(issues.end(), lat.issues.begin(), lat.issues.end());
  issues.insert(issues.end(), en.issues.begin(), en.issues.end());
  warnings.insert(warnings.end(), lat.warnings.begin(), lat.warnings.end());
  warnings.insert(warnings.end(), en.warnings.begin(), en.warnings.end());
  return {std::move(lat.grid), std::move(en.grid)};
}

}  // namespace detail

inline void ProblemInstance::finalize() {
  std::vector<std::string> issues;
  std::vector<std::string> notes;
  const int n = layer_count();
  if (n < 1) issues.push_back("layers: at least one layer is required");

  for (int k = 0; k < n; ++k) {
    const LayerSpec& l = layers[k];
    const std::string where = "layers[" + std::to_string(k) + "]";
    if (l.index != k + 1) {
      issues.push_back(where + ".index must be " + std::to_string(k + 1));
    }
    if (k > 0 && l.input_bytes != layers[k - 1].output_bytes) {
      issues.push_back(where + ".input_bytes must equal the previous layer's output_bytes");
    }
    if (l.compression_ratio && !(*l.compression_ratio >= 1.0)) {
      issues.push_back(where + ".compression_ratio must be >= 1");
    }
    if (l.zero_ratio && !(*l.zero_ratio >= 0.0 && *l.zero_ratio <= 1.0)) {
      issues.push_back(where + ".zero_ratio must lie in [0,1]");
    }
  }

  std::vector<ResidualBlock> sorted = residual_blocks;
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
    return a.source_layer < b.source_layer;
  });
  for (std::size_t b = 0; b < sorted.size(); ++b) {
    const auto& blk = sorted[b];
    if (blk.source_layer < 1 || blk.sink_layer > n) {
      issues.push_back("residual block (" + std::to_string(blk.source_layer) + "," +
                       std::to_string(blk.sink_layer) + ") is out of range");
    }
    if (blk.sink_layer - blk.source_layer < 2) {
      issues.push_back("residual block (" + std::to_string(blk.source_layer) + "," +
                       std::to_string(blk.sink_layer) + ") must skip at least two layers");
    }
    if (b > 0 && sorted[b - 1].sink_layer > blk.source_layer) {
      issues.push_back("residual blocks must not overlap or nest");
    }
  }

  detail::check_profile(mobile_profile, n, "mobile", issues);
  detail::check_profile(cloud_profile, n, "cloud", issues);
  if (mobile_profile.batch_size != cloud_profile.batch_size) {
    issues.push_back("mobile and cloud profiles were taken at different batch sizes");
  }
  for (const auto& set : alternate_profiles) {
    detail::check_profile(set.mobile, n, "mobile", issues);
    detail::check_profile(set.cloud, n, "cloud", issues);
    if (set.mobile.batch_size != set.cloud.batch_size) {
      issues.push_back("alternate profile set has mismatched batch sizes");
    }
  }

  if (!link.offline) {
    if (!(link.uplink_mbps > 0)) issues.push_back("link.uplink_mbps must be > 0 unless offline");
    if (!(link.downlink_mbps > 0))
      issues.push_back("link.downlink_mbps must be > 0 unless offline");
  }
  if (!(link.alpha_u >= 0) || !(link.alpha_d >= 0) || !(link.beta >= 0)) {
    issues.push_back("link power coefficients must be >= 0");
  }
  if (!(link.rtt_ms >= 0)) issues.push_back("link.rtt_ms must be >= 0");
  if (!(mobile_idle_power_mW >= 0)) issues.push_back("mobile_idle_power_mW must be >= 0");

  for (const auto& [k, o] : compression_overhead) {
    if (k < 0 || k > n) issues.push_back("compression_overhead tensor index out of range");
    if (!(o.latency_ms >= 0) || !(o.energy_mJ >= 0))
      issues.push_back("compression_overhead values must be >= 0");
  }

  if (explicit_transfers) {
    const auto& x = *explicit_transfers;
    auto check = [&](const TransferEntry& e, const std::string& what) {
      if (!(e.latency_ms >= 0) || !(e.energy_mJ >= 0))
        issues.push_back("explicit_transfers." + what + " must be >= 0");
    };
    check(x.upload_input, "upload_input");
    for (int k = 1; k < n; ++k) {
      auto it = x.upload.find(k);
      if (it == x.upload.end())
        issues.push_back("explicit_transfers.upload[" + std::to_string(k) + "] is missing");
      else
        check(it->second, "upload[" + std::to_string(k) + "]");
    }
    for (int k = 1; k <= n; ++k) {
      auto it = x.download.find(k);
      if (it == x.download.end())
        issues.push_back("explicit_transfers.download[" + std::to_string(k) + "] is missing");
      else
        check(it->second, "download[" + std::to_string(k) + "]");
    }
    for (const auto& [k, e] : x.download_weights) check(e, "download_weights");
  }

  if (!wire_bytes.empty() && static_cast<int>(wire_bytes.size()) != n + 1) {
    issues.push_back("wire_bytes must cover tensors 0..N");
  }
  if (!(training.backward_factor > 0)) issues.push_back("training.backward_factor must be > 0");

  if (!issues.empty() || n < 1) throw ValidationError(issues);

  std::vector<std::string> grid_warnings;
  auto mobile = detail::build_forward_grids(mobile_profile, n, issues, grid_warnings);
  auto cloud = detail::build_forward_grids(cloud_profile, n, issues, grid_warnings);
  if (!issues.empty()) throw ValidationError(issues);

  for (const auto* prof : {&mobile_profile, &cloud_profile}) {
    int forward = 0;
    for (const auto& [key, _] : prof->entries)
      if (key.second <= n) ++forward;
    if (forward < n * (n + 1) / 2) {
      notes.push_back(std::string(to_string(prof->platform)) + " profile has " +
                      std::to_string(forward) + " of " + std::to_string(n * (n + 1) / 2) +
                      " grouped entries; the rest are composed from sub-segments");
    }
  }
  warnings = std::move(notes);
  warnings.insert(warnings.end(), grid_warnings.begin(), grid_warnings.end());
  grids_ = std::make_shared<const std::pair<PlatformGrids, PlatformGrids>>(std::move(mobile),
                                                                          std::move(cloud));
}

/// Grouped execution cost of layers i..j. Cloud energy is the mobile's idle
/// draw while waiting; `cloud_time` is the cloud's own busy time.
inline double segment_cost(const ProblemInstance& inst, int i, int j, Platform platform,
                           Metric metric) {
  const int n = inst.layer_count();
  if (i < 1 || j < i || j > n) {
    throw ArgumentError("segment (" + std::to_string(i) + "," + std::to_string(j) +
                        ") is outside 1.." + std::to_string(n));
  }
  const PlatformGrids& g = inst.grids(platform);
  switch (metric) {
    case Metric::latency: return g.latency.at(i, j);
    case Metric::energy:
      if (platform == Platform::mobile) return g.energy.at(i, j);
      return inst.mobile_idle_power_mW * g.latency.at(i, j) / 1000.0;
    case Metric::cloud_time: return platform == Platform::cloud ? g.latency.at(i, j) : 0.0;
  }
  return 0.0;
}

/// Copy of the instance that uses the profiles measured at `batch`. Execution
/// costs are never extrapolated across batch sizes.
inline ProblemInstance with_batch(const ProblemInstance& inst, int batch) {
  if (inst.batch() == batch) return inst;
  for (const auto& set : inst.alternate_profiles) {
    if (set.mobile.batch_size == batch) {
      ProblemInstance out = inst;
      out.alternate_profiles.push_back({inst.mobile_profile, inst.cloud_profile});
      out.mobile_profile = set.mobile;
      out.cloud_profile = set.cloud;
      std::erase_if(out.alternate_profiles,
                    [batch](const ProfileSet& s) { return s.mobile.batch_size == batch; });
      out.finalize();
      return out;
    }
  }
  throw ValidationError("no profiles measured at batch size " + std::to_string(batch));
}

}  // namespace layersplit
