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
#include <set>

#include "layersplit/instance.hpp"

// Link and compression model: turns byte counts into transfer latency and
// mobile-side energy.
namespace layersplit {

enum class Direction { up, down };

struct TransferCost {
  double latency_ms = 0;
  double energy_mJ = 0;
  std::uint64_t bytes_on_wire = 0;
};

/// Radio power while transferring: alpha * throughput + beta.
inline double link_power(const LinkProfile& link, Direction dir) {
  if (link.offline) throw UnavailableLinkError("link '" + link.name + "' is offline");
  return dir == Direction::up ? link.alpha_u * link.uplink_mbps + link.beta
                              : link.alpha_d * link.downlink_mbps + link.beta;
}

namespace detail {

// Fractional byte counts are needed for partially refreshed weights.
inline TransferEntry transfer_fractional(const LinkProfile& link, double bytes, Direction dir) {
  if (bytes == 0 && link.rtt_ms == 0) return {0, 0};
  if (link.offline) {
    if (bytes == 0) return {link.rtt_ms, 0};
    return {kUnreachable, kUnreachable};
  }
  const double rate = dir == Direction::up ? link.uplink_mbps : link.downlink_mbps;
  const double latency = link.rtt_ms + 8.0 * bytes / (rate * 1000.0);
  return {latency, link_power(link, dir) * latency / 1000.0};
}

}  // namespace detail

/// Time and energy to move `bytes` over the link. An offline link yields the
/// unreachable sentinel for any non-empty payload.
inline TransferCost transfer_cost(const LinkProfile& link, std::uint64_t bytes, Direction dir) {
  const auto t = detail::transfer_fractional(link, static_cast<double>(bytes), dir);
  return {t.latency_ms, t.energy_mJ, bytes};
}

struct CompressionConfig {
  bool enabled = false;
  int quantize_bits = 8;
  double default_ratio = 1.0;
  std::set<LayerKind> skip_kinds{LayerKind::fc};

  void validate() const {
    std::vector<std::string> issues;
    if (quantize_bits != 4 && quantize_bits != 8 && quantize_bits != 16 && quantize_bits != 32)
      issues.push_back("quantize_bits must be one of 4, 8, 16, 32");
    if (!(default_ratio >= 1.0)) issues.push_back("default_ratio must be >= 1");
    if (!issues.empty()) throw ValidationError(issues);
  }
};

/// Affine CR estimate from the zero ratio. Never applied implicitly.
inline double estimate_compression_ratio(double zero_ratio, double slope, double intercept) {
  return std::max(1.0, slope * zero_ratio + intercept);
}

inline bool compresses(const LayerSpec& layer, const CompressionConfig& cfg) {
  return cfg.enabled && layer.compressible && !cfg.skip_kinds.count(layer.kind);
}

/// Bytes sent for the layer's output. Sizes are counted at 32 bits per value;
/// the output is quantized to `quantize_bits` and then losslessly compressed.
inline std::uint64_t effective_transfer_bytes(const LayerSpec& layer,
                                              const CompressionConfig& cfg) {
  if (!compresses(layer, cfg)) return layer.output_bytes;
  const double quantized =
      static_cast<double>(layer.output_bytes) * cfg.quantize_bits / 32.0;
  const double ratio = layer.compression_ratio.value_or(cfg.default_ratio);
  return static_cast<std::uint64_t>(std::ceil(quantized / ratio));
}

/// Copy of the instance whose transfers carry compressed tensors. The network
/// input is treated like an output of a layer with the first layer's traits.
/// Explicitly supplied transfer costs are rescaled by the byte ratio.
inline ProblemInstance apply_compression(const ProblemInstance& inst,
                                         const CompressionConfig& cfg) {
  cfg.validate();
  ProblemInstance out = inst;
  if (!cfg.enabled) return out;
  const int n = inst.layer_count();
  out.wire_bytes.assign(n + 1, 0);
  out.compressed_tensors.assign(n + 1, false);
  std::vector<double> scale(n + 1, 1.0);
  for (int k = 0; k <= n; ++k) {
    LayerSpec tensor = inst.layers[std::max(k, 1) - 1];
    tensor.output_bytes = inst.tensor_bytes(k);
    const std::uint64_t before = inst.tensor_wire_bytes(k);
    const std::uint64_t after = effective_transfer_bytes(tensor, cfg);
    out.wire_bytes[k] = std::min(after, before);
    out.compressed_tensors[k] = compresses(tensor, cfg) || inst.tensor_compressed(k);
    if (before > 0) scale[k] = static_cast<double>(out.wire_bytes[k]) / static_cast<double>(before);
  }
  if (out.explicit_transfers) {
    auto& x = *out.explicit_transfers;
    auto rescale = [](TransferEntry& e, double s) {
      e.latency_ms *= s;
      e.energy_mJ *= s;
    };
    rescale(x.upload_input, scale[0]);
    for (auto& [k, e] : x.upload) rescale(e, scale[k]);
    for (auto& [k, e] : x.download) rescale(e, scale[k]);
  }
  return out;
}

/// Copy of the instance on a different link. Explicit transfer costs are
/// rescaled so that latency follows the rate ratio and energy follows
/// power times latency.
inline ProblemInstance with_link(const ProblemInstance& inst, const LinkProfile& link) {
  ProblemInstance out = inst;
  out.link = link;
  if (inst.explicit_transfers && !link.offline) {
    const LinkProfile& old = inst.link;
    if (old.offline || !(old.uplink_mbps > 0) || !(old.downlink_mbps > 0)) {
      throw ValidationError("explicit transfers cannot be rescaled from an offline link");
    }
    auto factors = [&](Direction dir) {
      const double old_rate = dir == Direction::up ? old.uplink_mbps : old.downlink_mbps;
      const double new_rate = dir == Direction::up ? link.uplink_mbps : link.downlink_mbps;
      const double time = old_rate / new_rate;
      const double old_power = link_power(old, dir);
      const double power = old_power > 0 ? link_power(link, dir) / old_power : 1.0;
      return std::pair{time, time * power};
    };
    const auto [up_t, up_e] = factors(Direction::up);
    const auto [dn_t, dn_e] = factors(Direction::down);
    auto& x = *out.explicit_transfers;
    auto rescale = [](TransferEntry& e, double t, double en) {
      e.latency_ms *= t;
      e.energy_mJ *= en;
    };
    rescale(x.upload_input, up_t, up_e);
    for (auto& [k, e] : x.upload) rescale(e, up_t, up_e);
    for (auto& [k, e] : x.download) rescale(e, dn_t, dn_e);
    for (auto& [k, e] : x.download_weights) rescale(e, dn_t, dn_e);
  }
  out.finalize();
  return out;
}

}  // namespace layersplit
