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
#include <random>
#include <string>

#include "layersplit/instance.hpp"

// Seeded synthetic networks in the three classic size profiles. All numbers
// are made up; only their shape is meant to be realistic.
namespace layersplit {

enum class SynthShape { discriminative, generative, autoencoder };

inline std::string_view to_string(SynthShape s) {
  switch (s) {
    case SynthShape::discriminative: return "discriminative";
    case SynthShape::generative: return "generative";
    case SynthShape::autoencoder: return "autoencoder";
  }
  return "?";
}

inline SynthShape parse_synth_shape(std::string_view s) {
  for (auto k : {SynthShape::discriminative, SynthShape::generative, SynthShape::autoencoder})
    if (to_string(k) == s) return k;
  throw ArgumentError("unknown shape '" + std::string(s) +
                      "' (use discriminative, generative or autoencoder)");
}

namespace detail {

// Raw engine output only, so the stream is identical on every standard library.
class SynthRng {
 public:
  explicit SynthRng(std::uint64_t seed) : g_(seed) {}
  double uniform(double lo, double hi) {
    const double u = static_cast<double>(g_() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
  }

 private:
  std::mt19937_64 g_;
};

inline std::uint64_t round_bytes(double b) {
  return static_cast<std::uint64_t>(std::llround(b / 4.0)) * 4;
}

}  // namespace detail

/// Deterministic instance over `link` (WiFi by default). Output sizes fall
/// (discriminative), rise (generative) or dip in the middle (autoencoder).
/// Cloud execution runs 10-20x faster than the mobile, and grouped costs
/// shrink with group length so the profiles are sub-additive.
inline ProblemInstance synth_benchmark(SynthShape shape, int n_layers, std::uint64_t seed,
                                       const LinkProfile& link = LinkProfile::wifi()) {
  if (n_layers < 2) throw ArgumentError("n_layers must be >= 2");
  const int n = n_layers;
  detail::SynthRng rng(seed * 0x9E3779B97F4A7C15ull + static_cast<std::uint64_t>(shape) + 1);

  ProblemInstance inst;
  inst.name = "synthetic-" + std::string(to_string(shape)) + "-" + std::to_string(n) + "-" +
              std::to_string(seed);
  inst.link = link;

  // Per-sample tensor sizes, index 0 is the network input.
  std::vector<double> size(n + 1);
  switch (shape) {
    case SynthShape::discriminative: {
      size[0] = 224.0 * 224 * 3 * 4;
      const double first = size[0] * 1.5;
      const double ratio = std::pow(4000.0 / first, 1.0 / (n - 1));
      for (int k = 1; k <= n; ++k) size[k] = first * std::pow(ratio, k - 1);
      break;
    }
    case SynthShape::generative: {
      size[0] = 400;
      size[n] = 786432;
      size[n - 1] = 196608;
      if (n > 2) {
        const double ratio = std::pow(size[n - 1] / 800.0, 1.0 / (n - 2));
        for (int k = 1; k < n - 1; ++k) size[k] = 800.0 * std::pow(ratio, k - 1);
      }
      break;
    }
    case SynthShape::autoencoder: {
      // Symmetric valley that bottoms out at the bottleneck for every depth.
      size[0] = 256.0 * 256 * 3 * 4;
      const int half = n / 2;
      const double ratio = std::pow(8192.0 / size[0], 1.0 / half);
      for (int k = 1; k <= n; ++k) size[k] = size[0] * std::pow(ratio, std::min(k, n - k));
      break;
    }
  }

  auto heavy_on_mobile = [&](int k) {
    const double pos = static_cast<double>(k - 1) / (n - 1);
    switch (shape) {
      case SynthShape::discriminative: return pos >= 2.0 / 3.0;
      case SynthShape::generative: return pos < 0.6;
      case SynthShape::autoencoder: return pos >= 0.25 && pos < 0.75;
    }
    return false;
  };
  auto kind_of = [&](int k) {
    const bool heavy = heavy_on_mobile(k);
    switch (shape) {
      case SynthShape::discriminative:
        if (k == n) return LayerKind::soft;
        if (heavy) return k % 2 ? LayerKind::fc : LayerKind::relu;
        return k % 3 == 1 ? LayerKind::conv : k % 3 == 2 ? LayerKind::relu : LayerKind::pool;
      case SynthShape::generative:
        if (k <= 2) return LayerKind::fc;
        return k % 2 ? LayerKind::deconv : LayerKind::relu;
      case SynthShape::autoencoder:
        if (k % 2 == 0) return LayerKind::relu;
        return 2 * k <= n ? LayerKind::conv : LayerKind::deconv;
    }
    return LayerKind::other;
  };

  std::vector<double> mobile_ms(n + 1), mobile_mj(n + 1), cloud_ms(n + 1);
  for (int k = 1; k <= n; ++k) {
    const bool heavy = heavy_on_mobile(k);
    double ms = 0;
    switch (shape) {
      case SynthShape::discriminative: ms = heavy ? rng.uniform(10, 25) : rng.uniform(3, 8); break;
      case SynthShape::generative: ms = heavy ? rng.uniform(10, 25) : rng.uniform(0.5, 2); break;
      case SynthShape::autoencoder: ms = heavy ? rng.uniform(15, 30) : rng.uniform(1, 3); break;
    }
    mobile_ms[k] = ms;
    mobile_mj[k] = ms * rng.uniform(2000, 4000) / 1000.0;
    cloud_ms[k] = ms / rng.uniform(10, 20);

    LayerSpec l;
    l.index = k;
    l.kind = kind_of(k);
    l.name = std::string(to_string(l.kind)) + std::to_string(k);
    l.input_bytes = detail::round_bytes(size[k - 1]);
    l.output_bytes = detail::round_bytes(size[k]);
    switch (l.kind) {
      case LayerKind::conv:
      case LayerKind::deconv: l.weight_bytes = detail::round_bytes(rng.uniform(1e4, 1e6)); break;
      case LayerKind::fc: l.weight_bytes = detail::round_bytes(rng.uniform(1e6, 1.6e7)); break;
      default: l.weight_bytes = 0; break;
    }
    l.compressible = l.kind != LayerKind::fc;
    l.zero_ratio = rng.uniform(0.3, 0.8);
    l.compression_ratio = rng.uniform(1.5, 4.0);
    inst.layers.push_back(std::move(l));
  }
  // Keep the chain consistent after rounding.
  for (int k = 1; k < n; ++k) inst.layers[k].input_bytes = inst.layers[k - 1].output_bytes;

  auto group_factor = [](int len) { return 1.0 - 0.03 * std::min(len - 1, 10); };
  for (int i = 1; i <= n; ++i) {
    double ms = 0, mj = 0, cms = 0;
    for (int j = i; j <= n; ++j) {
      ms += mobile_ms[j];
      mj += mobile_mj[j];
      cms += cloud_ms[j];
      const double f = group_factor(j - i + 1);
      inst.mobile_profile.entries[{i, j}] = {ms * f, mj * f};
      inst.cloud_profile.entries[{i, j}] = {cms * f, 0.0};
    }
  }
  inst.finalize();
  return inst;
}

}  // namespace layersplit
