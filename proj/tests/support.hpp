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
#include <random>
#include <string>

#include "layersplit.hpp"

namespace layersplit::testing {

#ifndef LAYERSPLIT_DATA_DIR
#define LAYERSPLIT_DATA_DIR "data"
#endif

inline std::string data_path(const std::string& file) {
  return std::string(LAYERSPLIT_DATA_DIR) + "/" + file;
}

inline ProblemInstance toy3() { return load_instance_file(data_path("toy3.json")); }

struct RandomOptions {
  int n = 5;
  // Multiples of 1/8: sums are exact, so equal-cost ties are common.
  bool dyadic = false;
  // Costs from the link model instead of explicit transfer tables.
  bool link_model = false;
  bool residual = false;
};

class Random {
 public:
  explicit Random(std::uint64_t seed) : g_(seed) {}
  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(g_);
  }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(g_); }
  double cost(bool dyadic, double lo, double hi) {
    if (!dyadic) return uniform(lo, hi);
    return integer(static_cast<int>(lo * 8), static_cast<int>(hi * 8)) / 8.0;
  }

 private:
  std::mt19937_64 g_;
};

/// Random positive grouped costs and transfers; every (i,j) entry present.
inline ProblemInstance random_instance(std::uint64_t seed, const RandomOptions& opt) {
  Random rng(seed);
  const int n = opt.n;
  const bool d = opt.dyadic;
  ProblemInstance inst;
  inst.name = "random-" + std::to_string(seed);
  for (int k = 1; k <= n; ++k) {
    LayerSpec l;
    l.index = k;
    l.kind = LayerKind::conv;
    l.name = "l" + std::to_string(k);
    l.input_bytes = k == 1 ? 4 * static_cast<std::uint64_t>(rng.integer(1000, 200000))
                           : inst.layers.back().output_bytes;
    l.output_bytes = 4 * static_cast<std::uint64_t>(rng.integer(1000, 200000));
    l.weight_bytes = 4 * static_cast<std::uint64_t>(rng.integer(0, 100000));
    inst.layers.push_back(l);
  }
  for (int i = 1; i <= n; ++i) {
    for (int j = i; j <= n; ++j) {
      const int len = j - i + 1;
      inst.mobile_profile.entries[{i, j}] = {rng.cost(d, 1, 10) * len, rng.cost(d, 1, 20) * len};
      inst.cloud_profile.entries[{i, j}] = {rng.cost(d, 0.125, 3) * len, 0.0};
    }
  }
  inst.mobile_idle_power_mW = d ? 500.0 : rng.uniform(0, 800);
  if (opt.link_model) {
    inst.link = {"custom", rng.uniform(1, 20), rng.uniform(2, 60), rng.uniform(100, 900),
                 rng.uniform(40, 150),   rng.uniform(100, 1300), 0, false};
  } else {
    inst.link = LinkProfile::cellular_4g();
    ExplicitTransfers x;
    x.upload_input = {rng.cost(d, 0.5, 12), rng.cost(d, 0.5, 25)};
    for (int k = 1; k <= n; ++k) {
      x.upload[k] = {rng.cost(d, 0.5, 12), rng.cost(d, 0.5, 25)};
      x.download[k] = {rng.cost(d, 0.125, 6), rng.cost(d, 0.125, 12)};
    }
    inst.explicit_transfers = x;
  }
  if (opt.residual && n >= 3) {
    const int src = rng.integer(1, n - 2);
    const int sink = rng.integer(src + 2, n);
    inst.residual_blocks.push_back({src, sink});
  }
  inst.finalize();
  return inst;
}

}  // namespace layersplit::testing
