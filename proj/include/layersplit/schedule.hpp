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

#include <compare>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "layersplit/problem_costs.hpp"

namespace layersplit {

/// Layers first..last (1-based, inclusive) executed back to back on one
/// platform.
struct Segment {
  int first = 0;
  int last = 0;
  Platform platform = Platform::mobile;

  int length() const { return last - first + 1; }
  auto operator<=>(const Segment&) const = default;
};

struct CostBreakdown {
  double computation = 0;
  double upload = 0;
  double download = 0;
  double weight_download = 0;
  double compression_overhead = 0;

  double total() const {
    return computation + upload + download + weight_download + compression_overhead;
  }
};

struct Schedule {
  std::vector<Segment> segments;
  double total_cost = 0;
  std::optional<double> total_resource;
  CostBreakdown breakdown;
  Mode mode = Mode::inference;
  Metric objective = Metric::latency;
  std::optional<Metric> resource_metric;
};

/// First-principles cost of a schedule under each metric.
struct ScheduleCosts {
  CostBreakdown latency;
  CostBreakdown energy;
  double cloud_time_ms = 0;

  const CostBreakdown& breakdown(Metric m) const {
    return m == Metric::energy ? energy : latency;
  }
  double total(Metric m) const {
    return m == Metric::cloud_time ? cloud_time_ms : breakdown(m).total();
  }
};

/// Run-length form, e.g. "M→C→M".
inline std::string schedule_pattern(const std::vector<Segment>& segments) {
  std::string out;
  for (const auto& s : segments) {
    if (!out.empty()) out += "→";
    out += platform_letter(s.platform);
  }
  return out;
}

inline std::string schedule_pattern(const Schedule& s) { return schedule_pattern(s.segments); }

/// Compact text form "C1-2,M3-3" used on the command line.
inline std::string format_segments(const std::vector<Segment>& segments) {
  std::ostringstream os;
  for (std::size_t k = 0; k < segments.size(); ++k) {
    if (k) os << ',';
    os << platform_letter(segments[k].platform) << segments[k].first << '-' << segments[k].last;
  }
  return os.str();
}

inline std::vector<Segment> parse_segments(std::string_view text) {
  std::vector<Segment> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find(',', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string item(text.substr(pos, end - pos));
    pos = end + 1;
    if (item.empty()) continue;
    Segment s;
    if (item[0] == 'M' || item[0] == 'm') {
      s.platform = Platform::mobile;
    } else if (item[0] == 'C' || item[0] == 'c') {
      s.platform = Platform::cloud;
    } else {
      throw ArgumentError("segment '" + item + "' must start with M or C");
    }
    const auto dash = item.find('-');
    try {
      std::size_t used = 0;
      if (dash == std::string::npos) {
        s.first = s.last = std::stoi(item.substr(1), &used);
        if (used != item.size() - 1) throw std::invalid_argument("trailing");
      } else {
        s.first = std::stoi(item.substr(1, dash - 1), &used);
        if (used != dash - 1) throw std::invalid_argument("trailing");
        s.last = std::stoi(item.substr(dash + 1), &used);
        if (used != item.size() - dash - 1) throw std::invalid_argument("trailing");
      }
    } catch (const std::logic_error&) {
      throw ArgumentError("malformed segment '" + item + "'");
    }
    out.push_back(s);
  }
  return out;
}

/// Throws ValidationError unless the segments tile 1..n as maximal runs.
inline void validate_tiling(const std::vector<Segment>& segments, int n) {
  std::vector<std::string> issues;
  int next = 1;
  for (std::size_t k = 0; k < segments.size(); ++k) {
    const auto& s = segments[k];
    if (s.first != next || s.last < s.first) {
      issues.push_back("segment " + std::to_string(k) + " does not continue at layer " +
                       std::to_string(next));
      break;
    }
    if (k > 0 && segments[k - 1].platform == s.platform) {
      issues.push_back("segments " + std::to_string(k - 1) + " and " + std::to_string(k) +
                       " share a platform");
    }
    next = s.last + 1;
  }
  if (issues.empty() && next != n + 1) {
    issues.push_back("segments cover 1.." + std::to_string(next - 1) + " instead of 1.." +
                     std::to_string(n));
  }
  if (!issues.empty()) throw ValidationError(issues);
}

inline Platform platform_of(const std::vector<Segment>& segments, int layer) {
  for (const auto& s : segments)
    if (s.first <= layer && layer <= s.last) return s.platform;
  throw ArgumentError("layer " + std::to_string(layer) + " not covered");
}

/// Recomputes latency, energy and cloud time of a tiling directly from the
/// grouped profiles and transfer costs.
inline ScheduleCosts schedule_costs(const ProblemCosts& costs, const std::vector<Segment>& segs) {
  ScheduleCosts out;
  auto each = [&](auto&& fn) {
    fn(Metric::latency, out.latency);
    fn(Metric::energy, out.energy);
  };
  auto charge = [&](const Charge& c, double CostBreakdown::*field) {
    each([&](Metric m, CostBreakdown& b) {
      b.*field += c.transfer(m);
      b.compression_overhead += c.overhead(m);
    });
  };
  for (std::size_t k = 0; k < segs.size(); ++k) {
    const Segment& s = segs[k];
    each([&](Metric m, CostBreakdown& b) { b.computation += costs.exec(s.first, s.last, s.platform, m); });
    if (s.platform == Platform::cloud) {
      out.cloud_time_ms += costs.exec(s.first, s.last, Platform::cloud, Metric::cloud_time);
      if (k == 0) charge(costs.upload_input(), &CostBreakdown::upload);
      charge(costs.weight_download(s.first, s.last), &CostBreakdown::weight_download);
      if (k + 1 == segs.size()) charge(costs.final_download(), &CostBreakdown::download);
    }
    if (k + 1 < segs.size() && segs[k + 1].platform != s.platform) {
      if (s.platform == Platform::mobile)
        charge(costs.upload_after(s.last), &CostBreakdown::upload);
      else
        charge(costs.download_after(s.last), &CostBreakdown::download);
    }
  }
  for (const auto& b : costs.blocks()) {
    const Platform src = platform_of(segs, b.source_layer);
    const Platform dst = platform_of(segs, b.sink_layer);
    if (src == dst) continue;
    if (src == Platform::mobile)
      charge(costs.skip_transfer(b, Direction::up), &CostBreakdown::upload);
    else
      charge(costs.skip_transfer(b, Direction::down), &CostBreakdown::download);
  }
  return out;
}

/// Deterministic preference among equal-cost schedules: fewer segments, then
/// more layers on the mobile, then the lexicographically smallest segment
/// list. Returns <0 when `a` is preferred.
struct TieKey {
  int segments = 0;
  int mobile_layers = 0;

  int compare(const TieKey& o) const {
    if (segments != o.segments) return segments < o.segments ? -1 : 1;
    if (mobile_layers != o.mobile_layers) return mobile_layers > o.mobile_layers ? -1 : 1;
    return 0;
  }
};

inline TieKey tie_key(const std::vector<Segment>& segs) {
  TieKey k{static_cast<int>(segs.size()), 0};
  for (const auto& s : segs)
    if (s.platform == Platform::mobile) k.mobile_layers += s.length();
  return k;
}

}  // namespace layersplit
