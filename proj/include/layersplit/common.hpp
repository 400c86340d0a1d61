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
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

// Shared vocabulary of the engine. Units are fixed across the whole library:
// latency in milliseconds, energy in millijoules, data in bytes, bandwidth in
// megabits per second and power in milliwatts.
namespace layersplit {

enum class Platform { mobile, cloud };

/// What a weight measures. `cloud_time` is only meaningful as a resource.
enum class Metric { latency, energy, cloud_time };

enum class Mode { inference, training };

/// Reserved "unreachable" weight. Every solver skips edges carrying it, so an
/// offline link forces mobile-only schedules without any float overflow.
inline constexpr double kUnreachable = std::numeric_limits<double>::infinity();

inline bool is_unreachable(double v) { return v == kUnreachable; }

// ---------------------------------------------------------------------------
// Errors

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed document. `path` is a JSON-pointer-like field path.
class ParseError : public Error {
 public:
  ParseError(std::string path, const std::string& what)
      : Error(path.empty() ? what : path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

/// Invariant violations. Carries every failure found, not only the first.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<std::string> issues)
      : Error(join(issues)), issues_(std::move(issues)) {}
  explicit ValidationError(const std::string& issue)
      : ValidationError(std::vector<std::string>{issue}) {}
  const std::vector<std::string>& issues() const { return issues_; }

 private:
  static std::string join(const std::vector<std::string>& issues) {
    std::string out = "validation failed";
    for (const auto& s : issues) out += "\n  - " + s;
    return out;
  }
  std::vector<std::string> issues_;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

class RangeError : public Error {
 public:
  using Error::Error;
};

class UnavailableLinkError : public Error {
 public:
  using Error::Error;
};

class UnsupportedTopologyError : public Error {
 public:
  using Error::Error;
};

/// Two independent evaluation routes disagree.
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

/// No schedule satisfies the request. `min_resource` is the smallest
/// resource value any schedule reaches (absent for unconstrained solves).
class InfeasibleError : public Error {
 public:
  InfeasibleError(const std::string& what, std::optional<double> min_resource)
      : Error(what), min_resource_(min_resource) {}
  std::optional<double> min_resource() const { return min_resource_; }

 private:
  std::optional<double> min_resource_;
};

// ---------------------------------------------------------------------------
// Enum text forms

inline std::string_view to_string(Platform p) {
  return p == Platform::mobile ? "mobile" : "cloud";
}

inline char platform_letter(Platform p) { return p == Platform::mobile ? 'M' : 'C'; }

inline Platform other(Platform p) {
  return p == Platform::mobile ? Platform::cloud : Platform::mobile;
}

inline std::string_view to_string(Metric m) {
  switch (m) {
    case Metric::latency: return "latency";
    case Metric::energy: return "energy";
    case Metric::cloud_time: return "cloud_time";
  }
  return "?";
}

inline std::string_view to_string(Mode m) {
  return m == Mode::inference ? "inference" : "training";
}

inline Platform parse_platform(std::string_view s) {
  if (s == "mobile" || s == "M") return Platform::mobile;
  if (s == "cloud" || s == "C") return Platform::cloud;
  throw ArgumentError("unknown platform '" + std::string(s) + "'");
}

inline Metric parse_metric(std::string_view s) {
  if (s == "latency") return Metric::latency;
  if (s == "energy") return Metric::energy;
  if (s == "cloud_time" || s == "cloud-time") return Metric::cloud_time;
  throw ArgumentError("unknown metric '" + std::string(s) + "'");
}

inline Mode parse_mode(std::string_view s) {
  if (s == "inference") return Mode::inference;
  if (s == "training") return Mode::training;
  throw ArgumentError("unknown mode '" + std::string(s) + "'");
}

/// Relative closeness used for floating-point cross checks.
inline bool nearly_equal(double a, double b, double rel) {
  if (a == b) return true;
  if (!std::isfinite(a) || !std::isfinite(b)) return false;
  return std::abs(a - b) <= rel * std::max({1.0, std::abs(a), std::abs(b)});
}

/// Resource sums of one schedule differ by a few ulps depending on the order
/// they were accumulated in, so bounds carry a small relative slack.
inline constexpr double kBoundSlack = 1e-12;

inline bool within_bound(double resource, double bound) {
  return resource <= bound + kBoundSlack * std::max(1.0, std::abs(bound));
}

}  // namespace layersplit
