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
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>

#include <json.hpp>

#include "layersplit/instance.hpp"

// Profile documents (JSON) in and out. Infinite costs are written as the
// string "inf".
namespace layersplit {

using json = nlohmann::json;

namespace detail {

class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {}

  [[noreturn]] void fail(const std::string& what) const { throw ParseError(path_, what); }

  const json& raw() const { return j_; }
  const std::string& path() const { return path_; }

  void expect_object(std::initializer_list<std::string_view> allowed) const {
    if (!j_.is_object()) fail("expected an object");
    for (const auto& [k, v] : j_.items()) {
      bool ok = false;
      for (auto a : allowed) ok = ok || a == k;
      if (!ok) Reader(v, path_ + "." + k).fail("unknown field");
    }
  }

  bool has(std::string_view key) const { return j_.is_object() && j_.contains(key); }

  Reader at(std::string_view key) const {
    if (!has(key)) Reader(j_, path_ + "." + std::string(key)).fail("required field is missing");
    return Reader(j_.at(std::string(key)), path_ + "." + std::string(key));
  }

  Reader index(std::size_t k) const {
    return Reader(j_.at(k), path_ + "[" + std::to_string(k) + "]");
  }

  double number() const {
    if (j_.is_number()) return j_.get<double>();
    if (j_.is_string()) {
      const auto s = j_.get<std::string>();
      if (s == "inf" || s == "Infinity") return kUnreachable;
    }
    fail("expected a number");
  }

  double number_or(std::string_view key, double fallback) const {
    return has(key) ? at(key).number() : fallback;
  }

  std::int64_t integer() const {
    if (j_.is_number_integer()) return j_.get<std::int64_t>();
    if (j_.is_number_float()) {
      const double d = j_.get<double>();
      if (std::floor(d) == d) return static_cast<std::int64_t>(d);
    }
    fail("expected an integer");
  }

  std::uint64_t bytes() const {
    const auto v = integer();
    if (v < 0) fail("byte counts must be >= 0");
    return static_cast<std::uint64_t>(v);
  }

  bool boolean() const {
    if (!j_.is_boolean()) fail("expected true or false");
    return j_.get<bool>();
  }

  std::string string() const {
    if (!j_.is_string()) fail("expected a string");
    return j_.get<std::string>();
  }

  std::size_t size() const {
    if (!j_.is_array()) fail("expected an array");
    return j_.size();
  }

 private:
  const json& j_;
  std::string path_;
};

inline int parse_key_index(const Reader& r, const std::string& key) {
  try {
    std::size_t used = 0;
    const int k = std::stoi(key, &used);
    if (used == key.size()) return k;
  } catch (const std::logic_error&) {
  }
  r.fail("key '" + key + "' is not an integer index");
}

inline TransferEntry read_transfer(const Reader& r) {
  r.expect_object({"latency_ms", "energy_mJ"});
  return {r.at("latency_ms").number(), r.at("energy_mJ").number()};
}

inline std::map<int, TransferEntry> read_indexed(const Reader& r) {
  std::map<int, TransferEntry> out;
  if (!r.raw().is_object()) r.fail("expected an object keyed by layer index");
  for (const auto& [k, v] : r.raw().items()) {
    Reader item(v, r.path() + "." + k);
    out[parse_key_index(r, k)] = read_transfer(item);
  }
  return out;
}

inline GroupedProfile read_profile(const Reader& r, Platform p, int batch) {
  GroupedProfile prof{p, batch, {}};
  for (std::size_t k = 0; k < r.size(); ++k) {
    const Reader e = r.index(k);
    e.expect_object({"i", "j", "latency_ms", "energy_mJ"});
    const int i = static_cast<int>(e.at("i").integer());
    const int j = static_cast<int>(e.at("j").integer());
    ExecCost c{e.at("latency_ms").number(), e.number_or("energy_mJ", 0.0)};
    if (!prof.entries.emplace(std::pair{i, j}, c).second) e.fail("duplicate entry");
  }
  return prof;
}

inline json number_json(double v) {
  if (std::isinf(v)) return "inf";
  return v;
}

inline json profile_json(const GroupedProfile& p) {
  json arr = json::array();
  for (const auto& [key, c] : p.entries) {
    arr.push_back({{"i", key.first},
                   {"j", key.second},
                   {"latency_ms", number_json(c.latency_ms)},
                   {"energy_mJ", number_json(c.energy_mJ)}});
  }
  return arr;
}

inline json transfer_json(const TransferEntry& e) {
  return {{"latency_ms", number_json(e.latency_ms)}, {"energy_mJ", number_json(e.energy_mJ)}};
}

inline json indexed_json(const std::map<int, TransferEntry>& m) {
  json out = json::object();
  for (const auto& [k, e] : m) out[std::to_string(k)] = transfer_json(e);
  return out;
}

}  // namespace detail

/// Parses and validates a profile document. Schema errors raise ParseError
/// with the offending field path; invariant failures raise ValidationError.
inline ProblemInstance load_instance(const json& doc) {
  using detail::Reader;
  const Reader root(doc, "$");
  root.expect_object({"name", "layers", "residual_blocks", "profiles", "alternate_profiles",
                      "link", "explicit_transfers", "mobile_idle_power_mW",
                      "compression_overhead", "training"});
  ProblemInstance inst;
  if (root.has("name")) inst.name = root.at("name").string();

  const Reader layers = root.at("layers");
  for (std::size_t k = 0; k < layers.size(); ++k) {
    const Reader l = layers.index(k);
    l.expect_object({"index", "name", "kind", "input_bytes", "output_bytes", "weight_bytes",
                     "compressible", "zero_ratio", "compression_ratio"});
    LayerSpec s;
    s.index = l.has("index") ? static_cast<int>(l.at("index").integer()) : static_cast<int>(k + 1);
    if (l.has("name")) s.name = l.at("name").string();
    if (l.has("kind")) {
      const auto kind = parse_layer_kind(l.at("kind").string());
      if (!kind) l.at("kind").fail("unknown layer kind");
      s.kind = *kind;
    }
    s.input_bytes = l.at("input_bytes").bytes();
    s.output_bytes = l.at("output_bytes").bytes();
    if (l.has("weight_bytes")) s.weight_bytes = l.at("weight_bytes").bytes();
    if (l.has("compressible")) s.compressible = l.at("compressible").boolean();
    if (l.has("zero_ratio")) s.zero_ratio = l.at("zero_ratio").number();
    if (l.has("compression_ratio")) s.compression_ratio = l.at("compression_ratio").number();
    inst.layers.push_back(std::move(s));
  }

  if (root.has("residual_blocks")) {
    const Reader rb = root.at("residual_blocks");
    for (std::size_t k = 0; k < rb.size(); ++k) {
      const Reader b = rb.index(k);
      b.expect_object({"source_layer", "sink_layer", "block_size"});
      ResidualBlock blk{static_cast<int>(b.at("source_layer").integer()),
                        static_cast<int>(b.at("sink_layer").integer())};
      if (b.has("block_size") && b.at("block_size").integer() != blk.block_size()) {
        b.at("block_size").fail("does not match sink_layer - source_layer + 1");
      }
      inst.residual_blocks.push_back(blk);
    }
  }

  const Reader profiles = root.at("profiles");
  profiles.expect_object({"batch_size", "mobile", "cloud"});
  const int batch = profiles.has("batch_size")
                        ? static_cast<int>(profiles.at("batch_size").integer())
                        : 1;
  inst.mobile_profile = detail::read_profile(profiles.at("mobile"), Platform::mobile, batch);
  inst.cloud_profile = detail::read_profile(profiles.at("cloud"), Platform::cloud, batch);
  if (root.has("alternate_profiles")) {
    const Reader alts = root.at("alternate_profiles");
    for (std::size_t k = 0; k < alts.size(); ++k) {
      const Reader a = alts.index(k);
      a.expect_object({"batch_size", "mobile", "cloud"});
      const int b = static_cast<int>(a.at("batch_size").integer());
      inst.alternate_profiles.push_back(
          {detail::read_profile(a.at("mobile"), Platform::mobile, b),
           detail::read_profile(a.at("cloud"), Platform::cloud, b)});
    }
  }

  const Reader link = root.at("link");
  link.expect_object({"name", "uplink_mbps", "downlink_mbps", "alpha_u", "alpha_d", "beta",
                      "rtt_ms", "offline"});
  if (link.has("name")) {
    const std::string name = link.at("name").string();
    if (auto p = LinkProfile::preset(name)) {
      inst.link = *p;
    } else if (name != "custom") {
      link.at("name").fail("unknown link preset (use 3G, 4G, WiFi or custom)");
    }
    inst.link.name = name;
  }
  inst.link.uplink_mbps = link.number_or("uplink_mbps", inst.link.uplink_mbps);
  inst.link.downlink_mbps = link.number_or("downlink_mbps", inst.link.downlink_mbps);
  inst.link.alpha_u = link.number_or("alpha_u", inst.link.alpha_u);
  inst.link.alpha_d = link.number_or("alpha_d", inst.link.alpha_d);
  inst.link.beta = link.number_or("beta", inst.link.beta);
  inst.link.rtt_ms = link.number_or("rtt_ms", 0.0);
  if (link.has("offline")) inst.link.offline = link.at("offline").boolean();

  if (root.has("explicit_transfers")) {
    const Reader x = root.at("explicit_transfers");
    x.expect_object({"upload_input", "upload", "download", "download_weights"});
    ExplicitTransfers t;
    t.upload_input = detail::read_transfer(x.at("upload_input"));
    t.upload = detail::read_indexed(x.at("upload"));
    t.download = detail::read_indexed(x.at("download"));
    if (x.has("download_weights")) t.download_weights = detail::read_indexed(x.at("download_weights"));
    inst.explicit_transfers = std::move(t);
  }
  inst.mobile_idle_power_mW = root.number_or("mobile_idle_power_mW", 0.0);
  if (root.has("compression_overhead")) {
    for (const auto& [k, e] : detail::read_indexed(root.at("compression_overhead"))) {
      inst.compression_overhead[k] = {e.latency_ms, e.energy_mJ};
    }
  }
  if (root.has("training")) {
    const Reader t = root.at("training");
    t.expect_object({"mirror", "backward_factor"});
    if (t.has("mirror")) inst.training.mirror = t.at("mirror").boolean();
    inst.training.backward_factor = t.number_or("backward_factor", 2.0);
  }
  inst.finalize();
  return inst;
}

inline ProblemInstance load_instance_text(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError("$", std::string("malformed JSON: ") + e.what());
  }
  return load_instance(doc);
}

inline ProblemInstance load_instance_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot read instance file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_instance_text(ss.str());
}

/// Canonical document for an instance (keys sorted, as `load_instance` reads).
inline json to_document(const ProblemInstance& inst) {
  json doc;
  if (!inst.name.empty()) doc["name"] = inst.name;
  json layers = json::array();
  for (const auto& l : inst.layers) {
    json j{{"index", l.index},
           {"name", l.name},
           {"kind", std::string(to_string(l.kind))},
           {"input_bytes", l.input_bytes},
           {"output_bytes", l.output_bytes},
           {"weight_bytes", l.weight_bytes},
           {"compressible", l.compressible}};
    if (l.zero_ratio) j["zero_ratio"] = *l.zero_ratio;
    if (l.compression_ratio) j["compression_ratio"] = *l.compression_ratio;
    layers.push_back(std::move(j));
  }
  doc["layers"] = std::move(layers);
  json blocks = json::array();
  for (const auto& b : inst.residual_blocks) {
    blocks.push_back({{"source_layer", b.source_layer}, {"sink_layer", b.sink_layer}});
  }
  doc["residual_blocks"] = std::move(blocks);
  doc["profiles"] = {{"batch_size", inst.mobile_profile.batch_size},
                     {"mobile", detail::profile_json(inst.mobile_profile)},
                     {"cloud", detail::profile_json(inst.cloud_profile)}};
  if (!inst.alternate_profiles.empty()) {
    json alts = json::array();
    for (const auto& s : inst.alternate_profiles) {
      alts.push_back({{"batch_size", s.mobile.batch_size},
                      {"mobile", detail::profile_json(s.mobile)},
                      {"cloud", detail::profile_json(s.cloud)}});
    }
    doc["alternate_profiles"] = std::move(alts);
  }
  const auto& k = inst.link;
  doc["link"] = {{"name", k.name},       {"uplink_mbps", k.uplink_mbps},
                 {"downlink_mbps", k.downlink_mbps}, {"alpha_u", k.alpha_u},
                 {"alpha_d", k.alpha_d}, {"beta", k.beta},
                 {"rtt_ms", k.rtt_ms},   {"offline", k.offline}};
  if (inst.explicit_transfers) {
    const auto& x = *inst.explicit_transfers;
    json t{{"upload_input", detail::transfer_json(x.upload_input)},
           {"upload", detail::indexed_json(x.upload)},
           {"download", detail::indexed_json(x.download)}};
    if (!x.download_weights.empty()) t["download_weights"] = detail::indexed_json(x.download_weights);
    doc["explicit_transfers"] = std::move(t);
  }
  doc["mobile_idle_power_mW"] = inst.mobile_idle_power_mW;
  if (!inst.compression_overhead.empty()) {
    json o = json::object();
    for (const auto& [idx, c] : inst.compression_overhead) {
      o[std::to_string(idx)] = detail::transfer_json({c.latency_ms, c.energy_mJ});
    }
    doc["compression_overhead"] = std::move(o);
  }
  doc["training"] = {{"mirror", inst.training.mirror},
                     {"backward_factor", inst.training.backward_factor}};
  return doc;
}

/// FNV-1a 64-bit hash of the canonical document, as 16 hex digits.
inline std::string instance_hash(const ProblemInstance& inst) {
  const std::string text = to_document(inst).dump();
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace layersplit
