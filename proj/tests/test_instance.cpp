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

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "support.hpp"

namespace layersplit {
namespace {

json toy3_doc() {
  std::ifstream in(testing::data_path("toy3.json"));
  return json::parse(in);
}

TEST(Document, LoadsToy3) {
  const auto inst = testing::toy3();
  EXPECT_EQ(inst.name, "toy3");
  ASSERT_EQ(inst.layer_count(), 3);
  EXPECT_EQ(inst.layers[2].output_bytes, 8192u);
  EXPECT_EQ(inst.link.name, "4G");
  EXPECT_DOUBLE_EQ(inst.link.uplink_mbps, 5.85);
  EXPECT_DOUBLE_EQ(segment_cost(inst, 1, 2, Platform::mobile, Metric::latency), 10);
  EXPECT_DOUBLE_EQ(segment_cost(inst, 1, 3, Platform::cloud, Metric::cloud_time), 3);
  EXPECT_DOUBLE_EQ(segment_cost(inst, 1, 3, Platform::mobile, Metric::cloud_time), 0);
}

TEST(Document, UnknownFieldNamesItsPath) {
  auto doc = toy3_doc();
  doc["layers"][1]["colour"] = "red";
  try {
    load_instance(doc);
    FAIL() << "accepted an unknown field";
  } catch (const ParseError& e) {
    EXPECT_NE(e.path().find("layers[1]"), std::string::npos) << e.what();
  }
}

TEST(Document, WrongTypeIsParseError) {
  auto doc = toy3_doc();
  doc["layers"][0]["input_bytes"] = "big";
  EXPECT_THROW(load_instance(doc), ParseError);
  EXPECT_THROW(load_instance_text("{not json"), ParseError);
}

TEST(Document, MissingSingletonIsValidationError) {
  auto doc = toy3_doc();
  auto& mobile = doc["profiles"]["mobile"];
  for (std::size_t k = 0; k < mobile.size(); ++k) {
    if (mobile[k]["i"] == 2 && mobile[k]["j"] == 2) {
      mobile.erase(k);
      break;
    }
  }
  EXPECT_THROW(load_instance(doc), ValidationError);
}

TEST(Document, MissingGroupComposesCheapestSplit) {
  auto doc = toy3_doc();
  auto& cloud = doc["profiles"]["cloud"];
  for (std::size_t k = 0; k < cloud.size(); ++k) {
    if (cloud[k]["i"] == 1 && cloud[k]["j"] == 3) {
      cloud.erase(k);
      break;
    }
  }
  const auto inst = load_instance(doc);
  // min(c11 + c23, c12 + c33) = min(1 + 2, 2 + 1)
  EXPECT_DOUBLE_EQ(segment_cost(inst, 1, 3, Platform::cloud, Metric::latency), 3);
  EXPECT_FALSE(inst.warnings.empty());
}

TEST(Document, ChainBytesMustAgree) {
  auto doc = toy3_doc();
  doc["layers"][1]["input_bytes"] = 100;
  try {
    load_instance(doc);
    FAIL();
  } catch (const ValidationError& e) {
    ASSERT_EQ(e.issues().size(), 1u);
    EXPECT_NE(e.issues()[0].find("layers[1]"), std::string::npos);
  }
}

TEST(Document, NegativeCostRejected) {
  auto doc = toy3_doc();
  doc["profiles"]["mobile"][0]["latency_ms"] = -1;
  EXPECT_THROW(load_instance(doc), ValidationError);
}

TEST(Document, RoundTripKeepsHash) {
  const auto inst = testing::toy3();
  const auto again = load_instance(to_document(inst));
  EXPECT_EQ(instance_hash(inst), instance_hash(again));
  EXPECT_EQ(to_document(inst).dump(), to_document(again).dump());
  auto other = to_document(inst);
  other["profiles"]["mobile"][0]["latency_ms"] = 5.5;
  EXPECT_NE(instance_hash(load_instance(other)), instance_hash(inst));
}

TEST(Document, LinkPresetWithOverride) {
  auto doc = toy3_doc();
  doc["link"] = {{"name", "3G"}, {"rtt_ms", 30}};
  const auto inst = load_instance(doc);
  EXPECT_DOUBLE_EQ(inst.link.uplink_mbps, 1.1);
  EXPECT_DOUBLE_EQ(inst.link.rtt_ms, 30);
  doc["link"] = {{"name", "5G"}};
  EXPECT_THROW(load_instance(doc), ParseError);
}

TEST(Document, AlternateBatchProfiles) {
  auto doc = toy3_doc();
  json alt = {{"batch_size", 4}, {"mobile", doc["profiles"]["mobile"]},
              {"cloud", doc["profiles"]["cloud"]}};
  for (auto& e : alt["mobile"]) e["latency_ms"] = e["latency_ms"].get<double>() * 3;
  doc["alternate_profiles"] = json::array({alt});
  const auto inst = load_instance(doc);
  const auto b4 = with_batch(inst, 4);
  EXPECT_EQ(b4.batch(), 4);
  EXPECT_DOUBLE_EQ(segment_cost(b4, 1, 1, Platform::mobile, Metric::latency), 15);
  EXPECT_EQ(with_batch(b4, 1).batch(), 1);
  EXPECT_THROW(with_batch(inst, 8), ValidationError);
}

TEST(Synth, Deterministic) {
  for (auto shape : {SynthShape::discriminative, SynthShape::generative, SynthShape::autoencoder}) {
    const auto a = to_document(synth_benchmark(shape, 12, 42)).dump();
    const auto b = to_document(synth_benchmark(shape, 12, 42)).dump();
    EXPECT_EQ(a, b);
    EXPECT_NE(a, to_document(synth_benchmark(shape, 12, 43)).dump());
  }
}

TEST(Synth, ShapesOfTensorSizes) {
  const auto d = synth_benchmark(SynthShape::discriminative, 10, 1);
  EXPECT_GT(d.tensor_bytes(1), d.tensor_bytes(10));
  const auto g = synth_benchmark(SynthShape::generative, 10, 1);
  EXPECT_LT(g.tensor_bytes(0), g.tensor_bytes(10));
  const auto a = synth_benchmark(SynthShape::autoencoder, 10, 1);
  EXPECT_LT(a.tensor_bytes(5), a.tensor_bytes(0));
  EXPECT_LT(a.tensor_bytes(5), a.tensor_bytes(10));
}

TEST(Synth, RejectsBadArguments) {
  EXPECT_THROW(synth_benchmark(SynthShape::generative, 1, 1), ArgumentError);
  EXPECT_THROW(parse_synth_shape("triangle"), ArgumentError);
}

TEST(Synth, LoadsBackFromDocument) {
  const auto inst = synth_benchmark(SynthShape::autoencoder, 16, 3);
  const auto back = load_instance(to_document(inst));
  EXPECT_EQ(instance_hash(inst), instance_hash(back));
  for (int i = 1; i <= 16; ++i)
    for (int j = i; j <= 16; ++j)
      EXPECT_EQ(segment_cost(inst, i, j, Platform::mobile, Metric::energy),
                segment_cost(back, i, j, Platform::mobile, Metric::energy));
}

}  // namespace
}  // namespace layersplit
