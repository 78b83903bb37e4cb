// Copyright 2026 The hydfuzz Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "hydfuzz/metadata.hpp"

#include <fstream>
#include <random>

#include "gtest/gtest.h"
#include "oracles.hpp"

namespace hydfuzz {
namespace {

namespace fs = std::filesystem;

TEST(MetadataTest, FixedLayout) {
  SeedMetadata m;
  m.is_interesting_ets = true;
  m.ets_trace = {0, 10, 11};
  m.reached_targets = {"valid.c:1181"};
  EXPECT_EQ(SerializeMetadata(m),
            "{\"is_interesting_ets\":true,\"is_interesting_map\":false,"
            "\"ets_trace\":[0,10,11],\"reached_targets\":[\"valid.c:1181\"],"
            "\"is_crash\":false,\"is_timeout\":false}\n");
}

TEST(MetadataTest, RoundTripIsByteIdentical) {
  std::mt19937_64 rng(10);
  for (int i = 0; i < 5000; ++i) {
    const SeedMetadata m = testing::RandomMetadata(rng);
    const std::string s = SerializeMetadata(m);
    const SeedMetadata back = ParseMetadata(s);
    EXPECT_EQ(back, m);
    EXPECT_EQ(SerializeMetadata(back), s);
  }
}

TEST(MetadataTest, RejectsMalformedDocuments) {
  EXPECT_THROW(ParseMetadata("not json"), std::runtime_error);
  EXPECT_THROW(ParseMetadata("{}"), std::runtime_error);
  EXPECT_THROW(
      ParseMetadata("{\"is_interesting_ets\":1,\"is_interesting_map\":false,"
                    "\"ets_trace\":[],\"reached_targets\":[],\"is_crash\":false,"
                    "\"is_timeout\":false}"),
      std::runtime_error);
  EXPECT_THROW(
      ParseMetadata("{\"is_interesting_ets\":true,\"is_interesting_map\":false,"
                    "\"ets_trace\":[],\"reached_targets\":[],\"is_crash\":true,"
                    "\"is_timeout\":true}"),
      std::runtime_error);
}

TEST(MetadataTest, SidecarNaming) {
  EXPECT_EQ(SidecarPath("/a/b/seed_1"), fs::path("/a/b/.seed_1.metadata"));
  EXPECT_TRUE(IsSidecarOrTemp("/a/.seed_1.metadata"));
  EXPECT_FALSE(IsSidecarOrTemp("/a/seed_1"));
}

TEST(MetadataTest, FileHelpers) {
  testing::TempDir dir("meta");
  const fs::path seed = dir / "s1";
  const Bytes bytes = {1, 2, 3};
  AtomicWriteFile(seed, bytes);
  EXPECT_EQ(ReadFileBytes(seed), bytes);
  EXPECT_FALSE(ReadMetadata(seed).has_value());

  SeedMetadata m;
  m.is_crash = true;
  WriteMetadata(seed, m);
  EXPECT_EQ(ReadMetadata(seed), m);
  EXPECT_EQ(ListSeedFiles(dir.path()), std::vector<fs::path>{seed});

  std::ofstream(SidecarPath(dir / "s2")) << "garbage";
  AtomicWriteFile(dir / "s2", std::string_view("x"));
  EXPECT_FALSE(ReadMetadata(dir / "s2").has_value());
  EXPECT_EQ(ListSeedFiles(dir.path()).size(), 2u);
  EXPECT_TRUE(ListSeedFiles(dir / "missing").empty());
  EXPECT_THROW(ReadFileBytes(dir / "missing"), std::runtime_error);
}

}  // namespace
}  // namespace hydfuzz
