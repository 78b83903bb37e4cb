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

#include "hydfuzz/config.hpp"

#include <fstream>

#include "gtest/gtest.h"
#include "oracles.hpp"

namespace hydfuzz {
namespace {

namespace fs = std::filesystem;

constexpr char kSample[] = R"(
[sydr]
args = "-j 4"
target = "/target_sydr @@"
jobs = 3

[difuzz]
target = "/target_libafl_difuzz @@"
args = "-j2 -i /corpus -e /ets.toml"
path = "/fuzzer_libafl_difuzz"
)";

TEST(ParseConfigTest, ReferenceSample) {
  const HybridConfig c = ParseConfig(kSample, "/base");
  EXPECT_EQ(c.explorer.jobs, 3u);
  EXPECT_EQ(c.explorer.target, "/target_sydr @@");
  EXPECT_EQ(c.explorer.program_path, fs::path("/target_sydr"));
  EXPECT_EQ(c.difuzz.jobs, 2u);
  EXPECT_EQ(c.difuzz.targets_file, fs::path("/ets.toml"));
  EXPECT_EQ(c.difuzz.initial_corpus, fs::path("/corpus"));
  EXPECT_EQ(c.difuzz.work_dir, fs::path("/fuzzer_libafl_difuzz"));
}

TEST(ParseConfigTest, MissingDifuzzTable) {
  EXPECT_THROW(ParseConfig("[sydr]\ntarget = \"/x\"\n", "/"), ConfigError);
}

TEST(ParseConfigTest, ZeroJobsRejected) {
  std::string text = kSample;
  text.replace(text.find("jobs = 3"), 8, "jobs = 0");
  EXPECT_THROW(ParseConfig(text, "/"), ConfigError);
  EXPECT_THROW(ParseConfig("[difuzz]\ntarget = \"/x\"\nargs = \"-j0\"\n", "/"),
               ConfigError);
}

TEST(ParseConfigTest, NoExplorerMeansPureMode) {
  const HybridConfig c = ParseConfig("[difuzz]\ntarget = \"p.toml\"\n", "/base");
  EXPECT_EQ(c.explorer.jobs, 0u);
  EXPECT_EQ(c.difuzz.jobs, 1u);
  EXPECT_EQ(c.difuzz.program_path, fs::path("/base/p.toml"));
  EXPECT_EQ(c.difuzz.work_dir, fs::path("/base/work"));
}

TEST(ParseConfigTest, BothExplorerSpellingsIsAnError) {
  EXPECT_THROW(ParseConfig("[sydr]\ntarget = \"/a\"\n[explorer]\ntarget = \"/a\"\n"
                           "[difuzz]\ntarget = \"/a\"\n",
                           "/"),
               ConfigError);
}

TEST(ParseConfigTest, OptionalTables) {
  const HybridConfig c = ParseConfig(R"(
[explorer]
target = "/p"
[difuzz]
target = "/p"
jobs = 4
[budget]
per_run_secs = 20
per_query_secs = 2
total_solve_secs = 10
max_inversions = 5
[stop]
max_duration_secs = 30
stall_duration_secs = 15
stop_on_all_targets = false
[campaign]
time_scale = 0.5
seed = 42
schedule = "annealing"
import_all = true
[[target]]
id = "t"
location = "a.c:3"
)",
                                     "/");
  EXPECT_EQ(c.difuzz.jobs, 4u);
  EXPECT_EQ(c.budget.max_inversions, 5u);
  EXPECT_DOUBLE_EQ(c.budget.per_query_limit.count(), 2.0);
  EXPECT_DOUBLE_EQ(c.stop.max_duration_secs, 30.0);
  EXPECT_FALSE(c.stop.stop_on_all_targets);
  EXPECT_DOUBLE_EQ(c.time_scale, 0.5);
  EXPECT_EQ(c.seed, 42u);
  EXPECT_EQ(c.schedule, Schedule::kAnnealing);
  EXPECT_TRUE(c.import_all);
  EXPECT_EQ(c.targets, (std::vector<TargetPoint>{{"t", "a.c:3"}}));
}

TEST(ParseConfigTest, BadValues) {
  EXPECT_THROW(ParseConfig("[difuzz]\ntarget = \"/p\"\n[campaign]\nschedule = \"x\"\n", "/"),
               ConfigError);
  EXPECT_THROW(ParseConfig("[difuzz]\ntarget = \"/p\"\n[budget]\nper_query_secs = 100\n", "/"),
               ConfigError);
  EXPECT_THROW(ParseConfig("[difuzz]\ntarget = \"/p\"\n[campaign]\ntime_scale = 0\n", "/"),
               ConfigError);
  EXPECT_THROW(ParseConfig("[difuzz\n", "/"), ConfigError);
}

TEST(TargetProgramPathTest, FirstToken) {
  EXPECT_EQ(TargetProgramPath("/target_sydr @@"), "/target_sydr");
  EXPECT_EQ(TargetProgramPath("  prog.toml"), "prog.toml");
}

constexpr char kProgram[] = R"(
entry_function = "main"
[[target]]
id = "own"
location = "a.c:1"
[[function]]
name = "main"
entry = 0
[[function.block]]
id = 0
label = "a.c:1"
term = { kind = "goto", next = 1 }
[[function.block]]
id = 1
label = "a.c:2"
term = { kind = "halt" }
)";

TEST(LoadConfigTest, ResolvesProgramsAndTargets) {
  testing::TempDir dir("cfg");
  std::ofstream(dir / "p.toml") << kProgram;
  std::ofstream(dir / "ets.toml") << "[[target]]\nid = \"e\"\nlocation = \"a.c:2\"\n";
  std::ofstream(dir / "c.toml") << "[explorer]\ntarget = \"p.toml @@\"\n"
                                << "[difuzz]\ntarget = \"p.toml @@\"\nargs = \"-e ets.toml\"\n";
  const HybridConfig c = LoadConfig(dir / "c.toml");
  EXPECT_EQ(ResolveProgram(c).targets(), (std::vector<TargetPoint>{{"e", "a.c:2"}}));

  HybridConfig own = c;
  own.difuzz.targets_file.reset();
  EXPECT_EQ(ResolveProgram(own).targets(), (std::vector<TargetPoint>{{"own", "a.c:1"}}));
  own.targets = {{"cfg", "a.c:2"}};
  EXPECT_EQ(ResolveProgram(own).targets(), (std::vector<TargetPoint>{{"cfg", "a.c:2"}}));
}

TEST(LoadConfigTest, UnreadableOrMismatchedTargets) {
  testing::TempDir dir("cfg");
  std::ofstream(dir / "p.toml") << kProgram;
  std::string other = kProgram;
  other.replace(other.find("next = 1"), 8, "next = 0");
  std::ofstream(dir / "q.toml") << other;
  std::ofstream(dir / "missing.toml") << "[difuzz]\ntarget = \"nope.toml\"\n";
  std::ofstream(dir / "mismatch.toml")
      << "[explorer]\ntarget = \"q.toml\"\n[difuzz]\ntarget = \"p.toml\"\n";
  EXPECT_THROW(LoadConfig(dir / "missing.toml"), ConfigError);
  EXPECT_THROW(LoadConfig(dir / "mismatch.toml"), ConfigError);
  EXPECT_THROW(LoadConfig(dir / "absent.toml"), ConfigError);
}

}  // namespace
}  // namespace hydfuzz
