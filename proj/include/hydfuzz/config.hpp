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

// Campaign configuration (TOML). See docs/config-format.md.

#ifndef HYDFUZZ_CONFIG_HPP_
#define HYDFUZZ_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hydfuzz/concolic.hpp"
#include "hydfuzz/difuzzer.hpp"
#include "hydfuzz/program_model.hpp"

namespace hydfuzz {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExplorerSection {
  std::string args;
  std::string target;  // as written, e.g. "/target_sydr @@"
  std::filesystem::path program_path;
  std::size_t jobs = 1;
};

struct DifuzzSection {
  std::string args;
  std::string target;
  std::filesystem::path program_path;
  std::filesystem::path work_dir;  // `path`
  std::size_t jobs = 1;
  // Extracted from args.
  std::optional<std::filesystem::path> initial_corpus;  // -i
  std::optional<std::filesystem::path> targets_file;    // -e
};

struct StopConditions {
  double max_duration_secs = 600.0;
  double stall_duration_secs = 300.0;  // time without new coverage
  bool stop_on_all_targets = true;
};

struct HybridConfig {
  ExplorerSection explorer;
  DifuzzSection difuzz;
  std::vector<TargetPoint> targets;  // empty: taken from -e or the program
  ExplorerBudget budget;
  StopConditions stop;
  // Multiplies the fixed cadences (60 s sync base and queue update, 1 s
  // status); 0.1 runs a campaign ten times faster than real-world pacing.
  double time_scale = 1.0;
  std::uint64_t seed = 0;
  Schedule schedule = Schedule::kEtsPriority;
  bool import_all = false;
  std::size_t step_limit = 10000;
  std::size_t mutations_per_seed = 16;
  AnnealingParams annealing;
};

// Parses and checks the document without touching the filesystem. Relative
// paths are resolved against `base_dir`.
HybridConfig ParseConfig(std::string_view text,
                         const std::filesystem::path& base_dir);

// ParseConfig plus file checks: both targets must be readable program
// models and parse to the same program.
HybridConfig LoadConfig(const std::filesystem::path& path);

// First whitespace-separated token of a target command ("/bin/x @@").
std::string TargetProgramPath(std::string_view target);

// Targets from a TOML file of [[target]] tables.
std::vector<TargetPoint> LoadTargetsFile(const std::filesystem::path& path);

// The program with the configured target list applied.
ProgramModel ResolveProgram(const HybridConfig& config);

}  // namespace hydfuzz

#endif  // HYDFUZZ_CONFIG_HPP_
