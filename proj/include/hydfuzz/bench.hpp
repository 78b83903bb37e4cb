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

// Time-to-exposure benchmark: repeated campaigns per mode, one CSV row per
// (mode, repetition, target).

#ifndef HYDFUZZ_BENCH_HPP_
#define HYDFUZZ_BENCH_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hydfuzz/orchestrator.hpp"

namespace hydfuzz {

enum class BenchMode { kHybrid, kPure, kAnnealing };

std::string BenchModeName(BenchMode m);
BenchMode ParseBenchMode(std::string_view name);  // throws ConfigError

struct BenchmarkSpec {
  std::filesystem::path program_path;
  std::vector<TargetPoint> targets;  // empty: the program's own
  std::vector<BenchMode> modes = {BenchMode::kHybrid, BenchMode::kPure};
  std::size_t repetitions = 10;
  double timeout_secs = 60.0;
  std::uint64_t seed = 1;
  double time_scale = 0.1;
  std::size_t explorer_jobs = 1;  // hybrid mode only
  std::filesystem::path work_root = "bench-work";
};

// The campaign configuration of one benchmark run.
HybridConfig BenchRunConfig(const BenchmarkSpec& spec, BenchMode mode,
                            std::size_t repetition);

struct BenchRow {
  std::string mode;
  std::size_t repetition = 0;  // 1-based
  std::string target_id;
  std::optional<double> tte_secs;  // empty: not reached before the timeout
};

struct BenchResult {
  std::vector<BenchRow> rows;
  std::vector<FinalReport> reports;  // one per run, in run order
};

BenchResult RunBenchmark(const BenchmarkSpec& spec,
                         const RunOptions& options = {});

// Best (minimum) TTE of `mode` for `target_id` over all repetitions.
std::optional<double> BestTte(const BenchResult& result, std::string_view mode,
                              std::string_view target_id);

// mode,repetition,target_id,tte_seconds rows followed by a summary block
// best_mode,target_id,best_tte_seconds.
std::string FormatBenchCsv(const BenchResult& result);

}  // namespace hydfuzz

#endif  // HYDFUZZ_BENCH_HPP_
