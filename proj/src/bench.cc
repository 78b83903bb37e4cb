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

#include "hydfuzz/bench.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>

#include <spdlog/spdlog.h>

namespace hydfuzz {

std::string BenchModeName(BenchMode m) {
  switch (m) {
    case BenchMode::kHybrid: return "hybrid";
    case BenchMode::kPure: return "pure";
    case BenchMode::kAnnealing: return "annealing";
  }
  return "?";
}

BenchMode ParseBenchMode(std::string_view name) {
  if (name == "hybrid") return BenchMode::kHybrid;
  if (name == "pure") return BenchMode::kPure;
  if (name == "annealing") return BenchMode::kAnnealing;
  throw ConfigError("unknown benchmark mode '" + std::string(name) + "'");
}

HybridConfig BenchRunConfig(const BenchmarkSpec& spec, BenchMode mode,
                            std::size_t repetition) {
  HybridConfig c;
  c.difuzz.program_path = spec.program_path;
  c.difuzz.target = spec.program_path.string();
  c.difuzz.jobs = 1;
  c.difuzz.work_dir = spec.work_root / (BenchModeName(mode) + "_" +
                                        std::to_string(repetition));
  c.explorer.program_path = spec.program_path;
  c.explorer.target = spec.program_path.string();
  c.explorer.jobs = mode == BenchMode::kHybrid ? spec.explorer_jobs : 0;
  c.targets = spec.targets;
  c.stop.max_duration_secs = spec.timeout_secs;
  c.stop.stall_duration_secs = spec.timeout_secs;
  c.stop.stop_on_all_targets = true;
  c.time_scale = spec.time_scale;
  // Same fuzzer seed for every mode of a repetition.
  c.seed = spec.seed + 1000003ULL * repetition;
  c.schedule =
      mode == BenchMode::kAnnealing ? Schedule::kAnnealing : Schedule::kEtsPriority;
  c.annealing.total_budget_secs = spec.timeout_secs;
  c.annealing.t_exploration_secs = spec.timeout_secs / 6.0;
  return c;
}

BenchResult RunBenchmark(const BenchmarkSpec& spec, const RunOptions& options) {
  if (spec.repetitions < 1) throw ConfigError("repetitions must be >= 1");
  if (!(spec.timeout_secs > 0)) throw ConfigError("timeout must be positive");
  BenchResult result;
  for (BenchMode mode : spec.modes) {
    for (std::size_t rep = 1; rep <= spec.repetitions; ++rep) {
      const FinalReport r = RunHybrid(BenchRunConfig(spec, mode, rep), options);
      spdlog::info("bench {} #{}: {} after {:.1f}s", BenchModeName(mode), rep,
                   r.stop_reason, r.duration_secs);
      for (const TargetReach& t : r.targets) {
        std::optional<double> tte = t.first_reach_secs;
        if (tte && *tte > spec.timeout_secs) tte.reset();
        result.rows.push_back(BenchRow{BenchModeName(mode), rep, t.id, tte});
      }
      result.reports.push_back(r);
    }
  }
  return result;
}

std::optional<double> BestTte(const BenchResult& result, std::string_view mode,
                              std::string_view target_id) {
  std::optional<double> best;
  for (const BenchRow& row : result.rows) {
    if (row.mode != mode || row.target_id != target_id || !row.tte_secs) continue;
    if (!best || *row.tte_secs < *best) best = row.tte_secs;
  }
  return best;
}

namespace {

std::string FormatTte(const std::optional<double>& t) {
  if (!t) return "";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", *t);
  return buf;
}

}  // namespace

std::string FormatBenchCsv(const BenchResult& result) {
  std::ostringstream out;
  out << "mode,repetition,target_id,tte_seconds\n";
  std::vector<std::string> modes, targets;
  for (const BenchRow& row : result.rows) {
    out << row.mode << ',' << row.repetition << ',' << row.target_id << ','
        << FormatTte(row.tte_secs) << '\n';
    if (std::find(modes.begin(), modes.end(), row.mode) == modes.end()) {
      modes.push_back(row.mode);
    }
    if (std::find(targets.begin(), targets.end(), row.target_id) == targets.end()) {
      targets.push_back(row.target_id);
    }
  }
  out << "\nbest_mode,target_id,best_tte_seconds\n";
  for (const std::string& m : modes) {
    for (const std::string& t : targets) {
      out << m << ',' << t << ',' << FormatTte(BestTte(result, m, t)) << '\n';
    }
  }
  return out.str();
}

}  // namespace hydfuzz
