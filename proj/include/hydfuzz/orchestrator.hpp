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

// Hybrid campaign driver.
//
// Fuzzer and explorer workers run as threads and exchange seeds only
// through the work directory:
//
//   <work>/corpus/<worker>/   fuzzer corpora (+ metadata sidecars)
//   <work>/objectives/        objectives of all fuzzer workers
//   <work>/sync/              explorer output, imported by the fuzzers
//   <work>/status/<worker>    per-client status lines
//   <work>/explorer/          log of generated inputs (JSON lines)
//   <work>/stats.log, stats.jsonl, report.json, sorted/
//
// The orchestrator owns the seed priority queue. Every (scaled) minute it
// pulls new corpus files into the queue, checks the stop conditions and logs
// statistics; every (scaled) second it parses the client status lines.

#ifndef HYDFUZZ_ORCHESTRATOR_HPP_
#define HYDFUZZ_ORCHESTRATOR_HPP_

#include <atomic>
#include <cstdint>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hydfuzz/config.hpp"

namespace hydfuzz {

inline constexpr double kDefaultSyncIntervalSecs = 60.0;
inline constexpr std::size_t kMaxWorkerRestarts = 3;

// 60 s before the first synchronization, then max(60, 3 * t) where t is the
// time the last import took.
double NextSyncInterval(std::optional<double> last_import_secs);

struct RunStatus {
  double elapsed_secs = 0;
  double secs_since_coverage_growth = 0;
  std::set<std::string> reached_targets;  // locations
};

struct StopDecision {
  bool stop = false;
  std::string reason;
};

StopDecision CheckStop(const RunStatus& status, const StopConditions& stop,
                       std::span<const TargetPoint> targets);

struct TargetReach {
  std::string id;
  std::string location;
  std::optional<double> first_reach_secs;
};

struct FinalReport {
  std::string mode;
  std::string stop_reason;
  double duration_secs = 0;
  std::size_t fuzzer_workers = 0;
  std::size_t explorer_workers = 0;
  std::size_t worker_restarts = 0;
  std::uint64_t executions = 0;
  std::size_t corpus_size = 0;
  std::size_t explorer_runs = 0;
  std::size_t explorer_files = 0;
  std::size_t objectives_before = 0;
  std::size_t objectives_after = 0;
  std::size_t objectives_archived = 0;
  std::vector<TargetReach> targets;
  std::vector<std::string> reached_targets;

  nlohmann::ordered_json ToJson() const;
};

struct RunOptions {
  const std::atomic<bool>* external_stop = nullptr;
  std::ostream* log = nullptr;  // statistics lines; null for silence
  bool print_client_status = false;
};

// Runs until a stop condition holds, then stops every worker, minimizes and
// sorts the objectives and writes <work>/report.json.
FinalReport RunHybrid(const HybridConfig& config, const RunOptions& options = {});

}  // namespace hydfuzz

#endif  // HYDFUZZ_ORCHESTRATOR_HPP_
