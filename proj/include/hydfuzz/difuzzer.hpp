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

// Directed greybox fuzzer over a ProgramModel.
//
// Every execution is measured by two feedbacks: the ETS feedback (does the
// trace visit an ETS block never seen before) and the map feedback (does it
// cover any new block). Inputs interesting for either go to the corpus
// directory; inputs that reach a target, crash or time out go to the
// objective directory. Both get a metadata sidecar (see metadata.hpp) which
// the orchestrator uses for scheduling and triage.

#ifndef HYDFUZZ_DIFUZZER_HPP_
#define HYDFUZZ_DIFUZZER_HPP_

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "hydfuzz/metadata.hpp"
#include "hydfuzz/program_model.hpp"
#include "hydfuzz/target_analysis.hpp"

namespace hydfuzz {

using Rng = std::mt19937_64;

struct EtsFeedbackResult {
  bool is_interesting = false;
  std::vector<BlockId> ets_trace;
};

// ets_trace keeps the ETS blocks of the trace in order, collapsing
// consecutive repeats. ets_seen is updated.
EtsFeedbackResult EtsFeedback(const ExecutionTrace& trace,
                              const std::set<BlockId>& ets_blocks,
                              std::set<BlockId>& ets_seen);

// True when the trace covers a block outside `coverage`; coverage is updated.
bool MapFeedback(const ExecutionTrace& trace, std::set<BlockId>& coverage);

enum class ObjectiveKind { kNone, kTargetReach, kCrash, kTimeout };

// Crash and Timeout take precedence over TargetReach.
ObjectiveKind ClassifyObjective(const ExecutionTrace& trace);

// One random operator out of: bit flip, byte replace, byte insert, byte
// delete, 2-byte replace, 4-byte replace, splice with `splice_partner`.
// The result is at most input.size() + 8 bytes long. An empty input
// yields a single random byte.
Bytes Mutate(std::span<const std::uint8_t> input, Rng& rng,
             std::span<const std::uint8_t> splice_partner = {});

struct AnnealingParams {
  double t_exploration_secs = 10.0;
  double total_budget_secs = 60.0;
  double min_energy = 1.0;
  double max_energy = 64.0;
};

// T = 2^(-elapsed / t_exploration); d = distance / max_distance (1 for an
// infinite distance).
// energy = min + (max - min) * (1 - d) * (1 - T)
double AnnealingTemperature(double elapsed_secs, const AnnealingParams& p);
double AnnealingEnergy(double distance, double max_finite_distance,
                       double elapsed_secs, const AnnealingParams& p);

enum class Schedule { kEtsPriority, kAnnealing };

struct FuzzerOptions {
  std::string name = "w0";  // file-name prefix for this worker
  std::filesystem::path corpus_dir;
  std::filesystem::path objective_dir;
  Schedule schedule = Schedule::kEtsPriority;
  std::uint64_t rng_seed = 0;
  std::size_t step_limit = 10000;
  std::size_t mutations_per_seed = 16;
  std::size_t max_input_size = 1024;
  AnnealingParams annealing;
};

struct CorpusEntry {
  Bytes bytes;
  std::string file_name;
  std::int64_t created_at_ms = 0;  // since fuzzer start
  SeedMetadata meta;
  double distance = kInfiniteDistance;
  bool imported = false;
  std::uint64_t times_selected = 0;
};

struct ObjectiveEntry {
  std::string file_name;
  std::int64_t created_at_ms = 0;
  ObjectiveKind kind = ObjectiveKind::kNone;
  SeedMetadata meta;
};

struct FuzzerStats {
  std::uint64_t executions = 0;
  std::uint64_t imported = 0;
  std::size_t corpus_size = 0;
  std::size_t objectives = 0;
  std::size_t coverage = 0;
  // location -> ms since fuzzer start of the first input reaching it
  std::map<std::string, std::int64_t> first_reach_ms;
};

struct SyncResult {
  std::size_t examined = 0;
  std::size_t added_to_corpus = 0;
  std::size_t objectives = 0;
  std::chrono::duration<double> import_duration{0};
};

struct EvalResult {
  bool added_to_corpus = false;
  bool added_to_objectives = false;
  ObjectiveKind kind = ObjectiveKind::kNone;
  SeedMetadata meta;
};

class Fuzzer {
 public:
  Fuzzer(const ProgramModel& program, std::vector<EnhancedTargetSequence> ets,
         DistanceMap distances, FuzzerOptions options);

  // Evaluates `initial`, or 8 random inputs of input_arity bytes when empty.
  void Bootstrap(std::span<const Bytes> initial = {});

  // Selects one corpus seed and runs its mutation batch.
  void FuzzIteration();

  // Executes and measures every file of `dir` not imported before. With
  // `import_all` they enter the corpus regardless of feedback.
  SyncResult SyncFromDir(const std::filesystem::path& dir, bool import_all);

  EvalResult Evaluate(std::span<const std::uint8_t> input, bool force_corpus);

  const FuzzerStats& stats() const { return stats_; }
  const std::vector<CorpusEntry>& corpus() const { return corpus_; }
  const std::vector<ObjectiveEntry>& objectives() const { return objectives_; }
  const std::set<BlockId>& coverage() const { return coverage_; }
  const std::set<BlockId>& ets_seen() const { return ets_seen_; }
  const FuzzerOptions& options() const { return options_; }
  double ElapsedSeconds() const;

 private:
  std::size_t SelectEtsPriority();
  std::size_t SelectAnnealing();
  std::int64_t NowMs() const;

  const ProgramModel& program_;
  std::vector<EnhancedTargetSequence> ets_;
  std::set<BlockId> ets_blocks_;
  DistanceMap distances_;
  FuzzerOptions options_;
  Rng rng_;
  std::chrono::steady_clock::time_point start_;

  std::vector<CorpusEntry> corpus_;
  std::vector<ObjectiveEntry> objectives_;
  std::set<BlockId> coverage_;
  std::set<BlockId> ets_seen_;
  std::unordered_set<std::string> imported_names_;
  std::unordered_set<std::size_t> objective_signatures_;
  double max_finite_distance_ = 0.0;
  std::uint64_t corpus_counter_ = 0;
  std::uint64_t objective_counter_ = 0;
  FuzzerStats stats_;
};

// One-line client status, e.g.
// "[w0] time: 3.0s corpus: 12 objectives: 2 exec/s: 81234 coverage: 9"
std::string FormatStatusLine(const std::string& name, double elapsed_secs,
                             const FuzzerStats& stats);

struct ClientStatus {
  std::string name;
  double elapsed_secs = 0;
  std::size_t corpus = 0;
  std::size_t objectives = 0;
  double execs_per_sec = 0;
  std::size_t coverage = 0;
};

std::optional<ClientStatus> ParseStatusLine(std::string_view line);

}  // namespace hydfuzz

#endif  // HYDFUZZ_DIFUZZER_HPP_
