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

// Concolic explorer. Runs a seed with constraint collection, inverts every
// executed branch in trace order and solves the resulting path predicates
// over the input bytes. Generated inputs go to the sync directory as plain
// files; the fuzzer measures them on import.

#ifndef HYDFUZZ_CONCOLIC_HPP_
#define HYDFUZZ_CONCOLIC_HPP_

#include <atomic>
#include <chrono>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "hydfuzz/program_model.hpp"

namespace hydfuzz {

struct ConstraintSystem {
  std::vector<PathConstraint> prefix;  // must hold as executed
  PathConstraint inverted;             // `taken` already flipped
  std::size_t index = 0;               // position of `inverted` in the trace
};

// One system per executed branch: system k keeps constraints [0, k) and
// negates constraint k.
std::vector<ConstraintSystem> InvertBranches(const ExecutionTrace& trace);

using Seconds = std::chrono::duration<double>;

struct ExplorerBudget {
  Seconds per_run_limit{12.0};
  Seconds per_query_limit{1.0};
  Seconds total_solve_limit{6.0};
  std::size_t max_inversions = 64;

  // per_query <= total_solve <= per_run
  bool Valid() const;
};

namespace solve_result {
struct Solution {
  Bytes bytes;
};
// Satisfies only the inverted constraint.
struct OptimisticSolution {
  Bytes bytes;
};
struct Unsat {};
struct BudgetExceeded {};
}  // namespace solve_result

using SolveResult =
    std::variant<solve_result::Solution, solve_result::OptimisticSolution,
                 solve_result::Unsat, solve_result::BudgetExceeded>;

// Tracks the solving time spent across one explorer run.
class SolveClock {
 public:
  explicit SolveClock(Seconds total_limit) : remaining_(total_limit) {}
  Seconds remaining() const { return remaining_; }
  void Charge(Seconds spent) { remaining_ -= spent; }
  bool Exhausted() const { return remaining_ <= Seconds::zero(); }

 private:
  Seconds remaining_;
};

// Finds bytes satisfying prefix and inverted constraint, changing as few
// bytes of `base_input` as possible. Falls back to an optimistic solution
// when the full system is unsatisfiable or exceeds the per-query limit.
SolveResult Solve(const ConstraintSystem& system, const Bytes& base_input,
                  const ExplorerBudget& budget, SolveClock& clock);
SolveResult Solve(const ConstraintSystem& system, const Bytes& base_input,
                  const ExplorerBudget& budget);

class ExplorerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GeneratedInput {
  std::string file_name;
  std::size_t inverted_index = 0;
  bool optimistic = false;
};

struct ExplorerRunResult {
  std::size_t files_written = 0;
  std::size_t systems_attempted = 0;
  std::size_t solutions = 0;
  std::size_t optimistic = 0;
  std::size_t unsat = 0;
  std::size_t budget_exceeded = 0;
  std::vector<GeneratedInput> generated;
};

// Throws ExplorerError when sync_dir cannot be written. `stop` may be null.
ExplorerRunResult RunExplorer(const Bytes& seed, const std::string& seed_name,
                              const ProgramModel& program,
                              const std::filesystem::path& sync_dir,
                              const ExplorerBudget& budget,
                              std::size_t step_limit,
                              const std::atomic<bool>* stop = nullptr);

// Throws ExplorerError unless `dir` is an existing writable directory.
void CheckWritableDir(const std::filesystem::path& dir);

}  // namespace hydfuzz

#endif  // HYDFUZZ_CONCOLIC_HPP_
