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

#include "hydfuzz/concolic.hpp"

#include <algorithm>
#include <bitset>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <set>

#include "hydfuzz/metadata.hpp"

namespace hydfuzz {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

std::vector<ConstraintSystem> InvertBranches(const ExecutionTrace& trace) {
  std::vector<ConstraintSystem> out;
  out.reserve(trace.constraints.size());
  for (std::size_t k = 0; k < trace.constraints.size(); ++k) {
    ConstraintSystem sys;
    sys.prefix.assign(trace.constraints.begin(),
                      trace.constraints.begin() + static_cast<std::ptrdiff_t>(k));
    sys.inverted = trace.constraints[k];
    sys.inverted.taken = !sys.inverted.taken;
    sys.index = k;
    out.push_back(std::move(sys));
  }
  return out;
}

bool ExplorerBudget::Valid() const {
  return per_query_limit <= total_solve_limit &&
         total_solve_limit <= per_run_limit && max_inversions > 0;
}

namespace {

struct Interval {
  std::uint64_t lo;
  std::uint64_t hi;
};

// A predicate together with the truth value it must have, expressed as the
// set of allowed big-endian values.
struct Requirement {
  std::vector<std::uint32_t> offsets;
  std::vector<Interval> allowed;
  std::uint64_t constant = 0;
};

Requirement MakeRequirement(const PathConstraint& c) {
  const BytePredicate& p = c.predicate;
  const Relation rel = c.taken ? p.relation : Negate(p.relation);
  const std::uint64_t max = p.MaxValue();
  const std::uint64_t k = p.constant;
  Requirement r{p.offsets, {}, k};
  switch (rel) {
    case Relation::kEq: r.allowed = {{k, k}}; break;
    case Relation::kNe:
      if (k > 0) r.allowed.push_back({0, k - 1});
      if (k < max) r.allowed.push_back({k + 1, max});
      break;
    case Relation::kLt: if (k > 0) r.allowed = {{0, k - 1}}; break;
    case Relation::kLe: r.allowed = {{0, k}}; break;
    case Relation::kGt: if (k < max) r.allowed = {{k + 1, max}}; break;
    case Relation::kGe: r.allowed = {{k, max}}; break;
  }
  return r;
}

struct TimedOut {};

// Backtracking search over the bytes of one connected component, assigned in
// increasing offset order. Because every predicate lists its offsets in
// increasing order, its assigned bytes always form a big-endian prefix, so
// the reachable value range is an interval that can be tested against the
// allowed set.
class ByteSearch {
 public:
  ByteSearch(std::vector<Requirement> reqs, std::vector<std::uint32_t> vars,
             const Bytes& base, Clock::time_point deadline)
      : reqs_(std::move(reqs)), vars_(std::move(vars)), deadline_(deadline) {
    for (std::size_t i = 0; i < vars_.size(); ++i) position_[vars_[i]] = i;
    base_values_.resize(vars_.size());
    for (std::size_t i = 0; i < vars_.size(); ++i) {
      base_values_[i] = vars_[i] < base.size() ? base[vars_[i]] : 0;
    }
    value_.assign(vars_.size(), 0);
    touching_.resize(vars_.size());
    for (std::size_t r = 0; r < reqs_.size(); ++r) {
      for (std::size_t j = 0; j < reqs_[r].offsets.size(); ++j) {
        touching_[position_.at(reqs_[r].offsets[j])].push_back({r, j});
      }
    }
  }

  // Assignment for vars (same order), or nullopt when unsatisfiable.
  std::optional<std::vector<std::uint8_t>> Run() {
    for (const Requirement& r : reqs_) {
      if (r.allowed.empty()) return std::nullopt;
    }
    if (Assign(0)) return value_;
    return std::nullopt;
  }

 private:
  bool Consistent(std::size_t r, std::size_t assigned_upto) const {
    const Requirement& req = reqs_[r];
    std::uint64_t prefix = 0;
    std::size_t fixed = 0;
    for (std::uint32_t off : req.offsets) {
      const std::size_t pos = position_.at(off);
      if (pos > assigned_upto) break;
      prefix = (prefix << 8) | value_[pos];
      ++fixed;
    }
    const std::size_t free_bytes = req.offsets.size() - fixed;
    std::uint64_t lo = prefix;
    std::uint64_t hi = prefix;
    for (std::size_t i = 0; i < free_bytes; ++i) {
      lo <<= 8;
      hi = (hi << 8) | 0xFF;
    }
    for (const Interval& iv : req.allowed) {
      if (iv.lo <= hi && lo <= iv.hi) return true;
    }
    return false;
  }

  // Byte values suggested by the constants of the predicates touching `pos`.
  std::vector<std::uint8_t> Candidates(std::size_t pos) const {
    std::vector<std::uint8_t> out{base_values_[pos]};
    for (const auto& [r, j] : touching_[pos]) {
      const Requirement& req = reqs_[r];
      const std::size_t shift = 8 * (req.offsets.size() - 1 - j);
      for (std::uint64_t v : {req.constant, req.constant + 1, req.constant - 1}) {
        out.push_back(static_cast<std::uint8_t>(v >> shift));
      }
    }
    return out;
  }

  bool Assign(std::size_t pos) {
    if (pos == vars_.size()) return true;
    if ((++nodes_ & 0x3FF) == 0 && Clock::now() > deadline_) throw TimedOut{};

    std::bitset<256> tried;
    auto attempt = [&](std::uint8_t v) {
      if (tried[v]) return false;
      tried[v] = true;
      value_[pos] = v;
      for (const auto& [r, j] : touching_[pos]) {
        (void)j;
        if (!Consistent(r, pos)) return false;
      }
      return Assign(pos + 1);
    };
    for (std::uint8_t v : Candidates(pos)) {
      if (attempt(v)) return true;
    }
    for (int v = 0; v < 256; ++v) {
      if (attempt(static_cast<std::uint8_t>(v))) return true;
    }
    return false;
  }

  std::vector<Requirement> reqs_;
  std::vector<std::uint32_t> vars_;
  Clock::time_point deadline_;
  std::map<std::uint32_t, std::size_t> position_;
  std::vector<std::uint8_t> base_values_;
  std::vector<std::uint8_t> value_;
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> touching_;
  std::uint64_t nodes_ = 0;
};

// Requirements sharing bytes (transitively) with the first one.
std::vector<Requirement> ComponentOf(const std::vector<Requirement>& all) {
  std::set<std::uint32_t> bytes(all.front().offsets.begin(),
                                all.front().offsets.end());
  std::vector<bool> taken(all.size(), false);
  taken[0] = true;
  bool grew = true;
  while (grew) {
    grew = false;
    for (std::size_t i = 1; i < all.size(); ++i) {
      if (taken[i]) continue;
      const bool shares = std::any_of(
          all[i].offsets.begin(), all[i].offsets.end(),
          [&bytes](std::uint32_t o) { return bytes.contains(o); });
      if (shares) {
        taken[i] = true;
        bytes.insert(all[i].offsets.begin(), all[i].offsets.end());
        grew = true;
      }
    }
  }
  std::vector<Requirement> out;
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (taken[i]) out.push_back(all[i]);
  }
  return out;
}

// nullopt: unsatisfiable. Throws TimedOut.
std::optional<Bytes> SolveRequirements(std::vector<Requirement> reqs,
                                       const Bytes& base,
                                       std::uint32_t frame_offset,
                                       Clock::time_point deadline) {
  std::set<std::uint32_t> var_set;
  for (const Requirement& r : reqs) var_set.insert(r.offsets.begin(), r.offsets.end());
  std::vector<std::uint32_t> vars(var_set.begin(), var_set.end());

  ByteSearch search(std::move(reqs), vars, base, deadline);
  auto assignment = search.Run();
  if (!assignment) return std::nullopt;

  Bytes out = base;
  if (out.size() < frame_offset + 1u) out.resize(frame_offset + 1u, 0);
  for (std::size_t i = 0; i < vars.size(); ++i) {
    const std::uint32_t off = vars[i];
    if (off >= out.size()) {
      if ((*assignment)[i] == 0) continue;  // zero padding already
      out.resize(off + 1u, 0);
    }
    out[off] = (*assignment)[i];
  }
  return out;
}

bool Holds(const PathConstraint& c, const Bytes& input) {
  return c.predicate.Evaluate(input) == c.taken;
}

}  // namespace

SolveResult Solve(const ConstraintSystem& system, const Bytes& base_input,
                  const ExplorerBudget& budget, SolveClock& clock) {
  if (clock.Exhausted()) return solve_result::BudgetExceeded{};
  const std::uint32_t frame = system.inverted.predicate.offsets.back();

  auto run = [&](std::vector<Requirement> reqs) -> std::optional<std::optional<Bytes>> {
    const auto begin = Clock::now();
    const Seconds limit = std::min(budget.per_query_limit, clock.remaining());
    const auto deadline =
        begin + std::chrono::duration_cast<Clock::duration>(limit);
    std::optional<std::optional<Bytes>> result;
    try {
      result = SolveRequirements(std::move(reqs), base_input, frame, deadline);
    } catch (const TimedOut&) {
    }
    clock.Charge(Clock::now() - begin);
    return result;
  };

  // The inverted constraint goes first so its component is the one solved;
  // prefix constraints outside it already hold on the base input.
  std::vector<Requirement> full{MakeRequirement(system.inverted)};
  for (const PathConstraint& c : system.prefix) full.push_back(MakeRequirement(c));

  auto full_result = run(ComponentOf(full));
  if (full_result && *full_result) {
    const Bytes& bytes = **full_result;
    bool ok = Holds(system.inverted, bytes);
    for (const PathConstraint& c : system.prefix) ok = ok && Holds(c, bytes);
    if (!ok) throw std::logic_error("solver produced an invalid model");
    return solve_result::Solution{bytes};
  }
  if (clock.Exhausted()) return solve_result::BudgetExceeded{};

  auto optimistic = run({MakeRequirement(system.inverted)});
  if (!optimistic) return solve_result::BudgetExceeded{};
  if (!*optimistic) return solve_result::Unsat{};
  return solve_result::OptimisticSolution{**optimistic};
}

SolveResult Solve(const ConstraintSystem& system, const Bytes& base_input,
                  const ExplorerBudget& budget) {
  SolveClock clock(budget.total_solve_limit);
  return Solve(system, base_input, budget, clock);
}

void CheckWritableDir(const fs::path& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) {
    throw ExplorerError("sync dir '" + dir.string() + "' is not a directory");
  }
  const fs::path probe = dir / ".write_probe";
  {
    std::ofstream out(probe);
    if (!out) {
      throw ExplorerError("sync dir '" + dir.string() + "' is not writable");
    }
  }
  fs::remove(probe, ec);
}

ExplorerRunResult RunExplorer(const Bytes& seed, const std::string& seed_name,
                              const ProgramModel& program,
                              const fs::path& sync_dir,
                              const ExplorerBudget& budget,
                              std::size_t step_limit,
                              const std::atomic<bool>* stop) {
  CheckWritableDir(sync_dir);
  const auto run_deadline =
      Clock::now() +
      std::chrono::duration_cast<Clock::duration>(budget.per_run_limit);

  const ExecutionTrace trace = Execute(program, seed, step_limit, true);
  const std::vector<ConstraintSystem> systems = InvertBranches(trace);

  ExplorerRunResult result;
  SolveClock clock(budget.total_solve_limit);
  std::set<Bytes> written;
  const std::size_t limit = std::min(budget.max_inversions, systems.size());
  for (std::size_t k = 0; k < limit; ++k) {
    if ((stop != nullptr && stop->load()) || Clock::now() > run_deadline ||
        clock.Exhausted()) {
      break;
    }
    ++result.systems_attempted;
    const SolveResult r = Solve(systems[k], seed, budget, clock);

    const Bytes* bytes = nullptr;
    bool optimistic = false;
    if (const auto* s = std::get_if<solve_result::Solution>(&r)) {
      ++result.solutions;
      bytes = &s->bytes;
    } else if (const auto* o = std::get_if<solve_result::OptimisticSolution>(&r)) {
      ++result.optimistic;
      bytes = &o->bytes;
      optimistic = true;
    } else if (std::holds_alternative<solve_result::Unsat>(r)) {
      ++result.unsat;
    } else {
      ++result.budget_exceeded;
    }
    if (bytes == nullptr || !written.insert(*bytes).second) continue;

    const std::string name = seed_name + "_inv" + std::to_string(systems[k].index);
    try {
      AtomicWriteFile(sync_dir / name, *bytes);
    } catch (const std::runtime_error& e) {
      throw ExplorerError(e.what());
    }
    ++result.files_written;
    result.generated.push_back(GeneratedInput{name, systems[k].index, optimistic});
  }
  return result;
}

}  // namespace hydfuzz
