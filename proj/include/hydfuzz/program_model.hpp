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

// Synthetic target programs. A ProgramModel is a set of functions whose
// basic blocks end in byte-predicate branches, calls, returns, crashes or
// halts. Execute() interprets it on a byte input and produces the trace a
// real instrumented binary would give the fuzzer (and, in concolic mode, the
// path constraints a symbolic executor would collect).

#ifndef HYDFUZZ_PROGRAM_MODEL_HPP_
#define HYDFUZZ_PROGRAM_MODEL_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

namespace hydfuzz {

using BlockId = std::uint32_t;
using Bytes = std::vector<std::uint8_t>;

enum class Relation { kEq, kNe, kLt, kLe, kGt, kGe };

std::string_view RelationName(Relation r);
// Accepts "eq", "ne", "lt", "le", "gt", "ge" (also "==", "!=", "<", "<=",
// ">", ">="). Throws std::invalid_argument otherwise.
Relation ParseRelation(std::string_view name);
Relation Negate(Relation r);

// Compares the big-endian integer formed by `offsets` against `constant`.
// Offsets past the end of the input read as zero.
struct BytePredicate {
  std::vector<std::uint32_t> offsets;
  Relation relation = Relation::kEq;
  std::uint64_t constant = 0;

  std::uint64_t Value(std::span<const std::uint8_t> input) const;
  bool Evaluate(std::span<const std::uint8_t> input) const;
  // Largest value representable by the named bytes.
  std::uint64_t MaxValue() const;

  friend bool operator==(const BytePredicate&, const BytePredicate&) = default;
};

namespace term {
struct Goto {
  BlockId next;
};
struct Branch {
  BytePredicate cond;
  BlockId then_block;
  BlockId else_block;
};
struct Call {
  std::string function;
  BlockId return_block;
};
struct Return {};
struct Crash {};
struct Halt {};
}  // namespace term

using Terminator = std::variant<term::Goto, term::Branch, term::Call,
                                term::Return, term::Crash, term::Halt>;

struct BasicBlock {
  BlockId id = 0;
  std::string label;  // "file:line"
  Terminator terminator = term::Halt{};
};

struct FunctionDef {
  std::string name;
  BlockId entry_block = 0;
  std::vector<BasicBlock> blocks;

  const BasicBlock* FindBlock(BlockId id) const;
};

struct TargetPoint {
  std::string id;
  std::string location;  // "file:line"

  friend bool operator==(const TargetPoint&, const TargetPoint&) = default;
};

enum class Outcome { kOk, kCrash, kTimeout };
std::string_view OutcomeName(Outcome o);

struct PathConstraint {
  BlockId block_id = 0;
  BytePredicate predicate;
  bool taken = false;

  friend bool operator==(const PathConstraint&, const PathConstraint&) = default;
};

struct ExecutionTrace {
  std::vector<BlockId> block_sequence;
  std::vector<std::string> visited_functions;  // first-visit order
  std::vector<std::string> reached_targets;    // locations, first-reach order
  Outcome outcome = Outcome::kOk;
  std::vector<PathConstraint> constraints;
};

class ProgramError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed document. line/column are 1-based; 0 when unknown.
class SyntaxError : public ProgramError {
 public:
  SyntaxError(const std::string& what, std::size_t line, std::size_t column);
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

// Well-formed document describing an invalid program.
class SemanticError : public ProgramError {
 public:
  using ProgramError::ProgramError;
};

// Immutable once constructed; safe to share between worker threads.
class ProgramModel {
 public:
  // Validates every structural invariant; throws SemanticError.
  ProgramModel(std::vector<FunctionDef> functions, std::string entry_function,
               std::vector<TargetPoint> targets);

  const std::vector<FunctionDef>& functions() const { return functions_; }
  const std::string& entry_function() const { return entry_function_; }
  const std::vector<TargetPoint>& targets() const { return targets_; }
  std::size_t input_arity() const { return input_arity_; }
  std::size_t block_count() const { return block_index_.size(); }

  const FunctionDef* FindFunction(std::string_view name) const;
  const BasicBlock& block(BlockId id) const;
  bool HasBlock(BlockId id) const { return block_index_.contains(id); }
  // Name of the function that owns `id`.
  const std::string& FunctionOf(BlockId id) const;
  // All blocks whose label equals `location`, in program order.
  std::vector<BlockId> BlocksWithLabel(std::string_view location) const;

  // Same program, different target list (validated the same way).
  ProgramModel WithTargets(std::vector<TargetPoint> targets) const;

  friend bool operator==(const ProgramModel& a, const ProgramModel& b);

 private:
  struct BlockRef {
    std::size_t function;
    std::size_t block;
  };

  void Validate();

  std::vector<FunctionDef> functions_;
  std::string entry_function_;
  std::vector<TargetPoint> targets_;
  std::size_t input_arity_ = 0;
  std::unordered_map<BlockId, BlockRef> block_index_;
  std::unordered_map<std::string, std::size_t> function_index_;
};

// Parses the TOML program-model format (docs/program-format.md).
ProgramModel ParseProgram(std::string_view text);
ProgramModel LoadProgram(const std::string& path);

// Deterministic interpretation. Each executed block costs one step; when
// `step_limit` blocks have run without termination the outcome is Timeout.
// Inputs shorter than input_arity behave as if zero-padded.
ExecutionTrace Execute(const ProgramModel& program,
                       std::span<const std::uint8_t> input,
                       std::size_t step_limit, bool collect_constraints);

}  // namespace hydfuzz

#endif  // HYDFUZZ_PROGRAM_MODEL_HPP_
