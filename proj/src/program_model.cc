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

#include "hydfuzz/program_model.hpp"

#include <algorithm>
#include <string>
#include <unordered_set>
#include <utility>

namespace hydfuzz {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

}  // namespace

std::string_view RelationName(Relation r) {
  switch (r) {
    case Relation::kEq: return "eq";
    case Relation::kNe: return "ne";
    case Relation::kLt: return "lt";
    case Relation::kLe: return "le";
    case Relation::kGt: return "gt";
    case Relation::kGe: return "ge";
  }
  return "?";
}

Relation ParseRelation(std::string_view name) {
  if (name == "eq" || name == "==") return Relation::kEq;
  if (name == "ne" || name == "!=") return Relation::kNe;
  if (name == "lt" || name == "<") return Relation::kLt;
  if (name == "le" || name == "<=") return Relation::kLe;
  if (name == "gt" || name == ">") return Relation::kGt;
  if (name == "ge" || name == ">=") return Relation::kGe;
  throw std::invalid_argument("unknown relation '" + std::string(name) + "'");
}

Relation Negate(Relation r) {
  switch (r) {
    case Relation::kEq: return Relation::kNe;
    case Relation::kNe: return Relation::kEq;
    case Relation::kLt: return Relation::kGe;
    case Relation::kLe: return Relation::kGt;
    case Relation::kGt: return Relation::kLe;
    case Relation::kGe: return Relation::kLt;
  }
  return r;
}

std::uint64_t BytePredicate::Value(std::span<const std::uint8_t> input) const {
  std::uint64_t v = 0;
  for (std::uint32_t off : offsets) {
    v = (v << 8) | (off < input.size() ? input[off] : 0u);
  }
  return v;
}

std::uint64_t BytePredicate::MaxValue() const {
  if (offsets.size() >= 8) return ~std::uint64_t{0};
  return (std::uint64_t{1} << (8 * offsets.size())) - 1;
}

bool BytePredicate::Evaluate(std::span<const std::uint8_t> input) const {
  const std::uint64_t v = Value(input);
  switch (relation) {
    case Relation::kEq: return v == constant;
    case Relation::kNe: return v != constant;
    case Relation::kLt: return v < constant;
    case Relation::kLe: return v <= constant;
    case Relation::kGt: return v > constant;
    case Relation::kGe: return v >= constant;
  }
  return false;
}

const BasicBlock* FunctionDef::FindBlock(BlockId id) const {
  for (const BasicBlock& b : blocks) {
    if (b.id == id) return &b;
  }
  return nullptr;
}

std::string_view OutcomeName(Outcome o) {
  switch (o) {
    case Outcome::kOk: return "ok";
    case Outcome::kCrash: return "crash";
    case Outcome::kTimeout: return "timeout";
  }
  return "?";
}

SyntaxError::SyntaxError(const std::string& what, std::size_t line,
                         std::size_t column)
    : ProgramError(line == 0 ? what
                             : what + " (line " + std::to_string(line) +
                                   ", column " + std::to_string(column) + ")"),
      line_(line),
      column_(column) {}

ProgramModel::ProgramModel(std::vector<FunctionDef> functions,
                           std::string entry_function,
                           std::vector<TargetPoint> targets)
    : functions_(std::move(functions)),
      entry_function_(std::move(entry_function)),
      targets_(std::move(targets)) {
  Validate();
}

void ProgramModel::Validate() {
  if (functions_.empty()) throw SemanticError("program has no functions");

  for (std::size_t fi = 0; fi < functions_.size(); ++fi) {
    const FunctionDef& fn = functions_[fi];
    if (fn.name.empty()) throw SemanticError("function with empty name");
    if (!function_index_.emplace(fn.name, fi).second) {
      throw SemanticError("duplicate function '" + fn.name + "'");
    }
    for (std::size_t bi = 0; bi < fn.blocks.size(); ++bi) {
      const BasicBlock& b = fn.blocks[bi];
      if (!block_index_.emplace(b.id, BlockRef{fi, bi}).second) {
        throw SemanticError("duplicate block id " + std::to_string(b.id));
      }
      if (b.label.empty()) {
        throw SemanticError("block " + std::to_string(b.id) +
                            " has an empty label");
      }
    }
  }

  auto require_local = [this](const FunctionDef& fn, BlockId from, BlockId to) {
    auto it = block_index_.find(to);
    if (it == block_index_.end() ||
        functions_[it->second.function].name != fn.name) {
      throw SemanticError("block " + std::to_string(from) +
                          " references block " + std::to_string(to) +
                          " which is not in function '" + fn.name + "'");
    }
  };

  std::size_t arity = 0;
  for (const FunctionDef& fn : functions_) {
    if (fn.FindBlock(fn.entry_block) == nullptr) {
      throw SemanticError("entry block " + std::to_string(fn.entry_block) +
                          " of function '" + fn.name + "' does not exist");
    }
    for (const BasicBlock& b : fn.blocks) {
      std::visit(
          Overloaded{
              [&](const term::Goto& t) { require_local(fn, b.id, t.next); },
              [&](const term::Branch& t) {
                const auto& offs = t.cond.offsets;
                if (offs.empty() || offs.size() > 8) {
                  throw SemanticError("block " + std::to_string(b.id) +
                                      ": predicate must name 1-8 bytes");
                }
                if (!std::is_sorted(offs.begin(), offs.end()) ||
                    std::adjacent_find(offs.begin(), offs.end()) !=
                        offs.end()) {
                  throw SemanticError(
                      "block " + std::to_string(b.id) +
                      ": predicate offsets must be strictly increasing");
                }
                if (t.cond.constant > t.cond.MaxValue()) {
                  throw SemanticError("block " + std::to_string(b.id) +
                                      ": constant does not fit in " +
                                      std::to_string(offs.size()) + " bytes");
                }
                arity = std::max<std::size_t>(arity, offs.back() + 1);
                require_local(fn, b.id, t.then_block);
                require_local(fn, b.id, t.else_block);
              },
              [&](const term::Call& t) {
                if (!function_index_.contains(t.function)) {
                  throw SemanticError("block " + std::to_string(b.id) +
                                      " calls undefined function '" +
                                      t.function + "'");
                }
                require_local(fn, b.id, t.return_block);
              },
              [](const auto&) {},
          },
          b.terminator);
    }
  }
  input_arity_ = arity;

  if (!function_index_.contains(entry_function_)) {
    throw SemanticError("entry function '" + entry_function_ +
                        "' does not exist");
  }

  std::unordered_set<std::string> target_ids;
  for (const TargetPoint& t : targets_) {
    if (!target_ids.insert(t.id).second) {
      throw SemanticError("duplicate target id '" + t.id + "'");
    }
    if (BlocksWithLabel(t.location).empty()) {
      throw SemanticError("target '" + t.id + "' location '" + t.location +
                          "' matches no block label");
    }
  }
}

const FunctionDef* ProgramModel::FindFunction(std::string_view name) const {
  auto it = function_index_.find(std::string(name));
  return it == function_index_.end() ? nullptr : &functions_[it->second];
}

const BasicBlock& ProgramModel::block(BlockId id) const {
  const BlockRef& ref = block_index_.at(id);
  return functions_[ref.function].blocks[ref.block];
}

const std::string& ProgramModel::FunctionOf(BlockId id) const {
  return functions_[block_index_.at(id).function].name;
}

std::vector<BlockId> ProgramModel::BlocksWithLabel(
    std::string_view location) const {
  std::vector<BlockId> out;
  for (const FunctionDef& fn : functions_) {
    for (const BasicBlock& b : fn.blocks) {
      if (b.label == location) out.push_back(b.id);
    }
  }
  return out;
}

ProgramModel ProgramModel::WithTargets(std::vector<TargetPoint> targets) const {
  return ProgramModel(functions_, entry_function_, std::move(targets));
}

namespace {

bool SamePredicate(const BytePredicate& a, const BytePredicate& b) {
  return a == b;
}

bool SameTerminator(const Terminator& a, const Terminator& b) {
  if (a.index() != b.index()) return false;
  return std::visit(
      Overloaded{
          [&](const term::Goto& x) {
            return x.next == std::get<term::Goto>(b).next;
          },
          [&](const term::Branch& x) {
            const auto& y = std::get<term::Branch>(b);
            return SamePredicate(x.cond, y.cond) &&
                   x.then_block == y.then_block && x.else_block == y.else_block;
          },
          [&](const term::Call& x) {
            const auto& y = std::get<term::Call>(b);
            return x.function == y.function && x.return_block == y.return_block;
          },
          [](const auto&) { return true; },
      },
      a);
}

}  // namespace

bool operator==(const ProgramModel& a, const ProgramModel& b) {
  if (a.entry_function_ != b.entry_function_ || a.targets_ != b.targets_ ||
      a.functions_.size() != b.functions_.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.functions_.size(); ++i) {
    const FunctionDef& fa = a.functions_[i];
    const FunctionDef& fb = b.functions_[i];
    if (fa.name != fb.name || fa.entry_block != fb.entry_block ||
        fa.blocks.size() != fb.blocks.size()) {
      return false;
    }
    for (std::size_t j = 0; j < fa.blocks.size(); ++j) {
      const BasicBlock& x = fa.blocks[j];
      const BasicBlock& y = fb.blocks[j];
      if (x.id != y.id || x.label != y.label ||
          !SameTerminator(x.terminator, y.terminator)) {
        return false;
      }
    }
  }
  return true;
}

ExecutionTrace Execute(const ProgramModel& program,
                       std::span<const std::uint8_t> input,
                       std::size_t step_limit, bool collect_constraints) {
  ExecutionTrace trace;
  std::vector<BlockId> call_stack;
  std::vector<const std::string*> seen_functions;

  BlockId current = program.FindFunction(program.entry_function())->entry_block;
  for (std::size_t step = 0; step < step_limit; ++step) {
    const BasicBlock& b = program.block(current);
    trace.block_sequence.push_back(current);

    const std::string& fn = program.FunctionOf(current);
    if (std::find(seen_functions.begin(), seen_functions.end(), &fn) ==
        seen_functions.end()) {
      seen_functions.push_back(&fn);
      trace.visited_functions.push_back(fn);
    }
    for (const TargetPoint& t : program.targets()) {
      if (t.location == b.label &&
          std::find(trace.reached_targets.begin(), trace.reached_targets.end(),
                    t.location) == trace.reached_targets.end()) {
        trace.reached_targets.push_back(t.location);
      }
    }

    bool finished = false;
    std::visit(
        Overloaded{
            [&](const term::Goto& t) { current = t.next; },
            [&](const term::Branch& t) {
              const bool taken = t.cond.Evaluate(input);
              if (collect_constraints) {
                trace.constraints.push_back(PathConstraint{b.id, t.cond, taken});
              }
              current = taken ? t.then_block : t.else_block;
            },
            [&](const term::Call& t) {
              call_stack.push_back(t.return_block);
              current = program.FindFunction(t.function)->entry_block;
            },
            [&](const term::Return&) {
              if (call_stack.empty()) {
                finished = true;
              } else {
                current = call_stack.back();
                call_stack.pop_back();
              }
            },
            [&](const term::Crash&) {
              trace.outcome = Outcome::kCrash;
              finished = true;
            },
            [&](const term::Halt&) { finished = true; },
        },
        b.terminator);
    if (finished) return trace;
  }
  trace.outcome = Outcome::kTimeout;
  return trace;
}

}  // namespace hydfuzz
