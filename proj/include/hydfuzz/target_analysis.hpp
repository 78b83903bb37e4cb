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

// Static analysis over a ProgramModel: call graph, dominators, enhanced
// target sequences (ETS) and the block distance map used by the annealing
// baseline.

#ifndef HYDFUZZ_TARGET_ANALYSIS_HPP_
#define HYDFUZZ_TARGET_ANALYSIS_HPP_

#include <limits>
#include <map>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "hydfuzz/program_model.hpp"

namespace hydfuzz {

struct CallEdge {
  std::string caller;
  std::string callee;
  BlockId call_site = 0;

  friend auto operator<=>(const CallEdge&, const CallEdge&) = default;
};

struct CallGraph {
  std::vector<std::string> nodes;  // program order
  std::vector<CallEdge> edges;     // program order of call sites

  std::vector<std::string> Callees(const std::string& fn) const;
};

CallGraph BuildCallGraph(const ProgramModel& program);

// block -> blocks dominating it (itself included). Unreachable blocks are
// absent.
using FunctionDominators = std::map<BlockId, std::set<BlockId>>;
using DominatorMap = std::map<std::string, FunctionDominators>;

// Intra-procedural successors: a call continues at its return block.
std::vector<BlockId> Successors(const BasicBlock& b);

FunctionDominators ComputeDominators(const FunctionDef& fn);
DominatorMap ComputeAllDominators(const ProgramModel& program);

// Call-graph dominators rooted at the entry function. Functions not
// reachable through calls are absent.
std::map<std::string, std::set<std::string>> ComputeCallGraphDominators(
    const ProgramModel& program, const CallGraph& cg);

struct EnhancedTargetSequence {
  std::string target_id;
  std::vector<std::string> dominator_functions;  // entry function first
  std::vector<BlockId> member_blocks;  // grouped per function, by depth
  std::vector<BlockId> target_blocks;  // reachable blocks labelled with the target
};

class AnalysisError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Throws AnalysisError when no block of the target is reachable from the
// entry function.
EnhancedTargetSequence BuildEts(const ProgramModel& program,
                                const TargetPoint& target, const CallGraph& cg,
                                const DominatorMap& dominators);

// Union of member_blocks over all sequences.
std::set<BlockId> CollectEtsBlocks(std::span<const EnhancedTargetSequence> ets);

inline constexpr double kInfiniteDistance =
    std::numeric_limits<double>::infinity();

struct DistanceMap {
  std::unordered_map<BlockId, double> distance;

  double at(BlockId b) const {
    auto it = distance.find(b);
    return it == distance.end() ? kInfiniteDistance : it->second;
  }
};

// Reverse BFS with unit weights over the interprocedural CFG: call sites
// lead to the callee entry, Return blocks lead to every return block of a
// call to their function. Multi-target distance is the minimum.
DistanceMap ComputeDistanceMap(const ProgramModel& program,
                               std::span<const TargetPoint> targets);

// Mean of the finite distances along the trace; kInfiniteDistance when the
// trace never touches a block with finite distance.
double SeedDistance(const ExecutionTrace& trace, const DistanceMap& dmap);

nlohmann::json EtsToJson(const EnhancedTargetSequence& ets);
nlohmann::json DistanceMapToJson(const ProgramModel& program,
                                 const DistanceMap& dmap);

}  // namespace hydfuzz

#endif  // HYDFUZZ_TARGET_ANALYSIS_HPP_
