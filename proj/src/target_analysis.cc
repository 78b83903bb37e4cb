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

#include "hydfuzz/target_analysis.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <optional>

namespace hydfuzz {

namespace {

// Iterative dataflow dominators: dom(n) = {n} ∪ ⋂ dom(p) over predecessors,
// seeded with the full node set and iterated in reverse post-order.
template <class Node>
std::map<Node, std::set<Node>> IterativeDominators(
    const Node& root,
    const std::function<std::vector<Node>(const Node&)>& successors) {
  std::vector<Node> postorder;
  std::set<Node> visited{root};
  // Explicit stack of (node, next successor index).
  std::vector<std::pair<Node, std::vector<Node>>> stack;
  stack.emplace_back(root, successors(root));
  std::vector<std::size_t> cursor{0};
  while (!stack.empty()) {
    auto& [node, succs] = stack.back();
    std::size_t& i = cursor.back();
    if (i < succs.size()) {
      Node next = succs[i++];
      if (visited.insert(next).second) {
        auto s = successors(next);
        stack.emplace_back(next, std::move(s));
        cursor.push_back(0);
      }
      continue;
    }
    postorder.push_back(node);
    stack.pop_back();
    cursor.pop_back();
  }
  std::vector<Node> rpo(postorder.rbegin(), postorder.rend());

  std::map<Node, std::vector<Node>> preds;
  for (const Node& n : rpo) {
    for (const Node& s : successors(n)) preds[s].push_back(n);
  }

  const std::set<Node> all(rpo.begin(), rpo.end());
  std::map<Node, std::set<Node>> dom;
  for (const Node& n : rpo) dom[n] = all;
  dom[root] = {root};

  bool changed = true;
  while (changed) {
    changed = false;
    for (const Node& n : rpo) {
      if (n == root) continue;
      std::set<Node> next;
      bool first = true;
      for (const Node& p : preds[n]) {
        if (first) {
          next = dom[p];
          first = false;
        } else {
          std::set<Node> tmp;
          std::set_intersection(next.begin(), next.end(), dom[p].begin(),
                                dom[p].end(), std::inserter(tmp, tmp.end()));
          next = std::move(tmp);
        }
      }
      next.insert(n);
      if (next != dom[n]) {
        dom[n] = std::move(next);
        changed = true;
      }
    }
  }
  return dom;
}

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

}  // namespace

std::vector<std::string> CallGraph::Callees(const std::string& fn) const {
  std::vector<std::string> out;
  for (const CallEdge& e : edges) {
    if (e.caller == fn &&
        std::find(out.begin(), out.end(), e.callee) == out.end()) {
      out.push_back(e.callee);
    }
  }
  return out;
}

CallGraph BuildCallGraph(const ProgramModel& program) {
  CallGraph cg;
  for (const FunctionDef& fn : program.functions()) {
    cg.nodes.push_back(fn.name);
    for (const BasicBlock& b : fn.blocks) {
      if (const auto* call = std::get_if<term::Call>(&b.terminator)) {
        cg.edges.push_back(CallEdge{fn.name, call->function, b.id});
      }
    }
  }
  return cg;
}

std::vector<BlockId> Successors(const BasicBlock& b) {
  return std::visit(
      Overloaded{
          [](const term::Goto& t) { return std::vector<BlockId>{t.next}; },
          [](const term::Branch& t) {
            if (t.then_block == t.else_block) {
              return std::vector<BlockId>{t.then_block};
            }
            return std::vector<BlockId>{t.then_block, t.else_block};
          },
          [](const term::Call& t) {
            return std::vector<BlockId>{t.return_block};
          },
          [](const auto&) { return std::vector<BlockId>{}; },
      },
      b.terminator);
}

FunctionDominators ComputeDominators(const FunctionDef& fn) {
  std::unordered_map<BlockId, const BasicBlock*> by_id;
  for (const BasicBlock& b : fn.blocks) by_id.emplace(b.id, &b);
  if (!by_id.contains(fn.entry_block)) return {};
  return IterativeDominators<BlockId>(
      fn.entry_block, [&by_id](const BlockId& id) {
        std::vector<BlockId> out;
        for (BlockId s : Successors(*by_id.at(id))) {
          if (by_id.contains(s)) out.push_back(s);
        }
        return out;
      });
}

DominatorMap ComputeAllDominators(const ProgramModel& program) {
  DominatorMap out;
  for (const FunctionDef& fn : program.functions()) {
    out.emplace(fn.name, ComputeDominators(fn));
  }
  return out;
}

std::map<std::string, std::set<std::string>> ComputeCallGraphDominators(
    const ProgramModel& program, const CallGraph& cg) {
  return IterativeDominators<std::string>(
      program.entry_function(),
      [&cg](const std::string& fn) { return cg.Callees(fn); });
}

namespace {

// True if `to` is reachable from `from` in the call graph without entering
// `avoid`.
bool ReachesAvoiding(const CallGraph& cg, const std::string& from,
                     const std::string& to, const std::string& avoid) {
  if (from == avoid) return false;
  std::set<std::string> seen{from};
  std::deque<std::string> work{from};
  while (!work.empty()) {
    std::string fn = work.front();
    work.pop_front();
    if (fn == to) return true;
    for (const std::string& c : cg.Callees(fn)) {
      if (c != avoid && seen.insert(c).second) work.push_back(c);
    }
  }
  return false;
}

}  // namespace

EnhancedTargetSequence BuildEts(const ProgramModel& program,
                                const TargetPoint& target, const CallGraph& cg,
                                const DominatorMap& dominators) {
  const auto cg_dom = ComputeCallGraphDominators(program, cg);

  EnhancedTargetSequence ets;
  ets.target_id = target.id;
  std::map<std::string, std::set<BlockId>> members;

  for (BlockId tb : program.BlocksWithLabel(target.location)) {
    const std::string& owner = program.FunctionOf(tb);
    auto chain_it = cg_dom.find(owner);
    if (chain_it == cg_dom.end()) continue;
    const FunctionDominators& owner_doms = dominators.at(owner);
    auto tb_doms = owner_doms.find(tb);
    if (tb_doms == owner_doms.end()) continue;
    ets.target_blocks.push_back(tb);

    std::vector<std::string> chain(chain_it->second.begin(),
                                   chain_it->second.end());
    std::sort(chain.begin(), chain.end(),
              [&cg_dom](const std::string& a, const std::string& b) {
                return cg_dom.at(a).size() < cg_dom.at(b).size();
              });

    members[owner].insert(tb_doms->second.begin(), tb_doms->second.end());

    // In each dominating caller, the exit point is the set of reachable call
    // sites that lead on to the next function of the chain; keep the blocks
    // that dominate all of them.
    for (std::size_t i = 0; i + 1 < chain.size(); ++i) {
      const std::string& fn = chain[i];
      const std::string& next = chain[i + 1];
      const FunctionDominators& fn_doms = dominators.at(fn);
      std::optional<std::set<BlockId>> common;
      for (const CallEdge& e : cg.edges) {
        if (e.caller != fn || !fn_doms.contains(e.call_site)) continue;
        if (e.callee != next && !ReachesAvoiding(cg, e.callee, next, fn)) {
          continue;
        }
        const std::set<BlockId>& d = fn_doms.at(e.call_site);
        if (!common) {
          common = d;
        } else {
          std::set<BlockId> tmp;
          std::set_intersection(common->begin(), common->end(), d.begin(),
                                d.end(), std::inserter(tmp, tmp.end()));
          common = std::move(tmp);
        }
      }
      if (common) members[fn].insert(common->begin(), common->end());
      else members[fn];
    }
  }

  if (ets.target_blocks.empty()) {
    throw AnalysisError("target '" + target.id + "' (" + target.location +
                        ") is unreachable from '" + program.entry_function() +
                        "'");
  }

  for (const auto& [fn, _] : members) ets.dominator_functions.push_back(fn);
  std::sort(ets.dominator_functions.begin(), ets.dominator_functions.end(),
            [&cg_dom](const std::string& a, const std::string& b) {
              const auto da = cg_dom.at(a).size();
              const auto db = cg_dom.at(b).size();
              return da != db ? da < db : a < b;
            });
  for (const std::string& fn : ets.dominator_functions) {
    const FunctionDominators& fn_doms = dominators.at(fn);
    std::vector<BlockId> blocks(members[fn].begin(), members[fn].end());
    std::sort(blocks.begin(), blocks.end(),
              [&fn_doms](BlockId a, BlockId b) {
                const auto da = fn_doms.at(a).size();
                const auto db = fn_doms.at(b).size();
                return da != db ? da < db : a < b;
              });
    ets.member_blocks.insert(ets.member_blocks.end(), blocks.begin(),
                             blocks.end());
  }
  return ets;
}

std::set<BlockId> CollectEtsBlocks(
    std::span<const EnhancedTargetSequence> ets) {
  std::set<BlockId> out;
  for (const auto& e : ets) out.insert(e.member_blocks.begin(), e.member_blocks.end());
  return out;
}

DistanceMap ComputeDistanceMap(const ProgramModel& program,
                               std::span<const TargetPoint> targets) {
  // Reverse adjacency of the interprocedural graph.
  std::unordered_map<BlockId, std::vector<BlockId>> rev;
  std::map<std::string, std::vector<BlockId>> return_blocks_of;
  for (const FunctionDef& fn : program.functions()) {
    for (const BasicBlock& b : fn.blocks) {
      if (const auto* call = std::get_if<term::Call>(&b.terminator)) {
        return_blocks_of[call->function].push_back(call->return_block);
      }
    }
  }
  for (const FunctionDef& fn : program.functions()) {
    for (const BasicBlock& b : fn.blocks) {
      std::visit(
          Overloaded{
              [&](const term::Goto& t) { rev[t.next].push_back(b.id); },
              [&](const term::Branch& t) {
                rev[t.then_block].push_back(b.id);
                rev[t.else_block].push_back(b.id);
              },
              [&](const term::Call& t) {
                rev[program.FindFunction(t.function)->entry_block].push_back(
                    b.id);
              },
              [&](const term::Return&) {
                for (BlockId r : return_blocks_of[fn.name]) {
                  rev[r].push_back(b.id);
                }
              },
              [](const auto&) {},
          },
          b.terminator);
    }
  }

  DistanceMap dmap;
  std::deque<BlockId> work;
  for (const TargetPoint& t : targets) {
    for (BlockId b : program.BlocksWithLabel(t.location)) {
      if (dmap.distance.emplace(b, 0.0).second) work.push_back(b);
    }
  }
  while (!work.empty()) {
    const BlockId b = work.front();
    work.pop_front();
    const double d = dmap.distance.at(b);
    for (BlockId p : rev[b]) {
      if (dmap.distance.emplace(p, d + 1.0).second) work.push_back(p);
    }
  }
  return dmap;
}

double SeedDistance(const ExecutionTrace& trace, const DistanceMap& dmap) {
  double sum = 0.0;
  std::size_t count = 0;
  for (BlockId b : trace.block_sequence) {
    const double d = dmap.at(b);
    if (d == kInfiniteDistance) continue;
    sum += d;
    ++count;
  }
  return count == 0 ? kInfiniteDistance : sum / static_cast<double>(count);
}

nlohmann::json EtsToJson(const EnhancedTargetSequence& ets) {
  return nlohmann::json{{"target_id", ets.target_id},
                        {"dominator_functions", ets.dominator_functions},
                        {"member_blocks", ets.member_blocks},
                        {"target_blocks", ets.target_blocks}};
}

nlohmann::json DistanceMapToJson(const ProgramModel& program,
                                 const DistanceMap& dmap) {
  std::vector<BlockId> ids;
  for (const FunctionDef& fn : program.functions()) {
    for (const BasicBlock& b : fn.blocks) ids.push_back(b.id);
  }
  std::sort(ids.begin(), ids.end());
  auto rows = nlohmann::json::array();
  for (BlockId id : ids) {
    const double d = dmap.at(id);
    rows.push_back({{"block", id},
                    {"label", program.block(id).label},
                    {"distance", d == kInfiniteDistance ? nlohmann::json(nullptr)
                                                        : nlohmann::json(d)}});
  }
  return rows;
}

}  // namespace hydfuzz
