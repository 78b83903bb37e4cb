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

#include <fstream>
#include <random>

#include "gtest/gtest.h"
#include "oracles.hpp"

namespace hydfuzz {
namespace {

namespace fs = std::filesystem;

PathConstraint Pc(BlockId b, BytePredicate p, bool taken) {
  return PathConstraint{b, std::move(p), taken};
}

TEST(InvertTest, DirectOrder) {
  ExecutionTrace t;
  const BytePredicate p0{{0}, Relation::kEq, 1}, p1{{1}, Relation::kLt, 9};
  t.constraints = {Pc(0, p0, true), Pc(1, p1, false)};
  const auto systems = InvertBranches(t);
  ASSERT_EQ(systems.size(), 2u);
  EXPECT_TRUE(systems[0].prefix.empty());
  EXPECT_EQ(systems[0].inverted, Pc(0, p0, false));
  EXPECT_EQ(systems[1].prefix, std::vector<PathConstraint>{Pc(0, p0, true)});
  EXPECT_EQ(systems[1].inverted, Pc(1, p1, true));
  EXPECT_EQ(systems[1].index, 1u);
  EXPECT_TRUE(InvertBranches(ExecutionTrace{}).empty());
}

TEST(InvertTest, PrefixLengths) {
  ExecutionTrace t;
  for (BlockId b = 0; b < 3; ++b) t.constraints.push_back(Pc(b, {{b}, Relation::kEq, 0}, true));
  const auto systems = InvertBranches(t);
  ASSERT_EQ(systems.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(systems[i].prefix.size(), i);
}

TEST(SolveTest, SingleByte) {
  ConstraintSystem s{{}, Pc(0, {{0}, Relation::kEq, 0x41}, true), 0};
  const SolveResult r = Solve(s, Bytes{0x00}, ExplorerBudget{});
  ASSERT_TRUE(std::holds_alternative<solve_result::Solution>(r));
  EXPECT_EQ(std::get<solve_result::Solution>(r).bytes, Bytes{0x41});
}

TEST(SolveTest, MagicAfterPrefix) {
  ConstraintSystem s{{Pc(0, {{0}, Relation::kEq, 'A'}, true)},
                     Pc(1, {{1, 2, 3, 4}, Relation::kEq, 0x4A415350}, true),
                     1};
  const SolveResult r = Solve(s, Bytes{'A', 0, 0, 0, 0}, ExplorerBudget{});
  ASSERT_TRUE(std::holds_alternative<solve_result::Solution>(r));
  EXPECT_EQ(std::get<solve_result::Solution>(r).bytes,
            (Bytes{'A', 'J', 'A', 'S', 'P'}));
}

TEST(SolveTest, ContradictionFallsBackToOptimistic) {
  const BytePredicate lt{{0}, Relation::kLt, 0x10};
  ConstraintSystem s{{Pc(0, lt, true)}, Pc(1, lt, false), 1};
  // Confirm unsatisfiability by enumeration.
  for (int v = 0; v < 256; ++v) {
    const Bytes b = {static_cast<std::uint8_t>(v)};
    ASSERT_FALSE(lt.Evaluate(b) && !lt.Evaluate(b));
  }
  const SolveResult r = Solve(s, Bytes{0x03}, ExplorerBudget{});
  ASSERT_TRUE(std::holds_alternative<solve_result::OptimisticSolution>(r));
  const Bytes& out = std::get<solve_result::OptimisticSolution>(r).bytes;
  ASSERT_EQ(out.size(), 1u);
  EXPECT_GE(out[0], 0x10);
}

TEST(SolveTest, UnsatisfiableInvertedConstraint) {
  ConstraintSystem s{{}, Pc(0, {{0}, Relation::kGt, 0xFF}, true), 0};
  EXPECT_TRUE(std::holds_alternative<solve_result::Unsat>(
      Solve(s, Bytes{0}, ExplorerBudget{})));
}

TEST(SolveTest, ExhaustedClockIsBudgetExceeded) {
  ConstraintSystem s{{}, Pc(0, {{0}, Relation::kEq, 1}, true), 0};
  SolveClock clock{Seconds(0)};
  EXPECT_TRUE(std::holds_alternative<solve_result::BudgetExceeded>(
      Solve(s, Bytes{0}, ExplorerBudget{}, clock)));
}

TEST(SolveTest, SolutionsSatisfyEverySystemOnRandomTraces) {
  std::mt19937_64 rng(8);
  int full = 0, optimistic = 0;
  for (int i = 0; i < 400; ++i) {
    ExecutionTrace t;
    const std::size_t n = 1 + testing::Pick(rng, 5);
    Bytes base(6);
    for (auto& b : base) b = static_cast<std::uint8_t>(rng());
    for (std::size_t k = 0; k < n; ++k) {
      BytePredicate p = testing::RandomPredicate(rng);
      t.constraints.push_back(Pc(static_cast<BlockId>(k), p, p.Evaluate(base)));
    }
    for (const ConstraintSystem& s : InvertBranches(t)) {
      const SolveResult r = Solve(s, base, ExplorerBudget{});
      if (const auto* sol = std::get_if<solve_result::Solution>(&r)) {
        ++full;
        for (const auto& c : s.prefix) EXPECT_EQ(c.predicate.Evaluate(sol->bytes), c.taken);
        EXPECT_EQ(s.inverted.predicate.Evaluate(sol->bytes), s.inverted.taken);
      } else if (const auto* o = std::get_if<solve_result::OptimisticSolution>(&r)) {
        ++optimistic;
        EXPECT_EQ(s.inverted.predicate.Evaluate(o->bytes), s.inverted.taken);
        // Only bytes named by the inverted predicate (or padding) change.
        for (std::size_t k = 0; k < std::min(base.size(), o->bytes.size()); ++k) {
          const auto& offs = s.inverted.predicate.offsets;
          if (std::find(offs.begin(), offs.end(), k) == offs.end()) {
            EXPECT_EQ(o->bytes[k], base[k]);
          }
        }
      } else if (std::holds_alternative<solve_result::Unsat>(r)) {
        // The inverted predicate alone must then be unsatisfiable.
        const auto& p = s.inverted.predicate;
        ASSERT_LE(p.offsets.size(), 2u);
        const std::size_t space = std::size_t{1} << (8 * p.offsets.size());
        for (std::size_t v = 0; v < space; ++v) {
          Bytes b(8, 0);
          for (std::size_t k = 0; k < p.offsets.size(); ++k) {
            b[p.offsets[k]] =
                static_cast<std::uint8_t>(v >> (8 * (p.offsets.size() - 1 - k)));
          }
          ASSERT_NE(p.Evaluate(b), s.inverted.taken);
        }
      }
    }
  }
  EXPECT_GT(full, 100);
  EXPECT_GT(optimistic, 0);
}

constexpr char kMagicOne[] = R"(
entry_function = "main"
[[function]]
name = "main"
entry = 0
[[function.block]]
id = 0
label = "m.c:1"
term = { kind = "branch", offsets = [0], relation = "eq", constant = 0x41, then = 1, else = 2 }
[[function.block]]
id = 1
label = "m.c:2"
term = { kind = "crash" }
[[function.block]]
id = 2
label = "m.c:3"
term = { kind = "halt" }
)";

TEST(ExplorerTest, OneBranchMagic) {
  testing::TempDir dir("explorer");
  const ProgramModel p = ParseProgram(kMagicOne);
  const ExplorerRunResult r =
      RunExplorer(Bytes{0x00}, "seed", p, dir.path(), ExplorerBudget{}, 100);
  EXPECT_EQ(r.files_written, 1u);
  ASSERT_EQ(r.generated.size(), 1u);
  EXPECT_EQ(r.generated[0].file_name, "seed_inv0");
  EXPECT_EQ(ReadFileBytes(dir / "seed_inv0"), Bytes{0x41});
}

TEST(ExplorerTest, WritesEvenForExploredDirections) {
  testing::TempDir dir("explorer");
  const ProgramModel p = ParseProgram(kMagicOne);
  const ExplorerRunResult r =
      RunExplorer(Bytes{0x41}, "rare", p, dir.path(), ExplorerBudget{}, 100);
  EXPECT_EQ(r.files_written, 1u);
  EXPECT_NE(ReadFileBytes(dir / "rare_inv0"), Bytes{0x41});
}

TEST(ExplorerTest, MaxInversionsCapsSystems) {
  testing::TempDir dir("explorer");
  std::string text = "entry_function = \"main\"\n[[function]]\nname = \"main\"\nentry = 0\n";
  for (int i = 0; i < 5; ++i) {
    text += "[[function.block]]\nid = " + std::to_string(i) + "\nlabel = \"b" +
            std::to_string(i) + "\"\nterm = { kind = \"branch\", offsets = [" +
            std::to_string(i) + "], relation = \"eq\", constant = 7, then = " +
            std::to_string(i + 1) + ", else = " + std::to_string(i + 1) + " }\n";
  }
  text += "[[function.block]]\nid = 5\nlabel = \"end\"\nterm = { kind = \"halt\" }\n";
  const ProgramModel p = ParseProgram(text);
  ExplorerBudget b;
  b.max_inversions = 2;
  const ExplorerRunResult r = RunExplorer(Bytes(5, 0), "s", p, dir.path(), b, 100);
  EXPECT_EQ(r.systems_attempted, 2u);
  EXPECT_LE(r.files_written, 2u);
}

TEST(ExplorerTest, UnwritableSyncDirIsAnError) {
  testing::TempDir dir("explorer");
  std::ofstream(dir / "file") << "x";
  const ProgramModel p = ParseProgram(kMagicOne);
  EXPECT_THROW(RunExplorer(Bytes{0}, "s", p, dir / "file", ExplorerBudget{}, 100),
               ExplorerError);
  EXPECT_THROW(CheckWritableDir(dir / "missing"), ExplorerError);
}

TEST(ExplorerTest, BudgetValidity) {
  ExplorerBudget b;
  EXPECT_TRUE(b.Valid());
  b.per_query_limit = Seconds(100);
  EXPECT_FALSE(b.Valid());
}

// Every full solution, replayed, flips the branch at the inverted position.
TEST(ExplorerTest, ReplayFlipsInvertedBranchOnRandomPrograms) {
  std::mt19937_64 rng(21);
  testing::TempDir dir("replay");
  std::size_t checked = 0;
  for (int i = 0; i < 150; ++i) {
    auto rp = testing::RandomInterprocedural(rng, 14);
    const ProgramModel p(rp.functions, "f0", rp.targets);
    Bytes seed(6);
    for (auto& b : seed) b = static_cast<std::uint8_t>(rng());
    const fs::path sync = dir / std::to_string(i);
    fs::create_directories(sync);
    const ExplorerRunResult r = RunExplorer(seed, "s", p, sync, ExplorerBudget{}, 300);
    const ExecutionTrace orig = Execute(p, seed, 300, true);
    for (const GeneratedInput& g : r.generated) {
      const Bytes out = ReadFileBytes(sync / g.file_name);
      const ExecutionTrace replay = Execute(p, out, 300, true);
      if (g.optimistic) continue;
      ASSERT_LT(g.inverted_index, replay.constraints.size());
      EXPECT_EQ(replay.constraints[g.inverted_index].block_id,
                orig.constraints[g.inverted_index].block_id);
      EXPECT_NE(replay.constraints[g.inverted_index].taken,
                orig.constraints[g.inverted_index].taken);
      ++checked;
    }
  }
  EXPECT_GT(checked, 50u);
}

}  // namespace
}  // namespace hydfuzz
