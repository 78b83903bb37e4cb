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

// Acceptance gate. Prints one [PASS]/[FAIL] line per criterion and exits
// nonzero if any criterion fails.
//
//   acceptance [--only N,M,...] [--reps N] [--keep DIR]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "hydfuzz/bench.hpp"
#include "hydfuzz/concolic.hpp"
#include "hydfuzz/difuzzer.hpp"
#include "hydfuzz/metadata.hpp"
#include "hydfuzz/objectives.hpp"
#include "hydfuzz/orchestrator.hpp"
#include "hydfuzz/priority_queue.hpp"
#include "hydfuzz/target_analysis.hpp"
#include "oracles.hpp"

namespace {

namespace fs = std::filesystem;
using namespace hydfuzz;
using Clock = std::chrono::steady_clock;

const fs::path kPrograms = fs::path(HYDFUZZ_SOURCE_DIR) / "programs";

struct Verdict {
  bool pass = false;
  std::string detail;
};

double SecondsSince(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

std::string Fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

struct Context {
  fs::path root;
  std::size_t reps = 10;
  BenchResult magic;  // criterion 1 runs, reused by criterion 9
  fs::path magic_work;
  bool magic_done = false;
};

// --- 1 -------------------------------------------------------------------

void RunMagic(Context& ctx) {
  if (ctx.magic_done) return;
  BenchmarkSpec spec;
  spec.program_path = kPrograms / "magic4.toml";
  spec.modes = {BenchMode::kHybrid, BenchMode::kPure};
  spec.repetitions = ctx.reps;
  spec.timeout_secs = 60;
  spec.time_scale = 0.1;
  spec.seed = 1;
  spec.work_root = ctx.magic_work = ctx.root / "magic4";
  ctx.magic = RunBenchmark(spec);
  ctx.magic_done = true;
}

Verdict HybridBeatsPure(Context& ctx) {
  RunMagic(ctx);
  std::size_t hybrid = 0, pure = 0;
  for (const BenchRow& row : ctx.magic.rows) {
    if (!row.tte_secs) continue;
    (row.mode == "hybrid" ? hybrid : pure) += 1;
  }
  const std::size_t need = ctx.reps - ctx.reps / 10;  // 9 of 10
  std::ostringstream d;
  d << "magic4, 60 s budget: hybrid reached " << hybrid << "/" << ctx.reps
    << ", pure reached " << pure << "/" << ctx.reps;
  if (auto best = BestTte(ctx.magic, "hybrid", "magic")) d << ", best hybrid TTE " << Fmt("%.2f s", *best);
  return {hybrid >= need && pure == 0, d.str()};
}

// --- 2 -------------------------------------------------------------------

double Median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2;
}

Verdict HybridParity(Context& ctx) {
  BenchmarkSpec spec;
  spec.program_path = kPrograms / "plain.toml";
  spec.modes = {BenchMode::kHybrid, BenchMode::kPure};
  spec.repetitions = ctx.reps;
  spec.timeout_secs = 60;
  spec.time_scale = 0.1;
  spec.seed = 2;
  spec.work_root = ctx.root / "plain";
  const BenchResult r = RunBenchmark(spec);
  std::map<std::string, std::vector<double>> tte;
  for (const BenchRow& row : r.rows) {
    tte[row.mode].push_back(row.tte_secs.value_or(INFINITY));
  }
  const double h = Median(tte["hybrid"]), p = Median(tte["pure"]);
  const double ratio = h / std::max(p, 1e-3);
  return {std::isfinite(h) && std::isfinite(p) && h <= 3 * p,
          "plain: median TTE hybrid " + Fmt("%.3f s", h) + ", pure " +
              Fmt("%.3f s", p) + ", ratio " + Fmt("%.2f", ratio) + " (limit 3)"};
}

// --- 3 -------------------------------------------------------------------

Verdict Dominators(Context&) {
  const auto start = Clock::now();
  std::mt19937_64 rng(3);
  int mismatches = 0;
  for (int i = 0; i < 100; ++i) {
    const std::size_t n = 1 + testing::Pick(rng, 12);
    const FunctionDef fn = testing::RandomFunction(rng, "main", 0, n, {});
    if (ComputeDominators(fn) != testing::DominatorOracle(fn)) ++mismatches;
  }
  const double t = SecondsSince(start);
  return {mismatches == 0 && t < 5,
          "100 random CFGs (<=12 blocks): " + std::to_string(mismatches) +
              " mismatches vs remove-node oracle, " + Fmt("%.3f s", t)};
}

// --- 4 -------------------------------------------------------------------

Verdict Distances(Context&) {
  const auto start = Clock::now();
  std::mt19937_64 rng(4);
  int mismatches = 0;
  for (int i = 0; i < 50; ++i) {
    auto rp = testing::RandomInterprocedural(rng, 20);
    const ProgramModel p(rp.functions, "f0", rp.targets);
    const DistanceMap d = ComputeDistanceMap(p, p.targets());
    for (const auto& [block, want] : testing::DistanceOracle(rp)) {
      if (d.at(block) != want) {
        ++mismatches;
        break;
      }
    }
  }
  const double t = SecondsSince(start);
  return {mismatches == 0 && t < 5,
          "50 random interprocedural graphs (<=20 blocks): " +
              std::to_string(mismatches) + " mismatches vs Floyd-Warshall, " +
              Fmt("%.3f s", t)};
}

// --- 5 -------------------------------------------------------------------

Verdict QueueOrder(Context&) {
  const auto start = Clock::now();
  int bad_seeds = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(seed);
    SeedQueue q;
    std::vector<PriorityEntry> all;
    for (int i = 0; i < 1000; ++i) {
      PriorityEntry e{testing::Pick(rng, 2) == 1, testing::Pick(rng, 2) == 1,
                      FileScore(static_cast<std::int64_t>(testing::Pick(rng, 1u << 20)),
                                testing::Pick(rng, 64)),
                      "s" + std::to_string(testing::Pick(rng, 5000))};
      all.push_back(e);
      q.Push(e);
    }
    std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
      return ComparePriority(a, b) == std::strong_ordering::greater;
    });
    bool ok = true;
    for (const auto& want : all) {
      auto got = q.TryPop();
      ok &= got && ComparePriority(*got, want) == std::strong_ordering::equal;
    }
    ok &= !q.TryPop().has_value();
    bad_seeds += !ok;
  }
  const double t = SecondsSince(start);
  return {bad_seeds == 0 && t < 5,
          "1000 entries x 100 seeds: " + std::to_string(bad_seeds) +
              " seeds with pop order != sorted order, " + Fmt("%.3f s", t)};
}

// --- 6 -------------------------------------------------------------------

Verdict SyncInterval(Context&) {
  const std::vector<std::pair<double, double>> cases = {
      {0, 60}, {1, 60}, {10, 60}, {20, 60}, {30, 90}, {1000, 3000}};
  std::string d;
  bool ok = true;
  for (auto [t, want] : cases) {
    const double got = NextSyncInterval(t);
    ok &= got == want;
    d += Fmt("%g", t) + "->" + Fmt("%g", got) + " ";
  }
  d.pop_back();
  return {ok, d};
}

// --- 7 -------------------------------------------------------------------

Verdict Minimization(Context& ctx) {
  const auto start = Clock::now();
  std::mt19937_64 rng(7);
  int failures = 0;
  for (int round = 0; round < 25; ++round) {
    const fs::path dir = ctx.root / ("min" + std::to_string(round));
    fs::create_directories(dir);
    const std::size_t ntraces = 1 + testing::Pick(rng, 20);
    const std::size_t n = 1 + testing::Pick(rng, 200);
    std::set<std::vector<BlockId>> present;
    for (std::size_t i = 0; i < n; ++i) {
      SeedMetadata m;
      const BlockId t = static_cast<BlockId>(testing::Pick(rng, ntraces));
      m.ets_trace = {t, t * 7 + 1};
      m.reached_targets = {"x.c:" + std::to_string(t)};
      present.insert(m.ets_trace);
      const fs::path p = dir / ("o" + std::to_string(i));
      WriteMetadata(p, m);
      AtomicWriteFile(p, std::string_view("x"));
    }
    const MinimizeResult r = MinimizeObjectives(dir);
    std::set<std::vector<BlockId>> kept;
    bool distinct = true;
    for (const auto& k : r.kept) distinct &= kept.insert(k.metadata.ets_trace).second;
    const MinimizeResult again = MinimizeObjectives(dir);
    bool idempotent = again.archived.empty() && again.kept.size() == r.kept.size();
    for (std::size_t i = 0; idempotent && i < r.kept.size(); ++i) {
      idempotent = again.kept[i].seed_path == r.kept[i].seed_path;
    }
    if (!distinct || kept != present || !idempotent) ++failures;
    fs::remove_all(dir);
  }
  const double t = SecondsSince(start);
  return {failures == 0 && t < 5,
          "25 random objective sets (<=200 objectives, <=20 traces): " +
              std::to_string(failures) + " violations, " + Fmt("%.3f s", t)};
}

// --- 8 -------------------------------------------------------------------

Verdict Sorting(Context& ctx) {
  BenchmarkSpec spec;
  spec.program_path = kPrograms / "multi.toml";
  const HybridConfig cfg = BenchRunConfig(spec, BenchMode::kHybrid, 1);
  HybridConfig c = cfg;
  c.difuzz.work_dir = ctx.root / "multi";
  c.stop.max_duration_secs = 60;
  c.stop.stall_duration_secs = 60;
  c.time_scale = 0.1;
  c.seed = 8;
  const FinalReport report = RunHybrid(c);
  const fs::path work = c.difuzz.work_dir;
  const std::vector<TargetPoint> targets = ResolveProgram(c).targets();

  // Expected placement from metadata alone.
  std::map<std::string, std::set<std::string>> expected;  // dir -> names
  const auto kept = ReadObjectives(work / "objectives");
  std::size_t multi = 0;
  for (const ObjectiveRecord& rec : kept) {
    const std::string name = rec.seed_path.filename().string();
    const SeedMetadata& m = rec.metadata;
    std::size_t dirs = 0;
    for (const std::string& loc : m.reached_targets) {
      const bool is_target = std::any_of(targets.begin(), targets.end(),
                                         [&](const TargetPoint& t) { return t.location == loc; });
      if (!is_target) continue;
      expected[SanitizeLocation(loc)].insert(name);
      ++dirs;
    }
    if (m.reached_targets.empty() && m.is_crash) expected["crashes"].insert(name);
    if (m.reached_targets.empty() && m.is_timeout) expected["timeouts"].insert(name);
    multi += dirs > 1;
  }
  std::map<std::string, std::set<std::string>> actual;
  if (fs::exists(work / "sorted")) {
    for (const auto& d : fs::directory_iterator(work / "sorted")) {
      auto& names = actual[d.path().filename().string()];
      for (const fs::path& f : ListSeedFiles(d.path())) {
        names.insert(f.filename().string());
        if (!ReadMetadata(f)) names.insert("<missing sidecar>");
      }
    }
  }
  const bool both = report.reached_targets.size() == targets.size();
  std::ostringstream d;
  d << "multi: " << kept.size() << " kept objectives, " << multi
    << " multi-target, " << report.reached_targets.size() << "/" << targets.size()
    << " targets reached, sorted tree " << (actual == expected ? "matches" : "DIFFERS from")
    << " metadata";
  return {!kept.empty() && multi > 0 && both && actual == expected, d.str()};
}

// --- 9 -------------------------------------------------------------------

Verdict Replay(Context& ctx) {
  RunMagic(ctx);
  const ProgramModel program = LoadProgram((kPrograms / "magic4.toml").string());
  std::size_t checked = 0, failed = 0, optimistic = 0;
  for (std::size_t rep = 1; rep <= ctx.reps; ++rep) {
    const fs::path work = ctx.magic_work / ("hybrid_" + std::to_string(rep));
    if (!fs::exists(work / "explorer")) continue;
    for (const auto& log : fs::directory_iterator(work / "explorer")) {
      std::ifstream in(log.path());
      for (std::string line; std::getline(in, line);) {
        const nlohmann::json j = nlohmann::json::parse(line);
        if (j["optimistic"].get<bool>()) {
          ++optimistic;
          continue;
        }
        const std::size_t idx = j["index"].get<std::size_t>();
        const ExecutionTrace orig =
            Execute(program, ReadFileBytes(j["source_seed"].get<std::string>()),
                    10000, true);
        const ExecutionTrace now = Execute(
            program, ReadFileBytes(work / "sync" / j["file"].get<std::string>()),
            10000, true);
        ++checked;
        const bool ok = idx < orig.constraints.size() && idx < now.constraints.size() &&
                        now.constraints[idx].block_id == orig.constraints[idx].block_id &&
                        now.constraints[idx].taken != orig.constraints[idx].taken;
        failed += !ok;
      }
    }
  }
  std::ostringstream d;
  d << checked << " explorer outputs from the magic4 hybrid runs replayed, "
    << (checked - failed) << " flip the inverted branch (" << optimistic
    << " optimistic skipped)";
  return {checked > 0 && failed == 0, d.str()};
}

// --- 10 ------------------------------------------------------------------

Verdict MetadataRoundTrip(Context&) {
  std::mt19937_64 rng(10);
  int bad = 0;
  for (int i = 0; i < 1000; ++i) {
    const std::string s = SerializeMetadata(testing::RandomMetadata(rng));
    if (SerializeMetadata(ParseMetadata(s)) != s) ++bad;
  }
  return {bad == 0, "1000 random values: " + std::to_string(bad) + " not byte-identical"};
}

// --- 11 ------------------------------------------------------------------

Verdict AnnealingLimits(Context&) {
  const AnnealingParams p;
  double worst = 0;
  for (double d : {0.0, 0.5, 1.0, 2.0, 5.0}) {
    worst = std::max(worst, std::abs(AnnealingEnergy(d, 5.0, 0.0, p) - p.min_energy));
  }
  const double big = 1e6;
  const double at_zero = AnnealingEnergy(0.0, 5.0, big, p);
  const double at_one = AnnealingEnergy(5.0, 5.0, big, p);
  worst = std::max({worst, std::abs(at_zero - p.max_energy), std::abs(at_one - p.min_energy)});
  return {worst <= 1e-9,
          "elapsed=0 constant, d=0 -> max, d=1 -> min; worst deviation " +
              Fmt("%.3g", worst)};
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_level(spdlog::level::warn);
  std::set<int> only;
  Context ctx;
  fs::path keep;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--only" && i + 1 < argc) {
      std::stringstream ss(argv[++i]);
      for (std::string n; std::getline(ss, n, ',');) only.insert(std::stoi(n));
    } else if (a == "--reps" && i + 1 < argc) {
      ctx.reps = std::stoul(argv[++i]);
    } else if (a == "--keep" && i + 1 < argc) {
      keep = argv[++i];
    } else {
      std::cerr << "usage: acceptance [--only N,M] [--reps N] [--keep DIR]\n";
      return 2;
    }
  }
  std::unique_ptr<testing::TempDir> tmp;
  if (keep.empty()) {
    tmp = std::make_unique<testing::TempDir>("acceptance");
    ctx.root = tmp->path();
  } else {
    ctx.root = keep;
    fs::create_directories(keep);
  }

  const std::vector<std::pair<std::string, std::function<Verdict(Context&)>>> criteria = {
      {"hybrid beats pure on magic4", HybridBeatsPure},
      {"hybrid parity on plain", HybridParity},
      {"dominator correctness", Dominators},
      {"distance correctness", Distances},
      {"priority queue order", QueueOrder},
      {"sync interval formula", SyncInterval},
      {"minimization properties", Minimization},
      {"sorting completeness", Sorting},
      {"concolic replay validation", Replay},
      {"metadata round-trip", MetadataRoundTrip},
      {"annealing limits", AnnealingLimits},
  };
  // Cheap criteria first; 9 reuses the runs of 1.
  const std::vector<int> order = {3, 4, 5, 6, 7, 10, 11, 8, 1, 9, 2};
  std::map<int, std::pair<Verdict, double>> results;
  const auto all_start = Clock::now();
  for (int n : order) {
    if (!only.empty() && !only.contains(n)) continue;
    const auto start = Clock::now();
    Verdict v;
    try {
      v = criteria[n - 1].second(ctx);
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double t = SecondsSince(start);
    std::printf("[%s] %2d %s: %s (%.1f s)\n", v.pass ? "PASS" : "FAIL", n,
                criteria[n - 1].first.c_str(), v.detail.c_str(), t);
    std::fflush(stdout);
    results[n] = {v, t};
  }
  std::size_t passed = 0;
  for (const auto& [n, r] : results) passed += r.first.pass;
  std::printf("%zu/%zu criteria passed in %.1f s\n", passed, results.size(),
              SecondsSince(all_start));
  return passed == results.size() ? 0 : 1;
}
