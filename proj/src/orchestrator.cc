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

#include "hydfuzz/orchestrator.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <memory>
#include <thread>
#include <unordered_set>

#include <spdlog/spdlog.h>

#include "hydfuzz/concolic.hpp"
#include "hydfuzz/difuzzer.hpp"
#include "hydfuzz/metadata.hpp"
#include "hydfuzz/objectives.hpp"
#include "hydfuzz/priority_queue.hpp"
#include "hydfuzz/target_analysis.hpp"

namespace hydfuzz {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

double NextSyncInterval(std::optional<double> last_import_secs) {
  if (!last_import_secs) return kDefaultSyncIntervalSecs;
  return std::max(kDefaultSyncIntervalSecs, 3.0 * *last_import_secs);
}

StopDecision CheckStop(const RunStatus& status, const StopConditions& stop,
                       std::span<const TargetPoint> targets) {
  if (stop.stop_on_all_targets && !targets.empty() &&
      std::all_of(targets.begin(), targets.end(), [&](const TargetPoint& t) {
        return status.reached_targets.contains(t.location);
      })) {
    return {true, "all targets"};
  }
  if (status.elapsed_secs >= stop.max_duration_secs) {
    return {true, "max duration"};
  }
  if (status.secs_since_coverage_growth >= stop.stall_duration_secs) {
    return {true, "stall"};
  }
  return {};
}

nlohmann::ordered_json FinalReport::ToJson() const {
  nlohmann::ordered_json j;
  j["mode"] = mode;
  j["stop_reason"] = stop_reason;
  j["duration_secs"] = duration_secs;
  j["workers"] = {{"fuzzers", fuzzer_workers},
                  {"explorers", explorer_workers},
                  {"restarts", worker_restarts}};
  j["executions"] = executions;
  j["corpus_size"] = corpus_size;
  j["explorer"] = {{"runs", explorer_runs}, {"files", explorer_files}};
  j["objectives"] = {{"before_minimization", objectives_before},
                     {"after_minimization", objectives_after},
                     {"archived", objectives_archived}};
  nlohmann::ordered_json ts = nlohmann::ordered_json::array();
  for (const TargetReach& t : targets) {
    nlohmann::ordered_json row;
    row["id"] = t.id;
    row["location"] = t.location;
    row["first_reach_secs"] =
        t.first_reach_secs ? nlohmann::ordered_json(*t.first_reach_secs)
                           : nlohmann::ordered_json(nullptr);
    ts.push_back(std::move(row));
  }
  j["targets"] = std::move(ts);
  j["reached_targets"] = reached_targets;
  return j;
}

namespace {

std::int64_t WallMillis() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

struct Campaign {
  const HybridConfig& config;
  const ProgramModel& program;
  std::vector<EnhancedTargetSequence> ets;
  DistanceMap distances;
  std::vector<Bytes> initial_corpus;

  fs::path corpus_dir, objective_dir, sync_dir, status_dir, explorer_dir;
  bool sync_enabled = false;

  SeedQueue queue;
  std::atomic<bool> stop{false};
};

struct FuzzerSlot {
  std::size_t index = 0;
  std::string name;
  std::thread thread;
  std::atomic<bool> done{false};
  std::exception_ptr error;
  std::unique_ptr<Fuzzer> fuzzer;
  std::size_t restarts = 0;
  std::uint64_t retired_executions = 0;
};

struct ExplorerSlot {
  std::size_t index = 0;
  std::string name;
  std::thread thread;
  std::atomic<bool> done{false};
  std::exception_ptr error;
  std::size_t restarts = 0;
  std::atomic<std::size_t> runs{0};
  std::atomic<std::size_t> files{0};
};

void FuzzerMain(Campaign& c, FuzzerSlot& slot) {
  try {
    const double scale = c.config.time_scale;
    FuzzerOptions opts;
    opts.name = slot.name;
    opts.corpus_dir = c.corpus_dir / slot.name;
    opts.objective_dir = c.objective_dir;
    opts.schedule = c.config.schedule;
    opts.rng_seed = c.config.seed + 7919 * slot.index + 104729 * slot.restarts;
    opts.step_limit = c.config.step_limit;
    opts.mutations_per_seed = c.config.mutations_per_seed;
    opts.annealing = c.config.annealing;
    slot.fuzzer = std::make_unique<Fuzzer>(c.program, c.ets, c.distances, opts);
    Fuzzer& f = *slot.fuzzer;
    f.Bootstrap(c.initial_corpus);

    std::ofstream status(c.status_dir / slot.name, std::ios::app);
    double next_status = 0;
    double next_sync = NextSyncInterval(std::nullopt) * scale;
    while (!c.stop.load(std::memory_order_relaxed)) {
      f.FuzzIteration();
      const double t = f.ElapsedSeconds();
      if (t >= next_status) {
        status << FormatStatusLine(slot.name, t, f.stats()) << '\n' << std::flush;
        next_status = t + scale;
      }
      if (c.sync_enabled && t >= next_sync) {
        std::optional<double> took;
        if (fs::is_directory(c.sync_dir)) {
          took = f.SyncFromDir(c.sync_dir, c.config.import_all)
                     .import_duration.count() / scale;
        }
        next_sync = f.ElapsedSeconds() + NextSyncInterval(took) * scale;
      }
    }
    status << FormatStatusLine(slot.name, f.ElapsedSeconds(), f.stats()) << '\n';
  } catch (...) {
    slot.error = std::current_exception();
  }
  slot.done = true;
}

void ExplorerMain(Campaign& c, ExplorerSlot& slot) {
  try {
    std::error_code ec;
    fs::create_directories(c.sync_dir, ec);
    CheckWritableDir(c.sync_dir);
    std::ofstream log(c.explorer_dir / (slot.name + ".jsonl"), std::ios::app);
    while (auto entry = c.queue.WaitPop()) {
      if (c.stop) break;
      const fs::path seed_path(entry->seed_path);
      Bytes seed;
      try {
        seed = ReadFileBytes(seed_path);
      } catch (const std::exception& e) {
        spdlog::warn("[{}] skipping seed {}: {}", slot.name, entry->seed_path,
                     e.what());
        continue;
      }
      ExplorerRunResult r =
          RunExplorer(seed, seed_path.filename().string(), c.program, c.sync_dir,
                      c.config.budget, c.config.step_limit, &c.stop);
      ++slot.runs;
      slot.files += r.files_written;
      for (const GeneratedInput& g : r.generated) {
        nlohmann::ordered_json j;
        j["file"] = g.file_name;
        j["source_seed"] = entry->seed_path;
        j["index"] = g.inverted_index;
        j["optimistic"] = g.optimistic;
        log << j.dump() << '\n';
      }
      log.flush();
    }
  } catch (...) {
    slot.error = std::current_exception();
  }
  slot.done = true;
}

std::string DescribeError(const std::exception_ptr& e) {
  try {
    std::rethrow_exception(e);
  } catch (const std::exception& ex) {
    return ex.what();
  } catch (...) {
    return "unknown error";
  }
}

// Reads the complete lines appended to each status file since the last call.
class StatusReader {
 public:
  explicit StatusReader(fs::path dir) : dir_(std::move(dir)) {}

  std::vector<ClientStatus> Poll() {
    std::vector<ClientStatus> out;
    std::error_code ec;
    for (const auto& entry : fs::directory_iterator(dir_, ec)) {
      const std::string key = entry.path().filename().string();
      std::ifstream in(entry.path(), std::ios::binary);
      in.seekg(offsets_[key]);
      std::string line;
      while (std::getline(in, line)) {
        if (in.eof()) break;  // partial line; reread next time
        offsets_[key] += static_cast<std::streamoff>(line.size() + 1);
        if (auto s = ParseStatusLine(line)) {
          latest_[key] = *s;
          out.push_back(*s);
        }
      }
    }
    return out;
  }

  const std::map<std::string, ClientStatus>& latest() const { return latest_; }

 private:
  fs::path dir_;
  std::map<std::string, std::streamoff> offsets_;
  std::map<std::string, ClientStatus> latest_;
};

void ResetWorkDir(const fs::path& work) {
  for (const char* sub : {"corpus", "objectives", "status", "explorer", "sorted"}) {
    fs::remove_all(work / sub);
  }
  // A non-directory `sync` entry is left alone: the explorers report it.
  if (fs::is_directory(work / "sync")) fs::remove_all(work / "sync");
  for (const char* f : {"stats.log", "stats.jsonl", "report.json"}) {
    fs::remove(work / f);
  }
}

}  // namespace

FinalReport RunHybrid(const HybridConfig& config, const RunOptions& options) {
  if (!(config.time_scale > 0)) throw ConfigError("time_scale must be positive");
  const ProgramModel program = ResolveProgram(config);
  const std::vector<TargetPoint>& targets = program.targets();

  Campaign c{config, program, {}, {}, {}, {}, {}, {}, {}, {}};
  const CallGraph cg = BuildCallGraph(program);
  const DominatorMap doms = ComputeAllDominators(program);
  for (const TargetPoint& t : targets) {
    try {
      c.ets.push_back(BuildEts(program, t, cg, doms));
    } catch (const AnalysisError& e) {
      spdlog::warn("{}", e.what());
    }
  }
  c.distances = ComputeDistanceMap(program, targets);
  if (config.difuzz.initial_corpus) {
    for (const fs::path& p : ListSeedFiles(*config.difuzz.initial_corpus)) {
      c.initial_corpus.push_back(ReadFileBytes(p));
    }
  }

  const fs::path work = config.difuzz.work_dir;
  fs::create_directories(work);
  ResetWorkDir(work);
  c.corpus_dir = work / "corpus";
  c.objective_dir = work / "objectives";
  c.sync_dir = work / "sync";
  c.status_dir = work / "status";
  c.explorer_dir = work / "explorer";
  c.sync_enabled = config.explorer.jobs > 0;
  for (const fs::path& d : {c.corpus_dir, c.objective_dir, c.status_dir}) {
    fs::create_directories(d);
  }
  if (c.sync_enabled) fs::create_directories(c.explorer_dir);

  FinalReport report;
  report.mode = config.schedule == Schedule::kAnnealing ? "annealing"
                : c.sync_enabled                          ? "hybrid"
                                                          : "pure";
  report.fuzzer_workers = config.difuzz.jobs;
  report.explorer_workers = config.explorer.jobs;

  const std::int64_t start_ms = WallMillis();
  const Clock::time_point start = Clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(Clock::now() - start).count();
  };

  std::vector<std::unique_ptr<FuzzerSlot>> fuzzers;
  for (std::size_t k = 0; k < config.difuzz.jobs; ++k) {
    auto s = std::make_unique<FuzzerSlot>();
    s->index = k;
    s->name = "f" + std::to_string(k);
    s->thread = std::thread(FuzzerMain, std::ref(c), std::ref(*s));
    fuzzers.push_back(std::move(s));
  }
  std::vector<std::unique_ptr<ExplorerSlot>> explorers;
  for (std::size_t k = 0; k < config.explorer.jobs; ++k) {
    auto s = std::make_unique<ExplorerSlot>();
    s->index = k;
    s->name = "e" + std::to_string(k);
    s->thread = std::thread(ExplorerMain, std::ref(c), std::ref(*s));
    explorers.push_back(std::move(s));
  }

  std::ofstream stats_log(work / "stats.log");
  std::ofstream stats_jsonl(work / "stats.jsonl");
  StatusReader status_reader(c.status_dir);
  std::set<std::string> queued;
  std::unordered_set<std::string> objectives_seen;
  std::set<std::string> reached;
  std::optional<double> last_objective_secs;
  std::map<std::string, std::size_t> last_coverage;
  double last_growth = 0;

  const double status_period = config.time_scale;
  const double minute_period = 60.0 * config.time_scale;
  double next_status = status_period;
  double next_minute = minute_period;
  std::string reason;

  auto scan_objectives = [&] {
    for (const fs::path& p : ListSeedFiles(c.objective_dir)) {
      if (!objectives_seen.insert(p.filename().string()).second) continue;
      auto meta = ReadMetadata(p);
      if (!meta) continue;
      reached.insert(meta->reached_targets.begin(), meta->reached_targets.end());
      last_objective_secs =
          std::max(last_objective_secs.value_or(0.0),
                   static_cast<double>(FileTimeMillis(p) - start_ms) / 1000.0);
    }
  };

  while (reason.empty()) {
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
    const double now = elapsed();
    if (options.external_stop != nullptr && options.external_stop->load()) {
      reason = "interrupted";
      break;
    }

    // Restart failed workers; give up after kMaxWorkerRestarts per slot.
    for (auto& s : fuzzers) {
      if (!s->done || !s->error) continue;
      s->thread.join();
      spdlog::warn("[{}] worker failed: {}", s->name, DescribeError(s->error));
      if (s->fuzzer) s->retired_executions += s->fuzzer->stats().executions;
      if (s->restarts >= kMaxWorkerRestarts) {
        reason = "worker failure";
        break;
      }
      ++s->restarts;
      ++report.worker_restarts;
      s->name = "f" + std::to_string(s->index) + "r" + std::to_string(s->restarts);
      s->error = nullptr;
      s->done = false;
      s->thread = std::thread(FuzzerMain, std::ref(c), std::ref(*s));
    }
    for (auto& s : explorers) {
      if (!reason.empty()) break;
      if (!s->done || !s->error) continue;
      s->thread.join();
      spdlog::warn("[{}] worker failed: {}", s->name, DescribeError(s->error));
      if (s->restarts >= kMaxWorkerRestarts) {
        reason = "worker failure";
        break;
      }
      ++s->restarts;
      ++report.worker_restarts;
      s->error = nullptr;
      s->done = false;
      s->thread = std::thread(ExplorerMain, std::ref(c), std::ref(*s));
    }
    if (!reason.empty()) break;

    if (now >= config.stop.max_duration_secs) {
      reason = "max duration";
      break;
    }

    if (now >= next_status) {
      next_status += status_period;
      for (const ClientStatus& s : status_reader.Poll()) {
        if (options.print_client_status && options.log != nullptr) {
          *options.log << FormatStatusLine(s.name, s.elapsed_secs, FuzzerStats{
                                               0, 0, s.corpus, s.objectives,
                                               s.coverage, {}})
                       << '\n';
        }
        std::size_t& prev = last_coverage[s.name];
        if (s.coverage > prev) {
          prev = s.coverage;
          last_growth = now;
        }
      }
    }

    if (now >= next_minute) {
      next_minute += minute_period;
      if (c.sync_enabled) EnqueueCorpusUpdates(c.queue, c.corpus_dir, queued);
      scan_objectives();

      std::size_t corpus = 0;
      double eps = 0;
      for (const auto& [name, s] : status_reader.latest()) {
        corpus += s.corpus;
        eps += s.execs_per_sec;
      }
      char line[256];
      std::snprintf(line, sizeof(line),
                    "[stats] time: %.1fs corpus: %zu objectives: %zu exec/s: "
                    "%.0f queue: %zu reached: %zu/%zu last_objective: %s",
                    now, corpus, objectives_seen.size(), eps, c.queue.size(),
                    reached.size(), targets.size(),
                    last_objective_secs
                        ? (std::to_string(*last_objective_secs) + "s").c_str()
                        : "none");
      stats_log << line << '\n' << std::flush;
      if (options.log != nullptr) *options.log << line << '\n' << std::flush;
      nlohmann::ordered_json j;
      j["time"] = now;
      j["corpus"] = corpus;
      j["objectives"] = objectives_seen.size();
      j["execs_per_sec"] = eps;
      j["queue"] = c.queue.size();
      j["reached"] = std::vector<std::string>(reached.begin(), reached.end());
      j["last_objective_secs"] =
          last_objective_secs ? nlohmann::ordered_json(*last_objective_secs)
                              : nlohmann::ordered_json(nullptr);
      stats_jsonl << j.dump() << '\n' << std::flush;

      RunStatus rs{now, now - last_growth, reached};
      StopDecision d = CheckStop(rs, config.stop, targets);
      if (d.stop) reason = d.reason;
    }
  }

  c.stop = true;
  c.queue.Close();
  for (auto& s : fuzzers) {
    if (s->thread.joinable()) s->thread.join();
  }
  for (auto& s : explorers) {
    if (s->thread.joinable()) s->thread.join();
  }
  report.stop_reason = reason;
  report.duration_secs = elapsed();
  if (options.log != nullptr) {
    *options.log << "[stop] " << reason << " after " << report.duration_secs
                 << "s\n";
  }

  for (auto& s : fuzzers) {
    report.executions += s->retired_executions;
    if (s->fuzzer && !s->error) {
      report.executions += s->fuzzer->stats().executions;
      report.corpus_size += s->fuzzer->corpus().size();
    }
  }
  for (auto& s : explorers) {
    report.explorer_runs += s->runs;
    report.explorer_files += s->files;
  }

  std::map<std::string, double> first_reach;
  const std::vector<ObjectiveRecord> all = ReadObjectives(c.objective_dir);
  for (const ObjectiveRecord& rec : all) {
    const double t =
        std::max(0.0, static_cast<double>(rec.created_at_ms - start_ms) / 1000.0);
    for (const std::string& loc : rec.metadata.reached_targets) {
      auto [it, fresh] = first_reach.emplace(loc, t);
      if (!fresh) it->second = std::min(it->second, t);
    }
  }
  for (const TargetPoint& t : targets) {
    TargetReach tr{t.id, t.location, std::nullopt};
    if (auto it = first_reach.find(t.location); it != first_reach.end()) {
      tr.first_reach_secs = it->second;
      report.reached_targets.push_back(t.location);
    }
    report.targets.push_back(std::move(tr));
  }

  report.objectives_before = ListSeedFiles(c.objective_dir).size();
  MinimizeResult m = MinimizeObjectives(c.objective_dir);
  report.objectives_after = m.kept.size() + m.unreadable.size();
  report.objectives_archived = m.archived.size();
  SortObjectives(m.kept, work / "sorted", targets);

  AtomicWriteFile(work / "report.json", report.ToJson().dump(2) + "\n");
  return report;
}

}  // namespace hydfuzz
