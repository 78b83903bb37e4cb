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

// hydfuzz command line: run, analyze, triage, bench.

#include <atomic>
#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "hydfuzz/bench.hpp"
#include "hydfuzz/config.hpp"
#include "hydfuzz/objectives.hpp"
#include "hydfuzz/orchestrator.hpp"
#include "hydfuzz/program_model.hpp"
#include "hydfuzz/target_analysis.hpp"

namespace {

namespace fs = std::filesystem;
using namespace hydfuzz;

std::atomic<bool> g_interrupted{false};

extern "C" void OnSigint(int) { g_interrupted = true; }

void WriteOrPrint(const std::string& text, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(out, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + out);
  f << text;
}

struct RunArgs {
  std::string config;
  std::string mode = "hybrid";
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<double> duration;
  bool quiet = false;
};

int Run(const RunArgs& a) {
  HybridConfig config = LoadConfig(a.config);
  if (a.mode == "pure") {
    config.explorer.jobs = 0;
  } else if (a.mode != "hybrid") {
    throw ConfigError("--mode must be hybrid or pure");
  } else if (config.explorer.jobs == 0) {
    spdlog::warn("config has no explorer section; running without explorers");
  }
  if (!a.out.empty()) config.difuzz.work_dir = a.out;
  if (a.seed) config.seed = *a.seed;
  if (a.duration) config.stop.max_duration_secs = *a.duration;

  std::signal(SIGINT, OnSigint);
  RunOptions opts;
  opts.external_stop = &g_interrupted;
  opts.log = a.quiet ? nullptr : &std::cout;
  const FinalReport report = RunHybrid(config, opts);
  std::cout << report.ToJson().dump(2) << '\n';
  return 0;
}

int Analyze(const std::string& program_path, const std::string& targets_path,
            const std::string& out) {
  ProgramModel program = LoadProgram(program_path);
  if (!targets_path.empty()) program = program.WithTargets(LoadTargetsFile(targets_path));
  if (program.targets().empty()) throw AnalysisError("no targets given");

  const CallGraph cg = BuildCallGraph(program);
  const DominatorMap doms = ComputeAllDominators(program);
  nlohmann::json doc;
  nlohmann::json seqs = nlohmann::json::array();
  std::size_t reachable = 0;
  for (const TargetPoint& t : program.targets()) {
    try {
      seqs.push_back(EtsToJson(BuildEts(program, t, cg, doms)));
      ++reachable;
    } catch (const AnalysisError& e) {
      spdlog::warn("{}", e.what());
      seqs.push_back({{"target_id", t.id},
                      {"location", t.location},
                      {"warning", e.what()}});
    }
  }
  doc["ets"] = std::move(seqs);
  doc["distance_map"] =
      DistanceMapToJson(program, ComputeDistanceMap(program, program.targets()));
  WriteOrPrint(doc.dump(2) + "\n", out);
  return reachable == 0 ? 1 : 0;
}

int Triage(const std::string& dir, const std::string& config_path,
           const std::string& program_path, const std::string& targets_path,
           const std::string& out) {
  std::vector<TargetPoint> targets;
  if (!config_path.empty()) {
    targets = ResolveProgram(LoadConfig(config_path)).targets();
  } else if (!program_path.empty()) {
    targets = LoadProgram(program_path).targets();
  }
  if (!targets_path.empty()) targets = LoadTargetsFile(targets_path);
  if (!fs::is_directory(dir)) throw std::runtime_error(dir + " is not a directory");

  MinimizeResult m = MinimizeObjectives(dir);
  const fs::path out_dir = out.empty() ? fs::path(dir) / "sorted" : fs::path(out);
  const SortResult s = SortObjectives(m.kept, out_dir, targets);
  std::cout << "kept " << m.kept.size() << ", archived " << m.archived.size()
            << '\n';
  for (const fs::path& d : s.directories) {
    std::size_t n = 0;
    for (const auto& e : fs::directory_iterator(d)) {
      if (!IsSidecarOrTemp(e.path())) ++n;
    }
    std::cout << d.string() << ": " << n << '\n';
  }
  return 0;
}

struct BenchArgs {
  std::string program;
  std::string targets;
  std::string modes = "hybrid,pure";
  std::size_t reps = 10;
  double timeout = 60.0;
  std::string out;
  std::string work = "bench-work";
  std::uint64_t seed = 1;
  double time_scale = 0.1;
};

int Bench(const BenchArgs& a) {
  BenchmarkSpec spec;
  spec.program_path = a.program;
  if (!a.targets.empty()) spec.targets = LoadTargetsFile(a.targets);
  spec.modes.clear();
  std::stringstream ss(a.modes);
  for (std::string m; std::getline(ss, m, ',');) {
    if (!m.empty()) spec.modes.push_back(ParseBenchMode(m));
  }
  if (spec.modes.empty()) throw ConfigError("no benchmark modes");
  spec.repetitions = a.reps;
  spec.timeout_secs = a.timeout;
  spec.work_root = a.work;
  spec.seed = a.seed;
  spec.time_scale = a.time_scale;

  std::signal(SIGINT, OnSigint);
  RunOptions opts;
  opts.external_stop = &g_interrupted;
  WriteOrPrint(FormatBenchCsv(RunBenchmark(spec, opts)), a.out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  // stdout carries JSON and CSV; diagnostics go to stderr.
  spdlog::set_default_logger(spdlog::stderr_color_mt("hydfuzz"));
  CLI::App app{"hydfuzz: hybrid directed fuzzing of program models"};
  app.require_subcommand(1);

  RunArgs run;
  CLI::App* run_cmd = app.add_subcommand("run", "Run a fuzzing campaign");
  run_cmd->add_option("--config", run.config, "Campaign config (TOML)")
      ->required()
      ->check(CLI::ExistingFile);
  run_cmd->add_option("--mode", run.mode, "hybrid or pure")
      ->check(CLI::IsMember({"hybrid", "pure"}));
  run_cmd->add_option("--out", run.out, "Work directory (overrides config)");
  run_cmd->add_option("--seed", run.seed, "RNG seed");
  run_cmd->add_option("--duration", run.duration, "Max duration in seconds");
  run_cmd->add_flag("--quiet", run.quiet, "No statistics on stdout");

  std::string an_program, an_targets, an_out;
  CLI::App* an_cmd = app.add_subcommand("analyze", "Print ETS and distance map");
  an_cmd->add_option("program", an_program, "Program model (TOML)")
      ->required()
      ->check(CLI::ExistingFile);
  an_cmd->add_option("--targets", an_targets, "Targets file (TOML)")
      ->check(CLI::ExistingFile);
  an_cmd->add_option("--out", an_out, "Output JSON file");

  std::string tr_dir, tr_config, tr_program, tr_targets, tr_out;
  CLI::App* tr_cmd =
      app.add_subcommand("triage", "Minimize and sort an objective directory");
  tr_cmd->add_option("objective_dir", tr_dir)->required();
  auto* cfg = tr_cmd->add_option("--config", tr_config)->check(CLI::ExistingFile);
  tr_cmd->add_option("--program", tr_program)
      ->check(CLI::ExistingFile)
      ->excludes(cfg);
  tr_cmd->add_option("--targets", tr_targets)->check(CLI::ExistingFile);
  tr_cmd->add_option("--out", tr_out, "Sorted output (default <dir>/sorted)");

  BenchArgs bench;
  CLI::App* b_cmd = app.add_subcommand("bench", "Time-to-exposure benchmark");
  b_cmd->add_option("--program", bench.program)->required()->check(CLI::ExistingFile);
  b_cmd->add_option("--targets", bench.targets)->check(CLI::ExistingFile);
  b_cmd->add_option("--modes", bench.modes, "Comma list of hybrid,pure,annealing");
  b_cmd->add_option("--reps", bench.reps)->check(CLI::PositiveNumber);
  b_cmd->add_option("--timeout-secs", bench.timeout)->check(CLI::PositiveNumber);
  b_cmd->add_option("--out", bench.out, "CSV output (default stdout)");
  b_cmd->add_option("--work", bench.work, "Root of the per-run work dirs");
  b_cmd->add_option("--seed", bench.seed);
  b_cmd->add_option("--time-scale", bench.time_scale)->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) return Run(run);
    if (*an_cmd) return Analyze(an_program, an_targets, an_out);
    if (*tr_cmd) return Triage(tr_dir, tr_config, tr_program, tr_targets, tr_out);
    if (*b_cmd) return Bench(bench);
  } catch (const SyntaxError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
