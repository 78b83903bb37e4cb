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

#include "hydfuzz/config.hpp"

#include <fstream>
#include <sstream>

#include "toml.hpp"

namespace hydfuzz {

namespace fs = std::filesystem;

namespace {

std::vector<std::string> SplitArgs(std::string_view args) {
  std::istringstream ss{std::string(args)};
  std::vector<std::string> out;
  for (std::string tok; ss >> tok;) out.push_back(tok);
  return out;
}

fs::path Resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

std::string GetString(const toml::table& t, std::string_view key,
                      const std::string& table, bool required,
                      std::string fallback = {}) {
  const toml::node* n = t.get(key);
  if (n == nullptr) {
    if (required) {
      throw ConfigError("[" + table + "] is missing '" + std::string(key) + "'");
    }
    return fallback;
  }
  auto v = n->value<std::string>();
  if (!v) {
    throw ConfigError("[" + table + "] '" + std::string(key) +
                      "' must be a string");
  }
  return *v;
}

std::optional<std::int64_t> GetInt(const toml::table& t, std::string_view key,
                                   const std::string& table) {
  const toml::node* n = t.get(key);
  if (n == nullptr) return std::nullopt;
  const auto* i = n->as_integer();
  if (i == nullptr) {
    throw ConfigError("[" + table + "] '" + std::string(key) +
                      "' must be an integer");
  }
  return i->get();
}

std::optional<double> GetNumber(const toml::table& t, std::string_view key,
                                const std::string& table) {
  const toml::node* n = t.get(key);
  if (n == nullptr) return std::nullopt;
  if (const auto* i = n->as_integer()) return static_cast<double>(i->get());
  if (const auto* f = n->as_floating_point()) return f->get();
  throw ConfigError("[" + table + "] '" + std::string(key) +
                    "' must be a number");
}

std::optional<bool> GetBool(const toml::table& t, std::string_view key,
                            const std::string& table) {
  const toml::node* n = t.get(key);
  if (n == nullptr) return std::nullopt;
  const auto* b = n->as_boolean();
  if (b == nullptr) {
    throw ConfigError("[" + table + "] '" + std::string(key) +
                      "' must be a boolean");
  }
  return b->get();
}

std::size_t GetJobs(const toml::table& t, const std::string& table,
                    std::size_t fallback) {
  auto jobs = GetInt(t, "jobs", table);
  if (!jobs) return fallback;
  if (*jobs < 1) throw ConfigError("[" + table + "] jobs must be >= 1");
  return static_cast<std::size_t>(*jobs);
}

std::vector<TargetPoint> ParseTargets(const toml::table& doc) {
  std::vector<TargetPoint> out;
  const toml::node* n = doc.get("target");
  if (n == nullptr) return out;
  if (!n->is_array_of_tables()) {
    throw ConfigError("'target' must be an array of [[target]] tables");
  }
  for (const toml::node& e : *n->as_array()) {
    const toml::table& t = *e.as_table();
    out.push_back(TargetPoint{GetString(t, "id", "target", true),
                              GetString(t, "location", "target", true)});
  }
  return out;
}

toml::table ParseToml(std::string_view text) {
  try {
    return toml::parse(text);
  } catch (const toml::parse_error& e) {
    std::ostringstream ss;
    ss << "config parse error: " << e.description() << " (line "
       << e.source().begin.line << ", column " << e.source().begin.column
       << ")";
    throw ConfigError(ss.str());
  }
}

}  // namespace

std::string TargetProgramPath(std::string_view target) {
  const auto tokens = SplitArgs(target);
  return tokens.empty() ? std::string() : tokens.front();
}

HybridConfig ParseConfig(std::string_view text, const fs::path& base_dir) {
  const toml::table doc = ParseToml(text);
  HybridConfig cfg;

  const toml::table* explorer = doc["explorer"].as_table();
  const toml::table* sydr = doc["sydr"].as_table();
  if (explorer != nullptr && sydr != nullptr) {
    throw ConfigError("both [explorer] and its alias [sydr] are present");
  }
  if (sydr != nullptr) explorer = sydr;
  const std::string explorer_name = sydr != nullptr ? "sydr" : "explorer";

  const toml::table* difuzz = doc["difuzz"].as_table();
  if (difuzz == nullptr) throw ConfigError("missing [difuzz] table");

  cfg.difuzz.target = GetString(*difuzz, "target", "difuzz", true);
  cfg.difuzz.args = GetString(*difuzz, "args", "difuzz", false);
  cfg.difuzz.work_dir =
      Resolve(base_dir, GetString(*difuzz, "path", "difuzz", false, "work"));
  cfg.difuzz.program_path =
      Resolve(base_dir, TargetProgramPath(cfg.difuzz.target));
  if (TargetProgramPath(cfg.difuzz.target).empty()) {
    throw ConfigError("[difuzz] target is empty");
  }

  std::size_t args_jobs = 1;
  const auto tokens = SplitArgs(cfg.difuzz.args);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const std::string& tok = tokens[i];
    auto value = [&]() -> std::string {
      if (i + 1 >= tokens.size()) {
        throw ConfigError("[difuzz] args: " + tok + " needs a value");
      }
      return tokens[++i];
    };
    if (tok == "-i") {
      cfg.difuzz.initial_corpus = Resolve(base_dir, value());
    } else if (tok == "-e") {
      cfg.difuzz.targets_file = Resolve(base_dir, value());
    } else if (tok.rfind("-j", 0) == 0) {
      const std::string n = tok.size() > 2 ? tok.substr(2) : value();
      try {
        const long v = std::stol(n);
        if (v < 1) throw ConfigError("[difuzz] args: -j must be >= 1");
        args_jobs = static_cast<std::size_t>(v);
      } catch (const std::logic_error&) {
        throw ConfigError("[difuzz] args: bad job count '" + n + "'");
      }
    }
  }
  cfg.difuzz.jobs = GetJobs(*difuzz, "difuzz", args_jobs);

  if (explorer != nullptr) {
    cfg.explorer.target = GetString(*explorer, "target", explorer_name, true);
    cfg.explorer.args = GetString(*explorer, "args", explorer_name, false);
    cfg.explorer.jobs = GetJobs(*explorer, explorer_name, 1);
    if (TargetProgramPath(cfg.explorer.target).empty()) {
      throw ConfigError("[" + explorer_name + "] target is empty");
    }
    cfg.explorer.program_path =
        Resolve(base_dir, TargetProgramPath(cfg.explorer.target));
  } else {
    // No explorer table: pure directed fuzzing.
    cfg.explorer.jobs = 0;
    cfg.explorer.target = cfg.difuzz.target;
    cfg.explorer.program_path = cfg.difuzz.program_path;
  }

  cfg.targets = ParseTargets(doc);

  if (const toml::table* b = doc["budget"].as_table()) {
    if (auto v = GetNumber(*b, "per_run_secs", "budget")) cfg.budget.per_run_limit = Seconds(*v);
    if (auto v = GetNumber(*b, "per_query_secs", "budget")) cfg.budget.per_query_limit = Seconds(*v);
    if (auto v = GetNumber(*b, "total_solve_secs", "budget")) cfg.budget.total_solve_limit = Seconds(*v);
    if (auto v = GetInt(*b, "max_inversions", "budget")) {
      if (*v < 1) throw ConfigError("[budget] max_inversions must be >= 1");
      cfg.budget.max_inversions = static_cast<std::size_t>(*v);
    }
  }
  if (!cfg.budget.Valid()) {
    throw ConfigError(
        "[budget] requires per_query_secs <= total_solve_secs <= per_run_secs");
  }

  if (const toml::table* s = doc["stop"].as_table()) {
    if (auto v = GetNumber(*s, "max_duration_secs", "stop")) cfg.stop.max_duration_secs = *v;
    if (auto v = GetNumber(*s, "stall_duration_secs", "stop")) cfg.stop.stall_duration_secs = *v;
    if (auto v = GetBool(*s, "stop_on_all_targets", "stop")) cfg.stop.stop_on_all_targets = *v;
  }
  if (cfg.stop.max_duration_secs <= 0 || cfg.stop.stall_duration_secs <= 0) {
    throw ConfigError("[stop] durations must be positive");
  }

  if (const toml::table* c = doc["campaign"].as_table()) {
    if (auto v = GetNumber(*c, "time_scale", "campaign")) {
      if (*v <= 0) throw ConfigError("[campaign] time_scale must be positive");
      cfg.time_scale = *v;
    }
    if (auto v = GetInt(*c, "seed", "campaign")) cfg.seed = static_cast<std::uint64_t>(*v);
    const std::string schedule = GetString(*c, "schedule", "campaign", false, "ets");
    if (schedule == "ets") {
      cfg.schedule = Schedule::kEtsPriority;
    } else if (schedule == "annealing") {
      cfg.schedule = Schedule::kAnnealing;
    } else {
      throw ConfigError("[campaign] schedule must be \"ets\" or \"annealing\"");
    }
    if (auto v = GetBool(*c, "import_all", "campaign")) cfg.import_all = *v;
    if (auto v = GetInt(*c, "step_limit", "campaign")) {
      if (*v < 1) throw ConfigError("[campaign] step_limit must be >= 1");
      cfg.step_limit = static_cast<std::size_t>(*v);
    }
    if (auto v = GetInt(*c, "mutations_per_seed", "campaign")) {
      if (*v < 1) throw ConfigError("[campaign] mutations_per_seed must be >= 1");
      cfg.mutations_per_seed = static_cast<std::size_t>(*v);
    }
  }
  if (const toml::table* a = doc["annealing"].as_table()) {
    if (auto v = GetNumber(*a, "t_exploration_secs", "annealing")) cfg.annealing.t_exploration_secs = *v;
    if (auto v = GetNumber(*a, "total_budget_secs", "annealing")) cfg.annealing.total_budget_secs = *v;
    if (auto v = GetNumber(*a, "min_energy", "annealing")) cfg.annealing.min_energy = *v;
    if (auto v = GetNumber(*a, "max_energy", "annealing")) cfg.annealing.max_energy = *v;
  }
  if (cfg.annealing.t_exploration_secs <= 0 || cfg.annealing.min_energy <= 0 ||
      cfg.annealing.min_energy > cfg.annealing.max_energy) {
    throw ConfigError(
        "[annealing] needs t_exploration_secs > 0 and 0 < min_energy <= "
        "max_energy");
  }
  return cfg;
}

std::vector<TargetPoint> LoadTargetsFile(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read targets file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ParseTargets(ParseToml(ss.str()));
}

ProgramModel ResolveProgram(const HybridConfig& config) {
  ProgramModel program = LoadProgram(config.difuzz.program_path.string());
  if (!config.targets.empty()) return program.WithTargets(config.targets);
  if (config.difuzz.targets_file) {
    return program.WithTargets(LoadTargetsFile(*config.difuzz.targets_file));
  }
  return program;
}

HybridConfig LoadConfig(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  HybridConfig cfg = ParseConfig(ss.str(), path.parent_path());

  try {
    const ProgramModel fuzz_program = LoadProgram(cfg.difuzz.program_path.string());
    if (cfg.explorer.program_path != cfg.difuzz.program_path) {
      const ProgramModel explorer_program =
          LoadProgram(cfg.explorer.program_path.string());
      if (!(explorer_program == fuzz_program)) {
        throw ConfigError("[explorer] and [difuzz] targets are different programs");
      }
    }
    const ProgramModel resolved = ResolveProgram(cfg);
    if (resolved.targets().empty()) {
      throw ConfigError("no target points configured");
    }
  } catch (const ProgramError& e) {
    throw ConfigError(std::string("target program: ") + e.what());
  }
  return cfg;
}

}  // namespace hydfuzz
