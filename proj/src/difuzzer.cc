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

#include "hydfuzz/difuzzer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iomanip>
#include <sstream>

#include <spdlog/spdlog.h>

namespace hydfuzz {

namespace fs = std::filesystem;

EtsFeedbackResult EtsFeedback(const ExecutionTrace& trace,
                              const std::set<BlockId>& ets_blocks,
                              std::set<BlockId>& ets_seen) {
  EtsFeedbackResult result;
  std::optional<BlockId> last;  // last block of the full trace
  for (BlockId b : trace.block_sequence) {
    if (ets_blocks.contains(b)) {
      if (!last || *last != b) result.ets_trace.push_back(b);
      if (ets_seen.insert(b).second) result.is_interesting = true;
    }
    last = b;
  }
  return result;
}

bool MapFeedback(const ExecutionTrace& trace, std::set<BlockId>& coverage) {
  bool interesting = false;
  for (BlockId b : trace.block_sequence) {
    if (coverage.insert(b).second) interesting = true;
  }
  return interesting;
}

ObjectiveKind ClassifyObjective(const ExecutionTrace& trace) {
  switch (trace.outcome) {
    case Outcome::kCrash: return ObjectiveKind::kCrash;
    case Outcome::kTimeout: return ObjectiveKind::kTimeout;
    case Outcome::kOk: break;
  }
  return trace.reached_targets.empty() ? ObjectiveKind::kNone
                                       : ObjectiveKind::kTargetReach;
}

namespace {

std::size_t Below(Rng& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

std::uint8_t RandomByte(Rng& rng) {
  return static_cast<std::uint8_t>(
      std::uniform_int_distribution<int>(0, 255)(rng));
}

enum Op { kBitFlip, kByteReplace, kInsert, kDelete, kInt16, kInt32, kSplice, kOpCount };

}  // namespace

Bytes Mutate(std::span<const std::uint8_t> input, Rng& rng,
             std::span<const std::uint8_t> splice_partner) {
  if (input.empty()) return Bytes{RandomByte(rng)};

  Bytes out(input.begin(), input.end());
  int op = static_cast<int>(Below(rng, kOpCount));
  if (op == kInt32 && out.size() < 4) op = kByteReplace;
  if (op == kInt16 && out.size() < 2) op = kByteReplace;
  if (op == kSplice && splice_partner.size() < 2) op = kBitFlip;
  if (op == kDelete && out.size() < 2) op = kInsert;

  switch (op) {
    case kBitFlip:
      out[Below(rng, out.size())] ^= static_cast<std::uint8_t>(1u << Below(rng, 8));
      break;
    case kByteReplace:
      out[Below(rng, out.size())] ^= static_cast<std::uint8_t>(1 + Below(rng, 255));
      break;
    case kInsert: {
      const std::size_t pos = Below(rng, out.size() + 1);
      const std::size_t n = 1 + Below(rng, 4);
      Bytes ins(n);
      for (auto& b : ins) b = RandomByte(rng);
      out.insert(out.begin() + static_cast<std::ptrdiff_t>(pos), ins.begin(), ins.end());
      break;
    }
    case kDelete: {
      const std::size_t pos = Below(rng, out.size());
      // Never delete the last byte.
      const std::size_t n =
          1 + Below(rng, std::min<std::size_t>({4, out.size() - pos, out.size() - 1}));
      out.erase(out.begin() + static_cast<std::ptrdiff_t>(pos),
                out.begin() + static_cast<std::ptrdiff_t>(pos + n));
      break;
    }
    case kInt16:
    case kInt32: {
      const std::size_t width = op == kInt16 ? 2 : 4;
      const std::size_t pos = Below(rng, out.size() - width + 1);
      for (std::size_t i = 0; i < width; ++i) out[pos + i] = RandomByte(rng);
      break;
    }
    case kSplice: {
      const std::size_t cut = 1 + Below(rng, out.size());
      out.resize(cut);
      if (cut < splice_partner.size()) {
        out.insert(out.end(), splice_partner.begin() + static_cast<std::ptrdiff_t>(cut),
                   splice_partner.end());
      }
      if (out.size() > input.size() + 8) out.resize(input.size() + 8);
      break;
    }
  }
  // Splicing with a similar partner or rewriting bytes with the same values
  // can leave the input untouched.
  if (std::equal(out.begin(), out.end(), input.begin(), input.end())) {
    out[Below(rng, out.size())] ^= static_cast<std::uint8_t>(1u << Below(rng, 8));
  }
  return out;
}

double AnnealingTemperature(double elapsed_secs, const AnnealingParams& p) {
  return std::exp2(-elapsed_secs / p.t_exploration_secs);
}

double AnnealingEnergy(double distance, double max_finite_distance,
                       double elapsed_secs, const AnnealingParams& p) {
  double normalized = 1.0;
  if (distance != kInfiniteDistance) {
    normalized = max_finite_distance > 0.0
                     ? std::clamp(distance / max_finite_distance, 0.0, 1.0)
                     : 0.0;
  }
  const double t = AnnealingTemperature(elapsed_secs, p);
  return p.min_energy +
         (p.max_energy - p.min_energy) * (1.0 - normalized) * (1.0 - t);
}

Fuzzer::Fuzzer(const ProgramModel& program,
               std::vector<EnhancedTargetSequence> ets, DistanceMap distances,
               FuzzerOptions options)
    : program_(program),
      ets_(std::move(ets)),
      ets_blocks_(CollectEtsBlocks(ets_)),
      distances_(std::move(distances)),
      options_(std::move(options)),
      rng_(options_.rng_seed),
      start_(std::chrono::steady_clock::now()) {
  fs::create_directories(options_.corpus_dir);
  fs::create_directories(options_.objective_dir);
}

double Fuzzer::ElapsedSeconds() const {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_)
      .count();
}

std::int64_t Fuzzer::NowMs() const {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::steady_clock::now() - start_)
      .count();
}

namespace {

std::string NumberedName(const std::string& prefix, std::uint64_t n) {
  std::ostringstream ss;
  ss << prefix << "_" << std::setw(6) << std::setfill('0') << n;
  return ss.str();
}

// Objectives are admitted once per (outcome, covered block set, reached
// targets) so a single lucky path does not flood the objective directory.
std::size_t ObjectiveSignature(const ExecutionTrace& trace) {
  std::vector<BlockId> blocks = trace.block_sequence;
  std::sort(blocks.begin(), blocks.end());
  blocks.erase(std::unique(blocks.begin(), blocks.end()), blocks.end());
  std::string key(OutcomeName(trace.outcome));
  for (BlockId b : blocks) key += "," + std::to_string(b);
  for (const auto& t : trace.reached_targets) key += "|" + t;
  return std::hash<std::string>{}(key);
}

}  // namespace

EvalResult Fuzzer::Evaluate(std::span<const std::uint8_t> input,
                            bool force_corpus) {
  const ExecutionTrace trace =
      Execute(program_, input, options_.step_limit, false);
  ++stats_.executions;

  EvalResult r;
  EtsFeedbackResult ets = EtsFeedback(trace, ets_blocks_, ets_seen_);
  r.meta.is_interesting_ets = ets.is_interesting;
  r.meta.is_interesting_map = MapFeedback(trace, coverage_);
  r.meta.ets_trace = std::move(ets.ets_trace);
  r.meta.reached_targets = trace.reached_targets;
  r.meta.is_crash = trace.outcome == Outcome::kCrash;
  r.meta.is_timeout = trace.outcome == Outcome::kTimeout;
  r.kind = ClassifyObjective(trace);
  stats_.coverage = coverage_.size();

  const std::int64_t now = NowMs();
  for (const auto& loc : trace.reached_targets) stats_.first_reach_ms.emplace(loc, now);

  if (r.kind != ObjectiveKind::kNone &&
      objective_signatures_.insert(ObjectiveSignature(trace)).second) {
    ObjectiveEntry obj;
    obj.file_name = NumberedName(options_.name, objective_counter_++);
    obj.created_at_ms = now;
    obj.kind = r.kind;
    obj.meta = r.meta;
    const fs::path path = options_.objective_dir / obj.file_name;
    WriteMetadata(path, obj.meta);
    AtomicWriteFile(path, input);
    objectives_.push_back(std::move(obj));
    stats_.objectives = objectives_.size();
    r.added_to_objectives = true;
  }

  // Crashing and hanging inputs are poor mutation bases; they only live in
  // the objective directory.
  const bool usable = r.kind != ObjectiveKind::kCrash &&
                      r.kind != ObjectiveKind::kTimeout;
  if (usable && (force_corpus || r.meta.is_interesting_ets ||
                 r.meta.is_interesting_map)) {
    CorpusEntry entry;
    entry.bytes.assign(input.begin(), input.end());
    entry.file_name = NumberedName(options_.name, corpus_counter_++);
    entry.created_at_ms = now;
    entry.meta = r.meta;
    entry.imported = force_corpus;
    entry.distance = SeedDistance(trace, distances_);
    if (entry.distance != kInfiniteDistance) {
      max_finite_distance_ = std::max(max_finite_distance_, entry.distance);
    }
    const fs::path path = options_.corpus_dir / entry.file_name;
    WriteMetadata(path, entry.meta);
    AtomicWriteFile(path, input);
    corpus_.push_back(std::move(entry));
    stats_.corpus_size = corpus_.size();
    r.added_to_corpus = true;
  }
  return r;
}

void Fuzzer::Bootstrap(std::span<const Bytes> initial) {
  if (!initial.empty()) {
    for (const Bytes& b : initial) Evaluate(b, false);
    if (!corpus_.empty()) return;
  }
  const std::size_t len = std::max<std::size_t>(1, program_.input_arity());
  for (int i = 0; i < 8; ++i) {
    Bytes b(len);
    for (auto& x : b) x = RandomByte(rng_);
    Evaluate(b, false);
  }
}

// Round-robin weighted by interest: each selection of a seed costs 1 if it
// found new ETS blocks, 2 if it only found new coverage, 4 otherwise. The
// cheapest seed wins; among equals the newest one.
std::size_t Fuzzer::SelectEtsPriority() {
  std::size_t best = 0;
  std::uint64_t best_cost = ~std::uint64_t{0};
  for (std::size_t i = 0; i < corpus_.size(); ++i) {
    const CorpusEntry& e = corpus_[i];
    const std::uint64_t tier =
        e.meta.is_interesting_ets ? 1 : (e.meta.is_interesting_map ? 2 : 4);
    const std::uint64_t cost = e.times_selected * tier;
    if (cost <= best_cost) {
      best = i;
      best_cost = cost;
    }
  }
  return best;
}

std::size_t Fuzzer::SelectAnnealing() {
  const double elapsed = ElapsedSeconds();
  std::vector<double> weights;
  weights.reserve(corpus_.size());
  for (const CorpusEntry& e : corpus_) {
    weights.push_back(AnnealingEnergy(e.distance, max_finite_distance_, elapsed,
                                      options_.annealing));
  }
  std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
  return pick(rng_);
}

void Fuzzer::FuzzIteration() {
  if (corpus_.empty()) Bootstrap();
  if (corpus_.empty()) return;

  const std::size_t idx = options_.schedule == Schedule::kEtsPriority
                              ? SelectEtsPriority()
                              : SelectAnnealing();
  CorpusEntry& chosen = corpus_[idx];
  ++chosen.times_selected;
  const Bytes base = chosen.bytes;

  std::size_t rounds = options_.mutations_per_seed;
  if (options_.schedule == Schedule::kAnnealing) {
    rounds = static_cast<std::size_t>(std::lround(
        AnnealingEnergy(chosen.distance, max_finite_distance_, ElapsedSeconds(),
                        options_.annealing)));
    rounds = std::max<std::size_t>(rounds, 1);
  }

  for (std::size_t i = 0; i < rounds; ++i) {
    const Bytes partner = corpus_[Below(rng_, corpus_.size())].bytes;
    Bytes mutant = Mutate(base, rng_, partner);
    if (mutant.size() > options_.max_input_size) {
      mutant.resize(options_.max_input_size);
    }
    Evaluate(mutant, false);
  }
}

SyncResult Fuzzer::SyncFromDir(const fs::path& dir, bool import_all) {
  const auto begin = std::chrono::steady_clock::now();
  SyncResult result;
  for (const fs::path& path : ListSeedFiles(dir)) {
    const std::string name = path.filename().string();
    if (imported_names_.contains(name)) continue;
    Bytes bytes;
    try {
      bytes = ReadFileBytes(path);
    } catch (const std::exception& e) {
      spdlog::warn("[{}] skipping sync file {}: {}", options_.name, name, e.what());
      continue;
    }
    imported_names_.insert(name);
    ++result.examined;
    ++stats_.imported;
    const EvalResult r = Evaluate(bytes, import_all);
    if (r.added_to_corpus) ++result.added_to_corpus;
    if (r.added_to_objectives) ++result.objectives;
  }
  result.import_duration = std::chrono::steady_clock::now() - begin;
  return result;
}

std::string FormatStatusLine(const std::string& name, double elapsed_secs,
                             const FuzzerStats& stats) {
  const double eps =
      elapsed_secs > 0 ? static_cast<double>(stats.executions) / elapsed_secs : 0.0;
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "[%s] time: %.1fs corpus: %zu objectives: %zu exec/s: %.0f "
                "coverage: %zu",
                name.c_str(), elapsed_secs, stats.corpus_size, stats.objectives,
                eps, stats.coverage);
  return buf;
}

std::optional<ClientStatus> ParseStatusLine(std::string_view line) {
  ClientStatus s;
  char name[128];
  unsigned long corpus = 0, objectives = 0, coverage = 0;
  const std::string text(line);
  if (std::sscanf(text.c_str(),
                  "[%127[^]]] time: %lfs corpus: %lu objectives: %lu exec/s: "
                  "%lf coverage: %lu",
                  name, &s.elapsed_secs, &corpus, &objectives, &s.execs_per_sec,
                  &coverage) != 6) {
    return std::nullopt;
  }
  s.name = name;
  s.corpus = corpus;
  s.objectives = objectives;
  s.coverage = coverage;
  return s;
}

}  // namespace hydfuzz
