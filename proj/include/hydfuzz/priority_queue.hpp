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

#ifndef HYDFUZZ_PRIORITY_QUEUE_HPP_
#define HYDFUZZ_PRIORITY_QUEUE_HPP_

#include <compare>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace hydfuzz {

// Scheduling key of a corpus seed for the explorer.
struct PriorityEntry {
  bool is_interesting_ets = false;
  bool is_interesting_map = false;
  // creation time in ms / max(file size, 1): newer and smaller scores higher
  double file_score = 0.0;
  std::string seed_path;
};

double FileScore(std::int64_t created_at_ms, std::uintmax_t file_size);

// `greater` means `a` is scheduled before `b`: ETS flag, then coverage
// flag, then file score; seed_path (lexicographically smaller first) breaks
// the remaining ties.
std::strong_ordering ComparePriority(const PriorityEntry& a,
                                     const PriorityEntry& b);

// Binary max-heap under ComparePriority, guarded by one mutex so the
// watchdog can push while explorer workers pop.
class SeedQueue {
 public:
  void Push(PriorityEntry entry);
  std::optional<PriorityEntry> TryPop();
  // Blocks until an entry is available or the queue is closed.
  std::optional<PriorityEntry> WaitPop();
  void Close();
  std::size_t size() const;

 private:
  static bool Lower(const PriorityEntry& a, const PriorityEntry& b);

  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::vector<PriorityEntry> heap_;
  bool closed_ = false;
};

// Pushes every seed under `corpus_dir` (recursively) not in `seen` whose
// metadata sidecar parses. Seeds without usable metadata are skipped and
// stay unseen so a later scan can pick them up.
std::size_t EnqueueCorpusUpdates(SeedQueue& queue,
                                 const std::filesystem::path& corpus_dir,
                                 std::set<std::string>& seen);

}  // namespace hydfuzz

#endif  // HYDFUZZ_PRIORITY_QUEUE_HPP_
