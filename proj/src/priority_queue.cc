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

#include "hydfuzz/priority_queue.hpp"

#include <algorithm>

#include <spdlog/spdlog.h>

#include "hydfuzz/metadata.hpp"

namespace hydfuzz {

namespace fs = std::filesystem;

double FileScore(std::int64_t created_at_ms, std::uintmax_t file_size) {
  return static_cast<double>(created_at_ms) /
         static_cast<double>(std::max<std::uintmax_t>(file_size, 1));
}

std::strong_ordering ComparePriority(const PriorityEntry& a,
                                     const PriorityEntry& b) {
  if (a.is_interesting_ets != b.is_interesting_ets) {
    return a.is_interesting_ets ? std::strong_ordering::greater
                                : std::strong_ordering::less;
  }
  if (a.is_interesting_map != b.is_interesting_map) {
    return a.is_interesting_map ? std::strong_ordering::greater
                                : std::strong_ordering::less;
  }
  if (a.file_score != b.file_score) {
    return a.file_score > b.file_score ? std::strong_ordering::greater
                                       : std::strong_ordering::less;
  }
  // Reversed: the smaller path has the higher priority.
  return b.seed_path <=> a.seed_path;
}

bool SeedQueue::Lower(const PriorityEntry& a, const PriorityEntry& b) {
  return ComparePriority(a, b) < 0;
}

void SeedQueue::Push(PriorityEntry entry) {
  {
    std::lock_guard<std::mutex> lock(mu_);
    heap_.push_back(std::move(entry));
    std::push_heap(heap_.begin(), heap_.end(), Lower);
  }
  cv_.notify_one();
}

std::optional<PriorityEntry> SeedQueue::TryPop() {
  std::lock_guard<std::mutex> lock(mu_);
  if (heap_.empty()) return std::nullopt;
  std::pop_heap(heap_.begin(), heap_.end(), Lower);
  PriorityEntry top = std::move(heap_.back());
  heap_.pop_back();
  return top;
}

std::optional<PriorityEntry> SeedQueue::WaitPop() {
  std::unique_lock<std::mutex> lock(mu_);
  cv_.wait(lock, [this] { return closed_ || !heap_.empty(); });
  if (heap_.empty()) return std::nullopt;
  std::pop_heap(heap_.begin(), heap_.end(), Lower);
  PriorityEntry top = std::move(heap_.back());
  heap_.pop_back();
  return top;
}

void SeedQueue::Close() {
  {
    std::lock_guard<std::mutex> lock(mu_);
    closed_ = true;
  }
  cv_.notify_all();
}

std::size_t SeedQueue::size() const {
  std::lock_guard<std::mutex> lock(mu_);
  return heap_.size();
}

std::size_t EnqueueCorpusUpdates(SeedQueue& queue, const fs::path& corpus_dir,
                                 std::set<std::string>& seen) {
  std::vector<fs::path> files;
  std::error_code ec;
  for (auto it = fs::recursive_directory_iterator(corpus_dir, ec);
       it != fs::recursive_directory_iterator(); it.increment(ec)) {
    if (ec) break;
    if (IsSidecarOrTemp(it->path())) {
      if (it->is_directory(ec)) it.disable_recursion_pending();
      continue;
    }
    if (it->is_regular_file(ec)) files.push_back(it->path());
  }
  std::sort(files.begin(), files.end());

  std::size_t added = 0;
  for (const fs::path& path : files) {
    const std::string key = path.string();
    if (seen.contains(key)) continue;
    const auto meta = ReadMetadata(path);
    if (!meta) {
      spdlog::warn("watchdog: no usable metadata for {}, skipping", key);
      continue;
    }
    PriorityEntry entry;
    entry.is_interesting_ets = meta->is_interesting_ets;
    entry.is_interesting_map = meta->is_interesting_map;
    entry.file_score = FileScore(FileTimeMillis(path), fs::file_size(path, ec));
    entry.seed_path = key;
    queue.Push(std::move(entry));
    seen.insert(key);
    ++added;
  }
  return added;
}

}  // namespace hydfuzz
