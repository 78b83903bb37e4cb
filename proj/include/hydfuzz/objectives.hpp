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

// Post-campaign triage of the objective directory: clustering by ETS trace
// and routing the survivors into one directory per reached target.

#ifndef HYDFUZZ_OBJECTIVES_HPP_
#define HYDFUZZ_OBJECTIVES_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "hydfuzz/metadata.hpp"
#include "hydfuzz/program_model.hpp"

namespace hydfuzz {

struct ObjectiveRecord {
  std::filesystem::path seed_path;
  SeedMetadata metadata;
  std::int64_t created_at_ms = 0;
};

struct MinimizeResult {
  std::vector<ObjectiveRecord> kept;  // one per distinct ets_trace
  std::vector<std::filesystem::path> archived;
  // Objectives whose metadata could not be read; left in place.
  std::vector<std::filesystem::path> unreadable;
};

// Keeps the earliest objective (ties: smaller path) of every ets_trace
// cluster and moves the rest, with their sidecars, into `archived/`.
MinimizeResult MinimizeObjectives(const std::filesystem::path& objective_dir);

// Reads every objective of `dir` without modifying anything.
std::vector<ObjectiveRecord> ReadObjectives(
    const std::filesystem::path& dir,
    std::vector<std::filesystem::path>* unreadable = nullptr);

// ':' and '/' become '_'.
std::string SanitizeLocation(std::string_view location);

struct SortResult {
  std::size_t copies = 0;
  std::vector<std::filesystem::path> directories;  // created, sorted
};

// Copies each objective (seed and sidecar) into out_dir/<location> for every
// reached target location; objectives with no reached target go to
// `crashes/` or `timeouts/`. With a non-empty `targets` list only those
// locations get a directory.
SortResult SortObjectives(std::span<const ObjectiveRecord> kept,
                          const std::filesystem::path& out_dir,
                          std::span<const TargetPoint> targets = {});

}  // namespace hydfuzz

#endif  // HYDFUZZ_OBJECTIVES_HPP_
