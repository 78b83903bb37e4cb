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

#include "hydfuzz/objectives.hpp"

#include <algorithm>
#include <map>
#include <set>

#include <spdlog/spdlog.h>

namespace hydfuzz {

namespace fs = std::filesystem;

std::vector<ObjectiveRecord> ReadObjectives(const fs::path& dir,
                                            std::vector<fs::path>* unreadable) {
  std::vector<ObjectiveRecord> out;
  for (const fs::path& path : ListSeedFiles(dir)) {
    auto meta = ReadMetadata(path);
    if (!meta) {
      spdlog::warn("objective {} has no readable metadata; keeping it",
                   path.string());
      if (unreadable != nullptr) unreadable->push_back(path);
      continue;
    }
    out.push_back(ObjectiveRecord{path, std::move(*meta), FileTimeMillis(path)});
  }
  return out;
}

MinimizeResult MinimizeObjectives(const fs::path& objective_dir) {
  MinimizeResult result;
  std::vector<ObjectiveRecord> all =
      ReadObjectives(objective_dir, &result.unreadable);
  std::sort(all.begin(), all.end(),
            [](const ObjectiveRecord& a, const ObjectiveRecord& b) {
              if (a.created_at_ms != b.created_at_ms) {
                return a.created_at_ms < b.created_at_ms;
              }
              return a.seed_path < b.seed_path;
            });

  std::set<std::vector<BlockId>> clusters;
  const fs::path archive = objective_dir / "archived";
  for (ObjectiveRecord& rec : all) {
    if (clusters.insert(rec.metadata.ets_trace).second) {
      result.kept.push_back(std::move(rec));
      continue;
    }
    fs::create_directories(archive);
    const fs::path dest = archive / rec.seed_path.filename();
    fs::rename(SidecarPath(rec.seed_path), SidecarPath(dest));
    fs::rename(rec.seed_path, dest);
    result.archived.push_back(dest);
  }
  std::sort(result.kept.begin(), result.kept.end(),
            [](const ObjectiveRecord& a, const ObjectiveRecord& b) {
              return a.seed_path < b.seed_path;
            });
  return result;
}

std::string SanitizeLocation(std::string_view location) {
  std::string out(location);
  std::replace(out.begin(), out.end(), ':', '_');
  std::replace(out.begin(), out.end(), '/', '_');
  return out;
}

SortResult SortObjectives(std::span<const ObjectiveRecord> kept,
                          const fs::path& out_dir,
                          std::span<const TargetPoint> targets) {
  std::set<std::string> allowed;
  for (const TargetPoint& t : targets) allowed.insert(t.location);

  std::set<fs::path> dirs;
  SortResult result;
  auto copy_into = [&](const ObjectiveRecord& rec, const fs::path& dir) {
    fs::create_directories(dir);
    dirs.insert(dir);
    const fs::path dest = dir / rec.seed_path.filename();
    fs::copy_file(rec.seed_path, dest, fs::copy_options::overwrite_existing);
    const fs::path sidecar = SidecarPath(rec.seed_path);
    if (fs::exists(sidecar)) {
      fs::copy_file(sidecar, SidecarPath(dest),
                    fs::copy_options::overwrite_existing);
    }
    ++result.copies;
  };

  for (const ObjectiveRecord& rec : kept) {
    const SeedMetadata& m = rec.metadata;
    if (m.reached_targets.empty()) {
      if (m.is_crash) copy_into(rec, out_dir / "crashes");
      if (m.is_timeout) copy_into(rec, out_dir / "timeouts");
      continue;
    }
    for (const std::string& loc : m.reached_targets) {
      if (!allowed.empty() && !allowed.contains(loc)) continue;
      copy_into(rec, out_dir / SanitizeLocation(loc));
    }
  }
  result.directories.assign(dirs.begin(), dirs.end());
  return result;
}

}  // namespace hydfuzz
