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

// Per-seed metadata sidecars and the file helpers shared by the fuzzer,
// explorer and orchestrator. A seed `dir/name` has its metadata in
// `dir/.name.metadata`; see docs/metadata-format.md for the exact encoding.

#ifndef HYDFUZZ_METADATA_HPP_
#define HYDFUZZ_METADATA_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hydfuzz/program_model.hpp"

namespace hydfuzz {

struct SeedMetadata {
  bool is_interesting_ets = false;
  bool is_interesting_map = false;
  std::vector<BlockId> ets_trace;
  std::vector<std::string> reached_targets;
  bool is_crash = false;
  bool is_timeout = false;

  friend bool operator==(const SeedMetadata&, const SeedMetadata&) = default;
};

// Single-line JSON object, keys in declaration order, terminated by '\n'.
std::string SerializeMetadata(const SeedMetadata& meta);
// Throws std::runtime_error on malformed input or missing/mistyped keys.
SeedMetadata ParseMetadata(std::string_view text);

std::filesystem::path SidecarPath(const std::filesystem::path& seed);
bool IsSidecarOrTemp(const std::filesystem::path& p);

void WriteMetadata(const std::filesystem::path& seed, const SeedMetadata& meta);
// nullopt when the sidecar is missing or unparsable.
std::optional<SeedMetadata> ReadMetadata(const std::filesystem::path& seed);

// Writes to a hidden temp file in the same directory, then renames, so
// readers never observe a partial file.
void AtomicWriteFile(const std::filesystem::path& path,
                     std::span<const std::uint8_t> data);
void AtomicWriteFile(const std::filesystem::path& path, std::string_view data);

Bytes ReadFileBytes(const std::filesystem::path& path);

// Milliseconds since the Unix epoch of the file's last modification; the
// files are written once, so this is their creation time.
std::int64_t FileTimeMillis(const std::filesystem::path& path);

// Seed files in `dir` (non-recursive, sidecars and temp files excluded),
// sorted by name.
std::vector<std::filesystem::path> ListSeedFiles(
    const std::filesystem::path& dir);

}  // namespace hydfuzz

#endif  // HYDFUZZ_METADATA_HPP_
