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

#include "hydfuzz/metadata.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

#include <nlohmann/json.hpp>

namespace hydfuzz {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

std::string SerializeMetadata(const SeedMetadata& meta) {
  ordered_json j;
  j["is_interesting_ets"] = meta.is_interesting_ets;
  j["is_interesting_map"] = meta.is_interesting_map;
  j["ets_trace"] = meta.ets_trace;
  j["reached_targets"] = meta.reached_targets;
  j["is_crash"] = meta.is_crash;
  j["is_timeout"] = meta.is_timeout;
  return j.dump() + "\n";
}

SeedMetadata ParseMetadata(std::string_view text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error(std::string("metadata: ") + e.what());
  }
  if (!j.is_object()) throw std::runtime_error("metadata: not an object");

  auto flag = [&j](const char* key) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_boolean()) {
      throw std::runtime_error(std::string("metadata: '") + key +
                               "' missing or not a boolean");
    }
    return it->get<bool>();
  };
  auto array = [&j](const char* key) -> const ordered_json& {
    auto it = j.find(key);
    if (it == j.end() || !it->is_array()) {
      throw std::runtime_error(std::string("metadata: '") + key +
                               "' missing or not an array");
    }
    return *it;
  };

  SeedMetadata meta;
  meta.is_interesting_ets = flag("is_interesting_ets");
  meta.is_interesting_map = flag("is_interesting_map");
  meta.is_crash = flag("is_crash");
  meta.is_timeout = flag("is_timeout");
  for (const auto& v : array("ets_trace")) {
    if (!v.is_number_unsigned() || v.get<std::uint64_t>() > 0xFFFFFFFFull) {
      throw std::runtime_error("metadata: ets_trace holds a non block id");
    }
    meta.ets_trace.push_back(v.get<BlockId>());
  }
  for (const auto& v : array("reached_targets")) {
    if (!v.is_string()) {
      throw std::runtime_error("metadata: reached_targets holds a non string");
    }
    meta.reached_targets.push_back(v.get<std::string>());
  }
  if (meta.is_crash && meta.is_timeout) {
    throw std::runtime_error("metadata: is_crash and is_timeout both set");
  }
  return meta;
}

fs::path SidecarPath(const fs::path& seed) {
  return seed.parent_path() / ("." + seed.filename().string() + ".metadata");
}

bool IsSidecarOrTemp(const fs::path& p) {
  const std::string name = p.filename().string();
  return name.empty() || name.front() == '.';
}

void WriteMetadata(const fs::path& seed, const SeedMetadata& meta) {
  AtomicWriteFile(SidecarPath(seed), SerializeMetadata(meta));
}

std::optional<SeedMetadata> ReadMetadata(const fs::path& seed) {
  std::ifstream in(SidecarPath(seed), std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return ParseMetadata(ss.str());
  } catch (const std::runtime_error&) {
    return std::nullopt;
  }
}

void AtomicWriteFile(const fs::path& path, std::span<const std::uint8_t> data) {
  static std::atomic<std::uint64_t> counter{0};
  const fs::path tmp =
      path.parent_path() / ("." + path.filename().string() + "." +
                            std::to_string(counter.fetch_add(1)) + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw std::runtime_error("cannot write '" + tmp.string() + "'");
    }
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size()));
    if (!out) throw std::runtime_error("short write to '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw std::runtime_error("cannot rename into '" + path.string() + "'");
  }
}

void AtomicWriteFile(const fs::path& path, std::string_view data) {
  AtomicWriteFile(path, std::span<const std::uint8_t>(
                            reinterpret_cast<const std::uint8_t*>(data.data()),
                            data.size()));
}

Bytes ReadFileBytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read '" + path.string() + "'");
  return Bytes(std::istreambuf_iterator<char>(in),
               std::istreambuf_iterator<char>());
}

std::int64_t FileTimeMillis(const fs::path& path) {
  const auto ft = fs::last_write_time(path);
  const auto sys = std::chrono::file_clock::to_sys(ft);
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             sys.time_since_epoch())
      .count();
}

std::vector<fs::path> ListSeedFiles(const fs::path& dir) {
  std::vector<fs::path> out;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(dir, ec)) {
    if (!entry.is_regular_file(ec) || IsSidecarOrTemp(entry.path())) continue;
    out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace hydfuzz
