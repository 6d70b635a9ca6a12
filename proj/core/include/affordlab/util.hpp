// Copyright 2026 The Affordlab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace affordlab {

using json = nlohmann::json;

// 64-bit FNV-1a. Used for content handles, fixture keys and config hashes.
std::uint64_t fnv1a64(std::string_view data);
std::string hex64(std::uint64_t value);
inline std::string content_hash(std::string_view data) { return hex64(fnv1a64(data)); }

// Lowercase, runs of non-alphanumerics collapsed to a single hyphen,
// no leading/trailing hyphen. "Vacuum Cleaner" -> "vacuum-cleaner".
std::string slugify(std::string_view name);
bool is_valid_slug(std::string_view id);

std::string trim(std::string_view text);
std::string join(const std::vector<std::string>& items, std::string_view sep);

std::string read_file(const std::filesystem::path& path);
// Writes through a temporary sibling and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

std::vector<json> read_jsonl(const std::filesystem::path& path);
std::string to_jsonl(const std::vector<json>& records);

// Compact JSON with sorted keys; stable bytes for hashing and manifests.
std::string canonical_dump(const json& value);

// Thread-safe append-only JSONL writer; each record is flushed as written so
// an interrupted run leaves a resumable prefix.
class JsonlAppender {
 public:
  explicit JsonlAppender(const std::filesystem::path& path);
  void append(const json& record);

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  std::mutex mu_;
};

}  // namespace affordlab
