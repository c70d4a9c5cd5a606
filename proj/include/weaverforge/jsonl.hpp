// Copyright 2026 The WeaverForge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "weaverforge/error.hpp"

namespace weaverforge::io {

namespace fs = std::filesystem;
using nlohmann::json;

std::string read_file(const fs::path& path);

// Writes to a sibling temp file and renames it into place.
void write_file_atomic(const fs::path& path, std::string_view contents);

std::vector<json> read_jsonl_values(const fs::path& path);
std::string to_jsonl(const std::vector<json>& values);

std::string hash_file(const fs::path& path);

// Hash over the sorted relative paths and contents of every regular file.
std::string hash_directory(const fs::path& dir);

template <typename T>
std::vector<T> read_jsonl(const fs::path& path) {
  std::vector<T> out;
  std::size_t line = 0;
  for (const auto& value : read_jsonl_values(path)) {
    ++line;
    try {
      out.push_back(value.get<T>());
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kInvalidArgument,
                  path.string() + ": record " + std::to_string(line) + ": " + e.what());
    }
  }
  return out;
}

template <typename Range>
void write_jsonl(const fs::path& path, const Range& records) {
  std::string buf;
  for (const auto& r : records) {
    buf += json(r).dump();
    buf += '\n';
  }
  write_file_atomic(path, buf);
}

}  // namespace weaverforge::io
