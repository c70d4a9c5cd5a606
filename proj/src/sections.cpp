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

#include "weaverforge/sections.hpp"

#include <algorithm>

#include "weaverforge/error.hpp"
#include "weaverforge/text.hpp"

namespace weaverforge {

Sections Sections::parse(std::string_view raw, std::initializer_list<std::string_view> names) {
  Sections out;
  std::optional<std::string> current;
  std::string body;
  auto flush = [&] {
    if (current) out.entries_.emplace_back(*current, std::string(text::trim_newlines(body)));
    body.clear();
  };
  std::size_t pos = 0;
  while (pos <= raw.size()) {
    auto eol = raw.find('\n', pos);
    if (eol == std::string_view::npos) eol = raw.size();
    const std::string_view line = raw.substr(pos, eol - pos);
    const std::string_view t = text::trim(line);
    bool is_header = false;
    if (t.size() > 2 && t.front() == '[' && t.back() == ']') {
      const auto name = t.substr(1, t.size() - 2);
      if (std::find(names.begin(), names.end(), name) != names.end()) {
        if (out.get(name) || (current && *current == name)) {
          throw Error(ErrorCode::kParseFailure, "duplicate section [" + std::string(name) + "]",
                      std::string(raw));
        }
        flush();
        current = std::string(name);
        is_header = true;
      }
    }
    if (!is_header && current) {
      body.append(line);
      if (eol < raw.size()) body.push_back('\n');
    }
    if (eol == raw.size()) break;
    pos = eol + 1;
  }
  flush();
  return out;
}

std::optional<std::string> Sections::get(std::string_view name) const {
  for (const auto& [k, v] : entries_) {
    if (k == name) return v;
  }
  return std::nullopt;
}

std::vector<std::string> Sections::order() const {
  std::vector<std::string> out;
  for (const auto& e : entries_) out.push_back(e.first);
  return out;
}

std::string render_section(std::string_view name, std::string_view body) {
  std::string out = "[";
  out += name;
  out += "]\n";
  out += body;
  out += '\n';
  return out;
}

}  // namespace weaverforge
