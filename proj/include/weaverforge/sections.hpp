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

#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace weaverforge {

// Labeled-section output format shared by the generation templates:
//
//   [RATIONALE]
//   ...free text...
//   [INSTRUCTION]
//   ...
//
// A header is a line consisting solely of `[NAME]` for one of the expected
// names. Section bodies have surrounding newlines removed, nothing else.
class Sections {
 public:
  // Throws ParseFailure (with the raw text as detail) on a repeated header.
  static Sections parse(std::string_view raw, std::initializer_list<std::string_view> names);

  std::optional<std::string> get(std::string_view name) const;
  bool has(std::string_view name) const { return get(name).has_value(); }

  // Header names in the order they appeared.
  std::vector<std::string> order() const;

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

std::string render_section(std::string_view name, std::string_view body);

}  // namespace weaverforge
