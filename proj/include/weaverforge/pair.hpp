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

#include <cstddef>
#include <optional>
#include <string>

#include "weaverforge/types.hpp"

namespace weaverforge {

// Judge scores on a 1-10 scale. `total` is derived, never parsed.
struct ScoreTriple {
  double quality = 0.0;
  double diversity = 0.0;
  double relevance = 0.0;

  double total() const { return (quality + diversity + relevance) / 3.0; }
  bool operator==(const ScoreTriple&) const = default;
};

void to_json(json& j, const ScoreTriple& s);
void from_json(const json& j, ScoreTriple& s);

struct InstructionPair {
  std::string id;
  TaskKind task = TaskKind::kContentWriting;
  DomainKind domain = DomainKind::kFictionWriting;
  std::string subdomain;
  std::string instruction;
  std::optional<std::string> context;
  std::string response;
  std::string rationale;
  std::string source_doc_id;
  // The span the pair was derived from, with its byte offsets in the source
  // document text.
  std::string source_span;
  std::size_t span_start = 0;
  std::size_t span_end = 0;
  std::optional<ScoreTriple> scores;

  bool operator==(const InstructionPair&) const = default;
};

void to_json(json& j, const InstructionPair& p);
void from_json(const json& j, InstructionPair& p);

}  // namespace weaverforge
