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

#include "weaverforge/pair.hpp"

namespace weaverforge {

void to_json(json& j, const ScoreTriple& s) {
  j = json{{"quality", s.quality}, {"diversity", s.diversity}, {"relevance", s.relevance}, {"total", s.total()}};
}

void from_json(const json& j, ScoreTriple& s) {
  s.quality = j.at("quality").get<double>();
  s.diversity = j.at("diversity").get<double>();
  s.relevance = j.at("relevance").get<double>();
}

void to_json(json& j, const InstructionPair& p) {
  j = json{{"id", p.id},
           {"task", p.task},
           {"domain", p.domain},
           {"subdomain", p.subdomain},
           {"instruction", p.instruction},
           {"context", p.context ? json(*p.context) : json(nullptr)},
           {"response", p.response},
           {"rationale", p.rationale},
           {"source_doc_id", p.source_doc_id},
           {"source_span", p.source_span},
           {"span_start", p.span_start},
           {"span_end", p.span_end},
           {"scores", p.scores ? json(*p.scores) : json(nullptr)}};
}

void from_json(const json& j, InstructionPair& p) {
  p.id = j.at("id").get<std::string>();
  p.task = j.at("task").get<TaskKind>();
  p.domain = j.at("domain").get<DomainKind>();
  p.subdomain = j.at("subdomain").get<std::string>();
  p.instruction = j.at("instruction").get<std::string>();
  p.context.reset();
  if (j.contains("context") && !j["context"].is_null()) p.context = j["context"].get<std::string>();
  p.response = j.at("response").get<std::string>();
  p.rationale = j.value("rationale", std::string{});
  p.source_doc_id = j.value("source_doc_id", std::string{});
  p.source_span = j.value("source_span", std::string{});
  p.span_start = j.value("span_start", std::size_t{0});
  p.span_end = j.value("span_end", std::size_t{0});
  p.scores.reset();
  if (j.contains("scores") && !j["scores"].is_null()) p.scores = j["scores"].get<ScoreTriple>();
}

}  // namespace weaverforge
