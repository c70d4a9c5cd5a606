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

#include "weaverforge/types.hpp"

#include "weaverforge/error.hpp"

namespace weaverforge {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kIo: return "Io";
    case ErrorCode::kEmptyAfterNormalize: return "EmptyAfterNormalize";
    case ErrorCode::kInsufficientStratum: return "InsufficientStratum";
    case ErrorCode::kScorerFailure: return "ScorerFailure";
    case ErrorCode::kInvalidRequest: return "InvalidRequest";
    case ErrorCode::kBackendUnavailable: return "BackendUnavailable";
    case ErrorCode::kBudgetExceeded: return "BudgetExceeded";
    case ErrorCode::kTemplateError: return "TemplateError";
    case ErrorCode::kMissingExemplars: return "MissingExemplars";
    case ErrorCode::kDocTooShort: return "DocTooShort";
    case ErrorCode::kParseFailure: return "ParseFailure";
    case ErrorCode::kGroundingViolation: return "GroundingViolation";
    case ErrorCode::kNoCandidatePrinciples: return "NoCandidatePrinciples";
    case ErrorCode::kPerturbationRejected: return "PerturbationRejected";
    case ErrorCode::kNonFiniteInput: return "NonFiniteInput";
    case ErrorCode::kEmptyText: return "EmptyText";
    case ErrorCode::kEmptyIndex: return "EmptyIndex";
    case ErrorCode::kSampleRejected: return "SampleRejected";
    case ErrorCode::kSelfPlay: return "SelfPlay";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kStageFailed: return "StageFailed";
  }
  return "Unknown";
}

std::string_view to_string(Language lang) {
  return lang == Language::kZh ? "zh" : "en";
}

std::string_view to_string(DomainKind domain) {
  switch (domain) {
    case DomainKind::kFictionWriting: return "FictionWriting";
    case DomainKind::kCreativeNonFiction: return "CreativeNonFiction";
    case DomainKind::kMarketingWriting: return "MarketingWriting";
    case DomainKind::kTechnicalWriting: return "TechnicalWriting";
  }
  return "";
}

std::string_view to_string(TaskKind task) {
  switch (task) {
    case TaskKind::kContentWriting: return "ContentWriting";
    case TaskKind::kOutlining: return "Outlining";
    case TaskKind::kPolishingEditing: return "PolishingEditing";
    case TaskKind::kStyleTransfer: return "StyleTransfer";
    case TaskKind::kExpandSimplify: return "ExpandSimplify";
    case TaskKind::kBrainstorming: return "Brainstorming";
    case TaskKind::kReviewing: return "Reviewing";
    case TaskKind::kInstructionAnnotation: return "InstructionAnnotation";
  }
  return "";
}

Language parse_language(std::string_view s) {
  if (s == "zh") return Language::kZh;
  if (s == "en") return Language::kEn;
  throw Error(ErrorCode::kInvalidArgument, "unknown language '" + std::string(s) + "'");
}

DomainKind parse_domain(std::string_view s) {
  for (auto d : kAllDomains) {
    if (to_string(d) == s) return d;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown domain '" + std::string(s) + "'");
}

TaskKind parse_task(std::string_view s) {
  for (auto t : kAllTasks) {
    if (to_string(t) == s) return t;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown task '" + std::string(s) + "'");
}

void to_json(json& j, const TrainingSample& s) {
  j = json{{"id", s.id}, {"kind", s.kind}, {"input", s.input}, {"target", s.target}};
  if (s.task) j["task"] = *s.task;
}

void from_json(const json& j, TrainingSample& s) {
  s.id = j.at("id").get<std::string>();
  s.kind = j.at("kind").get<std::string>();
  s.input = j.at("input").get<std::string>();
  s.target = j.at("target").get<std::string>();
  if (j.contains("task") && !j["task"].is_null()) s.task = j["task"].get<std::string>();
}

}  // namespace weaverforge
