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

#include <array>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

namespace weaverforge {

using nlohmann::json;

enum class Language { kZh, kEn };

enum class DomainKind {
  kFictionWriting,
  kCreativeNonFiction,
  kMarketingWriting,
  kTechnicalWriting,
};

enum class TaskKind {
  kContentWriting,
  kOutlining,
  kPolishingEditing,
  kStyleTransfer,
  kExpandSimplify,
  kBrainstorming,
  kReviewing,
  kInstructionAnnotation,
};

inline constexpr std::array<DomainKind, 4> kAllDomains = {
    DomainKind::kFictionWriting, DomainKind::kCreativeNonFiction,
    DomainKind::kMarketingWriting, DomainKind::kTechnicalWriting};

inline constexpr std::array<TaskKind, 8> kAllTasks = {
    TaskKind::kContentWriting,   TaskKind::kOutlining,
    TaskKind::kPolishingEditing, TaskKind::kStyleTransfer,
    TaskKind::kExpandSimplify,   TaskKind::kBrainstorming,
    TaskKind::kReviewing,        TaskKind::kInstructionAnnotation};

// Serialized names are stable: they appear in JSONL files, directory names
// and template ids.
std::string_view to_string(Language lang);
std::string_view to_string(DomainKind domain);
std::string_view to_string(TaskKind task);

Language parse_language(std::string_view s);
DomainKind parse_domain(std::string_view s);
TaskKind parse_task(std::string_view s);

inline bool is_fiction(DomainKind d) { return d == DomainKind::kFictionWriting; }

// Generic training record emitted by several stages (instruction annotation,
// evaluation/critic data).
struct TrainingSample {
  std::string id;
  std::string kind;
  std::optional<std::string> task;
  std::string input;
  std::string target;

  bool operator==(const TrainingSample&) const = default;
};

void to_json(json& j, const TrainingSample& s);
void from_json(const json& j, TrainingSample& s);

}  // namespace weaverforge

namespace nlohmann {

template <>
struct adl_serializer<weaverforge::Language> {
  static void to_json(json& j, weaverforge::Language v) { j = std::string(weaverforge::to_string(v)); }
  static void from_json(const json& j, weaverforge::Language& v) {
    v = weaverforge::parse_language(j.get<std::string>());
  }
};

template <>
struct adl_serializer<weaverforge::DomainKind> {
  static void to_json(json& j, weaverforge::DomainKind v) { j = std::string(weaverforge::to_string(v)); }
  static void from_json(const json& j, weaverforge::DomainKind& v) {
    v = weaverforge::parse_domain(j.get<std::string>());
  }
};

template <>
struct adl_serializer<weaverforge::TaskKind> {
  static void to_json(json& j, weaverforge::TaskKind v) { j = std::string(weaverforge::to_string(v)); }
  static void from_json(const json& j, weaverforge::TaskKind& v) {
    v = weaverforge::parse_task(j.get<std::string>());
  }
};

}  // namespace nlohmann
