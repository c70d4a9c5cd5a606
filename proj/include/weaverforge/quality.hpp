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

#include <functional>
#include <initializer_list>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "weaverforge/llm.hpp"
#include "weaverforge/pair.hpp"

namespace weaverforge::quality {

// Finds "name: 7.5" style scores (colon or '=' optional, case-insensitive)
// for each name; the last occurrence wins. Throws ParseFailure, with the raw
// text as detail, when a name has no numeric score.
std::map<std::string, double> parse_named_scores(std::string_view raw,
                                                 std::initializer_list<std::string_view> names);

// Parses and clamps each score to [1, 10].
ScoreTriple parse_score_triple(std::string_view raw);

struct ScoreOptions {
  std::string model;
  double temperature = 0.0;
  std::uint64_t seed = 0;
  const llm::TemplateStore* templates = nullptr;
};

/// One judge call with the "score" template. Throws ParseFailure (detail =
/// transcript). When `transcript` is given it receives the raw answer.
ScoreTriple score_pair(const InstructionPair& pair, llm::Gateway& gateway, const ScoreOptions& options = {},
                       std::string* transcript = nullptr);

struct ScoreFailure {
  std::string pair_id;
  std::string transcript;
};

struct ScoringReport {
  std::size_t input_count = 0;
  std::size_t scored_count = 0;
  std::vector<ScoreFailure> unscored;
};

void to_json(json& j, const ScoringReport& r);

struct ScoringResult {
  // Every input pair, in input order; unscored ones have no scores.
  std::vector<InstructionPair> pairs;
  // Raw judge transcript per pair, aligned with `pairs`.
  std::vector<std::string> transcripts;
  ScoringReport report;
};

ScoringResult score_all(const std::vector<InstructionPair>& pairs, llm::Gateway& gateway,
                        const ScoreOptions& options = {}, std::size_t workers = 4);

// ---------------------------------------------------------------------------
// Selection

struct Quota {
  enum class Kind { kCount, kFraction };
  Kind kind = Kind::kFraction;
  double value = 0.4;

  static Quota count(std::size_t n) { return {Kind::kCount, static_cast<double>(n)}; }
  static Quota fraction(double f) { return {Kind::kFraction, f}; }

  // Items to take from a bucket of `bucket_size`. A fraction keeps
  // round(f * size), at least one for a non-empty bucket.
  std::size_t take(std::size_t bucket_size) const;
};

// "500" is a count, "0.4" a fraction in (0, 1]. Throws InvalidArgument.
Quota parse_quota(std::string_view s);

enum class TieBreak { kById, kByTotalThenId };

std::string_view to_string(TieBreak t);
TieBreak parse_tie_break(std::string_view s);

struct SelectionSpec {
  Quota quota;
  TieBreak tie_break = TieBreak::kById;
};

void validate(const SelectionSpec& spec);

using BucketKey = std::function<std::string(const InstructionPair&)>;

// "<subdomain>/<Task>".
std::string subdomain_task_key(const InstructionPair& p);

/// Keeps the quota-many highest totals of every bucket. Ranking is by total
/// descending with ties broken by ascending id, so selection dominance holds
/// within each bucket. Unscored pairs never enter selection. Buckets are
/// emitted in key order; inside a bucket kById orders by id and
/// kByTotalThenId by rank.
std::vector<InstructionPair> select_top(const std::vector<InstructionPair>& pairs, const SelectionSpec& spec,
                                        const BucketKey& key = subdomain_task_key);

}  // namespace weaverforge::quality
