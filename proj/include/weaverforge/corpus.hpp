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

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "weaverforge/types.hpp"

namespace weaverforge::corpus {

struct Popularity {
  double ratings = 0.0;
  std::uint64_t reads = 0;
  std::uint64_t upvotes = 0;
  std::uint64_t comments = 0;

  bool operator==(const Popularity&) const = default;
};

struct Document {
  std::string id;
  std::string text;
  Language language = Language::kZh;
  DomainKind domain = DomainKind::kFictionWriting;
  std::string subdomain;
  std::string source;
  std::optional<Popularity> popularity;
  std::optional<double> quality_score;

  bool operator==(const Document&) const = default;
};

void to_json(json& j, const Popularity& p);
void from_json(const json& j, Popularity& p);
void to_json(json& j, const Document& d);
void from_json(const json& j, Document& d);

/// NFC-normalizes the text, strips control characters other than newline and
/// tab, and collapses every run of three or more newlines to exactly two.
/// Idempotent. Throws EmptyAfterNormalize when nothing but whitespace is left.
Document normalize(Document doc);
std::string normalize_text(std::string_view text);

// ---------------------------------------------------------------------------
// Rule-based filtering

struct RuleSet {
  std::size_t min_chars = 100;
  std::size_t max_chars = 200000;
  double symbol_ratio_max = 0.3;
  bool language_check = true;
  bool exact_dedup = true;
  // Language-consistency thresholds on the CJK share of letters.
  double en_max_cjk = 0.5;
  double zh_min_cjk = 0.1;
};

void to_json(json& j, const RuleSet& r);
void from_json(const json& j, RuleSet& r);

struct Rejection {
  std::string doc_id;
  std::string rule;

  bool operator==(const Rejection&) const = default;
};

struct FilterReport {
  std::size_t input_count = 0;
  std::size_t kept_count = 0;
  std::vector<Rejection> rejected;
};

void to_json(json& j, const FilterReport& r);

struct FilterResult {
  std::vector<Document> kept;
  FilterReport report;
};

// Rule names, in evaluation order.
inline constexpr std::string_view kRuleMinLen = "min_len";
inline constexpr std::string_view kRuleMaxLen = "max_len";
inline constexpr std::string_view kRuleSymbolRatio = "symbol_ratio";
inline constexpr std::string_view kRuleLanguage = "language_consistency";
inline constexpr std::string_view kRuleExactDuplicate = "exact_duplicate";

// Each rejected document is attributed to the first rule it fails. Lengths
// are counted in code points.
FilterResult rule_filter(const std::vector<Document>& docs, const RuleSet& rules);

// ---------------------------------------------------------------------------
// Near-duplicate removal

// Sorted, de-duplicated 64-bit hashes of the character k-shingles of `text`.
// A text shorter than k yields a single shingle (the whole text).
std::vector<std::uint64_t> shingle_hashes(std::string_view text, std::size_t k);

double jaccard(const std::vector<std::uint64_t>& a, const std::vector<std::uint64_t>& b);

/// Greedy near-duplicate removal in input order: a document survives when its
/// shingle Jaccard similarity to every earlier survivor is below `threshold`.
/// Candidate pairs come from an inverted shingle index, so the result is
/// exact (no sketching).
std::vector<Document> near_dedup(const std::vector<Document>& docs, std::size_t shingle_size = 13,
                                 double jaccard_threshold = 0.8);

// ---------------------------------------------------------------------------
// Model-based quality scoring

// Maps a document to a quality score in [0, 1].
using QualityScorer = std::function<double(const Document&)>;

struct HeuristicFeatures {
  double length_score = 0.0;   // min(1, chars / 200)
  double type_token_ratio = 0.0;
  double symbol_ratio = 0.0;
};

HeuristicFeatures heuristic_features(std::string_view text);

// 0.25 * length + 0.5 * type-token ratio + 0.25 * (1 - symbol ratio).
double heuristic_quality(const Document& doc);

struct ScoredCorpus {
  std::vector<Document> kept;
  std::vector<std::string> dropped_ids;
};

// Populates quality_score on every document and drops those below `floor`.
// A scorer that throws or returns a value outside [0, 1] raises ScorerFailure
// naming the document.
ScoredCorpus ml_quality_score(const std::vector<Document>& docs, const QualityScorer& scorer,
                              double floor = 0.0);

// ---------------------------------------------------------------------------
// Domain / language mixing

struct Ratio {
  double left = 1.0;
  double right = 1.0;

  double left_fraction() const { return left / (left + right); }
};

struct MixSpec {
  Ratio fiction_to_nonfiction{1.0, 1.0};
  Ratio zh_to_en{4.0, 1.0};
  double tolerance = 0.02;
};

// Parses "fiction=1:1,lang=4:1" (either key may be omitted).
MixSpec parse_mix_spec(std::string_view spec, double tolerance = 0.02);
void validate(const MixSpec& spec);

/// Draws exactly `target_count` documents so that the fiction share and the
/// zh share are each within `spec.tolerance` of their targets. Deterministic
/// for a fixed seed. Throws InsufficientStratum (detail = stratum name:
/// fiction, nonfiction, zh, en or a cell such as "fiction/en").
std::vector<Document> mix(const std::vector<Document>& docs, const MixSpec& spec,
                          std::size_t target_count, std::uint64_t seed);

// Largest target for which `mix` succeeds on these documents.
std::size_t max_mix_target(const std::vector<Document>& docs, const MixSpec& spec);

}  // namespace weaverforge::corpus
