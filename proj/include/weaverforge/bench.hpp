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
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "weaverforge/llm.hpp"
#include "weaverforge/types.hpp"

namespace weaverforge::bench {

namespace fs = std::filesystem;

struct BenchInstruction {
  std::string id;
  DomainKind domain = DomainKind::kFictionWriting;
  std::string text;
  Language language = Language::kEn;

  bool operator==(const BenchInstruction&) const = default;
};

void to_json(json& j, const BenchInstruction& b);
void from_json(const json& j, BenchInstruction& b);

// JSONL benchmark file. Throws InvalidArgument on duplicate ids.
std::vector<BenchInstruction> load_instructions(const fs::path& path);

struct JudgeScore {
  double style = 0.0;
  double relevance = 0.0;
  double creativity = 0.0;

  double overall() const { return (style + relevance + creativity) / 3.0; }
  bool operator==(const JudgeScore&) const = default;
};

void to_json(json& j, const JudgeScore& s);
void from_json(const json& j, JudgeScore& s);

// Two decimals, the way score tables are printed.
std::string format_score(double v);

enum class Verdict { kA, kB, kTie };
enum class Dimension { kCreativity, kStyle, kRelevance, kFluency, kOverall };

inline constexpr std::array<Dimension, 5> kAllDimensions = {
    Dimension::kCreativity, Dimension::kStyle, Dimension::kRelevance, Dimension::kFluency, Dimension::kOverall};

std::string_view to_string(Verdict v);
std::string_view to_string(Dimension d);
// Both throw InvalidArgument for unknown names.
Verdict parse_verdict(std::string_view s);
Dimension parse_dimension(std::string_view s);

struct ComparisonRecord {
  std::string id;
  std::string instruction_id;
  std::string model_a;
  std::string model_b;
  Verdict verdict = Verdict::kTie;
  Dimension dimension = Dimension::kOverall;
  std::string annotator;
  std::uint64_t timestamp = 0;

  bool operator==(const ComparisonRecord&) const = default;
};

void to_json(json& j, const ComparisonRecord& r);
// Throws SelfPlay when model_a equals model_b.
void from_json(const json& j, ComparisonRecord& r);

// ---------------------------------------------------------------------------
// Elo

struct EloParams {
  double initial = 1500.0;
  double k_factor = 32.0;
};

struct EloTable {
  std::map<std::string, double> ratings;
  std::map<std::string, std::uint64_t> games;
  EloParams params;
  std::size_t processed_count = 0;
};

// Expected score of a player rated r_a against one rated r_b.
double elo_expected(double r_a, double r_b);

/// Applies one verdict (A = 1, B = 0, Tie = 0.5 for model_a). Unseen models
/// start at params.initial. Throws SelfPlay.
EloTable elo_update(EloTable table, const ComparisonRecord& rec);
void elo_apply(EloTable& table, const ComparisonRecord& rec);

struct LeaderboardRow {
  std::string model;
  double rating = 0.0;
  std::uint64_t games = 0;
};

void to_json(json& j, const LeaderboardRow& r);

// Rating descending, then model name.
std::vector<LeaderboardRow> leaderboard(const EloTable& table);

/// Independent table per dimension, each folded in (timestamp, id) order.
/// Dimensions without records are absent.
std::map<Dimension, EloTable> elo_tables(std::vector<ComparisonRecord> records, const EloParams& params);
std::map<Dimension, std::vector<LeaderboardRow>> elo_rank(const std::vector<ComparisonRecord>& records,
                                                          const EloParams& params);

// ---------------------------------------------------------------------------
// Output collection and judging

struct ModelHandle {
  std::string name;
  std::shared_ptr<llm::Gateway> gateway;
  // Model string sent to the backend; the handle name when empty.
  std::string model;
};

struct ModelOutput {
  std::string instruction_id;
  std::string model;
  std::string response;

  bool operator==(const ModelOutput&) const = default;
};

void to_json(json& j, const ModelOutput& o);
void from_json(const json& j, ModelOutput& o);

struct ItemFailure {
  std::string instruction_id;
  std::string model;
  std::string error;
};

void to_json(json& j, const ItemFailure& f);

struct BenchOptions {
  std::uint64_t seed = 0;
  double temperature = 0.7;
  std::size_t max_tokens = 2048;
  std::size_t workers = 4;
  const llm::TemplateStore* templates = nullptr;
};

struct CollectResult {
  std::vector<ModelOutput> responses;
  std::vector<ItemFailure> failures;
};

// One response per (instruction, model), in instruction-major order. Calls
// that fail are reported, not thrown.
CollectResult collect_outputs(const std::vector<BenchInstruction>& instructions,
                              const std::vector<ModelHandle>& models, const BenchOptions& options);

// style / relevance / creativity from a judge reply; overall is computed.
JudgeScore parse_judge(std::string_view raw);

/// One judge call. Throws ParseFailure when a dimension is missing.
JudgeScore judge(std::string_view instruction, std::string_view response, llm::Gateway& gateway,
                 const BenchOptions& options = {});

struct JudgedItem {
  std::string instruction_id;
  std::string model;
  JudgeScore score;
};

void to_json(json& j, const JudgedItem& j_item);
void from_json(const json& j, JudgedItem& j_item);

struct JudgeResult {
  std::vector<JudgedItem> judged;
  std::vector<ItemFailure> failures;
};

JudgeResult judge_all(const std::vector<BenchInstruction>& instructions, const std::vector<ModelOutput>& outputs,
                      llm::Gateway& gateway, const BenchOptions& options);

struct ModelSummary {
  std::string model;
  JudgeScore mean;
  std::size_t items = 0;
};

// Per-model means, sorted by overall descending.
std::vector<ModelSummary> summarize(const std::vector<JudgedItem>& judged);

/// A grading sample per judged item and a pairwise sample per comparison,
/// in that order. Throws InvalidArgument when an instruction or response a
/// record refers to is missing.
std::vector<TrainingSample> export_eval_training_samples(const std::vector<BenchInstruction>& instructions,
                                                         const std::vector<ModelOutput>& outputs,
                                                         const std::vector<JudgedItem>& judged,
                                                         const std::vector<ComparisonRecord>& comparisons,
                                                         const llm::TemplateStore* templates = nullptr);

// ---------------------------------------------------------------------------
// Blind comparison queue

struct ComparisonPair {
  std::string comparison_id;
  std::string instruction_id;
  std::string instruction;
  std::string model_a;
  std::string model_b;
  std::string response_a;
  std::string response_b;
};

void to_json(json& j, const ComparisonPair& p);
void from_json(const json& j, ComparisonPair& p);

// Every unordered model pair for every instruction; which model shows as A
// is drawn from the seed.
std::vector<ComparisonPair> make_comparison_pairs(const std::vector<BenchInstruction>& instructions,
                                                  const std::vector<ModelOutput>& outputs, std::uint64_t seed);

}  // namespace weaverforge::bench
