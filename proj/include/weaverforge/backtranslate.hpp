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
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "weaverforge/corpus.hpp"
#include "weaverforge/llm.hpp"
#include "weaverforge/pair.hpp"
#include "weaverforge/text.hpp"

namespace weaverforge::backtranslate {

namespace fs = std::filesystem;
using corpus::Document;

inline constexpr std::size_t kExemplarsPerBucket = 5;

// A hand-annotated example. `selected_span` holds byte offsets into
// `source_excerpt`.
struct ExemplarCase {
  TaskKind task = TaskKind::kContentWriting;
  DomainKind domain = DomainKind::kFictionWriting;
  std::string subdomain;
  std::string source_excerpt;
  text::Range selected_span;
  std::optional<std::string> context;
  std::string instruction;
  std::string response;
  std::string rationale;
};

void to_json(json& j, const ExemplarCase& e);
void from_json(const json& j, ExemplarCase& e);

// Throws InvalidArgument for empty fields or a span that is out of range or
// not on character boundaries.
void validate(const ExemplarCase& e);

// Exemplar buckets keyed by (subdomain, task). On disk one JSON array per
// bucket at <dir>/<subdomain>/<Task>.json.
class ExemplarStore {
 public:
  static ExemplarStore load(const fs::path& dir);

  void add(ExemplarCase e);

  // The bucket's cases. Throws MissingExemplars unless it holds exactly
  // kExemplarsPerBucket cases.
  const std::vector<ExemplarCase>& bucket(const std::string& subdomain, TaskKind task) const;
  bool has_complete_bucket(const std::string& subdomain, TaskKind task) const;
  std::vector<std::pair<std::string, TaskKind>> buckets() const;

 private:
  std::map<std::pair<std::string, TaskKind>, std::vector<ExemplarCase>> buckets_;
};

// ---------------------------------------------------------------------------
// Span selection

struct SpanBounds {
  std::size_t min_chars = 200;
  std::size_t max_chars = 2000;
};

// 500-4000 code points for fiction, 200-2000 otherwise.
SpanBounds default_bounds(DomainKind domain);

struct Span {
  std::string text;
  text::Range offsets;
};

/// Picks a seeded span of [min_chars, max_chars] code points. Candidates are
/// runs of consecutive whole paragraphs; when no run fits, runs of whole
/// sentences; failing that, a window cut at a character boundary. The span
/// text is the exact byte range of the document. Throws DocTooShort when the
/// document has fewer than min_chars code points.
Span select_span(const Document& doc, TaskKind task, SpanBounds bounds, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Pair synthesis

struct SynthesisOptions {
  std::uint64_t seed = 0;
  std::optional<SpanBounds> bounds;  // default_bounds(doc.domain) when unset
  std::string model;
  double temperature = 0.7;
  std::size_t max_tokens = 4096;
  // Index of the span drawn from this (doc, task); 0 for the first.
  std::size_t repeat_index = 0;
  const llm::TemplateStore* templates = nullptr;  // builtin when null
};

std::string_view task_guidance(TaskKind task);

// Prompt block for the exemplars, each headed "### Example k".
std::string render_exemplars(const std::vector<ExemplarCase>& exemplars);

/// Parses a backtranslation transcript and applies the task's grounding
/// rules against `span`. RATIONALE must be the first section; INSTRUCTION
/// and RESPONSE are required. A CONTEXT of "NONE" means no context.
/// Throws ParseFailure (detail = raw transcript) or GroundingViolation.
InstructionPair parse_pair(std::string_view raw, TaskKind task, const Span& span);

// Grounding rules per task; throws GroundingViolation.
void check_grounding(TaskKind task, const Span& span, InstructionPair& pair);

/// One LLM call: renders the backtranslate template with the five exemplars
/// and the selected span, parses and grounds the answer.
InstructionPair synthesize_pair(const Document& doc, TaskKind task, const std::vector<ExemplarCase>& exemplars,
                                llm::Gateway& gateway, const SynthesisOptions& options = {});

struct SynthesisFailure {
  std::string doc_id;
  TaskKind task = TaskKind::kContentWriting;
  std::string error;
  std::string transcript;
};

void to_json(json& j, const SynthesisFailure& f);

struct BacktranslateResult {
  std::vector<InstructionPair> pairs;
  std::vector<SynthesisFailure> failures;
};

struct RunOptions {
  std::vector<TaskKind> tasks{kAllTasks.begin(), kAllTasks.end()};
  std::size_t repeat = 1;
  std::size_t workers = 4;
  SynthesisOptions synthesis;
};

/// Runs synthesize_pair over every (doc, task, repeat). All buckets needed
/// are checked before the first backend call (MissingExemplars). Per-pair
/// DocTooShort, ParseFailure and GroundingViolation are collected as
/// failures. Output order follows (doc, task, repeat).
BacktranslateResult run(const std::vector<Document>& docs, const ExemplarStore& exemplars, llm::Gateway& gateway,
                        const RunOptions& options);

// Inverts each pair into an instruction-annotation training sample: input is
// the source span, target the RATIONALE / CONTEXT / INSTRUCTION / RESPONSE
// block.
std::vector<TrainingSample> emit_annotation_samples(const std::vector<InstructionPair>& pairs);

}  // namespace weaverforge::backtranslate
