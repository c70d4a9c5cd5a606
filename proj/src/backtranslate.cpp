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

#include "weaverforge/backtranslate.hpp"

#include <algorithm>

#include "weaverforge/error.hpp"
#include "weaverforge/jsonl.hpp"
#include "weaverforge/parallel.hpp"
#include "weaverforge/rng.hpp"
#include "weaverforge/sections.hpp"

namespace weaverforge::backtranslate {

void to_json(json& j, const ExemplarCase& e) {
  j = json{{"task", e.task},
           {"domain", e.domain},
           {"subdomain", e.subdomain},
           {"source_excerpt", e.source_excerpt},
           {"selected_span", {{"start", e.selected_span.begin}, {"end", e.selected_span.end}}},
           {"context", e.context ? json(*e.context) : json(nullptr)},
           {"instruction", e.instruction},
           {"response", e.response},
           {"rationale", e.rationale}};
}

void from_json(const json& j, ExemplarCase& e) {
  e.task = j.at("task").get<TaskKind>();
  e.domain = j.at("domain").get<DomainKind>();
  e.subdomain = j.at("subdomain").get<std::string>();
  e.source_excerpt = j.at("source_excerpt").get<std::string>();
  e.selected_span.begin = j.at("selected_span").at("start").get<std::size_t>();
  e.selected_span.end = j.at("selected_span").at("end").get<std::size_t>();
  e.context.reset();
  if (j.contains("context") && !j["context"].is_null()) e.context = j["context"].get<std::string>();
  e.instruction = j.at("instruction").get<std::string>();
  e.response = j.at("response").get<std::string>();
  e.rationale = j.at("rationale").get<std::string>();
}

void validate(const ExemplarCase& e) {
  const auto fail = [&](const std::string& what) {
    throw Error(ErrorCode::kInvalidArgument,
                "exemplar " + e.subdomain + "/" + std::string(to_string(e.task)) + ": " + what);
  };
  if (e.subdomain.empty()) fail("empty subdomain");
  if (e.source_excerpt.empty()) fail("empty source_excerpt");
  if (e.instruction.empty()) fail("empty instruction");
  if (e.response.empty()) fail("empty response");
  if (e.rationale.empty()) fail("empty rationale");
  const auto& r = e.selected_span;
  if (r.begin >= r.end || r.end > e.source_excerpt.size()) fail("selected_span out of range");
  if (!text::is_char_boundary(e.source_excerpt, r.begin) || !text::is_char_boundary(e.source_excerpt, r.end)) {
    fail("selected_span not on character boundaries");
  }
}

ExemplarStore ExemplarStore::load(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(ErrorCode::kIo, "exemplar directory " + dir.string() + " not found");
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  ExemplarStore store;
  for (const auto& file : files) {
    const std::string subdomain = file.parent_path().filename().string();
    const TaskKind task = parse_task(file.stem().string());
    json j;
    try {
      j = json::parse(io::read_file(file));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kInvalidArgument, file.string() + ": " + e.what());
    }
    for (const auto& item : j) {
      auto e = item.get<ExemplarCase>();
      if (e.subdomain != subdomain || e.task != task) {
        throw Error(ErrorCode::kInvalidArgument, file.string() + ": case labeled " + e.subdomain + "/" +
                                                     std::string(to_string(e.task)) + " in the wrong file");
      }
      store.add(std::move(e));
    }
  }
  return store;
}

void ExemplarStore::add(ExemplarCase e) {
  validate(e);
  auto key = std::make_pair(e.subdomain, e.task);
  buckets_[std::move(key)].push_back(std::move(e));
}

const std::vector<ExemplarCase>& ExemplarStore::bucket(const std::string& subdomain, TaskKind task) const {
  auto it = buckets_.find({subdomain, task});
  const std::size_t have = it == buckets_.end() ? 0 : it->second.size();
  if (have != kExemplarsPerBucket) {
    throw Error(ErrorCode::kMissingExemplars,
                "bucket " + subdomain + "/" + std::string(to_string(task)) + " has " + std::to_string(have) +
                    " exemplars, needs " + std::to_string(kExemplarsPerBucket),
                subdomain + "/" + std::string(to_string(task)));
  }
  return it->second;
}

bool ExemplarStore::has_complete_bucket(const std::string& subdomain, TaskKind task) const {
  auto it = buckets_.find({subdomain, task});
  return it != buckets_.end() && it->second.size() == kExemplarsPerBucket;
}

std::vector<std::pair<std::string, TaskKind>> ExemplarStore::buckets() const {
  std::vector<std::pair<std::string, TaskKind>> out;
  for (const auto& [key, _] : buckets_) out.push_back(key);
  return out;
}

// ---------------------------------------------------------------------------

SpanBounds default_bounds(DomainKind domain) {
  return is_fiction(domain) ? SpanBounds{500, 4000} : SpanBounds{200, 2000};
}

namespace {

// Seeded choice among runs of consecutive units whose covering text has a
// code point length within bounds.
std::optional<text::Range> pick_run(std::string_view s, const std::vector<text::Range>& units, SpanBounds bounds,
                                    SplitMix64& rng) {
  if (units.empty()) return std::nullopt;
  std::vector<std::size_t> begin_char(units.size()), end_char(units.size());
  std::size_t pos = 0, chars = 0;
  for (std::size_t i = 0; i < units.size(); ++i) {
    chars += text::char_count(s.substr(pos, units[i].begin - pos));
    begin_char[i] = chars;
    chars += text::char_count(units[i].of(s));
    end_char[i] = chars;
    pos = units[i].end;
  }
  std::vector<text::Range> candidates;
  for (std::size_t i = 0; i < units.size(); ++i) {
    for (std::size_t j = i; j < units.size(); ++j) {
      const std::size_t len = end_char[j] - begin_char[i];
      if (len > bounds.max_chars) break;
      if (len >= bounds.min_chars) candidates.push_back({units[i].begin, units[j].end});
    }
  }
  if (candidates.empty()) return std::nullopt;
  return candidates[rng.below(candidates.size())];
}

}  // namespace

Span select_span(const Document& doc, TaskKind task, SpanBounds bounds, std::uint64_t seed) {
  if (bounds.min_chars == 0 || bounds.min_chars > bounds.max_chars) {
    throw Error(ErrorCode::kInvalidArgument, "span bounds need 0 < min_chars <= max_chars");
  }
  const std::string_view s = doc.text;
  const std::size_t total = text::char_count(s);
  if (total < bounds.min_chars) {
    throw Error(ErrorCode::kDocTooShort, "document " + doc.id + " has " + std::to_string(total) +
                                             " characters, span needs at least " +
                                             std::to_string(bounds.min_chars));
  }
  SplitMix64 rng(derive_seed(seed, doc.id + "/" + std::string(to_string(task))));

  auto range = pick_run(s, text::paragraph_ranges(s), bounds, rng);
  if (!range) range = pick_run(s, text::sentence_ranges(s), bounds, rng);
  if (!range) {
    // Window of max_chars code points starting at a sentence start that
    // leaves enough text.
    std::vector<std::size_t> starts;
    for (const auto& r : text::sentence_ranges(s)) {
      if (text::char_count(s.substr(r.begin)) >= bounds.min_chars) starts.push_back(r.begin);
    }
    const std::size_t begin = starts.empty() ? 0 : starts[rng.below(starts.size())];
    const std::string_view rest = s.substr(begin);
    std::size_t end = begin + text::byte_offset_of_char(rest, bounds.max_chars);
    const std::size_t trimmed = begin + text::trim(s.substr(begin, end - begin)).size();
    if (text::char_count(s.substr(begin, trimmed - begin)) >= bounds.min_chars) end = trimmed;
    range = text::Range{begin, end};
  }
  return Span{std::string(range->of(s)), *range};
}

// ---------------------------------------------------------------------------

std::string_view task_guidance(TaskKind task) {
  switch (task) {
    case TaskKind::kContentWriting:
      return "The response is the selected span, unchanged. Write the instruction a user would give to get "
             "exactly this text: its topic, genre, perspective and any constraints it satisfies.";
    case TaskKind::kOutlining:
      return "The response is an outline recovered from the span. Write an instruction asking for an outline "
             "of such a piece.";
    case TaskKind::kPolishingEditing:
      return "The response is the selected span, unchanged. Write a degraded version of the span as CONTEXT "
             "(clumsier wording, small errors) and an instruction asking to polish it.";
    case TaskKind::kStyleTransfer:
      return "CONTEXT is the selected span. The response restates it in another style or format named by the "
             "instruction.";
    case TaskKind::kExpandSimplify:
      return "CONTEXT is the selected span. The response expands or condenses it as the instruction asks.";
    case TaskKind::kBrainstorming:
      return "The response is a list of ideas derived from the span. Write an instruction asking for ideas on "
             "the span's subject.";
    case TaskKind::kReviewing:
      return "The response is a review of the span. Put the span in CONTEXT when the review refers to it.";
    case TaskKind::kInstructionAnnotation:
      return "Derive any instruction-response pair for which the span, a part of it, or something inferred "
             "from it is a good response.";
  }
  return "";
}

std::string render_exemplars(const std::vector<ExemplarCase>& exemplars) {
  std::string out;
  for (std::size_t i = 0; i < exemplars.size(); ++i) {
    const auto& e = exemplars[i];
    if (i > 0) out += "\n\n";
    out += "### Example " + std::to_string(i + 1) + "\n";
    out += "Source excerpt:\n" + e.source_excerpt + "\n\n";
    out += "Selected span:\n" + std::string(e.selected_span.of(e.source_excerpt)) + "\n\n";
    out += render_section("RATIONALE", e.rationale);
    out += render_section("CONTEXT", e.context ? *e.context : "NONE");
    out += render_section("INSTRUCTION", e.instruction);
    out += render_section("RESPONSE", e.response);
  }
  return out;
}

void check_grounding(TaskKind task, const Span& span, InstructionPair& pair) {
  const auto violation = [&](const std::string& what) {
    throw Error(ErrorCode::kGroundingViolation, std::string(to_string(task)) + ": " + what);
  };
  switch (task) {
    case TaskKind::kContentWriting:
      if (pair.response != span.text) violation("response must equal the selected span");
      break;
    case TaskKind::kPolishingEditing:
      if (pair.response != span.text) violation("response must equal the selected span");
      if (!pair.context || pair.context->empty()) violation("a degraded context is required");
      if (*pair.context == span.text) violation("context must differ from the span");
      break;
    case TaskKind::kStyleTransfer:
    case TaskKind::kExpandSimplify:
    case TaskKind::kReviewing:
      if (!pair.context) pair.context = span.text;
      if (*pair.context != span.text) violation("context must be the selected span");
      if (pair.response == span.text) violation("response must be transformed from the span");
      break;
    case TaskKind::kOutlining:
    case TaskKind::kBrainstorming:
      if (pair.response == span.text) violation("response must be transformed from the span");
      break;
    case TaskKind::kInstructionAnnotation:
      break;
  }
}

InstructionPair parse_pair(std::string_view raw, TaskKind task, const Span& span) {
  const auto sections = Sections::parse(raw, {"RATIONALE", "CONTEXT", "INSTRUCTION", "RESPONSE"});
  const auto fail = [&](const std::string& what) {
    throw Error(ErrorCode::kParseFailure, what, std::string(raw));
  };
  const auto order = sections.order();
  if (order.empty() || order.front() != "RATIONALE") fail("RATIONALE must be the first section");
  InstructionPair p;
  p.task = task;
  p.rationale = sections.get("RATIONALE").value_or("");
  p.instruction = sections.get("INSTRUCTION").value_or("");
  p.response = sections.get("RESPONSE").value_or("");
  if (p.rationale.empty()) fail("empty RATIONALE");
  if (p.instruction.empty()) fail("missing INSTRUCTION");
  if (p.response.empty()) fail("missing RESPONSE");
  if (auto ctx = sections.get("CONTEXT"); ctx && !ctx->empty() && text::trim(*ctx) != "NONE") p.context = *ctx;
  p.source_span = span.text;
  p.span_start = span.offsets.begin;
  p.span_end = span.offsets.end;
  check_grounding(task, span, p);
  return p;
}

InstructionPair synthesize_pair(const Document& doc, TaskKind task, const std::vector<ExemplarCase>& exemplars,
                                llm::Gateway& gateway, const SynthesisOptions& options) {
  const std::string bucket = doc.subdomain + "/" + std::string(to_string(task));
  if (exemplars.size() != kExemplarsPerBucket) {
    throw Error(ErrorCode::kMissingExemplars,
                "bucket " + bucket + " needs " + std::to_string(kExemplarsPerBucket) + " exemplars", bucket);
  }
  for (const auto& e : exemplars) {
    if (e.subdomain != doc.subdomain || e.task != task) {
      throw Error(ErrorCode::kMissingExemplars, "exemplar for " + e.subdomain + "/" +
                                                    std::string(to_string(e.task)) + " used for bucket " + bucket,
                  bucket);
    }
  }
  const SpanBounds bounds = options.bounds.value_or(default_bounds(doc.domain));
  const Span span =
      select_span(doc, task, bounds, derive_seed(options.seed, "span#" + std::to_string(options.repeat_index)));

  const llm::TemplateStore& templates = options.templates ? *options.templates : llm::TemplateStore::builtin();
  const std::map<std::string, std::string> vars = {
      {"task", std::string(to_string(task))},
      {"task_guidance", std::string(task_guidance(task))},
      {"domain", std::string(to_string(doc.domain))},
      {"subdomain", doc.subdomain},
      {"language", std::string(to_string(doc.language))},
      {"exemplars", render_exemplars(exemplars)},
      {"span", span.text}};
  llm::ChatRequest req = templates.render("backtranslate", vars, "backtranslate/" + std::string(to_string(task)));
  req.model = options.model;
  req.temperature = options.temperature;
  req.max_tokens = options.max_tokens;
  req.seed = static_cast<std::int64_t>(options.seed & 0x7fffffffffffffffULL);

  const auto resp = gateway.complete(req);
  InstructionPair p = parse_pair(resp.content, task, span);
  p.id = doc.id + "/" + std::string(to_string(task));
  if (options.repeat_index > 0) p.id += "#" + std::to_string(options.repeat_index);
  p.domain = doc.domain;
  p.subdomain = doc.subdomain;
  p.source_doc_id = doc.id;
  return p;
}

void to_json(json& j, const SynthesisFailure& f) {
  j = json{{"doc_id", f.doc_id}, {"task", f.task}, {"error", f.error}, {"transcript", f.transcript}};
}

BacktranslateResult run(const std::vector<Document>& docs, const ExemplarStore& exemplars, llm::Gateway& gateway,
                        const RunOptions& options) {
  std::vector<std::string> missing;
  for (const auto& d : docs) {
    for (auto t : options.tasks) {
      if (!exemplars.has_complete_bucket(d.subdomain, t)) {
        const std::string b = d.subdomain + "/" + std::string(to_string(t));
        if (std::find(missing.begin(), missing.end(), b) == missing.end()) missing.push_back(b);
      }
    }
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
    throw Error(ErrorCode::kMissingExemplars, "no complete exemplar bucket for " + list, list);
  }

  struct Job {
    std::size_t doc;
    TaskKind task;
    std::size_t repeat;
  };
  std::vector<Job> jobs;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    for (auto t : options.tasks) {
      for (std::size_t r = 0; r < options.repeat; ++r) jobs.push_back({i, t, r});
    }
  }

  using Outcome = std::pair<std::optional<InstructionPair>, std::optional<SynthesisFailure>>;
  const auto outcomes = parallel_map(jobs.size(), options.workers, [&](std::size_t k) -> Outcome {
    const Job& job = jobs[k];
    const Document& doc = docs[job.doc];
    SynthesisOptions so = options.synthesis;
    so.repeat_index = job.repeat;
    try {
      return {synthesize_pair(doc, job.task, exemplars.bucket(doc.subdomain, job.task), gateway, so),
              std::nullopt};
    } catch (const Error& e) {
      switch (e.code()) {
        case ErrorCode::kDocTooShort:
        case ErrorCode::kParseFailure:
        case ErrorCode::kGroundingViolation:
          return {std::nullopt, SynthesisFailure{doc.id, job.task, e.what(), e.detail()}};
        default:
          throw;
      }
    }
  });

  BacktranslateResult result;
  for (const auto& [pair, failure] : outcomes) {
    if (pair) result.pairs.push_back(*pair);
    if (failure) result.failures.push_back(*failure);
  }
  return result;
}

std::vector<TrainingSample> emit_annotation_samples(const std::vector<InstructionPair>& pairs) {
  std::vector<TrainingSample> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) {
    TrainingSample s;
    s.id = "annotation/" + p.id;
    s.kind = "instruction_annotation";
    s.task = std::string(to_string(p.task));
    s.input = p.source_span;
    s.target = render_section("RATIONALE", p.rationale);
    if (p.context) s.target += render_section("CONTEXT", *p.context);
    s.target += render_section("INSTRUCTION", p.instruction);
    s.target += render_section("RESPONSE", p.response);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace weaverforge::backtranslate
