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

#include "weaverforge/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "weaverforge/error.hpp"
#include "weaverforge/jsonl.hpp"
#include "weaverforge/parallel.hpp"
#include "weaverforge/quality.hpp"
#include "weaverforge/rng.hpp"
#include "weaverforge/text.hpp"

namespace weaverforge::bench {

void to_json(json& j, const BenchInstruction& b) {
  j = json{{"id", b.id}, {"domain", b.domain}, {"text", b.text}, {"language", b.language}};
}

void from_json(const json& j, BenchInstruction& b) {
  b.id = j.at("id").get<std::string>();
  b.domain = j.at("domain").get<DomainKind>();
  b.text = j.at("text").get<std::string>();
  b.language = j.value("language", Language::kEn);
}

std::vector<BenchInstruction> load_instructions(const fs::path& path) {
  auto out = io::read_jsonl<BenchInstruction>(path);
  std::set<std::string> ids;
  for (const auto& b : out) {
    if (b.id.empty()) throw Error(ErrorCode::kInvalidArgument, path.string() + ": instruction without an id");
    if (!ids.insert(b.id).second) {
      throw Error(ErrorCode::kInvalidArgument, path.string() + ": duplicate instruction id " + b.id);
    }
  }
  return out;
}

void to_json(json& j, const JudgeScore& s) {
  j = json{{"style", s.style}, {"relevance", s.relevance}, {"creativity", s.creativity}, {"overall", s.overall()}};
}

void from_json(const json& j, JudgeScore& s) {
  s.style = j.at("style").get<double>();
  s.relevance = j.at("relevance").get<double>();
  s.creativity = j.at("creativity").get<double>();
}

std::string format_score(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::kA: return "A";
    case Verdict::kB: return "B";
    case Verdict::kTie: return "Tie";
  }
  return "Tie";
}

std::string_view to_string(Dimension d) {
  switch (d) {
    case Dimension::kCreativity: return "creativity";
    case Dimension::kStyle: return "style";
    case Dimension::kRelevance: return "relevance";
    case Dimension::kFluency: return "fluency";
    case Dimension::kOverall: return "overall";
  }
  return "overall";
}

Verdict parse_verdict(std::string_view s) {
  for (auto v : {Verdict::kA, Verdict::kB, Verdict::kTie}) {
    if (to_string(v) == s) return v;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown verdict '" + std::string(s) + "' (expected A, B or Tie)");
}

Dimension parse_dimension(std::string_view s) {
  for (auto d : kAllDimensions) {
    if (to_string(d) == s) return d;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown dimension '" + std::string(s) + "'");
}

void to_json(json& j, const ComparisonRecord& r) {
  j = json{{"id", r.id},
           {"instruction_id", r.instruction_id},
           {"model_a", r.model_a},
           {"model_b", r.model_b},
           {"verdict", to_string(r.verdict)},
           {"dimension", to_string(r.dimension)},
           {"annotator", r.annotator},
           {"timestamp", r.timestamp}};
}

void from_json(const json& j, ComparisonRecord& r) {
  r.id = j.at("id").get<std::string>();
  r.instruction_id = j.value("instruction_id", std::string{});
  r.model_a = j.at("model_a").get<std::string>();
  r.model_b = j.at("model_b").get<std::string>();
  r.verdict = parse_verdict(j.at("verdict").get<std::string>());
  r.dimension = parse_dimension(j.at("dimension").get<std::string>());
  r.annotator = j.value("annotator", std::string{});
  r.timestamp = j.at("timestamp").get<std::uint64_t>();
  if (r.model_a == r.model_b) throw Error(ErrorCode::kSelfPlay, "record " + r.id + " compares " + r.model_a + " with itself");
}

// ---------------------------------------------------------------------------

double elo_expected(double r_a, double r_b) { return 1.0 / (1.0 + std::pow(10.0, (r_b - r_a) / 400.0)); }

void elo_apply(EloTable& table, const ComparisonRecord& rec) {
  if (rec.model_a == rec.model_b) {
    throw Error(ErrorCode::kSelfPlay, "record " + rec.id + " compares " + rec.model_a + " with itself");
  }
  const double ra = table.ratings.try_emplace(rec.model_a, table.params.initial).first->second;
  const double rb = table.ratings.try_emplace(rec.model_b, table.params.initial).first->second;
  const double ea = elo_expected(ra, rb);
  const double eb = elo_expected(rb, ra);
  const double sa = rec.verdict == Verdict::kA ? 1.0 : rec.verdict == Verdict::kB ? 0.0 : 0.5;
  table.ratings[rec.model_a] = ra + table.params.k_factor * (sa - ea);
  table.ratings[rec.model_b] = rb + table.params.k_factor * ((1.0 - sa) - eb);
  ++table.games[rec.model_a];
  ++table.games[rec.model_b];
  ++table.processed_count;
}

EloTable elo_update(EloTable table, const ComparisonRecord& rec) {
  elo_apply(table, rec);
  return table;
}

void to_json(json& j, const LeaderboardRow& r) {
  j = json{{"model", r.model}, {"rating", r.rating}, {"games", r.games}};
}

std::vector<LeaderboardRow> leaderboard(const EloTable& table) {
  std::vector<LeaderboardRow> rows;
  for (const auto& [model, rating] : table.ratings) {
    const auto g = table.games.find(model);
    rows.push_back({model, rating, g == table.games.end() ? 0 : g->second});
  }
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.rating > b.rating; });
  return rows;
}

std::map<Dimension, EloTable> elo_tables(std::vector<ComparisonRecord> records, const EloParams& params) {
  std::sort(records.begin(), records.end(), [](const auto& a, const auto& b) {
    return a.timestamp != b.timestamp ? a.timestamp < b.timestamp : a.id < b.id;
  });
  std::map<Dimension, EloTable> tables;
  for (const auto& r : records) {
    auto [it, fresh] = tables.try_emplace(r.dimension);
    if (fresh) it->second.params = params;
    elo_apply(it->second, r);
  }
  return tables;
}

std::map<Dimension, std::vector<LeaderboardRow>> elo_rank(const std::vector<ComparisonRecord>& records,
                                                          const EloParams& params) {
  std::map<Dimension, std::vector<LeaderboardRow>> out;
  for (const auto& [d, table] : elo_tables(records, params)) out[d] = leaderboard(table);
  return out;
}

// ---------------------------------------------------------------------------

void to_json(json& j, const ModelOutput& o) {
  j = json{{"instruction_id", o.instruction_id}, {"model", o.model}, {"response", o.response}};
}

void from_json(const json& j, ModelOutput& o) {
  o.instruction_id = j.at("instruction_id").get<std::string>();
  o.model = j.at("model").get<std::string>();
  o.response = j.at("response").get<std::string>();
}

void to_json(json& j, const ItemFailure& f) {
  j = json{{"instruction_id", f.instruction_id}, {"model", f.model}, {"error", f.error}};
}

namespace {

const llm::TemplateStore& store_of(const llm::TemplateStore* t) { return t ? *t : llm::TemplateStore::builtin(); }

std::int64_t seed_of(std::uint64_t seed, const std::string& label) {
  return static_cast<std::int64_t>(derive_seed(seed, label) & 0x7fffffffffffffffULL);
}

}  // namespace

CollectResult collect_outputs(const std::vector<BenchInstruction>& instructions,
                              const std::vector<ModelHandle>& models, const BenchOptions& options) {
  struct Outcome {
    std::optional<ModelOutput> output;
    std::optional<ItemFailure> failure;
  };
  const std::size_t n = instructions.size() * models.size();
  auto outcomes = parallel_map(n, options.workers, [&](std::size_t i) {
    const auto& ins = instructions[i / models.size()];
    const auto& m = models[i % models.size()];
    Outcome out;
    try {
      auto req = store_of(options.templates).render("bench_answer", {{"instruction", ins.text}});
      req.model = m.model.empty() ? m.name : m.model;
      req.temperature = options.temperature;
      req.max_tokens = options.max_tokens;
      req.seed = seed_of(options.seed, ins.id + "/" + m.name);
      out.output = ModelOutput{ins.id, m.name, m.gateway->complete(req).content};
    } catch (const std::exception& e) {
      out.failure = ItemFailure{ins.id, m.name, e.what()};
    }
    return out;
  });
  CollectResult result;
  for (auto& o : outcomes) {
    if (o.output) result.responses.push_back(std::move(*o.output));
    if (o.failure) result.failures.push_back(std::move(*o.failure));
  }
  return result;
}

JudgeScore parse_judge(std::string_view raw) {
  const auto s = quality::parse_named_scores(raw, {"style", "relevance", "creativity"});
  const auto clamp = [](double v) { return std::clamp(v, 1.0, 10.0); };
  return JudgeScore{clamp(s.at("style")), clamp(s.at("relevance")), clamp(s.at("creativity"))};
}

JudgeScore judge(std::string_view instruction, std::string_view response, llm::Gateway& gateway,
                 const BenchOptions& options) {
  auto req = store_of(options.templates)
                 .render("judge", {{"instruction", std::string(instruction)}, {"response", std::string(response)}});
  req.temperature = 0.0;
  req.seed = seed_of(options.seed, "judge");
  return parse_judge(gateway.complete(req).content);
}

void to_json(json& j, const JudgedItem& item) {
  j = json{{"instruction_id", item.instruction_id}, {"model", item.model}, {"score", item.score}};
}

void from_json(const json& j, JudgedItem& item) {
  item.instruction_id = j.at("instruction_id").get<std::string>();
  item.model = j.at("model").get<std::string>();
  item.score = j.at("score").get<JudgeScore>();
}

namespace {

std::map<std::string, const BenchInstruction*> index_instructions(const std::vector<BenchInstruction>& v) {
  std::map<std::string, const BenchInstruction*> out;
  for (const auto& b : v) out[b.id] = &b;
  return out;
}

std::map<std::pair<std::string, std::string>, const ModelOutput*> index_outputs(const std::vector<ModelOutput>& v) {
  std::map<std::pair<std::string, std::string>, const ModelOutput*> out;
  for (const auto& o : v) out[{o.instruction_id, o.model}] = &o;
  return out;
}

}  // namespace

JudgeResult judge_all(const std::vector<BenchInstruction>& instructions, const std::vector<ModelOutput>& outputs,
                      llm::Gateway& gateway, const BenchOptions& options) {
  const auto by_id = index_instructions(instructions);
  struct Outcome {
    std::optional<JudgedItem> item;
    std::optional<ItemFailure> failure;
  };
  auto outcomes = parallel_map(outputs.size(), options.workers, [&](std::size_t i) {
    const auto& o = outputs[i];
    Outcome out;
    const auto it = by_id.find(o.instruction_id);
    if (it == by_id.end()) {
      out.failure = ItemFailure{o.instruction_id, o.model, "unknown instruction"};
      return out;
    }
    try {
      out.item = JudgedItem{o.instruction_id, o.model, judge(it->second->text, o.response, gateway, options)};
    } catch (const std::exception& e) {
      out.failure = ItemFailure{o.instruction_id, o.model, e.what()};
    }
    return out;
  });
  JudgeResult result;
  for (auto& o : outcomes) {
    if (o.item) result.judged.push_back(std::move(*o.item));
    if (o.failure) result.failures.push_back(std::move(*o.failure));
  }
  return result;
}

std::vector<ModelSummary> summarize(const std::vector<JudgedItem>& judged) {
  std::map<std::string, ModelSummary> acc;
  for (const auto& j : judged) {
    auto& s = acc[j.model];
    s.model = j.model;
    s.mean.style += j.score.style;
    s.mean.relevance += j.score.relevance;
    s.mean.creativity += j.score.creativity;
    ++s.items;
  }
  std::vector<ModelSummary> out;
  for (auto& [m, s] : acc) {
    const double n = static_cast<double>(s.items);
    s.mean = {s.mean.style / n, s.mean.relevance / n, s.mean.creativity / n};
    out.push_back(s);
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& a, const auto& b) { return a.mean.overall() > b.mean.overall(); });
  return out;
}

std::vector<TrainingSample> export_eval_training_samples(const std::vector<BenchInstruction>& instructions,
                                                         const std::vector<ModelOutput>& outputs,
                                                         const std::vector<JudgedItem>& judged,
                                                         const std::vector<ComparisonRecord>& comparisons,
                                                         const llm::TemplateStore* templates) {
  const auto& store = store_of(templates);
  const auto by_id = index_instructions(instructions);
  const auto by_key = index_outputs(outputs);
  const auto instruction_text = [&](const std::string& id) -> const std::string& {
    const auto it = by_id.find(id);
    if (it == by_id.end()) throw Error(ErrorCode::kInvalidArgument, "no benchmark instruction " + id);
    return it->second->text;
  };
  const auto response_text = [&](const std::string& id, const std::string& model) -> const std::string& {
    const auto it = by_key.find({id, model});
    if (it == by_key.end()) {
      throw Error(ErrorCode::kInvalidArgument, "no response of " + model + " to instruction " + id);
    }
    return it->second->response;
  };
  const auto prompt = [&](std::string_view tmpl, const std::map<std::string, std::string>& vars) {
    return store.render(tmpl, vars).messages.back().content;
  };

  std::vector<TrainingSample> out;
  for (const auto& j : judged) {
    TrainingSample s;
    s.id = "grading/" + j.instruction_id + "/" + j.model;
    s.kind = "eval_grading";
    s.input = prompt("eval_grading", {{"instruction", instruction_text(j.instruction_id)},
                                      {"response", response_text(j.instruction_id, j.model)}});
    s.target = "style: " + format_score(j.score.style) + "\nrelevance: " + format_score(j.score.relevance) +
               "\ncreativity: " + format_score(j.score.creativity) + "\noverall: " + format_score(j.score.overall());
    out.push_back(std::move(s));
  }
  for (const auto& c : comparisons) {
    TrainingSample s;
    s.id = "pairwise/" + c.id;
    s.kind = "eval_pairwise";
    s.input = prompt("eval_pairwise", {{"dimension", std::string(to_string(c.dimension))},
                                       {"instruction", instruction_text(c.instruction_id)},
                                       {"response_a", response_text(c.instruction_id, c.model_a)},
                                       {"response_b", response_text(c.instruction_id, c.model_b)}});
    s.target = c.verdict == Verdict::kTie ? "Tie" : "Response " + std::string(to_string(c.verdict)) + " is better";
    out.push_back(std::move(s));
  }
  return out;
}

// ---------------------------------------------------------------------------

void to_json(json& j, const ComparisonPair& p) {
  j = json{{"comparison_id", p.comparison_id}, {"instruction_id", p.instruction_id},
           {"instruction", p.instruction},     {"model_a", p.model_a},
           {"model_b", p.model_b},             {"response_a", p.response_a},
           {"response_b", p.response_b}};
}

void from_json(const json& j, ComparisonPair& p) {
  p.comparison_id = j.at("comparison_id").get<std::string>();
  p.instruction_id = j.value("instruction_id", std::string{});
  p.instruction = j.at("instruction").get<std::string>();
  p.model_a = j.at("model_a").get<std::string>();
  p.model_b = j.at("model_b").get<std::string>();
  p.response_a = j.at("response_a").get<std::string>();
  p.response_b = j.at("response_b").get<std::string>();
  if (p.model_a == p.model_b) {
    throw Error(ErrorCode::kSelfPlay, "pair " + p.comparison_id + " compares " + p.model_a + " with itself");
  }
}

std::vector<ComparisonPair> make_comparison_pairs(const std::vector<BenchInstruction>& instructions,
                                                  const std::vector<ModelOutput>& outputs, std::uint64_t seed) {
  std::map<std::string, std::vector<const ModelOutput*>> per_instruction;
  for (const auto& o : outputs) per_instruction[o.instruction_id].push_back(&o);
  std::vector<ComparisonPair> out;
  for (const auto& ins : instructions) {
    auto it = per_instruction.find(ins.id);
    if (it == per_instruction.end()) continue;
    auto& v = it->second;
    std::sort(v.begin(), v.end(), [](const auto* a, const auto* b) { return a->model < b->model; });
    std::size_t k = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      for (std::size_t j = i + 1; j < v.size(); ++j) {
        if (v[i]->model == v[j]->model) continue;
        char buf[16];
        std::snprintf(buf, sizeof buf, "%03zu", k++);
        ComparisonPair p;
        p.comparison_id = ins.id + "-" + buf;
        p.instruction_id = ins.id;
        p.instruction = ins.text;
        SplitMix64 rng(derive_seed(seed, p.comparison_id));
        const bool swap = rng.below(2) == 1;
        const ModelOutput* a = swap ? v[j] : v[i];
        const ModelOutput* b = swap ? v[i] : v[j];
        p.model_a = a->model;
        p.model_b = b->model;
        p.response_a = a->response;
        p.response_b = b->response;
        out.push_back(std::move(p));
      }
    }
  }
  return out;
}

}  // namespace weaverforge::bench
