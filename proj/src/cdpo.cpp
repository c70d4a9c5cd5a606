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

#include "weaverforge/cdpo.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "weaverforge/error.hpp"
#include "weaverforge/jsonl.hpp"
#include "weaverforge/parallel.hpp"
#include "weaverforge/quality.hpp"
#include "weaverforge/sections.hpp"
#include "weaverforge/text.hpp"

namespace weaverforge::cdpo {

void to_json(json& j, const Principle& p) {
  j = json{{"id", p.id},
           {"domain", p.domain},
           {"task", p.task},
           {"description", p.description},
           {"adhering_case", p.adhering_case},
           {"violating_case", p.violating_case},
           {"rationale_adhere", p.rationale_adhere},
           {"rationale_violate", p.rationale_violate}};
}

void from_json(const json& j, Principle& p) {
  p.id = j.at("id").get<std::string>();
  p.domain = j.at("domain").get<DomainKind>();
  p.task = j.at("task").get<TaskKind>();
  p.description = j.at("description").get<std::string>();
  p.adhering_case = j.at("adhering_case").get<std::string>();
  p.violating_case = j.at("violating_case").get<std::string>();
  p.rationale_adhere = j.at("rationale_adhere").get<std::string>();
  p.rationale_violate = j.at("rationale_violate").get<std::string>();
}

PrincipleSet PrincipleSet::load(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(ErrorCode::kIo, "principle directory " + dir.string() + " not found");
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  PrincipleSet set;
  for (const auto& file : files) {
    const DomainKind domain = parse_domain(file.parent_path().filename().string());
    const TaskKind task = parse_task(file.stem().string());
    json j;
    try {
      j = json::parse(io::read_file(file));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kInvalidArgument, file.string() + ": " + e.what());
    }
    for (const auto& item : j) {
      auto p = item.get<Principle>();
      if (p.domain != domain || p.task != task) {
        throw Error(ErrorCode::kInvalidArgument, file.string() + ": principle " + p.id + " is in the wrong file");
      }
      set.add(std::move(p));
    }
  }
  return set;
}

void PrincipleSet::add(Principle p) {
  const auto fail = [&](const std::string& what) {
    throw Error(ErrorCode::kInvalidArgument, "principle '" + p.id + "': " + what);
  };
  for (const auto* field : {&p.id, &p.description, &p.adhering_case, &p.violating_case, &p.rationale_adhere,
                            &p.rationale_violate}) {
    if (text::trim(*field).empty()) fail("all text fields must be non-empty");
  }
  for (const auto& q : principles_) {
    if (q.id == p.id) fail("duplicate id");
    if (q.domain == p.domain && q.task == p.task && q.description == p.description) {
      fail("duplicate description for this domain and task");
    }
  }
  principles_.push_back(std::move(p));
}

std::vector<const Principle*> PrincipleSet::candidates(DomainKind domain, TaskKind task) const {
  std::vector<const Principle*> out;
  for (const auto& p : principles_) {
    if (p.domain == domain && p.task == task) out.push_back(&p);
  }
  return out;
}

const Principle* PrincipleSet::find(std::string_view id) const {
  for (const auto& p : principles_) {
    if (p.id == id) return &p;
  }
  return nullptr;
}

void to_json(json& j, const PreferencePair& p) {
  j = json{{"id", p.id},
           {"instruction", p.instruction},
           {"context", p.context ? json(*p.context) : json(nullptr)},
           {"chosen", p.chosen},
           {"rejected", p.rejected},
           {"principle_id", p.principle_id},
           {"attribution_rationale", p.attribution_rationale},
           {"perturbation_rationale", p.perturbation_rationale},
           {"source_pair_id", p.source_pair_id},
           {"subdomain", p.subdomain}};
}

void from_json(const json& j, PreferencePair& p) {
  p.id = j.at("id").get<std::string>();
  p.instruction = j.at("instruction").get<std::string>();
  p.context.reset();
  if (j.contains("context") && !j["context"].is_null()) p.context = j["context"].get<std::string>();
  p.chosen = j.at("chosen").get<std::string>();
  p.rejected = j.at("rejected").get<std::string>();
  p.principle_id = j.at("principle_id").get<std::string>();
  p.attribution_rationale = j.value("attribution_rationale", std::string{});
  p.perturbation_rationale = j.value("perturbation_rationale", std::string{});
  p.source_pair_id = j.value("source_pair_id", std::string{});
  p.subdomain = j.value("subdomain", std::string{});
}

// ---------------------------------------------------------------------------

namespace {

const llm::TemplateStore& store_of(const LlmOptions& o) {
  return o.templates ? *o.templates : llm::TemplateStore::builtin();
}

void apply(llm::ChatRequest& req, const LlmOptions& o) {
  req.model = o.model;
  req.temperature = o.temperature;
  req.seed = static_cast<std::int64_t>(o.seed & 0x7fffffffffffffffULL);
}

std::string first_token(std::string_view s) {
  s = text::trim(s);
  const auto end = s.find_first_of(" \t\n");
  std::string tok(s.substr(0, end));
  const auto strip = [](char c) { return c == '`' || c == '*' || c == '"' || c == '\'' || c == '.' || c == ','; };
  while (!tok.empty() && strip(tok.front())) tok.erase(0, 1);
  while (!tok.empty() && strip(tok.back())) tok.pop_back();
  return tok;
}

}  // namespace

Attribution attribute_principle(const InstructionPair& pair, const std::vector<const Principle*>& candidates,
                                llm::Gateway& gateway, const LlmOptions& options) {
  if (candidates.empty()) {
    throw Error(ErrorCode::kNoCandidatePrinciples, "no principles for " + std::string(to_string(pair.domain)) + "/" +
                                                       std::string(to_string(pair.task)),
                pair.id);
  }
  std::string listing, ids, display;
  for (const auto* p : candidates) {
    listing += p->id + ": " + p->description + "\n";
    listing += "  Adhering case: " + p->adhering_case + "\n";
    listing += "  Why it adheres: " + p->rationale_adhere + "\n";
    listing += "  Violating case: " + p->violating_case + "\n";
    listing += "  Why it violates: " + p->rationale_violate + "\n";
    ids += (ids.empty() ? "" : "|") + p->id;
    display += (display.empty() ? "" : ", ") + p->id;
  }
  llm::ChatRequest req = store_of(options).render("cdpo_attribute", {{"candidates", listing},
                                                                     {"candidate_ids", ids},
                                                                     {"candidate_list", display},
                                                                     {"instruction", pair.instruction},
                                                                     {"response", pair.response}});
  apply(req, options);
  const auto resp = gateway.complete(req);

  const auto sections = Sections::parse(resp.content, {"PRINCIPLE", "RATIONALE"});
  Attribution a;
  a.rationale = sections.get("RATIONALE").value_or("");
  if (candidates.size() == 1) {
    a.principle_id = candidates.front()->id;
    if (a.rationale.empty()) a.rationale = std::string(text::trim(resp.content));
    return a;
  }
  const std::string named = first_token(sections.get("PRINCIPLE").value_or(""));
  for (const auto* p : candidates) {
    if (p->id == named) a.principle_id = p->id;
  }
  if (a.principle_id.empty()) {
    throw Error(ErrorCode::kParseFailure, "model named '" + named + "', not one of " + display, resp.content);
  }
  return a;
}

std::optional<std::string> check_perturbation(std::string_view chosen, std::string_view rejected,
                                              const PerturbationLimits& limits) {
  if (rejected == chosen) return "the rewrite is identical to the original";
  if (text::trim(rejected).empty()) return "the rewrite is empty";
  const double dist = text::normalized_edit_distance(chosen, rejected);
  if (!(dist > 0.0)) return "the rewrite is identical to the original";
  if (dist > limits.max_edit) {
    return "the rewrite changes too much (normalized edit distance " + std::to_string(dist) + " > " +
           std::to_string(limits.max_edit) + ")";
  }
  const double ratio =
      static_cast<double>(text::char_count(rejected)) / static_cast<double>(std::max<std::size_t>(1, text::char_count(chosen)));
  if (ratio < limits.min_length_ratio || ratio > limits.max_length_ratio) {
    return "the rewrite length ratio " + std::to_string(ratio) + " is outside [" +
           std::to_string(limits.min_length_ratio) + ", " + std::to_string(limits.max_length_ratio) + "]";
  }
  return std::nullopt;
}

PreferencePair synthesize_negative(const InstructionPair& pair, const Principle& principle,
                                   const Attribution& attribution, llm::Gateway& gateway,
                                   const PerturbationLimits& limits, const LlmOptions& options,
                                   std::size_t variant) {
  const std::string variant_note =
      variant == 0 ? std::string{}
                   : "Use a different way of violating the principle than earlier rewrites (variant " +
                         std::to_string(variant) + ").\n";
  std::string feedback = variant_note;
  std::string last_problem;
  for (int attempt = 0; attempt < 2; ++attempt) {
    llm::ChatRequest req = store_of(options).render("cdpo_perturb", {{"principle_description", principle.description},
                                                                    {"violating_case", principle.violating_case},
                                                                    {"rationale_violate", principle.rationale_violate},
                                                                    {"instruction", pair.instruction},
                                                                    {"chosen", pair.response},
                                                                    {"feedback", feedback}});
    apply(req, options);
    const auto resp = gateway.complete(req);
    std::optional<std::string> revised, rationale;
    try {
      const auto sections = Sections::parse(resp.content, {"RATIONALE", "REVISED"});
      revised = sections.get("REVISED");
      rationale = sections.get("RATIONALE");
    } catch (const Error&) {
    }
    std::optional<std::string> problem;
    if (!revised) {
      problem = "the answer has no [REVISED] section";
    } else {
      problem = check_perturbation(pair.response, *revised, limits);
    }
    if (!problem) {
      PreferencePair pp;
      pp.id = pair.id + "#neg" + std::to_string(variant);
      pp.instruction = pair.instruction;
      pp.context = pair.context;
      pp.chosen = pair.response;
      pp.rejected = *revised;
      pp.principle_id = principle.id;
      pp.attribution_rationale = attribution.rationale;
      pp.perturbation_rationale = rationale.value_or("");
      pp.source_pair_id = pair.id;
      pp.subdomain = pair.subdomain;
      return pp;
    }
    last_problem = *problem;
    feedback = variant_note + "Your previous rewrite was rejected: " + *problem +
               ". Change only what is needed to violate the principle.\n";
  }
  throw Error(ErrorCode::kPerturbationRejected, "pair " + pair.id + ": " + last_problem, pair.id);
}

std::vector<InstructionPair> select_positives(const std::vector<InstructionPair>& pairs, std::size_t per_subdomain) {
  if (per_subdomain == 0) throw Error(ErrorCode::kInvalidArgument, "per_subdomain must be positive");
  return quality::select_top(pairs, {quality::Quota::count(per_subdomain), quality::TieBreak::kByTotalThenId},
                             [](const InstructionPair& p) { return p.subdomain; });
}

CdpoResult run(const std::vector<InstructionPair>& selected, const PrincipleSet& principles,
               llm::Gateway& gateway, const CdpoOptions& options) {
  const auto positives = select_positives(selected, options.per_subdomain);
  struct Outcome {
    std::vector<PreferencePair> pairs;
    std::vector<Skipped> skipped;
  };
  const auto outcomes = parallel_map(positives.size(), options.workers, [&](std::size_t i) {
    const InstructionPair& pos = positives[i];
    Outcome o;
    const auto recoverable = [](ErrorCode c) {
      return c == ErrorCode::kNoCandidatePrinciples || c == ErrorCode::kParseFailure ||
             c == ErrorCode::kPerturbationRejected;
    };
    Attribution attribution;
    const Principle* principle = nullptr;
    try {
      attribution = attribute_principle(pos, principles.candidates(pos.domain, pos.task), gateway, options.llm);
      principle = principles.find(attribution.principle_id);
    } catch (const Error& e) {
      if (!recoverable(e.code())) throw;
      o.skipped.push_back({pos.id, e.what()});
      return o;
    }
    for (std::size_t v = 0; v < options.negatives_per_positive; ++v) {
      try {
        o.pairs.push_back(
            synthesize_negative(pos, *principle, attribution, gateway, options.limits, options.llm, v));
      } catch (const Error& e) {
        if (!recoverable(e.code())) throw;
        o.skipped.push_back({pos.id, e.what()});
      }
    }
    return o;
  });
  CdpoResult result;
  result.positives = positives.size();
  for (const auto& o : outcomes) {
    result.pairs.insert(result.pairs.end(), o.pairs.begin(), o.pairs.end());
    result.skipped.insert(result.skipped.end(), o.skipped.begin(), o.skipped.end());
  }
  return result;
}

// ---------------------------------------------------------------------------

double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

namespace {

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

DpoResult dpo_loss(const std::vector<DpoItem>& batch, double beta) {
  if (batch.empty()) throw Error(ErrorCode::kInvalidArgument, "DPO batch is empty");
  if (!std::isfinite(beta)) throw Error(ErrorCode::kNonFiniteInput, "beta is not finite");
  if (beta <= 0.0) throw Error(ErrorCode::kInvalidArgument, "beta must be positive");
  const double n = static_cast<double>(batch.size());
  DpoResult r;
  r.gradients.reserve(batch.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto& it = batch[i];
    for (double v : {it.policy_logp_chosen, it.policy_logp_rejected, it.ref_logp_chosen, it.ref_logp_rejected}) {
      if (!std::isfinite(v)) {
        throw Error(ErrorCode::kNonFiniteInput, "batch item " + std::to_string(i) + " has a non-finite log-prob");
      }
    }
    const double margin =
        (it.policy_logp_chosen - it.ref_logp_chosen) - (it.policy_logp_rejected - it.ref_logp_rejected);
    sum += softplus(-beta * margin);
    // d/dmargin softplus(-beta m) = -beta * sigmoid(-beta m).
    const double g = beta * sigmoid(-beta * margin) / n;
    r.gradients.push_back({-g, g, g, -g});
  }
  r.loss = sum / n;
  return r;
}

void to_json(json& j, const DpoItem& d) {
  j = json{{"policy_logp_chosen", d.policy_logp_chosen},
           {"policy_logp_rejected", d.policy_logp_rejected},
           {"ref_logp_chosen", d.ref_logp_chosen},
           {"ref_logp_rejected", d.ref_logp_rejected}};
}

void from_json(const json& j, DpoItem& d) {
  d.policy_logp_chosen = j.at("policy_logp_chosen").get<double>();
  d.policy_logp_rejected = j.at("policy_logp_rejected").get<double>();
  d.ref_logp_chosen = j.at("ref_logp_chosen").get<double>();
  d.ref_logp_rejected = j.at("ref_logp_rejected").get<double>();
}

void to_json(json& j, const DpoResult& r) {
  json grads = json::array();
  for (const auto& g : r.gradients) {
    grads.push_back({{"policy_logp_chosen", g.policy_logp_chosen},
                     {"policy_logp_rejected", g.policy_logp_rejected},
                     {"ref_logp_chosen", g.ref_logp_chosen},
                     {"ref_logp_rejected", g.ref_logp_rejected}});
  }
  j = json{{"loss", r.loss}, {"gradients", grads}};
}

}  // namespace weaverforge::cdpo
