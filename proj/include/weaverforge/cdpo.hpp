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
#include <optional>
#include <string>
#include <vector>

#include "weaverforge/llm.hpp"
#include "weaverforge/pair.hpp"

namespace weaverforge::cdpo {

namespace fs = std::filesystem;

struct Principle {
  std::string id;
  DomainKind domain = DomainKind::kFictionWriting;
  TaskKind task = TaskKind::kContentWriting;
  std::string description;
  std::string adhering_case;
  std::string violating_case;
  std::string rationale_adhere;
  std::string rationale_violate;

  bool operator==(const Principle&) const = default;
};

void to_json(json& j, const Principle& p);
void from_json(const json& j, Principle& p);

// Principles loaded from <dir>/<Domain>/<Task>.json (one JSON array each).
class PrincipleSet {
 public:
  static PrincipleSet load(const fs::path& dir);

  // Throws InvalidArgument on an empty field, a duplicate id or a duplicate
  // (domain, task, description).
  void add(Principle p);

  std::vector<const Principle*> candidates(DomainKind domain, TaskKind task) const;
  const Principle* find(std::string_view id) const;
  std::size_t size() const { return principles_.size(); }
  const std::vector<Principle>& all() const { return principles_; }

 private:
  std::vector<Principle> principles_;
};

struct PreferencePair {
  std::string id;
  std::string instruction;
  std::optional<std::string> context;
  std::string chosen;
  std::string rejected;
  std::string principle_id;
  std::string attribution_rationale;
  std::string perturbation_rationale;
  // Where the positive came from.
  std::string source_pair_id;
  std::string subdomain;

  bool operator==(const PreferencePair&) const = default;
};

void to_json(json& j, const PreferencePair& p);
void from_json(const json& j, PreferencePair& p);

struct LlmOptions {
  std::string model;
  double temperature = 0.7;
  std::uint64_t seed = 0;
  const llm::TemplateStore* templates = nullptr;
};

struct Attribution {
  std::string principle_id;
  std::string rationale;
};

/// Asks which candidate best explains the quality of the pair's response.
/// With one candidate that candidate is returned whatever the model names
/// (the call still supplies the rationale). Throws NoCandidatePrinciples or
/// ParseFailure when the model names an id outside the candidates.
Attribution attribute_principle(const InstructionPair& pair, const std::vector<const Principle*>& candidates,
                                llm::Gateway& gateway, const LlmOptions& options = {});

struct PerturbationLimits {
  double max_edit = 0.5;
  double min_length_ratio = 0.5;
  double max_length_ratio = 2.0;
};

// Reason the rejected text breaks the limits, or nullopt when it passes:
// rejected != chosen, normalized edit distance in (0, max_edit], length
// ratio (code points, rejected / chosen) within bounds.
std::optional<std::string> check_perturbation(std::string_view chosen, std::string_view rejected,
                                              const PerturbationLimits& limits);

/// Asks for a minimally modified, principle-violating rewrite of the
/// response. A rewrite outside the limits gets one re-prompt that states
/// the problem; a second failure throws PerturbationRejected. `variant`
/// distinguishes several negatives drawn for one positive.
PreferencePair synthesize_negative(const InstructionPair& pair, const Principle& principle,
                                   const Attribution& attribution, llm::Gateway& gateway,
                                   const PerturbationLimits& limits = {}, const LlmOptions& options = {},
                                   std::size_t variant = 0);

struct CdpoOptions {
  // Positives per subdomain: the top-scored pairs.
  std::size_t per_subdomain = 500;
  std::size_t negatives_per_positive = 1;
  PerturbationLimits limits;
  LlmOptions llm;
  std::size_t workers = 4;
};

struct Skipped {
  std::string pair_id;
  std::string error;
};

struct CdpoResult {
  std::vector<PreferencePair> pairs;
  std::vector<Skipped> skipped;
  std::size_t positives = 0;
};

// Highest-scoring per_subdomain pairs of every subdomain (ties by id).
std::vector<InstructionPair> select_positives(const std::vector<InstructionPair>& pairs, std::size_t per_subdomain);

/// Positives, attribution and negatives for every scored pair. Items without
/// candidate principles or whose perturbation is rejected are skipped and
/// listed.
CdpoResult run(const std::vector<InstructionPair>& selected, const PrincipleSet& principles,
               llm::Gateway& gateway, const CdpoOptions& options);

// ---------------------------------------------------------------------------
// DPO objective

struct DpoItem {
  double policy_logp_chosen = 0.0;
  double policy_logp_rejected = 0.0;
  double ref_logp_chosen = 0.0;
  double ref_logp_rejected = 0.0;
};

struct DpoGradient {
  double policy_logp_chosen = 0.0;
  double policy_logp_rejected = 0.0;
  double ref_logp_chosen = 0.0;
  double ref_logp_rejected = 0.0;
};

struct DpoResult {
  double loss = 0.0;
  std::vector<DpoGradient> gradients;
};

// softplus(x) = log(1 + e^x), stable for large |x|.
double softplus(double x);

/// Mean over the batch of softplus(-beta * margin), margin =
/// (policy_chosen - ref_chosen) - (policy_rejected - ref_rejected), with
/// exact per-item gradients of the mean. Throws InvalidArgument for an empty
/// batch or beta <= 0, NonFiniteInput for non-finite values.
DpoResult dpo_loss(const std::vector<DpoItem>& batch, double beta);

void to_json(json& j, const DpoItem& d);
void from_json(const json& j, DpoItem& d);
void to_json(json& j, const DpoResult& r);

}  // namespace weaverforge::cdpo
