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
#include <vector>

#include <json.hpp>

#include "weaverforge/bench.hpp"
#include "weaverforge/corpus.hpp"
#include "weaverforge/llm.hpp"
#include "weaverforge/quality.hpp"

namespace weaverforge::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

// Canonical stage order. A run executes the configured subset in this order.
inline const std::vector<std::string>& stage_order() {
  static const std::vector<std::string> kOrder = {"ingest", "backtranslate", "score",  "select",
                                                  "cdpo",   "rag-augment",   "funcall"};
  return kOrder;
}

struct IngestParams {
  // JSONL corpus; when unset a synthetic corpus of synthetic_count docs is used.
  std::optional<fs::path> input;
  std::size_t synthetic_count = 200;
  corpus::RuleSet rules;
  bool near_dedup = true;
  std::size_t shingle_size = 13;
  double jaccard_threshold = 0.8;
  double quality_floor = 0.0;
  // "fiction=1:1,lang=4:1"; empty disables mixing.
  std::string mix = "fiction=1:1,lang=4:1";
  double mix_tolerance = 0.02;
  // 0 takes the largest feasible target.
  std::size_t mix_target = 0;
};

struct BacktranslateParams {
  fs::path exemplars = "data/exemplars";
  std::vector<TaskKind> tasks{kAllTasks.begin(), kAllTasks.end()};
  std::size_t repeat = 1;
  double temperature = 0.7;
};

struct ScoreParams {
  double temperature = 0.0;
};

struct SelectParams {
  std::string quota = "0.4";
  std::string tie_break = "by_id";
};

struct CdpoParams {
  fs::path principles = "data/principles";
  std::size_t per_subdomain = 500;
  std::size_t negatives_per_positive = 1;
  double max_edit = 0.5;
  double temperature = 0.7;
  // Recorded for the DPO trainer; the synthesis itself does not use it.
  double beta = 0.1;
};

struct RagParams {
  double fraction = 0.10;
  std::size_t max_chunk_chars = 800;
  std::size_t dimension = 256;
};

struct FuncallParams {
  fs::path themes = "data/themes.txt";
  std::size_t per_env = 5;
  double temperature = 0.7;
};

struct RunConfig {
  std::uint64_t seed = 42;
  fs::path out_dir = "out";
  std::size_t workers = 4;
  std::optional<fs::path> templates_dir;
  std::vector<std::string> stages = stage_order();
  llm::BackendConfig backend;
  IngestParams ingest;
  BacktranslateParams backtranslate;
  ScoreParams score;
  SelectParams select;
  CdpoParams cdpo;
  RagParams rag;
  FuncallParams funcall;
  bench::EloParams elo;
};

struct Diagnostic {
  std::string key;
  std::string message;

  bool operator==(const Diagnostic&) const = default;
};

std::string to_string(const Diagnostic& d);

/// Parses TOML. Relative paths are resolved against base_dir. Type errors
/// and unknown keys are appended to `diagnostics`; the returned config
/// keeps defaults for those keys.
RunConfig parse_config(std::string_view toml_text, const fs::path& base_dir, std::vector<Diagnostic>& diagnostics);

/// Semantic checks: stage names and prerequisites, paths that must exist,
/// ratio and quota syntax, numeric ranges. Each diagnostic names its key.
std::vector<Diagnostic> validate(const RunConfig& config);

/// parse_config + validate on a file. Throws InvalidConfig listing every
/// diagnostic.
RunConfig load_config(const fs::path& path);

// Canonical JSON of the config, without out_dir.
json config_json(const RunConfig& config);
std::string config_hash(const RunConfig& config);

struct StageRecord {
  std::string name;
  std::string params_hash;
  std::map<std::string, std::string> inputs;
  std::map<std::string, std::string> outputs;
  std::map<std::string, std::uint64_t> counts;
  llm::Usage usage;
  std::uint64_t backend_calls = 0;
};

struct RunManifest {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::vector<StageRecord> stages;

  llm::Usage usage_total() const;
  const StageRecord* find(std::string_view stage) const;
};

void to_json(json& j, const StageRecord& s);
void from_json(const json& j, StageRecord& s);
void to_json(json& j, const RunManifest& m);
void from_json(const json& j, RunManifest& m);

inline constexpr const char* kManifestFile = "manifest.json";
// Wall-clock seconds per stage live beside the manifest so that the
// manifest itself stays reproducible.
inline constexpr const char* kTimingsFile = "timings.json";

struct RunOutcome {
  RunManifest manifest;
  std::vector<std::string> executed;
  std::vector<std::string> skipped;
  // Gateway accounting for this invocation.
  llm::Usage gateway_usage;
};

/// Validates, then runs the configured stages in canonical order. A stage
/// whose params and input hashes match the previous manifest and whose
/// outputs are intact is skipped. The manifest is rewritten atomically after
/// every stage. A failing stage throws StageFailed; earlier outputs and the
/// manifest up to that point remain.
RunOutcome run(const RunConfig& config);

// Same, with a caller-provided gateway (tests inject recording backends).
RunOutcome run(const RunConfig& config, llm::Gateway& gateway);

}  // namespace weaverforge::pipeline
