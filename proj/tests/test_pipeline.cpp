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

#include <gtest/gtest.h>

#include <fstream>

#include "test_util.hpp"
#include "weaverforge/cdpo.hpp"
#include "weaverforge/error.hpp"
#include "weaverforge/funcall.hpp"
#include "weaverforge/jsonl.hpp"
#include "weaverforge/pipeline.hpp"
#include "weaverforge/rag.hpp"

namespace wf = weaverforge;
namespace pl = weaverforge::pipeline;
using wf::json;

namespace {

std::vector<pl::Diagnostic> diagnose(const std::string& toml, const std::filesystem::path& base) {
  std::vector<pl::Diagnostic> d;
  auto cfg = pl::parse_config(toml, base, d);
  auto more = pl::validate(cfg);
  d.insert(d.end(), more.begin(), more.end());
  return d;
}

bool has_key(const std::vector<pl::Diagnostic>& ds, const std::string& key, const std::string& fragment = "") {
  for (const auto& d : ds) {
    if (d.key == key && d.message.find(fragment) != std::string::npos) return true;
  }
  return false;
}

// Small end-to-end configuration over the shipped fixtures.
pl::RunConfig toy_config(const std::filesystem::path& out, std::size_t docs = 24) {
  const auto src = wf_test::source_dir();
  pl::RunConfig c;
  c.seed = 42;
  c.out_dir = out;
  c.ingest.synthetic_count = docs;
  c.ingest.mix = "";
  c.backtranslate.exemplars = src / "data" / "exemplars";
  c.cdpo.principles = src / "data" / "principles";
  c.funcall.themes = src / "data" / "themes.txt";
  c.funcall.per_env = 2;
  return c;
}

std::string manifest_text(const std::filesystem::path& out) {
  return wf::io::read_file(out / pl::kManifestFile);
}

}  // namespace

TEST(Config, EmptyFileGivesDefaults) {
  std::vector<pl::Diagnostic> d;
  auto c = pl::parse_config("", "/base", d);
  EXPECT_TRUE(d.empty());
  EXPECT_EQ(c.seed, 42u);
  EXPECT_EQ(c.stages, pl::stage_order());
  EXPECT_EQ(c.select.quota, "0.4");
  EXPECT_EQ(c.cdpo.per_subdomain, 500u);
  EXPECT_DOUBLE_EQ(c.rag.fraction, 0.10);
  EXPECT_DOUBLE_EQ(c.cdpo.beta, 0.1);
  EXPECT_DOUBLE_EQ(c.elo.initial, 1500.0);
  EXPECT_DOUBLE_EQ(c.elo.k_factor, 32.0);
  EXPECT_EQ(c.ingest.mix, "fiction=1:1,lang=4:1");
  EXPECT_EQ(c.out_dir, std::filesystem::path("/base/out"));
}

TEST(Config, ParsesEverySection) {
  const std::string toml = R"(
seed = 9
out_dir = "run1"
workers = 2
stages = ["ingest", "backtranslate"]

[backend]
kind = "mock"
model = "m"
mock_seed = 5

[limits]
max_in_flight = 3
max_retries = 1
token_budget = 100000

[ingest]
synthetic_count = 50
mix = "fiction=1:1,lang=3:1"
quality_floor = 0.2

[ingest.rules]
min_chars = 80

[backtranslate]
tasks = ["ContentWriting", "Outlining"]
repeat = 2

[select]
quota = "300"
tie_break = "by_total_then_id"

[cdpo]
per_subdomain = 10
beta = 0.2

[rag]
fraction = 0.25

[funcall]
per_env = 3

[elo]
initial = 1000
k_factor = 16
)";
  std::vector<pl::Diagnostic> d;
  auto c = pl::parse_config(toml, "/b", d);
  EXPECT_TRUE(d.empty()) << (d.empty() ? "" : pl::to_string(d[0]));
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.out_dir, std::filesystem::path("/b/run1"));
  EXPECT_EQ(c.workers, 2u);
  EXPECT_EQ(c.stages, (std::vector<std::string>{"ingest", "backtranslate"}));
  EXPECT_EQ(c.backend.model, "m");
  EXPECT_EQ(c.backend.mock_seed, 5u);
  EXPECT_EQ(c.backend.limits.max_in_flight, 3u);
  EXPECT_EQ(c.backend.limits.token_budget, 100000u);
  EXPECT_EQ(c.ingest.synthetic_count, 50u);
  EXPECT_EQ(c.ingest.rules.min_chars, 80u);
  EXPECT_DOUBLE_EQ(c.ingest.quality_floor, 0.2);
  EXPECT_EQ(c.backtranslate.tasks, (std::vector{wf::TaskKind::kContentWriting, wf::TaskKind::kOutlining}));
  EXPECT_EQ(c.backtranslate.repeat, 2u);
  EXPECT_EQ(c.select.quota, "300");
  EXPECT_EQ(c.cdpo.per_subdomain, 10u);
  EXPECT_DOUBLE_EQ(c.rag.fraction, 0.25);
  EXPECT_EQ(c.funcall.per_env, 3u);
  EXPECT_DOUBLE_EQ(c.elo.k_factor, 16.0);
}

TEST(Config, ShippedDiagnosticFixtures) {
  const auto dir = wf_test::source_dir() / "tests" / "fixtures" / "config";
  struct Case {
    const char* file;
    const char* key;
    const char* fragment;
  };
  for (const auto& c : {Case{"missing_path.toml", "cdpo.principles", "does not exist"},
                        Case{"bad_ratio.toml", "ingest.mix", "ratio"},
                        Case{"unknown_stage.toml", "stages", "unknown stage 'tokenize'"}}) {
    try {
      pl::load_config(dir / c.file);
      ADD_FAILURE() << c.file;
    } catch (const wf::Error& e) {
      EXPECT_EQ(e.code(), wf::ErrorCode::kInvalidConfig);
      EXPECT_NE(std::string(e.what()).find(c.key), std::string::npos) << c.file << ": " << e.what();
      EXPECT_NE(std::string(e.what()).find(c.fragment), std::string::npos) << c.file << ": " << e.what();
    }
  }
}

TEST(Config, DiagnosticsNameTheirKeys) {
  wf_test::TempDir dir;
  auto d = diagnose(R"(
seed = "abc"
stages = ["ingest", "ingest"]
colour = 3
[select]
quota = "-5"
tie_break = "random"
[rag]
fraction = 1.5
[cdpo]
beta = 0
[elo]
k_factor = -1
[backtranslate]
tasks = ["Dancing"]
)",
                    dir.path());
  EXPECT_TRUE(has_key(d, "seed"));
  EXPECT_TRUE(has_key(d, "stages", "more than once"));
  EXPECT_TRUE(has_key(d, "colour", "unknown key"));
  EXPECT_TRUE(has_key(d, "select.quota"));
  EXPECT_TRUE(has_key(d, "select.tie_break"));
  EXPECT_TRUE(has_key(d, "rag.fraction"));
  EXPECT_TRUE(has_key(d, "cdpo.beta"));
  EXPECT_TRUE(has_key(d, "elo.k_factor"));
  EXPECT_TRUE(has_key(d, "backtranslate.tasks"));
}

TEST(Config, StagePrerequisites) {
  wf_test::TempDir dir;
  auto d = diagnose("stages = [\"cdpo\"]\n", dir.path());
  EXPECT_TRUE(has_key(d, "stages", "select"));
  // Satisfied by an earlier run's output.
  std::filesystem::create_directories(dir / "out");
  std::ofstream(dir / "out" / "selected.jsonl") << "";
  const std::string toml = "stages = [\"cdpo\"]\n[cdpo]\nprinciples = \"" +
                           (wf_test::source_dir() / "data" / "principles").string() + "\"\n";
  EXPECT_TRUE(diagnose(toml, dir.path()).empty());
}

TEST(Config, HashIgnoresOutDir) {
  pl::RunConfig a, b;
  b.out_dir = "/elsewhere";
  EXPECT_EQ(pl::config_hash(a), pl::config_hash(b));
  b.seed = 1;
  EXPECT_NE(pl::config_hash(a), pl::config_hash(b));
}

TEST(Pipeline, InvalidConfigStopsBeforeAnyWork) {
  wf_test::TempDir dir;
  auto c = toy_config(dir / "out");
  c.select.quota = "-3";
  try {
    pl::run(c);
    FAIL();
  } catch (const wf::Error& e) {
    EXPECT_EQ(e.code(), wf::ErrorCode::kInvalidConfig);
  }
  EXPECT_FALSE(std::filesystem::exists(dir / "out"));
}

TEST(Pipeline, ToyRunIsReproducible) {
  wf_test::TempDir dir;
  auto first = pl::run(toy_config(dir / "a"));
  auto second = pl::run(toy_config(dir / "b"));
  EXPECT_EQ(first.executed, pl::stage_order());
  EXPECT_EQ(manifest_text(dir / "a"), manifest_text(dir / "b"));
  EXPECT_EQ(manifest_text(dir / "a").find("wall"), std::string::npos);
  EXPECT_TRUE(std::filesystem::exists(dir / "a" / pl::kTimingsFile));
  for (const auto& f : {"pairs.jsonl", "selected.jsonl", "preference_pairs.jsonl", "rag_augmented.jsonl",
                        "funcall_samples.jsonl"}) {
    EXPECT_EQ(wf::io::read_file(dir / "a" / f), wf::io::read_file(dir / "b" / f)) << f;
  }

  const auto& m = first.manifest;
  ASSERT_EQ(m.stages.size(), pl::stage_order().size());
  EXPECT_EQ(m.usage_total(), first.gateway_usage);
  EXPECT_GT(m.find("backtranslate")->counts.at("pairs"), 0u);
  EXPECT_GT(m.find("cdpo")->counts.at("preference_pairs"), 0u);
  EXPECT_EQ(m.find("rag-augment")->counts.at("augmented"),
            wf::rag::augment_count(m.find("select")->counts.at("selected"), 0.10));

  for (const auto& p : wf::io::read_jsonl<wf::cdpo::PreferencePair>(dir / "a" / "preference_pairs.jsonl")) {
    EXPECT_FALSE(wf::cdpo::check_perturbation(p.chosen, p.rejected, {}).has_value()) << p.id;
  }
}

TEST(Pipeline, ResumeSkipsUnchangedStages) {
  wf_test::TempDir dir;
  const auto out = dir / "run";
  pl::run(toy_config(out));
  const std::string before = manifest_text(out);

  auto again = pl::run(toy_config(out));
  EXPECT_TRUE(again.executed.empty());
  EXPECT_EQ(again.skipped, pl::stage_order());
  EXPECT_EQ(again.gateway_usage.total(), 0u);
  EXPECT_EQ(manifest_text(out), before);

  std::filesystem::remove(out / "selected.jsonl");
  auto partial = pl::run(toy_config(out));
  EXPECT_EQ(partial.executed, (std::vector<std::string>{"select"}));
  EXPECT_EQ(manifest_text(out), before);

  auto changed = toy_config(out);
  changed.select.quota = "0.5";
  auto r = pl::run(changed);
  EXPECT_EQ(r.executed, (std::vector<std::string>{"select", "cdpo", "rag-augment"}));
}

TEST(Pipeline, StageFailureKeepsCompletedOutputs) {
  wf_test::TempDir dir;
  std::filesystem::create_directories(dir / "empty_exemplars");
  auto c = toy_config(dir / "out");
  c.backtranslate.exemplars = dir / "empty_exemplars";
  try {
    pl::run(c);
    FAIL();
  } catch (const wf::Error& e) {
    EXPECT_EQ(e.code(), wf::ErrorCode::kStageFailed);
    EXPECT_NE(std::string(e.what()).find("backtranslate"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("MissingExemplars"), std::string::npos);
  }
  EXPECT_TRUE(std::filesystem::exists(dir / "out" / "corpus.jsonl"));
  const auto m = json::parse(manifest_text(dir / "out")).get<pl::RunManifest>();
  ASSERT_EQ(m.stages.size(), 1u);
  EXPECT_EQ(m.stages[0].name, "ingest");
}

TEST(Pipeline, FuncallOutputsValidate) {
  wf_test::TempDir dir;
  auto c = toy_config(dir / "out");
  c.stages = {"funcall"};
  pl::run(c);
  const auto envs = wf::io::read_jsonl<wf::funcall::ToolEnvironment>(dir / "out" / "funcall_environments.jsonl");
  const auto samples = wf::io::read_jsonl<wf::funcall::FunctionCallSample>(dir / "out" / "funcall_samples.jsonl");
  ASSERT_FALSE(samples.empty());
  std::map<std::string, const wf::funcall::ToolEnvironment*> by_id;
  for (const auto& e : envs) by_id[e.id] = &e;
  for (const auto& s : samples) {
    const auto* tool = by_id.at(s.environment_id)->find(s.gold_call.tool_name);
    ASSERT_NE(tool, nullptr);
    EXPECT_TRUE(wf::funcall::validate_call(s.gold_call, *tool).empty());
  }
  EXPECT_EQ(wf::io::read_jsonl_values(dir / "out" / "funcall_openai.jsonl").size(), samples.size());
}
