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

// Command-line front end.
//
//   weaverforge run --config run.toml
//   weaverforge validate --config run.toml
//   weaverforge <stage> [--config run.toml] [--out DIR] [stage overrides]
//   weaverforge dpo-loss --input items.jsonl --beta 0.1
//   weaverforge bench {collect,judge,pairs,elo,serve,export} ...
//   weaverforge synth-corpus --count N --out corpus.jsonl
//
// Exit status: 0 success, 1 runtime failure, 2 invalid configuration or usage.

#include <CLI11.hpp>

#include <csignal>
#include <iostream>
#include <thread>

#include "weaverforge/bench.hpp"
#include "weaverforge/bench_service.hpp"
#include "weaverforge/cdpo.hpp"
#include "weaverforge/error.hpp"
#include "weaverforge/jsonl.hpp"
#include "weaverforge/pipeline.hpp"
#include "weaverforge/rng.hpp"
#include "weaverforge/synthetic.hpp"
#include "weaverforge/text.hpp"

namespace wf = weaverforge;
namespace pl = weaverforge::pipeline;
namespace fs = std::filesystem;
using wf::json;

namespace {

struct Common {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  std::string backend;
  std::string model;
  std::string base_url;
  std::optional<std::uint64_t> mock_seed;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("-c,--config", c.config, "TOML run configuration")->check(CLI::ExistingFile);
  app->add_option("-o,--out", c.out, "Output directory (overrides out_dir)");
  app->add_option("--seed", c.seed, "Run seed");
  app->add_option("--workers", c.workers, "Concurrent workers");
  app->add_option("--backend", c.backend, "mock | openai_compatible")->check(CLI::IsMember({"mock", "openai_compatible"}));
  app->add_option("--model", c.model, "Model name sent to the backend");
  app->add_option("--base-url", c.base_url, "Base URL of an OpenAI-compatible endpoint");
  app->add_option("--mock-seed", c.mock_seed, "Seed of the mock backend");
}

pl::RunConfig base_config(const Common& c) {
  pl::RunConfig cfg;
  if (!c.config.empty()) {
    std::vector<pl::Diagnostic> diags;
    const fs::path path = fs::absolute(c.config);
    cfg = pl::parse_config(wf::io::read_file(path), path.parent_path(), diags);
    if (!diags.empty()) {
      std::string msg = "configuration has " + std::to_string(diags.size()) + " problem(s)";
      for (const auto& d : diags) msg += "\n  " + pl::to_string(d);
      throw wf::Error(wf::ErrorCode::kInvalidConfig, msg);
    }
  } else {
    const fs::path cwd = fs::current_path();
    cfg.out_dir = cwd / cfg.out_dir;
    cfg.backtranslate.exemplars = cwd / cfg.backtranslate.exemplars;
    cfg.cdpo.principles = cwd / cfg.cdpo.principles;
    cfg.funcall.themes = cwd / cfg.funcall.themes;
  }
  if (!c.out.empty()) cfg.out_dir = fs::absolute(c.out);
  if (c.seed) {
    cfg.seed = *c.seed;
    if (!c.mock_seed && c.config.empty()) cfg.backend.mock_seed = *c.seed;
  }
  if (c.workers) cfg.workers = *c.workers;
  if (!c.backend.empty()) cfg.backend.kind = c.backend;
  if (!c.model.empty()) cfg.backend.model = c.model;
  if (!c.base_url.empty()) cfg.backend.base_url = c.base_url;
  if (c.mock_seed) cfg.backend.mock_seed = *c.mock_seed;
  return cfg;
}

void print_outcome(const pl::RunOutcome& r) {
  for (const auto& s : r.manifest.stages) {
    const bool ran = std::find(r.executed.begin(), r.executed.end(), s.name) != r.executed.end();
    std::cout << (ran ? "ran     " : "skipped ") << s.name;
    for (const auto& [k, v] : s.counts) std::cout << "  " << k << "=" << v;
    std::cout << '\n';
  }
  const auto u = r.gateway_usage;
  std::cout << "tokens: prompt=" << u.prompt_tokens << " completion=" << u.completion_tokens << '\n';
}

int run_stages(const pl::RunConfig& cfg, std::vector<std::string> stages) {
  pl::RunConfig c = cfg;
  if (!stages.empty()) c.stages = std::move(stages);
  print_outcome(pl::run(c));
  return 0;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  for (const auto& item : wf::text::split(s, ',')) {
    const auto t = wf::text::trim(item);
    if (!t.empty()) out.emplace_back(t);
  }
  return out;
}

wf::llm::BackendConfig backend_for(const Common& c, std::uint64_t default_seed) {
  wf::llm::BackendConfig b;
  if (!c.backend.empty()) b.kind = c.backend;
  if (!c.base_url.empty()) b.base_url = c.base_url;
  if (!c.model.empty()) b.model = c.model;
  b.mock_seed = c.mock_seed.value_or(default_seed);
  return b;
}

template <typename T>
void write_or_print(const std::string& path, const std::vector<T>& records) {
  if (path.empty() || path == "-") {
    for (const auto& r : records) std::cout << json(r).dump() << '\n';
  } else {
    wf::io::write_jsonl(path, records);
  }
}

wf::bench::BenchService* g_service = nullptr;

void handle_signal(int) {
  if (g_service) g_service->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"WeaverForge: writing-data synthesis and evaluation"};
  app.require_subcommand(1);

  // run / validate
  Common run_opts;
  auto* run = app.add_subcommand("run", "Run the configured stages");
  add_common(run, run_opts);
  std::vector<std::string> run_stages_opt;
  run->add_option("--stages", run_stages_opt, "Subset of stages to run")->delimiter(',');

  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "Check a configuration without running it");
  validate->add_option("-c,--config", validate_path, "TOML run configuration")->required()->check(CLI::ExistingFile);

  // Single stages
  Common ingest_c;
  std::string ingest_input, ingest_mix;
  std::optional<std::size_t> ingest_count;
  std::optional<double> ingest_floor;
  auto* ingest = app.add_subcommand("ingest", "Clean, filter and mix a corpus");
  add_common(ingest, ingest_c);
  ingest->add_option("--input", ingest_input, "JSONL documents (default: synthetic corpus)")->check(CLI::ExistingFile);
  ingest->add_option("--synthetic-count", ingest_count, "Size of the synthetic corpus");
  ingest->add_option("--mix", ingest_mix, "Mix spec, e.g. fiction=1:1,lang=4:1 (\"none\" disables)");
  ingest->add_option("--quality-floor", ingest_floor, "Drop documents scoring below this");

  Common bt_c;
  std::string bt_exemplars;
  std::optional<std::size_t> bt_repeat;
  std::vector<std::string> bt_tasks;
  auto* bt = app.add_subcommand("backtranslate", "Synthesize instruction pairs from the corpus");
  add_common(bt, bt_c);
  bt->add_option("--exemplars", bt_exemplars, "Exemplar directory")->check(CLI::ExistingDirectory);
  bt->add_option("--repeat", bt_repeat, "Spans drawn per document and task");
  bt->add_option("--tasks", bt_tasks, "Task subset")->delimiter(',');

  Common score_c;
  auto* score = app.add_subcommand("score", "Score instruction pairs with the LLM judge");
  add_common(score, score_c);

  Common select_c;
  std::string select_quota, select_tie;
  auto* select = app.add_subcommand("select", "Keep the top pairs of every bucket");
  add_common(select, select_c);
  select->add_option("--quota", select_quota, "Count (\"300\") or fraction (\"0.4\")");
  select->add_option("--tie-break", select_tie, "by_id | by_total_then_id");

  Common cdpo_c;
  std::string cdpo_principles;
  std::optional<std::size_t> cdpo_per_sub, cdpo_neg;
  auto* cdpo = app.add_subcommand("cdpo", "Build principle-grounded preference pairs");
  add_common(cdpo, cdpo_c);
  cdpo->add_option("--principles", cdpo_principles, "Principle directory")->check(CLI::ExistingDirectory);
  cdpo->add_option("--per-subdomain", cdpo_per_sub, "Positives per subdomain");
  cdpo->add_option("--negatives", cdpo_neg, "Negatives per positive");

  Common rag_c;
  std::optional<double> rag_fraction;
  auto* rag = app.add_subcommand("rag-augment", "Attach retrieved reference passages");
  add_common(rag, rag_c);
  rag->add_option("--fraction", rag_fraction, "Share of pairs to augment")->check(CLI::Range(0.0, 1.0));

  Common fc_c;
  std::string fc_themes;
  std::optional<std::size_t> fc_per_env;
  auto* fc = app.add_subcommand("funcall", "Synthesize function-calling samples");
  add_common(fc, fc_c);
  fc->add_option("--themes", fc_themes, "Theme list, one per line")->check(CLI::ExistingFile);
  fc->add_option("--per-env", fc_per_env, "Samples per environment");

  // DPO objective
  std::string dpo_input;
  double dpo_beta = 0.1;
  auto* dpo = app.add_subcommand("dpo-loss", "Evaluate the DPO loss and gradients for a batch");
  dpo->add_option("--input", dpo_input, "JSONL of policy/ref log-probabilities")->required()->check(CLI::ExistingFile);
  dpo->add_option("--beta", dpo_beta, "Inverse temperature");

  // Synthetic corpus
  std::size_t sc_count = 200;
  std::uint64_t sc_seed = 42;
  double sc_noise = 0.0;
  std::string sc_out;
  auto* sc = app.add_subcommand("synth-corpus", "Write a deterministic synthetic corpus");
  sc->add_option("--count", sc_count, "Documents");
  sc->add_option("--seed", sc_seed, "Seed");
  sc->add_option("--noise", sc_noise, "Share of filter bait")->check(CLI::Range(0.0, 1.0));
  sc->add_option("-o,--out", sc_out, "Output JSONL (stdout when omitted)");

  // Evaluation
  auto* bench = app.add_subcommand("bench", "Writing benchmark tools");
  bench->require_subcommand(1);

  Common collect_c;
  std::string collect_ins, collect_models, collect_out;
  std::uint64_t bench_seed = 0;
  auto* collect = bench->add_subcommand("collect", "Collect one response per instruction and model");
  add_common(collect, collect_c);
  collect->add_option("--instructions", collect_ins, "Instruction JSONL")->required()->check(CLI::ExistingFile);
  collect->add_option("--models", collect_models, "Comma-separated model names")->required();
  collect->add_option("--output", collect_out, "Responses JSONL");

  Common judge_c;
  std::string judge_ins, judge_outputs, judge_out;
  auto* judge = bench->add_subcommand("judge", "Score responses with the judge model");
  add_common(judge, judge_c);
  judge->add_option("--instructions", judge_ins, "Instruction JSONL")->required()->check(CLI::ExistingFile);
  judge->add_option("--responses", judge_outputs, "Responses JSONL")->required()->check(CLI::ExistingFile);
  judge->add_option("--output", judge_out, "Judged JSONL");

  std::string pairs_ins, pairs_outputs, pairs_out;
  std::uint64_t pairs_seed = 0;
  auto* pairs = bench->add_subcommand("pairs", "Build the blind comparison queue");
  pairs->add_option("--instructions", pairs_ins, "Instruction JSONL")->required()->check(CLI::ExistingFile);
  pairs->add_option("--responses", pairs_outputs, "Responses JSONL")->required()->check(CLI::ExistingFile);
  pairs->add_option("--seed", pairs_seed, "Seed for A/B placement");
  pairs->add_option("--output", pairs_out, "Pairs JSONL");

  std::string elo_records, elo_dim;
  wf::bench::EloParams elo_params;
  auto* elo = bench->add_subcommand("elo", "Elo leaderboards from comparison records");
  elo->add_option("--records", elo_records, "ComparisonRecord JSONL")->required()->check(CLI::ExistingFile);
  elo->add_option("--dimension", elo_dim, "Only this dimension");
  elo->add_option("--initial", elo_params.initial, "Initial rating");
  elo->add_option("--k-factor", elo_params.k_factor, "K factor");

  std::string serve_pairs, serve_log, serve_host = "127.0.0.1", serve_static;
  int serve_port = 8080;
  auto* serve = bench->add_subcommand("serve", "Serve the annotation API");
  serve->add_option("--pairs", serve_pairs, "Pairs JSONL")->required()->check(CLI::ExistingFile);
  serve->add_option("--verdicts", serve_log, "Append-only verdict log")->required();
  serve->add_option("--host", serve_host, "Bind address");
  serve->add_option("--port", serve_port, "Port (0 picks one)");
  serve->add_option("--static", serve_static, "Directory of UI assets")->check(CLI::ExistingDirectory);

  std::string ex_ins, ex_outputs, ex_judged, ex_cmp, ex_out;
  auto* ex = bench->add_subcommand("export", "Emit evaluator training samples");
  ex->add_option("--instructions", ex_ins, "Instruction JSONL")->required()->check(CLI::ExistingFile);
  ex->add_option("--responses", ex_outputs, "Responses JSONL")->required()->check(CLI::ExistingFile);
  ex->add_option("--judged", ex_judged, "Judged JSONL")->check(CLI::ExistingFile);
  ex->add_option("--comparisons", ex_cmp, "ComparisonRecord JSONL")->check(CLI::ExistingFile);
  ex->add_option("--output", ex_out, "Training sample JSONL");

  for (auto* sub : {collect, judge}) sub->add_option("--bench-seed", bench_seed, "Sampling seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return run_stages(base_config(run_opts), run_stages_opt);

    if (*validate) {
      std::vector<pl::Diagnostic> diags;
      const fs::path path = fs::absolute(validate_path);
      const auto cfg = pl::parse_config(wf::io::read_file(path), path.parent_path(), diags);
      const auto more = pl::validate(cfg);
      diags.insert(diags.end(), more.begin(), more.end());
      for (const auto& d : diags) std::cerr << pl::to_string(d) << '\n';
      if (!diags.empty()) return 2;
      std::cout << "ok " << pl::config_hash(cfg) << '\n';
      return 0;
    }

    if (*ingest) {
      auto cfg = base_config(ingest_c);
      if (!ingest_input.empty()) cfg.ingest.input = fs::absolute(ingest_input);
      if (ingest_count) cfg.ingest.synthetic_count = *ingest_count;
      if (!ingest_mix.empty()) cfg.ingest.mix = ingest_mix == "none" ? "" : ingest_mix;
      if (ingest_floor) cfg.ingest.quality_floor = *ingest_floor;
      return run_stages(cfg, {"ingest"});
    }
    if (*bt) {
      auto cfg = base_config(bt_c);
      if (!bt_exemplars.empty()) cfg.backtranslate.exemplars = fs::absolute(bt_exemplars);
      if (bt_repeat) cfg.backtranslate.repeat = *bt_repeat;
      if (!bt_tasks.empty()) {
        cfg.backtranslate.tasks.clear();
        for (const auto& t : bt_tasks) cfg.backtranslate.tasks.push_back(wf::parse_task(t));
      }
      return run_stages(cfg, {"backtranslate"});
    }
    if (*score) return run_stages(base_config(score_c), {"score"});
    if (*select) {
      auto cfg = base_config(select_c);
      if (!select_quota.empty()) cfg.select.quota = select_quota;
      if (!select_tie.empty()) cfg.select.tie_break = select_tie;
      return run_stages(cfg, {"select"});
    }
    if (*cdpo) {
      auto cfg = base_config(cdpo_c);
      if (!cdpo_principles.empty()) cfg.cdpo.principles = fs::absolute(cdpo_principles);
      if (cdpo_per_sub) cfg.cdpo.per_subdomain = *cdpo_per_sub;
      if (cdpo_neg) cfg.cdpo.negatives_per_positive = *cdpo_neg;
      return run_stages(cfg, {"cdpo"});
    }
    if (*rag) {
      auto cfg = base_config(rag_c);
      if (rag_fraction) cfg.rag.fraction = *rag_fraction;
      return run_stages(cfg, {"rag-augment"});
    }
    if (*fc) {
      auto cfg = base_config(fc_c);
      if (!fc_themes.empty()) cfg.funcall.themes = fs::absolute(fc_themes);
      if (fc_per_env) cfg.funcall.per_env = *fc_per_env;
      return run_stages(cfg, {"funcall"});
    }

    if (*dpo) {
      const auto items = wf::io::read_jsonl<wf::cdpo::DpoItem>(dpo_input);
      std::cout << json(wf::cdpo::dpo_loss(items, dpo_beta)).dump(2) << '\n';
      return 0;
    }

    if (*sc) {
      wf::corpus::SyntheticCorpusOptions o;
      o.count = sc_count;
      o.seed = sc_seed;
      o.noise_share = sc_noise;
      write_or_print(sc_out, wf::corpus::synthetic_corpus(o));
      return 0;
    }

    if (*collect) {
      const auto instructions = wf::bench::load_instructions(collect_ins);
      std::vector<wf::bench::ModelHandle> models;
      for (const auto& name : split_list(collect_models)) {
        // Each mock model gets its own seed so that outputs differ.
        auto b = backend_for(collect_c, wf::derive_seed(bench_seed, name));
        b.model = name;
        models.push_back({name, wf::llm::make_gateway(b), name});
      }
      wf::bench::BenchOptions o;
      o.seed = bench_seed;
      if (collect_c.workers) o.workers = *collect_c.workers;
      const auto r = wf::bench::collect_outputs(instructions, models, o);
      write_or_print(collect_out, r.responses);
      for (const auto& f : r.failures) std::cerr << "failed " << json(f).dump() << '\n';
      return r.failures.empty() ? 0 : 1;
    }
    if (*judge) {
      const auto instructions = wf::bench::load_instructions(judge_ins);
      const auto outputs = wf::io::read_jsonl<wf::bench::ModelOutput>(judge_outputs);
      auto gw = wf::llm::make_gateway(backend_for(judge_c, bench_seed));
      wf::bench::BenchOptions o;
      o.seed = bench_seed;
      if (judge_c.workers) o.workers = *judge_c.workers;
      const auto r = wf::bench::judge_all(instructions, outputs, *gw, o);
      write_or_print(judge_out, r.judged);
      for (const auto& s : wf::bench::summarize(r.judged)) {
        std::cerr << s.model << "  style=" << wf::bench::format_score(s.mean.style)
                  << " relevance=" << wf::bench::format_score(s.mean.relevance)
                  << " creativity=" << wf::bench::format_score(s.mean.creativity)
                  << " overall=" << wf::bench::format_score(s.mean.overall()) << '\n';
      }
      for (const auto& f : r.failures) std::cerr << "failed " << json(f).dump() << '\n';
      return r.failures.empty() ? 0 : 1;
    }
    if (*pairs) {
      const auto instructions = wf::bench::load_instructions(pairs_ins);
      const auto outputs = wf::io::read_jsonl<wf::bench::ModelOutput>(pairs_outputs);
      write_or_print(pairs_out, wf::bench::make_comparison_pairs(instructions, outputs, pairs_seed));
      return 0;
    }
    if (*elo) {
      const auto records = wf::io::read_jsonl<wf::bench::ComparisonRecord>(elo_records);
      const auto boards = wf::bench::elo_rank(records, elo_params);
      json out = json::object();
      for (const auto& [dim, rows] : boards) {
        if (!elo_dim.empty() && wf::bench::parse_dimension(elo_dim) != dim) continue;
        out[std::string(wf::bench::to_string(dim))] = rows;
      }
      std::cout << out.dump(2) << '\n';
      return 0;
    }
    if (*serve) {
      wf::bench::ServiceOptions o;
      o.verdict_log = serve_log;
      if (!serve_static.empty()) o.static_dir = fs::path(serve_static);
      wf::bench::BenchService service(wf::io::read_jsonl<wf::bench::ComparisonPair>(serve_pairs), o);
      const int port = service.bind(serve_host, serve_port);
      g_service = &service;
      std::signal(SIGINT, handle_signal);
      std::signal(SIGTERM, handle_signal);
      std::cout << "listening on http://" << serve_host << ":" << port << std::endl;
      service.listen_after_bind();
      g_service = nullptr;
      return 0;
    }
    if (*ex) {
      const auto instructions = wf::bench::load_instructions(ex_ins);
      const auto outputs = wf::io::read_jsonl<wf::bench::ModelOutput>(ex_outputs);
      std::vector<wf::bench::JudgedItem> judged;
      std::vector<wf::bench::ComparisonRecord> cmps;
      if (!ex_judged.empty()) judged = wf::io::read_jsonl<wf::bench::JudgedItem>(ex_judged);
      if (!ex_cmp.empty()) cmps = wf::io::read_jsonl<wf::bench::ComparisonRecord>(ex_cmp);
      write_or_print(ex_out, wf::bench::export_eval_training_samples(instructions, outputs, judged, cmps));
      return 0;
    }
  } catch (const wf::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.code() == wf::ErrorCode::kInvalidConfig ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
