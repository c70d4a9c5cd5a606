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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails. Everything runs offline on the mock
// backend.

#include <unistd.h>

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "weaverforge/bench.hpp"
#include "weaverforge/cdpo.hpp"
#include "weaverforge/corpus.hpp"
#include "weaverforge/error.hpp"
#include "weaverforge/funcall.hpp"
#include "weaverforge/jsonl.hpp"
#include "weaverforge/pipeline.hpp"
#include "weaverforge/rag.hpp"
#include "weaverforge/rng.hpp"
#include "weaverforge/synthetic.hpp"
#include "weaverforge/text.hpp"

namespace wf = weaverforge;
namespace fs = std::filesystem;
using wf::json;

namespace {

const fs::path kSource = WF_SOURCE_DIR;

// Thrown by check() with the first broken expectation.
struct Failed {
  std::string why;
};

void check(bool ok, const std::string& why) {
  if (!ok) throw Failed{why};
}

template <typename T>
std::string str(const T& v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

int g_failures = 0;

void criterion(const std::string& name, double budget_seconds, const std::function<void()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  std::string failure;
  try {
    body();
  } catch (const Failed& f) {
    failure = f.why;
  } catch (const std::exception& e) {
    failure = std::string("exception: ") + e.what();
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (failure.empty() && secs > budget_seconds) {
    failure = "took " + str(secs) + " s, budget " + str(budget_seconds) + " s";
  }
  std::cout << (failure.empty() ? "PASS " : "FAIL ") << name << " (" << std::fixed;
  std::cout.precision(2);
  std::cout << secs << " s)" << std::defaultfloat;
  if (!failure.empty()) std::cout << ": " << failure;
  std::cout << std::endl;
  if (!failure.empty()) ++g_failures;
}

class ScratchDir {
 public:
  ScratchDir() {
    path_ = fs::temp_directory_path() / ("wf_accept_" + std::to_string(::getpid()));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~ScratchDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

// ---------------------------------------------------------------------------

void judge_table() {
  const json rows = json::parse(wf::io::read_file(kSource / "tests" / "fixtures" / "judge_table.json"));
  check(rows.size() == 18, "expected 18 rows, got " + str(rows.size()));
  for (const auto& r : rows) {
    const wf::bench::JudgeScore s{r.at("style").get<double>(), r.at("relevance").get<double>(),
                                  r.at("creativity").get<double>()};
    const double printed = r.at("overall").get<double>();
    check(std::abs(s.overall() - printed) <= 0.005 + 1e-12,
          r.at("model").get<std::string>() + ": recomputed " + str(s.overall()) + " vs " + str(printed));
  }
}

void dpo_kernel() {
  using wf::cdpo::DpoItem;
  const auto zero = wf::cdpo::dpo_loss({{-3, -7, -3, -7}, {-10, -2, -10, -2}}, 0.1);
  check(std::abs(zero.loss - std::log(2.0)) < 1e-12, "zero-margin loss " + str(zero.loss));

  wf::SplitMix64 rng(20240601);
  const double h = 1e-5, beta = 0.1;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<DpoItem> batch(1 + rng.below(16));
    for (auto& it : batch) {
      it.ref_logp_chosen = -5 - 55 * rng.unit();
      it.ref_logp_rejected = -5 - 55 * rng.unit();
      it.policy_logp_chosen = it.ref_logp_chosen + 10 * rng.unit() - 5;
      it.policy_logp_rejected = it.ref_logp_rejected + 10 * rng.unit() - 5;
    }
    const auto r = wf::cdpo::dpo_loss(batch, beta);
    for (std::size_t i = 0; i < batch.size(); ++i) {
      double* fields[4] = {&batch[i].policy_logp_chosen, &batch[i].policy_logp_rejected, &batch[i].ref_logp_chosen,
                           &batch[i].ref_logp_rejected};
      const double analytic[4] = {r.gradients[i].policy_logp_chosen, r.gradients[i].policy_logp_rejected,
                                  r.gradients[i].ref_logp_chosen, r.gradients[i].ref_logp_rejected};
      for (int k = 0; k < 4; ++k) {
        const double x = *fields[k];
        *fields[k] = x + h;
        const double up = wf::cdpo::dpo_loss(batch, beta).loss;
        *fields[k] = x - h;
        const double down = wf::cdpo::dpo_loss(batch, beta).loss;
        *fields[k] = x;
        const double numeric = (up - down) / (2 * h);
        const double rel = std::abs(analytic[k] - numeric) / std::max(std::abs(analytic[k]), 1e-300);
        check(rel < 1e-6, "trial " + str(trial) + " item " + str(i) + " input " + str(k) + ": relative error " +
                              str(rel));
      }
    }
  }
}

wf::bench::ComparisonRecord record(std::size_t n, const std::string& a, const std::string& b, wf::bench::Verdict v) {
  wf::bench::ComparisonRecord r;
  r.id = "r" + std::to_string(n);
  r.instruction_id = "i";
  r.model_a = a;
  r.model_b = b;
  r.verdict = v;
  r.annotator = "x";
  r.timestamp = n;
  return r;
}

void elo_suite() {
  wf::SplitMix64 rng(99);
  for (int i = 0; i < 1000; ++i) {
    const double a = 600 + 1800 * rng.unit(), b = 600 + 1800 * rng.unit();
    const double sum = wf::bench::elo_expected(a, b) + wf::bench::elo_expected(b, a);
    check(std::abs(sum - 1.0) < 1e-12, "E(a,b)+E(b,a) = " + str(sum));
  }

  const double e = wf::bench::elo_expected(1500, 1700);
  check(std::abs(e - 0.240253) < 1e-6, "E(1500,1700) = " + str(e));

  const std::vector<std::string> models = {"m1", "m2", "m3", "m4", "m5", "m6"};
  wf::bench::EloTable t;
  for (const auto& m : models) t.ratings[m] = t.params.initial;
  const double total = t.params.initial * models.size();
  for (std::size_t n = 0; n < 5000; ++n) {
    const auto x = rng.below(models.size());
    const auto y = (x + 1 + rng.below(models.size() - 1)) % models.size();
    wf::bench::elo_apply(t, record(n, models[x], models[y], static_cast<wf::bench::Verdict>(rng.below(3))));
    double sum = 0;
    for (const auto& [m, r] : t.ratings) sum += r;
    check(std::abs(sum - total) < 1e-6, "rating sum drifted to " + str(sum) + " after update " + str(n));
  }

  const auto dir = kSource / "tests" / "fixtures";
  const auto records = wf::io::read_jsonl<wf::bench::ComparisonRecord>(dir / "elo_200.jsonl");
  check(records.size() == 200, "fixture has " + str(records.size()) + " records");
  const json expected = json::parse(wf::io::read_file(dir / "elo_200_expected.json"));
  const auto boards = wf::bench::elo_rank(records, {});
  std::size_t compared = 0;
  for (const auto& [dim, table] : expected.items()) {
    const auto& rows = boards.at(wf::bench::parse_dimension(dim));
    check(rows.size() == table.size(), dim + ": " + str(rows.size()) + " rows vs " + str(table.size()));
    for (const auto& row : rows) {
      const double want = table.at(row.model).get<double>();
      check(row.rating == want, dim + "/" + row.model + ": " + str(row.rating) + " vs " + str(want));
      ++compared;
    }
  }
  check(compared > 0, "nothing compared");
}

void retrieval_oracle() {
  const wf::rag::HashingEmbedder embedder;
  wf::corpus::SyntheticCorpusOptions o;
  o.count = 600;
  o.seed = 5;
  auto chunks = wf::rag::chunk_corpus(wf::corpus::synthetic_corpus(o), 200);
  check(chunks.size() >= 1000, "corpus yields only " + str(chunks.size()) + " chunks");
  chunks.resize(1000);
  wf::rag::embed_chunks(chunks, embedder, 4);

  wf::SplitMix64 rng(77);
  for (int q = 0; q < 100; ++q) {
    const auto lang = rng.below(2) ? wf::Language::kZh : wf::Language::kEn;
    const auto text = wf::corpus::synthetic_paragraph(lang, wf::kAllDomains[rng.below(4)], 60 + rng.below(300), rng());
    const auto v = wf::rag::embed(text, embedder);
    const auto hit = wf::rag::retrieve_most_similar(v, chunks);
    std::string best_id;
    double best = -2;
    for (const auto& c : chunks) {
      double dot = 0;
      for (std::size_t i = 0; i < v.size(); ++i) dot += static_cast<double>(v[i]) * c.embedding[i];
      if (dot > best || (dot == best && c.id < best_id)) {
        best = dot;
        best_id = c.id;
      }
    }
    check(hit.chunk_id == best_id, "query " + str(q) + ": " + hit.chunk_id + " vs brute force " + best_id);
  }
}

void ratio_fidelity() {
  wf::corpus::SyntheticCorpusOptions o;
  o.count = 5000;
  o.seed = 3;
  o.fiction_share = 0.4;
  o.zh_share = 0.7;
  const auto docs = wf::corpus::synthetic_corpus(o);
  const auto spec = wf::corpus::parse_mix_spec("fiction=1:1,lang=4:1", 0.02);
  const auto target = wf::corpus::max_mix_target(docs, spec);
  check(target > 0, "no feasible target");
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto out = wf::corpus::mix(docs, spec, target, seed);
    check(out.size() == target, "seed " + str(seed) + ": size " + str(out.size()));
    std::size_t fiction = 0, zh = 0;
    for (const auto& d : out) {
      fiction += wf::is_fiction(d.domain);
      zh += d.language == wf::Language::kZh;
    }
    const double f = static_cast<double>(fiction) / out.size(), z = static_cast<double>(zh) / out.size();
    check(std::abs(f - 0.5) <= 0.02, "seed " + str(seed) + ": fiction share " + str(f));
    check(std::abs(z - 0.8) <= 0.02, "seed " + str(seed) + ": zh share " + str(z));
  }

  // RAG: N = 200 pairs at fraction 0.10.
  wf::corpus::SyntheticCorpusOptions small;
  small.count = 40;
  const auto corpus_docs = wf::corpus::synthetic_corpus(small);
  const wf::rag::HashingEmbedder embedder;
  const auto index = wf::rag::Index::build(corpus_docs, 800, embedder, 2);
  std::vector<wf::InstructionPair> pairs;
  for (std::size_t i = 0; i < 200; ++i) {
    wf::InstructionPair p;
    p.id = "p" + std::to_string(i);
    p.subdomain = "short_story";
    p.instruction = "Write a passage.";
    p.response = wf::corpus::synthetic_paragraph(wf::Language::kEn, wf::DomainKind::kFictionWriting, 120, i);
    p.source_doc_id = corpus_docs[i % corpus_docs.size()].id;
    pairs.push_back(std::move(p));
  }
  const auto r = wf::rag::augment(pairs, index, embedder, 0.10, 42, 2);
  check(r.augmented.size() == 20, "augmented " + str(r.augmented.size()) + " of 200");
  check(r.untouched.size() == 180, "untouched " + str(r.untouched.size()));
}

void end_to_end(const fs::path& scratch) {
  const auto config = [&](const fs::path& out) {
    wf::pipeline::RunConfig c;
    c.seed = 42;
    c.out_dir = out;
    c.ingest.synthetic_count = 200;
    c.select.quota = "0.4";
    c.backtranslate.exemplars = kSource / "data" / "exemplars";
    c.cdpo.principles = kSource / "data" / "principles";
    c.funcall.themes = kSource / "data" / "themes.txt";
    return c;
  };
  const auto first = wf::pipeline::run(config(scratch / "run1"));
  wf::pipeline::run(config(scratch / "run2"));
  const auto m1 = wf::io::read_file(scratch / "run1" / wf::pipeline::kManifestFile);
  const auto m2 = wf::io::read_file(scratch / "run2" / wf::pipeline::kManifestFile);
  check(m1 == m2, "manifests differ");
  check(first.executed == wf::pipeline::stage_order(), "not every stage ran");
  const auto& bt = first.manifest.find("backtranslate")->counts;
  check(bt.at("pairs") > 0, "no instruction pairs");

  const auto out = scratch / "run1";
  const auto prefs = wf::io::read_jsonl<wf::cdpo::PreferencePair>(out / "preference_pairs.jsonl");
  check(!prefs.empty(), "no preference pairs");
  for (const auto& p : prefs) {
    check(p.chosen != p.rejected, p.id + ": chosen equals rejected");
    const double d = wf::text::normalized_edit_distance(p.chosen, p.rejected);
    check(d <= 0.5, p.id + ": edit distance " + str(d));
  }

  std::map<std::string, wf::funcall::ToolEnvironment> envs;
  for (const auto& e : wf::io::read_jsonl<wf::funcall::ToolEnvironment>(out / "funcall_environments.jsonl")) {
    envs[e.id] = e;
  }
  const auto samples = wf::io::read_jsonl<wf::funcall::FunctionCallSample>(out / "funcall_samples.jsonl");
  check(!samples.empty(), "no function-call samples");
  for (const auto& s : samples) {
    const auto env = envs.find(s.environment_id);
    check(env != envs.end(), s.id + ": unknown environment");
    const auto* tool = env->second.find(s.gold_call.tool_name);
    check(tool != nullptr, s.id + ": unknown tool " + s.gold_call.tool_name);
    const auto violations = wf::funcall::validate_call(s.gold_call, *tool);
    check(violations.empty(), s.id + ": " + wf::funcall::describe(violations));
  }

  // Within every bucket no dropped pair outscores a kept one.
  const auto scored = wf::io::read_jsonl<wf::InstructionPair>(out / "scored.jsonl");
  const auto selected = wf::io::read_jsonl<wf::InstructionPair>(out / "selected.jsonl");
  check(!selected.empty(), "nothing selected");
  std::set<std::string> kept;
  std::map<std::string, double> min_kept;
  for (const auto& p : selected) {
    kept.insert(p.id);
    const auto key = p.subdomain + "/" + std::string(wf::to_string(p.task));
    const double t = p.scores->total();
    auto [it, fresh] = min_kept.emplace(key, t);
    if (!fresh) it->second = std::min(it->second, t);
  }
  for (const auto& p : scored) {
    if (kept.count(p.id) || !p.scores) continue;
    const auto key = p.subdomain + "/" + std::string(wf::to_string(p.task));
    const auto it = min_kept.find(key);
    if (it == min_kept.end()) continue;
    check(p.scores->total() <= it->second, key + ": dropped " + p.id + " outscores a kept pair");
  }
}

void quota_arithmetic() {
  const auto principles = wf::cdpo::PrincipleSet::load(kSource / "data" / "principles");
  std::vector<wf::InstructionPair> pairs;
  for (int s = 0; s < 50; ++s) {
    const std::string sub = "sub" + std::to_string(s);
    for (int k = 0; k < 520; ++k) {
      wf::InstructionPair p;
      p.id = sub + "-" + std::to_string(k);
      p.task = wf::kAllTasks[k % wf::kAllTasks.size()];
      p.domain = wf::kAllDomains[s % wf::kAllDomains.size()];
      p.subdomain = sub;
      p.instruction = "Write item " + std::to_string(k) + ".";
      p.response = "Stub response number " + std::to_string(k) + " for " + sub + " with a few extra words.";
      p.scores = wf::ScoreTriple{static_cast<double>(k % 10) + 1, 5, 5};
      pairs.push_back(std::move(p));
    }
  }
  wf::llm::Gateway gateway(wf::llm::mock_backend(42));
  wf::cdpo::CdpoOptions o;
  o.per_subdomain = 500;
  o.negatives_per_positive = 1;
  o.llm.seed = 42;
  o.workers = 4;
  const auto r = wf::cdpo::run(pairs, principles, gateway, o);
  check(r.positives == 25000, "positives " + str(r.positives));
  check(r.skipped.empty(), str(r.skipped.size()) + " skipped, first: " +
                               (r.skipped.empty() ? "" : r.skipped.front().error));
  check(r.pairs.size() == 25000, "preference pairs " + str(r.pairs.size()));
  std::map<std::string, std::size_t> per_sub;
  for (const auto& p : r.pairs) ++per_sub[p.subdomain];
  check(per_sub.size() == 50, "subdomains " + str(per_sub.size()));
  for (const auto& [sub, n] : per_sub) check(n == 500, sub + ": " + str(n));
}

}  // namespace

int main() {
  ScratchDir scratch;
  criterion("judge-table: overall = mean(style, relevance, creativity) for 18 rows", 1, judge_table);
  criterion("dpo-kernel: zero-margin ln 2 and gradients vs central differences", 5, dpo_kernel);
  criterion("elo: complement, zero-sum, E(1500,1700), 200-record fold oracle", 5, elo_suite);
  criterion("retrieval: 1000-chunk index agrees with brute force on 100 queries", 30, retrieval_oracle);
  criterion("ratio-fidelity: mix over 20 seeds and RAG 20 of 200", 30, ratio_fidelity);
  criterion("end-to-end: toy pipeline deterministic with valid outputs", 120,
            [&] { end_to_end(scratch.path()); });
  criterion("quota: 50 subdomains x 500 positives x 1 negative = 25000 pairs", 10, quota_arithmetic);
  std::cout << (g_failures == 0 ? "all criteria passed" : std::to_string(g_failures) + " criteria failed")
            << std::endl;
  return g_failures == 0 ? 0 : 1;
}
