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

#include "weaverforge/pipeline.hpp"

#define TOML_EXCEPTIONS 1
#include <toml.hpp>

#include <chrono>
#include <set>
#include <sstream>

#include "weaverforge/backtranslate.hpp"
#include "weaverforge/cdpo.hpp"
#include "weaverforge/error.hpp"
#include "weaverforge/funcall.hpp"
#include "weaverforge/jsonl.hpp"
#include "weaverforge/rag.hpp"
#include "weaverforge/rng.hpp"
#include "weaverforge/synthetic.hpp"
#include "weaverforge/text.hpp"

namespace weaverforge::pipeline {

std::string to_string(const Diagnostic& d) { return (d.key.empty() ? "(file)" : d.key) + ": " + d.message; }

// ---------------------------------------------------------------------------
// TOML reading

namespace {

class TableReader {
 public:
  TableReader(const toml::table* table, std::string prefix, const fs::path& base, std::vector<Diagnostic>& diags)
      : table_(table), prefix_(std::move(prefix)), base_(base), diags_(diags) {}

  template <typename Fn>
  void sub(const std::string& key, Fn&& fn) {
    seen_.insert(key);
    if (!table_) return;
    const toml::node* n = table_->get(key);
    if (!n) return;
    if (!n->is_table()) {
      fail(key, "must be a table");
      return;
    }
    TableReader child(n->as_table(), full(key), base_, diags_);
    fn(child);
    child.finish();
  }

  void u64(const std::string& key, std::uint64_t& out) {
    if (const auto* n = node(key)) {
      const auto v = n->value<std::int64_t>();
      if (!n->is_integer() || !v || *v < 0) return fail(key, "must be a non-negative integer");
      out = static_cast<std::uint64_t>(*v);
    }
  }
  void size(const std::string& key, std::size_t& out) {
    std::uint64_t v = out;
    u64(key, v);
    out = static_cast<std::size_t>(v);
  }
  void real(const std::string& key, double& out) {
    if (const auto* n = node(key)) {
      if (!n->is_number()) return fail(key, "must be a number");
      out = *n->value<double>();
    }
  }
  void boolean(const std::string& key, bool& out) {
    if (const auto* n = node(key)) {
      if (!n->is_boolean()) return fail(key, "must be true or false");
      out = *n->value<bool>();
    }
  }
  void string(const std::string& key, std::string& out) {
    if (const auto* n = node(key)) {
      if (!n->is_string()) return fail(key, "must be a string");
      out = *n->value<std::string>();
    }
  }
  void path(const std::string& key, fs::path& out) {
    std::string s;
    if (present(key) && (string(key, s), !s.empty())) out = resolve(s);
  }
  void opt_path(const std::string& key, std::optional<fs::path>& out) {
    std::string s;
    if (present(key) && (string(key, s), !s.empty())) out = resolve(s);
  }
  bool strings(const std::string& key, std::vector<std::string>& out) {
    const auto* n = node(key);
    if (!n) return false;
    const auto* arr = n->as_array();
    if (!arr) {
      fail(key, "must be an array of strings");
      return false;
    }
    std::vector<std::string> v;
    for (const auto& e : *arr) {
      if (!e.is_string()) {
        fail(key, "must be an array of strings");
        return false;
      }
      v.push_back(*e.value<std::string>());
    }
    out = std::move(v);
    return true;
  }
  bool present(const std::string& key) const { return table_ && table_->get(key) != nullptr; }

  void fail(const std::string& key, const std::string& message) { diags_.push_back({full(key), message}); }

  // Flags keys nobody asked for.
  void finish() {
    if (!table_) return;
    for (const auto& [k, v] : *table_) {
      const std::string key(k.str());
      if (!seen_.count(key)) diags_.push_back({full(key), "unknown key"});
    }
  }

  std::string full(const std::string& key) const { return prefix_.empty() ? key : prefix_ + "." + key; }

 private:
  const toml::node* node(const std::string& key) {
    seen_.insert(key);
    return table_ ? table_->get(key) : nullptr;
  }
  fs::path resolve(const std::string& s) const {
    const fs::path p(s);
    return p.is_absolute() ? p : base_ / p;
  }

  const toml::table* table_;
  std::string prefix_;
  const fs::path& base_;
  std::vector<Diagnostic>& diags_;
  std::set<std::string> seen_;
};

}  // namespace

RunConfig parse_config(std::string_view toml_text, const fs::path& base_dir, std::vector<Diagnostic>& diagnostics) {
  RunConfig c;
  c.out_dir = base_dir / "out";
  c.backtranslate.exemplars = base_dir / c.backtranslate.exemplars;
  c.cdpo.principles = base_dir / c.cdpo.principles;
  c.funcall.themes = base_dir / c.funcall.themes;

  toml::table root;
  try {
    root = toml::parse(toml_text);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << "syntax error at line " << e.source().begin.line << ": " << e.description();
    diagnostics.push_back({"", msg.str()});
    return c;
  }

  TableReader r(&root, "", base_dir, diagnostics);
  r.u64("seed", c.seed);
  c.backend.mock_seed = c.seed;
  r.path("out_dir", c.out_dir);
  r.size("workers", c.workers);
  r.opt_path("templates_dir", c.templates_dir);
  r.strings("stages", c.stages);

  r.sub("backend", [&](TableReader& t) {
    t.string("kind", c.backend.kind);
    t.string("base_url", c.backend.base_url);
    t.string("model", c.backend.model);
    t.string("api_key_env", c.backend.api_key_env);
    t.u64("mock_seed", c.backend.mock_seed);
    t.opt_path("mock_script", c.backend.mock_script);
  });
  r.sub("limits", [&](TableReader& t) {
    auto& l = c.backend.limits;
    t.size("max_in_flight", l.max_in_flight);
    t.size("rpm", l.rpm);
    std::uint64_t retries = static_cast<std::uint64_t>(l.max_retries);
    t.u64("max_retries", retries);
    l.max_retries = static_cast<int>(retries);
    std::uint64_t budget = 0;
    if (t.present("token_budget")) {
      t.u64("token_budget", budget);
      l.token_budget = budget;
    }
    std::uint64_t ms = static_cast<std::uint64_t>(l.base_backoff.count());
    t.u64("base_backoff_ms", ms);
    l.base_backoff = std::chrono::milliseconds(ms);
    ms = static_cast<std::uint64_t>(l.max_backoff.count());
    t.u64("max_backoff_ms", ms);
    l.max_backoff = std::chrono::milliseconds(ms);
  });
  r.sub("cache", [&](TableReader& t) {
    t.boolean("enabled", c.backend.limits.cache_enabled);
    t.path("dir", c.backend.limits.cache_dir);
  });
  r.sub("ingest", [&](TableReader& t) {
    auto& g = c.ingest;
    t.opt_path("input", g.input);
    t.size("synthetic_count", g.synthetic_count);
    t.boolean("near_dedup", g.near_dedup);
    t.size("shingle_size", g.shingle_size);
    t.real("jaccard_threshold", g.jaccard_threshold);
    t.real("quality_floor", g.quality_floor);
    t.string("mix", g.mix);
    t.real("mix_tolerance", g.mix_tolerance);
    t.size("mix_target", g.mix_target);
    t.sub("rules", [&](TableReader& rr) {
      rr.size("min_chars", g.rules.min_chars);
      rr.size("max_chars", g.rules.max_chars);
      rr.real("symbol_ratio_max", g.rules.symbol_ratio_max);
      rr.boolean("language_check", g.rules.language_check);
      rr.boolean("exact_dedup", g.rules.exact_dedup);
      rr.real("en_max_cjk", g.rules.en_max_cjk);
      rr.real("zh_min_cjk", g.rules.zh_min_cjk);
    });
  });
  r.sub("backtranslate", [&](TableReader& t) {
    auto& b = c.backtranslate;
    t.path("exemplars", b.exemplars);
    std::vector<std::string> tasks;
    if (t.strings("tasks", tasks)) {
      b.tasks.clear();
      for (const auto& s : tasks) {
        try {
          b.tasks.push_back(parse_task(s));
        } catch (const Error&) {
          t.fail("tasks", "unknown task '" + s + "'");
        }
      }
    }
    t.size("repeat", b.repeat);
    t.real("temperature", b.temperature);
  });
  r.sub("score", [&](TableReader& t) { t.real("temperature", c.score.temperature); });
  r.sub("select", [&](TableReader& t) {
    // A bare integer is accepted for a count quota.
    if (t.present("quota")) {
      std::uint64_t n = 0;
      std::vector<Diagnostic> scratch;
      toml::table probe;
      if (const auto* node = root["select"]["quota"].node(); node && node->is_integer()) {
        t.u64("quota", n);
        c.select.quota = std::to_string(n);
      } else if (node && node->is_floating_point()) {
        double f = 0;
        t.real("quota", f);
        std::ostringstream s;
        s << f;
        c.select.quota = s.str();
      } else {
        t.string("quota", c.select.quota);
      }
    }
    t.string("tie_break", c.select.tie_break);
  });
  r.sub("cdpo", [&](TableReader& t) {
    t.path("principles", c.cdpo.principles);
    t.size("per_subdomain", c.cdpo.per_subdomain);
    t.size("negatives_per_positive", c.cdpo.negatives_per_positive);
    t.real("max_edit", c.cdpo.max_edit);
    t.real("temperature", c.cdpo.temperature);
    t.real("beta", c.cdpo.beta);
  });
  r.sub("rag", [&](TableReader& t) {
    t.real("fraction", c.rag.fraction);
    t.size("max_chunk_chars", c.rag.max_chunk_chars);
    t.size("dimension", c.rag.dimension);
  });
  r.sub("funcall", [&](TableReader& t) {
    t.path("themes", c.funcall.themes);
    t.size("per_env", c.funcall.per_env);
    t.real("temperature", c.funcall.temperature);
  });
  r.sub("elo", [&](TableReader& t) {
    t.real("initial", c.elo.initial);
    t.real("k_factor", c.elo.k_factor);
  });
  r.finish();
  return c;
}

// ---------------------------------------------------------------------------
// Validation

namespace {

struct Dependency {
  std::string stage;
  std::string file;
};

std::vector<Dependency> dependencies(const std::string& stage) {
  if (stage == "backtranslate") return {{"ingest", "corpus.jsonl"}};
  if (stage == "score") return {{"backtranslate", "pairs.jsonl"}};
  if (stage == "select") return {{"score", "scored.jsonl"}};
  if (stage == "cdpo") return {{"select", "selected.jsonl"}};
  if (stage == "rag-augment") return {{"ingest", "corpus.jsonl"}, {"select", "selected.jsonl"}};
  return {};
}

bool configured(const RunConfig& c, std::string_view stage) {
  return std::find(c.stages.begin(), c.stages.end(), stage) != c.stages.end();
}

}  // namespace

std::vector<Diagnostic> validate(const RunConfig& c) {
  std::vector<Diagnostic> d;
  const auto need = [&](bool ok, const std::string& key, const std::string& message) {
    if (!ok) d.push_back({key, message});
  };
  const auto& order = stage_order();

  need(!c.stages.empty(), "stages", "no stages configured");
  std::set<std::string> listed;
  for (const auto& s : c.stages) {
    if (std::find(order.begin(), order.end(), s) == order.end()) {
      d.push_back({"stages", "unknown stage '" + s + "'"});
    } else if (!listed.insert(s).second) {
      d.push_back({"stages", "stage '" + s + "' listed more than once"});
    }
  }
  for (const auto& s : listed) {
    for (const auto& dep : dependencies(s)) {
      if (!listed.count(dep.stage) && !fs::exists(c.out_dir / dep.file)) {
        d.push_back({"stages", "stage '" + s + "' needs the output of '" + dep.stage + "' (" + dep.file +
                                   "); add '" + dep.stage + "' or run it first"});
      }
    }
  }

  need(c.workers >= 1, "workers", "must be at least 1");
  need(c.backend.kind == "mock" || c.backend.kind == "openai_compatible", "backend.kind",
       "must be mock or openai_compatible");
  if (c.backend.mock_script) {
    need(fs::is_regular_file(*c.backend.mock_script), "backend.mock_script",
         "path " + c.backend.mock_script->string() + " does not exist");
  }
  if (c.templates_dir) {
    need(fs::is_directory(*c.templates_dir), "templates_dir",
         "path " + c.templates_dir->string() + " does not exist");
  }
  need(c.backend.limits.max_in_flight >= 1, "limits.max_in_flight", "must be at least 1");

  const auto& g = c.ingest;
  if (configured(c, "ingest")) {
    if (g.input) need(fs::is_regular_file(*g.input), "ingest.input", "path " + g.input->string() + " does not exist");
    if (!g.input) need(g.synthetic_count >= 1, "ingest.synthetic_count", "must be at least 1");
  }
  need(g.shingle_size >= 1, "ingest.shingle_size", "must be at least 1");
  need(g.jaccard_threshold > 0.0 && g.jaccard_threshold <= 1.0, "ingest.jaccard_threshold", "must lie in (0, 1]");
  need(g.quality_floor >= 0.0 && g.quality_floor <= 1.0, "ingest.quality_floor", "must lie in [0, 1]");
  need(g.rules.min_chars <= g.rules.max_chars, "ingest.rules.min_chars", "must not exceed max_chars");
  if (!g.mix.empty()) {
    try {
      corpus::parse_mix_spec(g.mix, g.mix_tolerance);
    } catch (const Error& e) {
      d.push_back({"ingest.mix", "invalid ratio spec '" + g.mix + "' (expected fiction=a:b,lang=c:d): " + e.what()});
    }
  }

  const auto& b = c.backtranslate;
  if (configured(c, "backtranslate")) {
    need(fs::is_directory(b.exemplars), "backtranslate.exemplars",
         "path " + b.exemplars.string() + " does not exist");
  }
  need(!b.tasks.empty(), "backtranslate.tasks", "must list at least one task");
  need(b.repeat >= 1, "backtranslate.repeat", "must be at least 1");
  need(b.temperature >= 0.0, "backtranslate.temperature", "must not be negative");
  need(c.score.temperature >= 0.0, "score.temperature", "must not be negative");

  try {
    quality::parse_quota(c.select.quota);
  } catch (const Error& e) {
    d.push_back({"select.quota", e.what()});
  }
  try {
    quality::parse_tie_break(c.select.tie_break);
  } catch (const Error& e) {
    d.push_back({"select.tie_break", e.what()});
  }

  if (configured(c, "cdpo")) {
    need(fs::is_directory(c.cdpo.principles), "cdpo.principles",
         "path " + c.cdpo.principles.string() + " does not exist");
  }
  need(c.cdpo.per_subdomain >= 1, "cdpo.per_subdomain", "must be at least 1");
  need(c.cdpo.negatives_per_positive >= 1, "cdpo.negatives_per_positive", "must be at least 1");
  need(c.cdpo.max_edit > 0.0 && c.cdpo.max_edit <= 1.0, "cdpo.max_edit", "must lie in (0, 1]");
  need(c.cdpo.beta > 0.0, "cdpo.beta", "must be positive");

  need(c.rag.fraction >= 0.0 && c.rag.fraction <= 1.0, "rag.fraction", "must lie in [0, 1]");
  need(c.rag.max_chunk_chars >= 100, "rag.max_chunk_chars", "must be at least 100");
  need(c.rag.dimension >= 1, "rag.dimension", "must be at least 1");

  if (configured(c, "funcall")) {
    need(fs::is_regular_file(c.funcall.themes), "funcall.themes",
         "path " + c.funcall.themes.string() + " does not exist");
  }
  need(c.funcall.per_env >= 1, "funcall.per_env", "must be at least 1");

  need(c.elo.k_factor > 0.0, "elo.k_factor", "must be positive");
  need(std::isfinite(c.elo.initial), "elo.initial", "must be finite");
  return d;
}

namespace {

[[noreturn]] void throw_invalid(const std::vector<Diagnostic>& diags, const std::string& where) {
  std::string msg = where + " has " + std::to_string(diags.size()) + " problem(s)";
  for (const auto& d : diags) msg += "\n  " + to_string(d);
  throw Error(ErrorCode::kInvalidConfig, msg);
}

}  // namespace

RunConfig load_config(const fs::path& path) {
  std::vector<Diagnostic> diags;
  const auto base = fs::absolute(path).parent_path();
  RunConfig c = parse_config(io::read_file(path), base, diags);
  auto more = validate(c);
  diags.insert(diags.end(), more.begin(), more.end());
  if (!diags.empty()) throw_invalid(diags, path.string());
  return c;
}

// ---------------------------------------------------------------------------
// Canonical form

json config_json(const RunConfig& c) {
  const auto opt = [](const std::optional<fs::path>& p) { return p ? json(p->string()) : json(nullptr); };
  const auto& l = c.backend.limits;
  std::vector<std::string> tasks;
  for (auto t : c.backtranslate.tasks) tasks.emplace_back(to_string(t));
  return json{
      {"seed", c.seed},
      {"workers", c.workers},
      {"templates_dir", opt(c.templates_dir)},
      {"stages", c.stages},
      {"backend",
       {{"kind", c.backend.kind},
        {"base_url", c.backend.base_url},
        {"model", c.backend.model},
        {"mock_seed", c.backend.mock_seed},
        {"mock_script", opt(c.backend.mock_script)},
        {"token_budget", l.token_budget ? json(*l.token_budget) : json(nullptr)}}},
      {"ingest",
       {{"input", opt(c.ingest.input)},
        {"synthetic_count", c.ingest.synthetic_count},
        {"rules", c.ingest.rules},
        {"near_dedup", c.ingest.near_dedup},
        {"shingle_size", c.ingest.shingle_size},
        {"jaccard_threshold", c.ingest.jaccard_threshold},
        {"quality_floor", c.ingest.quality_floor},
        {"mix", c.ingest.mix},
        {"mix_tolerance", c.ingest.mix_tolerance},
        {"mix_target", c.ingest.mix_target}}},
      {"backtranslate",
       {{"exemplars", c.backtranslate.exemplars.string()},
        {"tasks", tasks},
        {"repeat", c.backtranslate.repeat},
        {"temperature", c.backtranslate.temperature}}},
      {"score", {{"temperature", c.score.temperature}}},
      {"select", {{"quota", c.select.quota}, {"tie_break", c.select.tie_break}}},
      {"cdpo",
       {{"principles", c.cdpo.principles.string()},
        {"per_subdomain", c.cdpo.per_subdomain},
        {"negatives_per_positive", c.cdpo.negatives_per_positive},
        {"max_edit", c.cdpo.max_edit},
        {"temperature", c.cdpo.temperature},
        {"beta", c.cdpo.beta}}},
      {"rag",
       {{"fraction", c.rag.fraction}, {"max_chunk_chars", c.rag.max_chunk_chars}, {"dimension", c.rag.dimension}}},
      {"funcall",
       {{"themes", c.funcall.themes.string()},
        {"per_env", c.funcall.per_env},
        {"temperature", c.funcall.temperature}}},
      {"elo", {{"initial", c.elo.initial}, {"k_factor", c.elo.k_factor}}},
  };
}

std::string config_hash(const RunConfig& c) { return text::sha256_hex(config_json(c).dump()); }

// ---------------------------------------------------------------------------
// Manifest

namespace {

json usage_json(const llm::Usage& u) {
  return json{{"prompt_tokens", u.prompt_tokens}, {"completion_tokens", u.completion_tokens}, {"total", u.total()}};
}

}  // namespace

llm::Usage RunManifest::usage_total() const {
  llm::Usage u;
  for (const auto& s : stages) u += s.usage;
  return u;
}

const StageRecord* RunManifest::find(std::string_view stage) const {
  for (const auto& s : stages) {
    if (s.name == stage) return &s;
  }
  return nullptr;
}

void to_json(json& j, const StageRecord& s) {
  j = json{{"name", s.name},     {"params_hash", s.params_hash},  {"inputs", s.inputs},
           {"outputs", s.outputs}, {"counts", s.counts},          {"usage", usage_json(s.usage)},
           {"backend_calls", s.backend_calls}};
}

void from_json(const json& j, StageRecord& s) {
  s.name = j.at("name").get<std::string>();
  s.params_hash = j.at("params_hash").get<std::string>();
  s.inputs = j.at("inputs").get<std::map<std::string, std::string>>();
  s.outputs = j.at("outputs").get<std::map<std::string, std::string>>();
  s.counts = j.at("counts").get<std::map<std::string, std::uint64_t>>();
  s.usage.prompt_tokens = j.at("usage").at("prompt_tokens").get<std::uint64_t>();
  s.usage.completion_tokens = j.at("usage").at("completion_tokens").get<std::uint64_t>();
  s.backend_calls = j.value("backend_calls", std::uint64_t{0});
}

void to_json(json& j, const RunManifest& m) {
  j = json{{"config_hash", m.config_hash},
           {"seed", m.seed},
           {"stages", m.stages},
           {"usage_total", usage_json(m.usage_total())}};
}

void from_json(const json& j, RunManifest& m) {
  m.config_hash = j.at("config_hash").get<std::string>();
  m.seed = j.at("seed").get<std::uint64_t>();
  m.stages = j.at("stages").get<std::vector<StageRecord>>();
}

// ---------------------------------------------------------------------------
// Stages

namespace {

using Counts = std::map<std::string, std::uint64_t>;

struct StageContext {
  const RunConfig& config;
  llm::Gateway& gateway;
  const llm::TemplateStore* templates;
  fs::path out;

  fs::path file(const std::string& name) const { return out / name; }
};

Counts run_ingest(const StageContext& ctx) {
  const auto& p = ctx.config.ingest;
  std::vector<corpus::Document> raw;
  if (p.input) {
    raw = io::read_jsonl<corpus::Document>(*p.input);
  } else {
    corpus::SyntheticCorpusOptions o;
    o.count = p.synthetic_count;
    o.seed = ctx.config.seed;
    raw = corpus::synthetic_corpus(o);
  }
  std::vector<corpus::Document> docs;
  std::size_t empty = 0;
  for (auto& d : raw) {
    try {
      docs.push_back(corpus::normalize(std::move(d)));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kEmptyAfterNormalize) throw;
      ++empty;
    }
  }
  auto filtered = corpus::rule_filter(docs, p.rules);
  auto kept = std::move(filtered.kept);
  const std::size_t after_rules = kept.size();
  if (p.near_dedup) kept = corpus::near_dedup(kept, p.shingle_size, p.jaccard_threshold);
  const std::size_t after_dedup = kept.size();
  auto scored = corpus::ml_quality_score(kept, corpus::heuristic_quality, p.quality_floor);
  kept = std::move(scored.kept);
  const std::size_t after_quality = kept.size();
  if (!p.mix.empty()) {
    const auto spec = corpus::parse_mix_spec(p.mix, p.mix_tolerance);
    const std::size_t target = p.mix_target ? p.mix_target : corpus::max_mix_target(kept, spec);
    kept = corpus::mix(kept, spec, target, derive_seed(ctx.config.seed, "mix"));
  }
  io::write_jsonl(ctx.file("corpus.jsonl"), kept);
  json report{{"rule_filter", filtered.report},
              {"empty_after_normalize", empty},
              {"near_duplicates_dropped", after_rules - after_dedup},
              {"below_quality_floor", scored.dropped_ids},
              {"output_count", kept.size()}};
  io::write_file_atomic(ctx.file("ingest_report.json"), report.dump(2) + "\n");
  return {{"input", raw.size()},
          {"after_rules", after_rules},
          {"after_near_dedup", after_dedup},
          {"after_quality", after_quality},
          {"documents", kept.size()}};
}

Counts run_backtranslate(const StageContext& ctx) {
  const auto& p = ctx.config.backtranslate;
  const auto docs = io::read_jsonl<corpus::Document>(ctx.file("corpus.jsonl"));
  const auto store = backtranslate::ExemplarStore::load(p.exemplars);
  backtranslate::RunOptions o;
  o.tasks = p.tasks;
  o.repeat = p.repeat;
  o.workers = ctx.config.workers;
  o.synthesis.seed = ctx.config.seed;
  o.synthesis.model = ctx.config.backend.model;
  o.synthesis.temperature = p.temperature;
  o.synthesis.templates = ctx.templates;
  const auto result = backtranslate::run(docs, store, ctx.gateway, o);
  const auto samples = backtranslate::emit_annotation_samples(result.pairs);
  io::write_jsonl(ctx.file("pairs.jsonl"), result.pairs);
  io::write_jsonl(ctx.file("backtranslate_failures.jsonl"), result.failures);
  io::write_jsonl(ctx.file("annotation_samples.jsonl"), samples);
  return {{"pairs", result.pairs.size()},
          {"failures", result.failures.size()},
          {"annotation_samples", samples.size()}};
}

Counts run_score(const StageContext& ctx) {
  const auto pairs = io::read_jsonl<InstructionPair>(ctx.file("pairs.jsonl"));
  quality::ScoreOptions o;
  o.model = ctx.config.backend.model;
  o.temperature = ctx.config.score.temperature;
  o.seed = ctx.config.seed;
  o.templates = ctx.templates;
  const auto result = quality::score_all(pairs, ctx.gateway, o, ctx.config.workers);
  io::write_jsonl(ctx.file("scored.jsonl"), result.pairs);
  io::write_file_atomic(ctx.file("scoring_report.json"), json(result.report).dump(2) + "\n");
  return {{"scored", result.report.scored_count}, {"unscored", result.report.unscored.size()}};
}

Counts run_select(const StageContext& ctx) {
  const auto pairs = io::read_jsonl<InstructionPair>(ctx.file("scored.jsonl"));
  quality::SelectionSpec spec;
  spec.quota = quality::parse_quota(ctx.config.select.quota);
  spec.tie_break = quality::parse_tie_break(ctx.config.select.tie_break);
  const auto selected = quality::select_top(pairs, spec);
  std::set<std::string> buckets;
  for (const auto& p : selected) buckets.insert(quality::subdomain_task_key(p));
  io::write_jsonl(ctx.file("selected.jsonl"), selected);
  return {{"selected", selected.size()}, {"buckets", buckets.size()}};
}

Counts run_cdpo(const StageContext& ctx) {
  const auto& p = ctx.config.cdpo;
  const auto selected = io::read_jsonl<InstructionPair>(ctx.file("selected.jsonl"));
  const auto principles = cdpo::PrincipleSet::load(p.principles);
  cdpo::CdpoOptions o;
  o.per_subdomain = p.per_subdomain;
  o.negatives_per_positive = p.negatives_per_positive;
  o.limits.max_edit = p.max_edit;
  o.llm.model = ctx.config.backend.model;
  o.llm.temperature = p.temperature;
  o.llm.seed = ctx.config.seed;
  o.llm.templates = ctx.templates;
  o.workers = ctx.config.workers;
  const auto result = cdpo::run(selected, principles, ctx.gateway, o);
  io::write_jsonl(ctx.file("preference_pairs.jsonl"), result.pairs);
  json skipped = json::array();
  for (const auto& s : result.skipped) skipped.push_back({{"pair_id", s.pair_id}, {"error", s.error}});
  io::write_file_atomic(ctx.file("cdpo_skipped.jsonl"), io::to_jsonl(skipped.get<std::vector<json>>()));
  return {{"positives", result.positives},
          {"preference_pairs", result.pairs.size()},
          {"skipped", result.skipped.size()}};
}

Counts run_rag(const StageContext& ctx) {
  const auto& p = ctx.config.rag;
  const auto docs = io::read_jsonl<corpus::Document>(ctx.file("corpus.jsonl"));
  const auto selected = io::read_jsonl<InstructionPair>(ctx.file("selected.jsonl"));
  const rag::HashingEmbedder embedder(p.dimension);
  const auto index = rag::Index::build(docs, p.max_chunk_chars, embedder, ctx.config.workers);
  index.save(ctx.file("rag_index.bin"));
  const auto result = rag::augment(selected, index, embedder, p.fraction, ctx.config.seed, ctx.config.workers);
  io::write_jsonl(ctx.file("rag_augmented.jsonl"), result.augmented);
  io::write_jsonl(ctx.file("rag_untouched.jsonl"), result.untouched);
  return {{"chunks", index.chunks.size()},
          {"augmented", result.augmented.size()},
          {"untouched", result.untouched.size()}};
}

std::vector<std::string> read_themes(const fs::path& path) {
  std::vector<std::string> out;
  for (const auto& line : text::split(io::read_file(path), '\n')) {
    const auto t = text::trim(line);
    if (!t.empty() && t.front() != '#') out.emplace_back(t);
  }
  return out;
}

Counts run_funcall(const StageContext& ctx) {
  const auto& p = ctx.config.funcall;
  funcall::FuncallOptions o;
  o.per_env = p.per_env;
  o.seed = ctx.config.seed;
  o.llm.model = ctx.config.backend.model;
  o.llm.temperature = p.temperature;
  o.llm.templates = ctx.templates;
  o.workers = ctx.config.workers;
  const auto result = funcall::run(read_themes(p.themes), ctx.gateway, o);
  std::map<std::string, const funcall::ToolEnvironment*> by_id;
  for (const auto& e : result.environments) by_id[e.id] = &e;
  std::vector<json> records;
  for (const auto& s : result.samples) records.push_back(funcall::to_openai_record(s, *by_id.at(s.environment_id)));
  io::write_jsonl(ctx.file("funcall_environments.jsonl"), result.environments);
  io::write_jsonl(ctx.file("funcall_samples.jsonl"), result.samples);
  io::write_file_atomic(ctx.file("funcall_openai.jsonl"), io::to_jsonl(records));
  io::write_jsonl(ctx.file("funcall_failures.jsonl"), result.failures);
  return {{"environments", result.environments.size()},
          {"samples", result.samples.size()},
          {"failures", result.failures.size()}};
}

struct StageDef {
  std::string name;
  std::vector<std::string> outputs;
  Counts (*fn)(const StageContext&);
};

const std::vector<StageDef>& stage_defs() {
  static const std::vector<StageDef> kDefs = {
      {"ingest", {"corpus.jsonl", "ingest_report.json"}, run_ingest},
      {"backtranslate", {"pairs.jsonl", "backtranslate_failures.jsonl", "annotation_samples.jsonl"},
       run_backtranslate},
      {"score", {"scored.jsonl", "scoring_report.json"}, run_score},
      {"select", {"selected.jsonl"}, run_select},
      {"cdpo", {"preference_pairs.jsonl", "cdpo_skipped.jsonl"}, run_cdpo},
      {"rag-augment", {"rag_index.bin", "rag_augmented.jsonl", "rag_untouched.jsonl"}, run_rag},
      {"funcall",
       {"funcall_environments.jsonl", "funcall_samples.jsonl", "funcall_openai.jsonl", "funcall_failures.jsonl"},
       run_funcall},
  };
  return kDefs;
}

// Parameters that influence a stage's outputs besides its input files.
json stage_params(const RunConfig& c, const std::string& stage, const std::string& backend_identity,
                  const std::string& templates_hash) {
  const json all = config_json(c);
  json p{{"seed", c.seed}, {"backend", backend_identity}, {"templates", templates_hash}};
  if (stage == "ingest") {
    p["params"] = all["ingest"];
  } else if (stage == "rag-augment") {
    p["params"] = all["rag"];
  } else {
    p["params"] = all[stage];
  }
  p["params"].erase("exemplars");
  p["params"].erase("principles");
  p["params"].erase("themes");
  p["params"].erase("input");
  return p;
}

std::map<std::string, std::string> stage_inputs(const RunConfig& c, const std::string& stage, const fs::path& out) {
  std::map<std::string, std::string> in;
  for (const auto& dep : dependencies(stage)) in[dep.file] = io::hash_file(out / dep.file);
  if (stage == "ingest" && c.ingest.input) in["input"] = io::hash_file(*c.ingest.input);
  if (stage == "backtranslate") in["exemplars"] = io::hash_directory(c.backtranslate.exemplars);
  if (stage == "cdpo") in["principles"] = io::hash_directory(c.cdpo.principles);
  if (stage == "funcall") in["themes"] = io::hash_file(c.funcall.themes);
  return in;
}

std::string templates_fingerprint(const llm::TemplateStore& store) {
  std::string buf;
  for (const auto& id : store.ids()) {
    const auto& t = store.get(id);
    buf += t.id + '\0' + t.system + '\0' + t.user + '\0';
  }
  return text::sha256_hex(buf);
}

bool outputs_intact(const StageRecord& rec, const fs::path& out) {
  for (const auto& [file, hash] : rec.outputs) {
    if (!fs::is_regular_file(out / file) || io::hash_file(out / file) != hash) return false;
  }
  return true;
}

void write_manifest(const RunManifest& m, const fs::path& out) {
  io::write_file_atomic(out / kManifestFile, json(m).dump(2) + "\n");
}

}  // namespace

RunOutcome run(const RunConfig& config) {
  if (auto diags = validate(config); !diags.empty()) throw_invalid(diags, "configuration");
  auto gateway = llm::make_gateway(config.backend);
  return run(config, *gateway);
}

RunOutcome run(const RunConfig& config, llm::Gateway& gateway) {
  if (auto diags = validate(config); !diags.empty()) throw_invalid(diags, "configuration");
  const fs::path out = config.out_dir;
  fs::create_directories(out);

  std::optional<llm::TemplateStore> overrides;
  if (config.templates_dir) overrides = llm::TemplateStore::with_overrides(*config.templates_dir);
  const llm::TemplateStore& store = overrides ? *overrides : llm::TemplateStore::builtin();
  std::string backend_identity = gateway.backend_name() + "|" + config.backend.model;
  if (config.backend.mock_script) backend_identity += "|" + io::hash_file(*config.backend.mock_script);
  const std::string templates_hash = templates_fingerprint(store);

  RunManifest previous;
  if (fs::is_regular_file(out / kManifestFile)) {
    try {
      previous = json::parse(io::read_file(out / kManifestFile)).get<RunManifest>();
    } catch (const std::exception&) {
      previous = {};
    }
  }
  json timings = json::object();
  if (fs::is_regular_file(out / kTimingsFile)) {
    try {
      timings = json::parse(io::read_file(out / kTimingsFile));
    } catch (const std::exception&) {
      timings = json::object();
    }
  }

  RunOutcome outcome;
  RunManifest& manifest = outcome.manifest;
  manifest.config_hash = config_hash(config);
  manifest.seed = config.seed;
  // Records of stages outside this run describe files still on disk.
  for (const auto& rec : previous.stages) {
    if (!configured(config, rec.name)) manifest.stages.push_back(rec);
  }
  const auto place = [&](StageRecord rec) {
    const auto& order = stage_order();
    const auto pos = [&](const std::string& n) { return std::find(order.begin(), order.end(), n) - order.begin(); };
    auto it = std::find_if(manifest.stages.begin(), manifest.stages.end(),
                           [&](const StageRecord& r) { return pos(r.name) > pos(rec.name); });
    manifest.stages.insert(it, std::move(rec));
  };

  const llm::Usage start_usage = gateway.usage();
  const StageContext ctx{config, gateway, &store, out};

  for (const auto& def : stage_defs()) {
    if (!configured(config, def.name)) continue;
    StageRecord rec;
    rec.name = def.name;
    try {
      rec.params_hash = text::sha256_hex(stage_params(config, def.name, backend_identity, templates_hash).dump());
      rec.inputs = stage_inputs(config, def.name, out);
    } catch (const std::exception& e) {
      throw Error(ErrorCode::kStageFailed, "stage " + def.name + " failed: " + e.what());
    }

    const StageRecord* prior = previous.find(def.name);
    if (prior && prior->params_hash == rec.params_hash && prior->inputs == rec.inputs &&
        outputs_intact(*prior, out)) {
      place(*prior);
      outcome.skipped.push_back(def.name);
      write_manifest(manifest, out);
      continue;
    }

    const llm::Usage before = gateway.usage();
    const std::uint64_t calls_before = gateway.backend_calls();
    const auto t0 = std::chrono::steady_clock::now();
    try {
      rec.counts = def.fn(ctx);
      for (const auto& f : def.outputs) rec.outputs[f] = io::hash_file(out / f);
    } catch (const std::exception& e) {
      throw Error(ErrorCode::kStageFailed, "stage " + def.name + " failed: " + e.what());
    }
    const llm::Usage after = gateway.usage();
    rec.usage.prompt_tokens = after.prompt_tokens - before.prompt_tokens;
    rec.usage.completion_tokens = after.completion_tokens - before.completion_tokens;
    rec.backend_calls = gateway.backend_calls() - calls_before;
    timings[def.name] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    place(std::move(rec));
    outcome.executed.push_back(def.name);
    write_manifest(manifest, out);
    io::write_file_atomic(out / kTimingsFile, timings.dump(2) + "\n");
  }

  const llm::Usage end_usage = gateway.usage();
  outcome.gateway_usage.prompt_tokens = end_usage.prompt_tokens - start_usage.prompt_tokens;
  outcome.gateway_usage.completion_tokens = end_usage.completion_tokens - start_usage.completion_tokens;
  return outcome;
}

}  // namespace weaverforge::pipeline
