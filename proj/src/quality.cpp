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

#include "weaverforge/quality.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "weaverforge/error.hpp"
#include "weaverforge/parallel.hpp"
#include "weaverforge/text.hpp"

namespace weaverforge::quality {
namespace {

bool is_ascii_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }

// Number right after `pos` (skipping blanks, one ':' / '=' / fullwidth colon
// and markdown asterisks).
std::optional<double> number_after(std::string_view s, std::size_t pos) {
  auto skip = [&] {
    while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t' || s[pos] == '*')) ++pos;
  };
  skip();
  if (pos < s.size() && (s[pos] == ':' || s[pos] == '=')) {
    ++pos;
  } else if (s.substr(pos, 3) == "\xEF\xBC\x9A") {
    pos += 3;
  }
  skip();
  std::size_t end = pos;
  if (end < s.size() && (s[end] == '-' || s[end] == '+')) ++end;
  const std::size_t digits = end;
  while (end < s.size() && std::isdigit(static_cast<unsigned char>(s[end]))) ++end;
  if (end == digits) return std::nullopt;
  if (end + 1 < s.size() && s[end] == '.' && std::isdigit(static_cast<unsigned char>(s[end + 1]))) {
    ++end;
    while (end < s.size() && std::isdigit(static_cast<unsigned char>(s[end]))) ++end;
  }
  std::string token(s.substr(pos, end - pos));
  if (!token.empty() && token.front() == '+') token.erase(0, 1);
  double v = 0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc() || ptr != token.data() + token.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

}  // namespace

std::map<std::string, double> parse_named_scores(std::string_view raw,
                                                 std::initializer_list<std::string_view> names) {
  const std::string lower = text::to_lower_ascii(raw);
  std::map<std::string, double> out;
  for (std::string_view name : names) {
    const std::string key = text::to_lower_ascii(name);
    std::optional<double> last;
    for (auto p = lower.find(key); p != std::string::npos; p = lower.find(key, p + 1)) {
      if (p > 0 && is_ascii_alpha(lower[p - 1])) continue;
      const std::size_t after = p + key.size();
      if (after < lower.size() && is_ascii_alpha(lower[after])) continue;
      if (auto v = number_after(lower, after)) last = v;
    }
    if (!last) {
      throw Error(ErrorCode::kParseFailure, "no numeric score for '" + std::string(name) + "'", std::string(raw));
    }
    out.emplace(std::string(name), *last);
  }
  return out;
}

ScoreTriple parse_score_triple(std::string_view raw) {
  const auto m = parse_named_scores(raw, {"quality", "diversity", "relevance"});
  const auto clamp = [](double v) { return std::clamp(v, 1.0, 10.0); };
  return ScoreTriple{clamp(m.at("quality")), clamp(m.at("diversity")), clamp(m.at("relevance"))};
}

ScoreTriple score_pair(const InstructionPair& pair, llm::Gateway& gateway, const ScoreOptions& options,
                       std::string* transcript) {
  const llm::TemplateStore& templates = options.templates ? *options.templates : llm::TemplateStore::builtin();
  llm::ChatRequest req = templates.render("score", {{"task", std::string(to_string(pair.task))},
                                                    {"subdomain", pair.subdomain},
                                                    {"instruction", pair.instruction},
                                                    {"context", pair.context.value_or("NONE")},
                                                    {"response", pair.response}});
  req.model = options.model;
  req.temperature = options.temperature;
  req.max_tokens = 256;
  req.seed = static_cast<std::int64_t>(options.seed & 0x7fffffffffffffffULL);
  const auto resp = gateway.complete(req);
  if (transcript) *transcript = resp.content;
  return parse_score_triple(resp.content);
}

void to_json(json& j, const ScoringReport& r) {
  json unscored = json::array();
  for (const auto& u : r.unscored) unscored.push_back({{"id", u.pair_id}, {"transcript", u.transcript}});
  j = json{{"input_count", r.input_count}, {"scored_count", r.scored_count}, {"unscored", unscored}};
}

ScoringResult score_all(const std::vector<InstructionPair>& pairs, llm::Gateway& gateway,
                        const ScoreOptions& options, std::size_t workers) {
  struct Outcome {
    std::optional<ScoreTriple> scores;
    std::string transcript;
  };
  const auto outcomes = parallel_map(pairs.size(), workers, [&](std::size_t i) {
    Outcome o;
    try {
      o.scores = score_pair(pairs[i], gateway, options, &o.transcript);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kParseFailure) throw;
    }
    return o;
  });
  ScoringResult result;
  result.report.input_count = pairs.size();
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    InstructionPair p = pairs[i];
    p.scores = outcomes[i].scores;
    if (p.scores) {
      ++result.report.scored_count;
    } else {
      result.report.unscored.push_back({p.id, outcomes[i].transcript});
    }
    result.pairs.push_back(std::move(p));
    result.transcripts.push_back(outcomes[i].transcript);
  }
  return result;
}

// ---------------------------------------------------------------------------

std::size_t Quota::take(std::size_t bucket_size) const {
  if (bucket_size == 0) return 0;
  if (kind == Kind::kCount) return std::min(bucket_size, static_cast<std::size_t>(value));
  const auto n = static_cast<std::size_t>(std::llround(value * static_cast<double>(bucket_size)));
  return std::clamp<std::size_t>(n, 1, bucket_size);
}

Quota parse_quota(std::string_view s) {
  const std::string t(text::trim(s));
  const auto bad = [&] {
    return Error(ErrorCode::kInvalidArgument,
                 "quota must be a positive count or a fraction in (0, 1], got '" + t + "'");
  };
  if (t.empty()) throw bad();
  if (t.find_first_not_of("0123456789") == std::string::npos) {
    std::size_t n = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), n);
    if (ec != std::errc() || ptr != t.data() + t.size() || n == 0) throw bad();
    return Quota::count(n);
  }
  double f = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), f);
  if (ec != std::errc() || ptr != t.data() + t.size() || !(f > 0.0 && f <= 1.0)) throw bad();
  return Quota::fraction(f);
}

std::string_view to_string(TieBreak t) { return t == TieBreak::kById ? "by_id" : "by_total_then_id"; }

TieBreak parse_tie_break(std::string_view s) {
  if (s == "by_id") return TieBreak::kById;
  if (s == "by_total_then_id") return TieBreak::kByTotalThenId;
  throw Error(ErrorCode::kInvalidArgument, "tie_break must be by_id or by_total_then_id");
}

void validate(const SelectionSpec& spec) {
  const bool ok = spec.quota.kind == Quota::Kind::kCount ? spec.quota.value >= 1.0
                                                         : spec.quota.value > 0.0 && spec.quota.value <= 1.0;
  if (!ok) throw Error(ErrorCode::kInvalidArgument, "selection quota must be positive");
}

std::string subdomain_task_key(const InstructionPair& p) {
  return p.subdomain + "/" + std::string(to_string(p.task));
}

std::vector<InstructionPair> select_top(const std::vector<InstructionPair>& pairs, const SelectionSpec& spec,
                                        const BucketKey& key) {
  validate(spec);
  std::map<std::string, std::vector<const InstructionPair*>> buckets;
  for (const auto& p : pairs) {
    if (p.scores) buckets[key(p)].push_back(&p);
  }
  std::vector<InstructionPair> out;
  for (auto& [_, items] : buckets) {
    std::sort(items.begin(), items.end(), [](const InstructionPair* a, const InstructionPair* b) {
      const double ta = a->scores->total(), tb = b->scores->total();
      if (ta != tb) return ta > tb;
      return a->id < b->id;
    });
    items.resize(spec.quota.take(items.size()));
    if (spec.tie_break == TieBreak::kById) {
      std::sort(items.begin(), items.end(),
                [](const InstructionPair* a, const InstructionPair* b) { return a->id < b->id; });
    }
    for (const auto* p : items) out.push_back(*p);
  }
  return out;
}

}  // namespace weaverforge::quality
