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

#include "weaverforge/corpus.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <unordered_map>
#include <unordered_set>

#include <unicode/normalizer2.h>
#include <unicode/unistr.h>

#include "weaverforge/error.hpp"
#include "weaverforge/rng.hpp"
#include "weaverforge/text.hpp"

namespace weaverforge::corpus {

void to_json(json& j, const Popularity& p) {
  j = json{{"ratings", p.ratings}, {"reads", p.reads}, {"upvotes", p.upvotes}, {"comments", p.comments}};
}

void from_json(const json& j, Popularity& p) {
  p.ratings = j.value("ratings", 0.0);
  p.reads = j.value("reads", std::uint64_t{0});
  p.upvotes = j.value("upvotes", std::uint64_t{0});
  p.comments = j.value("comments", std::uint64_t{0});
}

void to_json(json& j, const Document& d) {
  j = json{{"id", d.id},         {"text", d.text},           {"language", d.language},
           {"domain", d.domain}, {"subdomain", d.subdomain}, {"source", d.source}};
  if (d.popularity) j["popularity"] = *d.popularity;
  if (d.quality_score) j["quality_score"] = *d.quality_score;
}

void from_json(const json& j, Document& d) {
  d.id = j.at("id").get<std::string>();
  d.text = j.at("text").get<std::string>();
  d.language = j.at("language").get<Language>();
  d.domain = j.at("domain").get<DomainKind>();
  d.subdomain = j.value("subdomain", std::string{});
  d.source = j.value("source", std::string{});
  d.popularity.reset();
  d.quality_score.reset();
  if (j.contains("popularity") && !j["popularity"].is_null()) d.popularity = j["popularity"].get<Popularity>();
  if (j.contains("quality_score") && !j["quality_score"].is_null()) {
    d.quality_score = j["quality_score"].get<double>();
  }
}

std::string normalize_text(std::string_view input) {
  // Strip first: removing a control character can bring a base character and
  // a combining mark together, which NFC then has to compose.
  std::string stripped;
  stripped.reserve(input.size());
  for (char32_t cp : text::decode_utf8(input)) {
    const bool c0 = cp < 0x20 && cp != U'\n' && cp != U'\t';
    const bool c1 = cp >= 0x7F && cp <= 0x9F;
    if (!c0 && !c1) text::append_utf8(stripped, cp);
  }

  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw Error(ErrorCode::kIo, "ICU NFC normalizer unavailable");
  const icu::UnicodeString src = icu::UnicodeString::fromUTF8(stripped);
  const icu::UnicodeString composed = nfc->normalize(src, status);
  if (U_FAILURE(status)) throw Error(ErrorCode::kIo, "NFC normalization failed");
  std::string nfc_text;
  composed.toUTF8String(nfc_text);

  std::string out;
  out.reserve(nfc_text.size());
  std::size_t newline_run = 0;
  for (char c : nfc_text) {
    if (c == '\n') {
      if (++newline_run > 2) continue;
    } else {
      newline_run = 0;
    }
    out.push_back(c);
  }
  return out;
}

Document normalize(Document doc) {
  doc.text = normalize_text(doc.text);
  if (text::trim(doc.text).empty()) {
    throw Error(ErrorCode::kEmptyAfterNormalize, "document '" + doc.id + "' is empty", doc.id);
  }
  return doc;
}

// ---------------------------------------------------------------------------

void to_json(json& j, const RuleSet& r) {
  j = json{{"min_chars", r.min_chars},         {"max_chars", r.max_chars},
           {"symbol_ratio_max", r.symbol_ratio_max}, {"language_check", r.language_check},
           {"exact_dedup", r.exact_dedup},     {"en_max_cjk", r.en_max_cjk},
           {"zh_min_cjk", r.zh_min_cjk}};
}

void from_json(const json& j, RuleSet& r) {
  RuleSet d;
  r.min_chars = j.value("min_chars", d.min_chars);
  r.max_chars = j.value("max_chars", d.max_chars);
  r.symbol_ratio_max = j.value("symbol_ratio_max", d.symbol_ratio_max);
  r.language_check = j.value("language_check", d.language_check);
  r.exact_dedup = j.value("exact_dedup", d.exact_dedup);
  r.en_max_cjk = j.value("en_max_cjk", d.en_max_cjk);
  r.zh_min_cjk = j.value("zh_min_cjk", d.zh_min_cjk);
}

void to_json(json& j, const FilterReport& r) {
  json rejected = json::array();
  for (const auto& rej : r.rejected) rejected.push_back({{"id", rej.doc_id}, {"rule", rej.rule}});
  j = json{{"input_count", r.input_count}, {"kept_count", r.kept_count}, {"rejected", rejected}};
}

FilterResult rule_filter(const std::vector<Document>& docs, const RuleSet& rules) {
  FilterResult result;
  result.report.input_count = docs.size();
  std::unordered_set<std::string> seen;
  for (const auto& doc : docs) {
    std::string_view failed;
    const std::size_t chars = text::char_count(doc.text);
    if (chars < rules.min_chars) {
      failed = kRuleMinLen;
    } else if (chars > rules.max_chars) {
      failed = kRuleMaxLen;
    } else if (text::symbol_ratio(doc.text) > rules.symbol_ratio_max) {
      failed = kRuleSymbolRatio;
    } else if (rules.language_check) {
      const double cjk = text::cjk_fraction(doc.text);
      if ((doc.language == Language::kEn && cjk > rules.en_max_cjk) ||
          (doc.language == Language::kZh && cjk < rules.zh_min_cjk)) {
        failed = kRuleLanguage;
      }
    }
    if (failed.empty() && rules.exact_dedup && !seen.insert(text::sha256_hex(doc.text)).second) {
      failed = kRuleExactDuplicate;
    }
    if (failed.empty()) {
      result.kept.push_back(doc);
    } else {
      result.report.rejected.push_back({doc.id, std::string(failed)});
    }
  }
  result.report.kept_count = result.kept.size();
  return result;
}

// ---------------------------------------------------------------------------

std::vector<std::uint64_t> shingle_hashes(std::string_view input, std::size_t k) {
  const std::u32string cps = text::decode_utf8(input);
  std::vector<std::uint64_t> out;
  if (cps.empty()) return out;
  const auto hash_window = [&](std::size_t begin, std::size_t len) {
    return text::fnv1a64(text::encode_utf8(std::u32string_view(cps).substr(begin, len)));
  };
  if (cps.size() < k) {
    out.push_back(hash_window(0, cps.size()));
    return out;
  }
  out.reserve(cps.size() - k + 1);
  for (std::size_t i = 0; i + k <= cps.size(); ++i) out.push_back(hash_window(i, k));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

double jaccard(const std::vector<std::uint64_t>& a, const std::vector<std::uint64_t>& b) {
  if (a.empty() && b.empty()) return 1.0;
  std::size_t inter = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++inter;
      ++ia;
      ++ib;
    }
  }
  const std::size_t uni = a.size() + b.size() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

std::vector<Document> near_dedup(const std::vector<Document>& docs, std::size_t shingle_size,
                                 double jaccard_threshold) {
  if (shingle_size < 2) throw Error(ErrorCode::kInvalidArgument, "shingle_size must be >= 2");
  if (!(jaccard_threshold > 0.0 && jaccard_threshold <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "jaccard threshold must be in (0, 1]");
  }
  std::vector<Document> kept;
  std::vector<std::vector<std::uint64_t>> kept_shingles;
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> postings;
  std::vector<std::size_t> last_seen;  // per kept doc, index of last candidate check

  for (std::size_t i = 0; i < docs.size(); ++i) {
    auto sh = shingle_hashes(docs[i].text, shingle_size);
    bool duplicate = false;
    for (std::uint64_t h : sh) {
      auto it = postings.find(h);
      if (it == postings.end()) continue;
      for (std::size_t k : it->second) {
        if (last_seen[k] == i + 1) continue;
        last_seen[k] = i + 1;
        if (jaccard(sh, kept_shingles[k]) >= jaccard_threshold) {
          duplicate = true;
          break;
        }
      }
      if (duplicate) break;
    }
    if (duplicate) continue;
    const std::size_t slot = kept.size();
    for (std::uint64_t h : sh) postings[h].push_back(slot);
    kept.push_back(docs[i]);
    kept_shingles.push_back(std::move(sh));
    last_seen.push_back(0);
  }
  return kept;
}

// ---------------------------------------------------------------------------

HeuristicFeatures heuristic_features(std::string_view input) {
  HeuristicFeatures f;
  const std::u32string cps = text::decode_utf8(input);
  f.length_score = std::min(1.0, static_cast<double>(cps.size()) / 200.0);
  f.symbol_ratio = text::symbol_ratio(input);

  // Tokens: each CJK character, or a maximal run of other word characters
  // (ASCII-lowercased).
  std::unordered_set<std::u32string> types;
  std::size_t tokens = 0;
  std::u32string word;
  const auto flush = [&] {
    if (word.empty()) return;
    types.insert(word);
    ++tokens;
    word.clear();
  };
  for (char32_t cp : cps) {
    if (text::is_cjk(cp)) {
      flush();
      types.insert(std::u32string(1, cp));
      ++tokens;
    } else if (text::is_word_char(cp)) {
      word.push_back(cp >= U'A' && cp <= U'Z' ? cp - U'A' + U'a' : cp);
    } else {
      flush();
    }
  }
  flush();
  f.type_token_ratio = tokens == 0 ? 0.0 : static_cast<double>(types.size()) / static_cast<double>(tokens);
  return f;
}

double heuristic_quality(const Document& doc) {
  const auto f = heuristic_features(doc.text);
  return 0.25 * f.length_score + 0.5 * f.type_token_ratio + 0.25 * (1.0 - f.symbol_ratio);
}

ScoredCorpus ml_quality_score(const std::vector<Document>& docs, const QualityScorer& scorer,
                              double floor) {
  ScoredCorpus out;
  for (const auto& doc : docs) {
    double score = 0.0;
    try {
      score = scorer(doc);
    } catch (const std::exception& e) {
      throw Error(ErrorCode::kScorerFailure, "scorer failed on '" + doc.id + "': " + e.what(), doc.id);
    }
    if (!(score >= 0.0 && score <= 1.0)) {
      throw Error(ErrorCode::kScorerFailure,
                  "score for '" + doc.id + "' outside [0,1]: " + std::to_string(score), doc.id);
    }
    if (score < floor) {
      out.dropped_ids.push_back(doc.id);
      continue;
    }
    Document scored = doc;
    scored.quality_score = score;
    out.kept.push_back(std::move(scored));
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

enum Cell : std::size_t { kFictionZh = 0, kFictionEn = 1, kNonfictionZh = 2, kNonfictionEn = 3 };
constexpr std::array<std::string_view, 4> kCellNames = {"fiction/zh", "fiction/en", "nonfiction/zh",
                                                        "nonfiction/en"};

std::size_t cell_of(const Document& d) {
  const bool fiction = is_fiction(d.domain);
  const bool zh = d.language == Language::kZh;
  if (fiction) return zh ? kFictionZh : kFictionEn;
  return zh ? kNonfictionZh : kNonfictionEn;
}

struct MarginRange {
  long lo;
  long hi;
  double ideal;
};

MarginRange margin_range(std::size_t target, double fraction, double tol) {
  constexpr double kEps = 1e-9;
  const double t = static_cast<double>(target);
  const long lo = std::max(0L, static_cast<long>(std::ceil(t * (fraction - tol) - kEps)));
  const long hi = std::min(static_cast<long>(target), static_cast<long>(std::floor(t * (fraction + tol) + kEps)));
  return {lo, hi, t * fraction};
}

using CellCounts = std::array<long, 4>;

std::optional<CellCounts> plan_counts(const std::array<long, 4>& avail, const MixSpec& spec,
                                      std::size_t target) {
  const double f = spec.fiction_to_nonfiction.left_fraction();
  const double z = spec.zh_to_en.left_fraction();
  const auto rf = margin_range(target, f, spec.tolerance);
  const auto rz = margin_range(target, z, spec.tolerance);
  if (rf.lo > rf.hi || rz.lo > rz.hi) return std::nullopt;

  struct Candidate {
    double dev;
    long nf;
    long nz;
  };
  std::vector<Candidate> candidates;
  for (long nf = rf.lo; nf <= rf.hi; ++nf) {
    for (long nz = rz.lo; nz <= rz.hi; ++nz) {
      candidates.push_back({std::abs(nf - rf.ideal) + std::abs(nz - rz.ideal), nf, nz});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.dev != b.dev) return a.dev < b.dev;
    if (a.nf != b.nf) return a.nf < b.nf;
    return a.nz < b.nz;
  });

  const long t = static_cast<long>(target);
  for (const auto& c : candidates) {
    // x = fiction/zh count; the other three cells follow from the margins.
    const long lo = std::max({0L, c.nf + c.nz - t, c.nf - avail[kFictionEn], c.nz - avail[kNonfictionZh]});
    const long hi = std::min({c.nf, c.nz, avail[kFictionZh], avail[kNonfictionEn] - t + c.nf + c.nz});
    if (lo > hi) continue;
    const long x = std::clamp(std::lround(static_cast<double>(t) * f * z), lo, hi);
    return CellCounts{x, c.nf - x, c.nz - x, t - c.nf - c.nz + x};
  }
  return std::nullopt;
}

std::string starving_stratum(const std::array<long, 4>& avail, const MixSpec& spec, std::size_t target) {
  const double f = spec.fiction_to_nonfiction.left_fraction();
  const double z = spec.zh_to_en.left_fraction();
  const auto rf = margin_range(target, f, spec.tolerance);
  const auto rz = margin_range(target, z, spec.tolerance);
  const long t = static_cast<long>(target);
  const long zh = avail[kFictionZh] + avail[kNonfictionZh];
  const long en = avail[kFictionEn] + avail[kNonfictionEn];
  const long fic = avail[kFictionZh] + avail[kFictionEn];
  const long non = avail[kNonfictionZh] + avail[kNonfictionEn];
  if (en < t - rz.hi) return "en";
  if (zh < rz.lo) return "zh";
  if (fic < rf.lo) return "fiction";
  if (non < t - rf.hi) return "nonfiction";
  const std::array<double, 4> ideal = {t * f * z, t * f * (1 - z), t * (1 - f) * z, t * (1 - f) * (1 - z)};
  std::size_t worst = 0;
  double worst_gap = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < 4; ++c) {
    const double gap = ideal[c] - static_cast<double>(avail[c]);
    if (gap > worst_gap) {
      worst_gap = gap;
      worst = c;
    }
  }
  return std::string(kCellNames[worst]);
}

std::array<long, 4> availability(const std::vector<Document>& docs) {
  std::array<long, 4> avail{};
  for (const auto& d : docs) ++avail[cell_of(d)];
  return avail;
}

Ratio parse_ratio(std::string_view s) {
  const auto parts = text::split(s, ':');
  if (parts.size() != 2) throw Error(ErrorCode::kInvalidArgument, "bad ratio '" + std::string(s) + "'");
  try {
    std::size_t used_l = 0;
    std::size_t used_r = 0;
    Ratio r{std::stod(parts[0], &used_l), std::stod(parts[1], &used_r)};
    if (used_l != parts[0].size() || used_r != parts[1].size()) throw std::invalid_argument("trailing");
    return r;
  } catch (const std::logic_error&) {
    throw Error(ErrorCode::kInvalidArgument, "bad ratio '" + std::string(s) + "'");
  }
}

}  // namespace

MixSpec parse_mix_spec(std::string_view spec, double tolerance) {
  MixSpec out;
  out.tolerance = tolerance;
  for (const auto& item : text::split(spec, ',')) {
    const auto t = text::trim(item);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::kInvalidArgument, "bad mix entry '" + std::string(t) + "'");
    }
    const auto key = t.substr(0, eq);
    const auto value = t.substr(eq + 1);
    if (key == "fiction") {
      out.fiction_to_nonfiction = parse_ratio(value);
    } else if (key == "lang") {
      out.zh_to_en = parse_ratio(value);
    } else {
      throw Error(ErrorCode::kInvalidArgument, "unknown mix key '" + std::string(key) + "'");
    }
  }
  validate(out);
  return out;
}

void validate(const MixSpec& spec) {
  for (const Ratio& r : {spec.fiction_to_nonfiction, spec.zh_to_en}) {
    if (!(r.left > 0.0 && r.right > 0.0) || !std::isfinite(r.left) || !std::isfinite(r.right)) {
      throw Error(ErrorCode::kInvalidArgument, "mix ratios must be strictly positive");
    }
  }
  if (!(spec.tolerance > 0.0 && spec.tolerance <= 0.5)) {
    throw Error(ErrorCode::kInvalidArgument, "mix tolerance must be in (0, 0.5]");
  }
}

std::vector<Document> mix(const std::vector<Document>& docs, const MixSpec& spec,
                          std::size_t target_count, std::uint64_t seed) {
  validate(spec);
  if (target_count == 0) return {};
  const auto avail = availability(docs);
  const auto plan = plan_counts(avail, spec, target_count);
  if (!plan) {
    const auto stratum = starving_stratum(avail, spec, target_count);
    throw Error(ErrorCode::kInsufficientStratum,
                "not enough '" + stratum + "' documents for target " + std::to_string(target_count),
                stratum);
  }

  std::array<std::vector<std::size_t>, 4> by_cell;
  for (std::size_t i = 0; i < docs.size(); ++i) by_cell[cell_of(docs[i])].push_back(i);

  std::vector<std::size_t> chosen;
  chosen.reserve(target_count);
  for (std::size_t c = 0; c < 4; ++c) {
    SplitMix64 rng(derive_seed(seed, std::string("mix/") + std::string(kCellNames[c])));
    auto& pool = by_cell[c];
    const auto picks = sample_indices(pool.size(), static_cast<std::size_t>((*plan)[c]), rng);
    for (std::size_t p : picks) chosen.push_back(pool[p]);
  }
  SplitMix64 order_rng(derive_seed(seed, "mix/order"));
  shuffle(chosen, order_rng);

  std::vector<Document> out;
  out.reserve(chosen.size());
  for (std::size_t i : chosen) out.push_back(docs[i]);
  return out;
}

std::size_t max_mix_target(const std::vector<Document>& docs, const MixSpec& spec) {
  validate(spec);
  const auto avail = availability(docs);
  const double f = spec.fiction_to_nonfiction.left_fraction();
  const double z = spec.zh_to_en.left_fraction();
  double bound = static_cast<double>(docs.size());
  const auto cap = [&](double available, double share) {
    if (share - spec.tolerance > 0.0) bound = std::min(bound, available / (share - spec.tolerance));
  };
  cap(static_cast<double>(avail[kFictionZh] + avail[kFictionEn]), f);
  cap(static_cast<double>(avail[kNonfictionZh] + avail[kNonfictionEn]), 1.0 - f);
  cap(static_cast<double>(avail[kFictionZh] + avail[kNonfictionZh]), z);
  cap(static_cast<double>(avail[kFictionEn] + avail[kNonfictionEn]), 1.0 - z);
  for (auto t = static_cast<std::size_t>(std::floor(bound)); t > 0; --t) {
    if (plan_counts(avail, spec, t)) return t;
  }
  return 0;
}

}  // namespace weaverforge::corpus
