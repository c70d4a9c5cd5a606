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

#include <map>
#include <set>

#include "test_util.hpp"
#include "weaverforge/corpus.hpp"
#include "weaverforge/error.hpp"
#include "weaverforge/synthetic.hpp"

namespace wf = weaverforge;
namespace corpus = weaverforge::corpus;
using corpus::Document;
using wf::json;

namespace {

Document doc(std::string id, std::string text, wf::Language lang = wf::Language::kEn,
             wf::DomainKind domain = wf::DomainKind::kFictionWriting) {
  Document d;
  d.id = std::move(id);
  d.text = std::move(text);
  d.language = lang;
  d.domain = domain;
  d.subdomain = corpus::default_subdomain(domain);
  return d;
}

std::string long_en(std::size_t words, std::uint64_t seed) {
  return corpus::synthetic_paragraph(wf::Language::kEn, wf::DomainKind::kFictionWriting, words * 6, seed);
}

double share(const std::vector<Document>& docs, bool (*pred)(const Document&)) {
  std::size_t n = 0;
  for (const auto& d : docs) n += pred(d);
  return docs.empty() ? 0.0 : static_cast<double>(n) / docs.size();
}

bool fiction(const Document& d) { return wf::is_fiction(d.domain); }
bool zh(const Document& d) { return d.language == wf::Language::kZh; }

}  // namespace

TEST(Normalize, CollapsesNewlinesAndStripsControls) {
  const auto d = corpus::normalize(doc("a", "Line\x01 one\n\n\n\nLine\ttwo"));
  EXPECT_EQ(d.text, "Line one\n\nLine\ttwo");
}

TEST(Normalize, ComposesToNfc) {
  // "e" + combining acute becomes U+00E9.
  EXPECT_EQ(corpus::normalize_text("caf\x65\xcc\x81"), "caf\xc3\xa9");
}

TEST(Normalize, IdempotentOnRandomInput) {
  wf::SplitMix64 rng(11);
  const std::vector<std::string> atoms = {"a", "\n", "\n\n\n", "\x02", "e\xcc\x81", " ", "中", "\t"};
  for (int i = 0; i < 300; ++i) {
    std::string s = "x";
    for (int k = 0; k < 20; ++k) s += atoms[rng.below(atoms.size())];
    const auto once = corpus::normalize_text(s);
    EXPECT_EQ(corpus::normalize_text(once), once);
    EXPECT_EQ(once.find("\n\n\n"), std::string::npos);
  }
}

TEST(Normalize, WhitespaceOnlyThrows) {
  try {
    corpus::normalize(doc("w", " \n\x03\t "));
    FAIL();
  } catch (const wf::Error& e) {
    EXPECT_EQ(e.code(), wf::ErrorCode::kEmptyAfterNormalize);
  }
}

TEST(Documents, JsonRoundTrip) {
  auto d = doc("d1", "text", wf::Language::kZh, wf::DomainKind::kTechnicalWriting);
  d.popularity = corpus::Popularity{4.5, 100, 3, 1};
  d.quality_score = 0.75;
  const json j = d;
  EXPECT_EQ(j["domain"], "TechnicalWriting");
  EXPECT_EQ(j.get<Document>(), d);
}

TEST(RuleFilter, AttributesFirstFailingRule) {
  corpus::RuleSet rules;
  rules.min_chars = 20;
  const auto good = long_en(20, 1);
  std::vector<Document> docs = {doc("short", "tiny"),
                                doc("symbols", "!!!!!!!!!!!!!!!!!!!!!!!!!!!!!!!!!!!!"),
                                doc("lang", "这是一段中文文字，它被错误地标记为英文文档了。这是第二句中文。"),
                                doc("ok", good),
                                doc("dup", good)};
  const auto r = corpus::rule_filter(docs, rules);
  ASSERT_EQ(r.kept.size(), 1u);
  EXPECT_EQ(r.kept[0].id, "ok");
  EXPECT_EQ(r.report.input_count, 5u);
  EXPECT_EQ(r.report.kept_count, 1u);
  std::map<std::string, std::string> why;
  for (const auto& x : r.report.rejected) why[x.doc_id] = x.rule;
  EXPECT_EQ(why["short"], corpus::kRuleMinLen);
  EXPECT_EQ(why["symbols"], corpus::kRuleSymbolRatio);
  EXPECT_EQ(why["lang"], corpus::kRuleLanguage);
  EXPECT_EQ(why["dup"], corpus::kRuleExactDuplicate);
}

TEST(RuleFilter, KeptPlusRejectedIsInput) {
  corpus::SyntheticCorpusOptions o;
  o.count = 300;
  o.noise_share = 0.3;
  const auto docs = corpus::synthetic_corpus(o);
  const auto r = corpus::rule_filter(docs, {});
  EXPECT_EQ(r.kept.size() + r.report.rejected.size(), docs.size());
  EXPECT_FALSE(r.report.rejected.empty());
}

TEST(NearDedup, JaccardBasics) {
  const auto a = corpus::shingle_hashes("abcdefgh", 3);
  EXPECT_DOUBLE_EQ(corpus::jaccard(a, a), 1.0);
  EXPECT_EQ(corpus::shingle_hashes("ab", 5).size(), 1u);
  EXPECT_DOUBLE_EQ(corpus::jaccard(a, corpus::shingle_hashes("zyxwvuts", 3)), 0.0);
}

TEST(NearDedup, DropsCloseCopiesKeepsFirst) {
  const auto base = long_en(80, 3);
  const auto other = long_en(80, 4);
  auto tweaked = base;
  tweaked.back() = '!';
  const auto kept = corpus::near_dedup({doc("a", base), doc("b", tweaked), doc("c", other)}, 13, 0.8);
  ASSERT_EQ(kept.size(), 2u);
  EXPECT_EQ(kept[0].id, "a");
  EXPECT_EQ(kept[1].id, "c");
}

TEST(NearDedup, SurvivorsArePairwiseBelowThreshold) {
  corpus::SyntheticCorpusOptions o;
  o.count = 150;
  o.noise_share = 0.4;
  const auto kept = corpus::near_dedup(corpus::synthetic_corpus(o), 13, 0.8);
  std::vector<std::vector<std::uint64_t>> sh;
  for (const auto& d : kept) sh.push_back(corpus::shingle_hashes(d.text, 13));
  for (std::size_t i = 0; i < sh.size(); ++i) {
    for (std::size_t j = i + 1; j < sh.size(); ++j) ASSERT_LT(corpus::jaccard(sh[i], sh[j]), 0.8);
  }
}

TEST(QualityScore, FloorAndFailure) {
  std::vector<Document> docs = {doc("a", "x"), doc("b", "y")};
  auto r = corpus::ml_quality_score(docs, [](const Document& d) { return d.id == "a" ? 0.9 : 0.1; }, 0.5);
  ASSERT_EQ(r.kept.size(), 1u);
  EXPECT_DOUBLE_EQ(*r.kept[0].quality_score, 0.9);
  EXPECT_EQ(r.dropped_ids, std::vector<std::string>{"b"});
  try {
    corpus::ml_quality_score(docs, [](const Document&) { return 1.5; });
    FAIL();
  } catch (const wf::Error& e) {
    EXPECT_EQ(e.code(), wf::ErrorCode::kScorerFailure);
  }
}

TEST(QualityScore, HeuristicIsInUnitInterval) {
  wf::SplitMix64 rng(8);
  for (int i = 0; i < 100; ++i) {
    const double q = corpus::heuristic_quality(doc("h", long_en(1 + rng.below(60), i)));
    EXPECT_GE(q, 0.0);
    EXPECT_LE(q, 1.0);
  }
}

TEST(Mix, ParseSpec) {
  const auto s = corpus::parse_mix_spec("fiction=1:1,lang=4:1");
  EXPECT_DOUBLE_EQ(s.fiction_to_nonfiction.left_fraction(), 0.5);
  EXPECT_DOUBLE_EQ(s.zh_to_en.left_fraction(), 0.8);
  EXPECT_DOUBLE_EQ(corpus::parse_mix_spec("lang=1:3").zh_to_en.left_fraction(), 0.25);
  for (const char* bad : {"fiction=1-1", "lang=0:0", "colour=1:1", "fiction=a:b", "lang=-1:2"}) {
    EXPECT_THROW(corpus::parse_mix_spec(bad), wf::Error) << bad;
  }
}

TEST(Mix, HitsTargetsAcrossSeeds) {
  corpus::SyntheticCorpusOptions o;
  o.count = 2000;
  o.fiction_share = 0.3;
  o.zh_share = 0.6;
  const auto docs = corpus::synthetic_corpus(o);
  const auto spec = corpus::parse_mix_spec("fiction=1:1,lang=4:1");
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto out = corpus::mix(docs, spec, 600, seed);
    ASSERT_EQ(out.size(), 600u);
    EXPECT_NEAR(share(out, fiction), 0.5, spec.tolerance);
    EXPECT_NEAR(share(out, zh), 0.8, spec.tolerance);
    std::set<std::string> ids;
    for (const auto& d : out) ids.insert(d.id);
    EXPECT_EQ(ids.size(), out.size());
  }
  EXPECT_EQ(json(corpus::mix(docs, spec, 600, 3)).dump(), json(corpus::mix(docs, spec, 600, 3)).dump());
}

TEST(Mix, StarvedStratumIsNamed) {
  std::vector<Document> docs;
  // Languages are balanced for lang=4:1; only non-fiction is missing.
  for (int i = 0; i < 50; ++i) {
    docs.push_back(doc("f" + std::to_string(i), "x", i % 5 == 0 ? wf::Language::kEn : wf::Language::kZh));
  }
  try {
    corpus::mix(docs, corpus::parse_mix_spec("fiction=1:1"), 20, 1);
    FAIL();
  } catch (const wf::Error& e) {
    EXPECT_EQ(e.code(), wf::ErrorCode::kInsufficientStratum);
    EXPECT_NE(e.detail().find("nonfiction"), std::string::npos);
  }
}

TEST(Mix, MaxTargetIsFeasible) {
  corpus::SyntheticCorpusOptions o;
  o.count = 500;
  const auto docs = corpus::synthetic_corpus(o);
  const auto spec = corpus::parse_mix_spec("fiction=1:1,lang=4:1");
  const auto n = corpus::max_mix_target(docs, spec);
  EXPECT_GT(n, 0u);
  EXPECT_EQ(corpus::mix(docs, spec, n, 7).size(), n);
}

TEST(Synthetic, DeterministicAndShaped) {
  corpus::SyntheticCorpusOptions o;
  o.count = 400;
  const auto a = corpus::synthetic_corpus(o);
  EXPECT_EQ(a, corpus::synthetic_corpus(o));
  ASSERT_EQ(a.size(), 400u);
  EXPECT_NEAR(share(a, fiction), 0.5, 0.1);
  EXPECT_NEAR(share(a, zh), 0.75, 0.1);
  for (const auto& d : a) EXPECT_EQ(d.subdomain, corpus::default_subdomain(d.domain));
}
