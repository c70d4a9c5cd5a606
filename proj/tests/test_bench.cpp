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

#include <cmath>
#include <map>
#include <set>

#include "test_util.hpp"
#include "weaverforge/bench.hpp"
#include "weaverforge/error.hpp"
#include "weaverforge/jsonl.hpp"

namespace wf = weaverforge;
namespace bench = weaverforge::bench;
using wf::json;

namespace {

bench::ComparisonRecord rec(std::string id, std::string a, std::string b, bench::Verdict v,
                            bench::Dimension d = bench::Dimension::kOverall, std::uint64_t ts = 0) {
  bench::ComparisonRecord r;
  r.id = std::move(id);
  r.instruction_id = "i1";
  r.model_a = std::move(a);
  r.model_b = std::move(b);
  r.verdict = v;
  r.dimension = d;
  r.annotator = "ann";
  r.timestamp = ts;
  return r;
}

class DownBackend final : public wf::llm::Backend {
 public:
  std::string name() const override { return "down"; }
  wf::llm::ChatResponse send(const wf::llm::ChatRequest&) const override {
    throw std::runtime_error("connection refused");
  }
};

std::vector<bench::BenchInstruction> two_instructions() {
  return {{"w1", wf::DomainKind::kFictionWriting, "Write a fable about a heron.", wf::Language::kEn},
          {"w2", wf::DomainKind::kMarketingWriting, "Draft a slogan for green tea.", wf::Language::kEn}};
}

// Straightforward fold used as a second implementation.
std::map<std::string, double> fold_oracle(std::vector<bench::ComparisonRecord> records, double k) {
  std::sort(records.begin(), records.end(), [](const auto& x, const auto& y) {
    return x.timestamp != y.timestamp ? x.timestamp < y.timestamp : x.id < y.id;
  });
  std::map<std::string, double> r;
  for (const auto& c : records) {
    if (!r.count(c.model_a)) r[c.model_a] = 1500.0;
    if (!r.count(c.model_b)) r[c.model_b] = 1500.0;
    const double ra = r[c.model_a], rb = r[c.model_b];
    const double ea = 1.0 / (1.0 + std::pow(10.0, (rb - ra) / 400.0));
    const double eb = 1.0 / (1.0 + std::pow(10.0, (ra - rb) / 400.0));
    const double sa = c.verdict == bench::Verdict::kA ? 1.0 : c.verdict == bench::Verdict::kB ? 0.0 : 0.5;
    r[c.model_a] = ra + k * (sa - ea);
    r[c.model_b] = rb + k * ((1.0 - sa) - eb);
  }
  return r;
}

}  // namespace

TEST(Judge, OverallIsComputedFromTheThreeDimensions) {
  auto gw = wf_test::scripted_gateway(
      wf::llm::ResponseScript({{"judge", "", "Fine work.\nstyle: 8.94\nrelevance: 8.96\ncreativity: 7.71"}}));
  auto s = bench::judge("Write.", "Text.", *gw);
  EXPECT_DOUBLE_EQ(s.style, 8.94);
  EXPECT_NEAR(s.overall(), 8.54, 0.005);
  EXPECT_EQ(bench::format_score(s.overall()), "8.54");

  auto gw2 = wf_test::scripted_gateway(
      wf::llm::ResponseScript({{"judge", "", "style 8.83, relevance 9.55, creativity 6.58"}}));
  EXPECT_EQ(bench::format_score(bench::judge("Write.", "Text.", *gw2).overall()), "8.32");
}

TEST(Judge, EqualDimensionsGiveThatOverall) {
  for (double x : {1.0, 3.25, 7.5, 10.0}) {
    bench::JudgeScore s{x, x, x};
    EXPECT_NEAR(s.overall(), x, 1e-12);
  }
}

TEST(Judge, OverallInReplyIsIgnored) {
  auto gw = wf_test::scripted_gateway(
      wf::llm::ResponseScript({{"judge", "", "style: 6\nrelevance: 6\ncreativity: 9\noverall: 1"}}));
  EXPECT_NEAR(bench::judge("I", "R", *gw).overall(), 7.0, 1e-12);
}

TEST(Judge, MissingDimensionIsParseFailure) {
  auto gw = wf_test::scripted_gateway(wf::llm::ResponseScript({{"judge", "", "style: 6\nrelevance: 6"}}));
  try {
    bench::judge("I", "R", *gw);
    FAIL();
  } catch (const wf::Error& e) {
    EXPECT_EQ(e.code(), wf::ErrorCode::kParseFailure);
  }
}

TEST(Judge, ScoreJsonCarriesOverall) {
  const json j = bench::JudgeScore{8, 9, 7};
  EXPECT_DOUBLE_EQ(j["overall"].get<double>(), 8.0);
  EXPECT_EQ(j.get<bench::JudgeScore>(), (bench::JudgeScore{8, 9, 7}));
}

TEST(Collect, OneResponsePerInstructionAndModel) {
  std::vector<bench::ModelHandle> models;
  for (int i = 0; i < 3; ++i) {
    models.push_back({"m" + std::to_string(i), wf_test::default_gateway(100 + i), ""});
  }
  auto r = bench::collect_outputs(two_instructions(), models, {});
  EXPECT_EQ(r.responses.size(), 6u);
  EXPECT_TRUE(r.failures.empty());
  std::set<std::pair<std::string, std::string>> keys;
  for (const auto& x : r.responses) keys.insert({x.instruction_id, x.model});
  EXPECT_EQ(keys.size(), 6u);

  auto again = bench::collect_outputs(two_instructions(), {{"m0", wf_test::default_gateway(100), ""},
                                                            {"m1", wf_test::default_gateway(101), ""},
                                                            {"m2", wf_test::default_gateway(102), ""}},
                                      {});
  EXPECT_EQ(json(r.responses).dump(), json(again.responses).dump());
}

TEST(Collect, DownBackendIsRecordedNotFatal) {
  wf::llm::GatewayOptions no_retry;
  no_retry.max_retries = 0;
  std::vector<bench::ModelHandle> models = {
      {"m0", wf_test::default_gateway(1), ""},
      {"m1", wf_test::default_gateway(2), ""},
      {"broken", std::make_shared<wf::llm::Gateway>(std::make_shared<DownBackend>(), no_retry), ""}};
  auto r = bench::collect_outputs(two_instructions(), models, {});
  EXPECT_EQ(r.responses.size(), 4u);
  ASSERT_EQ(r.failures.size(), 2u);
  for (const auto& f : r.failures) EXPECT_EQ(f.model, "broken");
}

TEST(Elo, ExpectationValues) {
  EXPECT_DOUBLE_EQ(bench::elo_expected(1500, 1500), 0.5);
  EXPECT_NEAR(bench::elo_expected(1500, 1700), 1.0 / (1.0 + std::sqrt(10.0)), 1e-15);
  EXPECT_NEAR(bench::elo_expected(1500, 1700), 0.240253, 1e-6);
}

TEST(Elo, ComplementOnRandomPairs) {
  wf::SplitMix64 rng(17);
  for (int i = 0; i < 1000; ++i) {
    const double a = 800 + rng.unit() * 1600, b = 800 + rng.unit() * 1600;
    EXPECT_NEAR(bench::elo_expected(a, b) + bench::elo_expected(b, a), 1.0, 1e-12);
  }
}

TEST(Elo, SingleUpdates) {
  bench::EloTable t;
  t = bench::elo_update(t, rec("r1", "x", "y", bench::Verdict::kA));
  EXPECT_DOUBLE_EQ(t.ratings.at("x"), 1516.0);
  EXPECT_DOUBLE_EQ(t.ratings.at("y"), 1484.0);
  EXPECT_EQ(t.processed_count, 1u);

  bench::EloTable tie;
  tie = bench::elo_update(tie, rec("r1", "x", "y", bench::Verdict::kTie));
  EXPECT_DOUBLE_EQ(tie.ratings.at("x"), 1500.0);
  EXPECT_DOUBLE_EQ(tie.ratings.at("y"), 1500.0);
}

TEST(Elo, SelfPlayRejected) {
  try {
    bench::elo_update(bench::EloTable{}, rec("r", "x", "x", bench::Verdict::kA));
    FAIL();
  } catch (const wf::Error& e) {
    EXPECT_EQ(e.code(), wf::ErrorCode::kSelfPlay);
  }
}

TEST(Elo, ZeroSumAfterEveryUpdate) {
  wf::SplitMix64 rng(5);
  bench::EloTable t;
  const std::vector<std::string> models = {"a", "b", "c", "d", "e"};
  for (const auto& m : models) t.ratings[m] = t.params.initial;
  for (int i = 0; i < 2000; ++i) {
    const auto x = rng.below(5);
    const auto y = (x + 1 + rng.below(4)) % 5;
    t = bench::elo_update(t, rec("r" + std::to_string(i), models[x], models[y],
                                 static_cast<bench::Verdict>(rng.below(3))));
    double sum = 0;
    for (auto& [m, r] : t.ratings) sum += r;
    ASSERT_NEAR(sum, 1500.0 * 5, 1e-6);
  }
}

TEST(Elo, RankEmptyAndDominance) {
  EXPECT_TRUE(bench::elo_rank({}, {}).empty());
  std::vector<bench::ComparisonRecord> rs;
  wf::SplitMix64 rng(9);
  const std::vector<std::string> others = {"p", "q", "r"};
  int n = 0;
  for (auto d : bench::kAllDimensions) {
    for (int i = 0; i < 40; ++i) {
      const auto& o = others[rng.below(3)];
      const bool x_first = rng.below(2) == 0;
      ++n;
      rs.push_back(rec("r" + std::to_string(n), x_first ? "x" : o, x_first ? o : "x",
                       x_first ? bench::Verdict::kA : bench::Verdict::kB, d, static_cast<std::uint64_t>(n)));
      // Some games among the others.
      ++n;
      rs.push_back(rec("r" + std::to_string(n), "p", "q", static_cast<bench::Verdict>(rng.below(3)), d,
                       static_cast<std::uint64_t>(n)));
    }
  }
  for (double k : {1.0, 16.0, 32.0, 64.0}) {
    auto boards = bench::elo_rank(rs, {1500.0, k});
    ASSERT_EQ(boards.size(), bench::kAllDimensions.size());
    for (auto& [d, rows] : boards) {
      ASSERT_FALSE(rows.empty());
      EXPECT_EQ(rows.front().model, "x") << bench::to_string(d) << " K=" << k;
      for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_GE(rows[i - 1].rating, rows[i].rating);
    }
  }
}

TEST(Elo, RankIgnoresInputOrderAndMatchesFold) {
  std::vector<bench::ComparisonRecord> rs;
  wf::SplitMix64 rng(21);
  const std::vector<std::string> models = {"a", "b", "c", "d"};
  for (int i = 0; i < 200; ++i) {
    const auto x = rng.below(4);
    const auto y = (x + 1 + rng.below(3)) % 4;
    char id[16];
    std::snprintf(id, sizeof id, "c%03d", i);
    // Duplicate timestamps force the id tiebreak.
    rs.push_back(rec(id, models[x], models[y], static_cast<bench::Verdict>(rng.below(3)),
                     bench::Dimension::kCreativity, rng.below(60)));
  }
  auto shuffled = rs;
  wf::SplitMix64 srng(3);
  wf::shuffle(shuffled, srng);
  auto a = bench::elo_rank(rs, {});
  auto b = bench::elo_rank(shuffled, {});
  ASSERT_EQ(a.size(), 1u);
  ASSERT_EQ(json(a.at(bench::Dimension::kCreativity)).dump(), json(b.at(bench::Dimension::kCreativity)).dump());
  const auto oracle = fold_oracle(rs, 32.0);
  for (const auto& row : a.at(bench::Dimension::kCreativity)) EXPECT_EQ(row.rating, oracle.at(row.model));
}

TEST(Elo, DimensionsAreIndependent) {
  std::vector<bench::ComparisonRecord> rs = {
      rec("1", "x", "y", bench::Verdict::kA, bench::Dimension::kStyle, 1),
      rec("2", "x", "y", bench::Verdict::kB, bench::Dimension::kCreativity, 2)};
  auto boards = bench::elo_rank(rs, {});
  EXPECT_EQ(boards.at(bench::Dimension::kStyle).front().model, "x");
  EXPECT_EQ(boards.at(bench::Dimension::kCreativity).front().model, "y");
  EXPECT_EQ(boards.count(bench::Dimension::kOverall), 0u);
  EXPECT_EQ(boards.at(bench::Dimension::kStyle).front().games, 1u);
}

TEST(Elo, ShippedFixtureMatchesReferenceFold) {
  const auto dir = wf_test::source_dir() / "tests" / "fixtures";
  auto records = wf::io::read_jsonl<bench::ComparisonRecord>(dir / "elo_200.jsonl");
  ASSERT_EQ(records.size(), 200u);
  const json expected = json::parse(wf::io::read_file(dir / "elo_200_expected.json"));
  auto boards = bench::elo_rank(records, {});
  std::size_t checked = 0;
  for (const auto& [dim, table] : expected.items()) {
    const auto& rows = boards.at(bench::parse_dimension(dim));
    ASSERT_EQ(rows.size(), table.size()) << dim;
    for (const auto& row : rows) {
      EXPECT_EQ(row.rating, table.at(row.model).get<double>()) << dim << " " << row.model;
      ++checked;
    }
  }
  EXPECT_GT(checked, 0u);
}

TEST(Records, JsonRoundTripAndValidation) {
  auto r = rec("r1", "x", "y", bench::Verdict::kTie, bench::Dimension::kFluency, 7);
  const json j = r;
  EXPECT_EQ(j["verdict"], "Tie");
  EXPECT_EQ(j["dimension"], "fluency");
  EXPECT_EQ(j.get<bench::ComparisonRecord>(), r);
  EXPECT_THROW(bench::parse_verdict("C"), wf::Error);
  EXPECT_THROW(bench::parse_dimension("speed"), wf::Error);
  json bad = j;
  bad["model_b"] = "x";
  EXPECT_THROW(bad.get<bench::ComparisonRecord>(), wf::Error);
}

TEST(Export, SampleCountsAndTargets) {
  const auto instructions = two_instructions();
  std::vector<bench::ModelOutput> outputs = {{"w1", "m0", "Heron story zero."}, {"w1", "m1", "Heron story one."}};
  std::vector<bench::JudgedItem> judged = {{"w1", "m0", bench::JudgeScore{8, 9, 7}},
                                           {"w1", "m1", bench::JudgeScore{6, 6, 6}}};
  std::vector<bench::ComparisonRecord> cmp = {rec("c1", "m0", "m1", bench::Verdict::kA),
                                              rec("c2", "m0", "m1", bench::Verdict::kB),
                                              rec("c3", "m0", "m1", bench::Verdict::kTie)};
  for (auto& c : cmp) c.instruction_id = "w1";
  auto samples = bench::export_eval_training_samples(instructions, outputs, judged, cmp);
  ASSERT_EQ(samples.size(), judged.size() + cmp.size());
  EXPECT_EQ(samples[0].kind, "eval_grading");
  EXPECT_NE(samples[0].input.find("Heron story zero."), std::string::npos);
  EXPECT_NE(samples[0].target.find("overall: 8.00"), std::string::npos);
  std::set<std::string> targets;
  for (std::size_t i = 2; i < samples.size(); ++i) {
    EXPECT_EQ(samples[i].kind, "eval_pairwise");
    EXPECT_NE(samples[i].input.find("Heron story one."), std::string::npos);
    EXPECT_EQ(samples[i].input.find("m0"), std::string::npos) << "model names stay out of the prompt";
    targets.insert(samples[i].target);
  }
  EXPECT_EQ(targets.size(), 3u) << "A, B and Tie encode distinctly";
}

TEST(Export, MissingOutputIsAnError) {
  auto cmp = rec("c1", "m0", "m9", bench::Verdict::kA);
  cmp.instruction_id = "w1";
  std::vector<bench::ModelOutput> outputs = {{"w1", "m0", "x"}};
  EXPECT_THROW(bench::export_eval_training_samples(two_instructions(), outputs, {}, {cmp}), wf::Error);
}

TEST(Pairs, EveryModelPairPerInstructionWithSeededPositions) {
  std::vector<bench::ModelOutput> outputs;
  for (const auto& i : two_instructions()) {
    for (std::string m : {"m0", "m1", "m2"}) outputs.push_back({i.id, m, i.id + " by " + m});
  }
  auto pairs = bench::make_comparison_pairs(two_instructions(), outputs, 4);
  ASSERT_EQ(pairs.size(), 6u);
  std::set<std::string> ids;
  for (const auto& p : pairs) {
    ids.insert(p.comparison_id);
    EXPECT_NE(p.model_a, p.model_b);
    EXPECT_EQ(p.response_a, p.instruction_id + " by " + p.model_a);
  }
  EXPECT_EQ(ids.size(), 6u);
  EXPECT_EQ(json(pairs).dump(), json(bench::make_comparison_pairs(two_instructions(), outputs, 4)).dump());
}

TEST(Instructions, LoadValidatesUniqueIds) {
  wf_test::TempDir dir;
  std::ofstream(dir / "b.jsonl") << R"({"id":"a","domain":"FictionWriting","text":"x","language":"en"})" << "\n"
                                 << R"({"id":"a","domain":"FictionWriting","text":"y","language":"zh"})" << "\n";
  EXPECT_THROW(bench::load_instructions(dir / "b.jsonl"), wf::Error);
}
