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

#include "test_util.hpp"
#include "weaverforge/error.hpp"
#include "weaverforge/rag.hpp"
#include "weaverforge/synthetic.hpp"

namespace {

using namespace weaverforge;
using namespace weaverforge::rag;
using corpus::Document;

Document doc(std::string id, std::string text) {
  Document d;
  d.id = std::move(id);
  d.text = std::move(text);
  d.language = Language::kEn;
  d.domain = DomainKind::kCreativeNonFiction;
  d.subdomain = "blog";
  return d;
}

std::string sentences(const std::string& stem, int n) {
  std::string out;
  for (int i = 0; i < n; ++i) out += (out.empty() ? "" : " ") + stem + " number " + std::to_string(i) + " ends.";
  return out;
}

// Restores a document from its chunks, requiring whitespace-only gaps.
std::string reconstruct(const std::string& text, const std::vector<const Chunk*>& chunks) {
  std::string out;
  std::size_t pos = 0;
  for (const auto* c : chunks) {
    EXPECT_GE(c->start, pos);
    for (std::size_t i = pos; i < c->start; ++i) EXPECT_TRUE(std::isspace(static_cast<unsigned char>(text[i])));
    out += text.substr(pos, c->start - pos);
    EXPECT_EQ(c->text, text.substr(c->start, c->end - c->start));
    out += c->text;
    pos = c->end;
  }
  out += text.substr(pos);
  return out;
}

TEST(Chunking, ThreeParagraphs) {
  const auto d = doc("d", "First paragraph here.\n\nSecond one.\n\nThird and last.");
  const auto chunks = chunk_corpus({d}, 1000);
  ASSERT_EQ(chunks.size(), 3u);
  EXPECT_EQ(chunks[1].text, "Second one.");
  EXPECT_EQ(chunks[1].doc_id, "d");
}

TEST(Chunking, OversizeParagraphSplits) {
  const std::size_t limit = 120;
  const auto d = doc("d", sentences("A steady sentence", 60));
  ASSERT_GE(text::char_count(d.text), 10 * limit);
  const auto chunks = chunk_corpus({d}, limit);
  EXPECT_GE(chunks.size(), 10u);
  for (const auto& c : chunks) EXPECT_LE(text::char_count(c.text), limit);
}

TEST(Chunking, OversizeSentenceIsCut) {
  std::string s;
  for (int i = 0; i < 500; ++i) s += "词";
  const auto chunks = chunk_corpus({doc("d", s)}, 100);
  EXPECT_EQ(chunks.size(), 5u);
  for (const auto& c : chunks) EXPECT_LE(text::char_count(c.text), 100u);
}

TEST(Chunking, MinimumLimit) { EXPECT_THROW(chunk_corpus({}, 99), Error); }

TEST(Chunking, ReconstructionOnSyntheticCorpus) {
  corpus::SyntheticCorpusOptions opt;
  opt.count = 40;
  opt.noise_share = 0.2;
  const auto docs = corpus::synthetic_corpus(opt);
  for (std::size_t limit : {100u, 250u, 5000u}) {
    const auto chunks = chunk_corpus(docs, limit);
    for (const auto& d : docs) {
      std::vector<const Chunk*> mine;
      for (const auto& c : chunks) {
        if (c.doc_id == d.id) mine.push_back(&c);
      }
      EXPECT_EQ(reconstruct(d.text, mine), d.text);
      for (const auto* c : mine) EXPECT_LE(text::char_count(c->text), limit);
    }
  }
}

TEST(Embedding, DeterministicUnitNorm) {
  const HashingEmbedder e;
  for (const std::string t : {"hello", "一段中文文本", "Mixed 文本 with numbers 123", "x"}) {
    const auto a = embed(t, e), b = embed(t, e);
    EXPECT_EQ(a, b);
    double n = 0;
    for (float v : a) n += static_cast<double>(v) * v;
    EXPECT_NEAR(std::sqrt(n), 1.0, 1e-6);
    EXPECT_NEAR(cosine(a, a), 1.0, 1e-6);
  }
}

TEST(Embedding, EmptyTextRejected) {
  const HashingEmbedder e;
  try {
    embed("  \n ", e);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::kEmptyText);
  }
}

std::vector<Chunk> random_index(std::size_t n, std::uint64_t seed, const Embedder& e) {
  corpus::SyntheticCorpusOptions opt;
  opt.count = n / 4 + 1;
  opt.seed = seed;
  auto chunks = chunk_corpus(corpus::synthetic_corpus(opt), 200);
  chunks.resize(std::min(n, chunks.size()));
  embed_chunks(chunks, e, 2);
  return chunks;
}

// Oracle: plain loop over the stored unit vectors, double accumulation,
// first-smallest id on exact ties.
std::pair<std::string, double> brute_force(const std::vector<float>& q, const std::vector<Chunk>& index) {
  std::string best_id;
  double best = -2;
  for (const auto& c : index) {
    double dot = 0;
    for (std::size_t i = 0; i < q.size(); ++i) dot += static_cast<double>(q[i]) * c.embedding[i];
    if (dot > best || (dot == best && c.id < best_id)) {
      best = dot;
      best_id = c.id;
    }
  }
  return {best_id, best};
}

TEST(Retrieval, VerbatimChunkFound) {
  const HashingEmbedder e;
  const auto index = random_index(100, 3, e);
  const auto hit = retrieve_most_similar(index[37].text, index, e);
  EXPECT_NEAR(hit.similarity, 1.0, 1e-6);
  EXPECT_EQ(index[hit.index].text, index[37].text);
}

TEST(Retrieval, MatchesBruteForce) {
  const HashingEmbedder e;
  const auto index = random_index(100, 4, e);
  SplitMix64 rng(17);
  for (int i = 0; i < 50; ++i) {
    const std::string q = corpus::synthetic_paragraph(rng.below(2) ? Language::kZh : Language::kEn,
                                                      kAllDomains[rng.below(4)], 80 + rng.below(200), rng());
    const auto v = embed(q, e);
    const auto hit = retrieve_most_similar(v, index);
    const auto [id, sim] = brute_force(v, index);
    EXPECT_EQ(hit.chunk_id, id);
    EXPECT_NEAR(hit.similarity, sim, 1e-6);
  }
}

TEST(Retrieval, TiesBrokenByChunkId) {
  const HashingEmbedder e;
  std::vector<Chunk> index(3);
  for (int i = 0; i < 3; ++i) {
    index[i].id = std::string(1, static_cast<char>('c' - i));
    index[i].doc_id = "d";
    index[i].text = "same words";
    index[i].embedding = embed("same words", e);
  }
  EXPECT_EQ(retrieve_most_similar("same words", index, e).chunk_id, "a");
}

TEST(Retrieval, EmptyIndex) {
  const HashingEmbedder e;
  try {
    retrieve_most_similar("anything", {}, e);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::kEmptyIndex);
  }
}

TEST(Retrieval, OwnDocumentExcluded) {
  const HashingEmbedder e;
  auto chunks = chunk_corpus({doc("self", "The lighthouse keeper counts gulls at dawn."),
                              doc("other", "A bakery opens before sunrise on the corner.")},
                             100);
  embed_chunks(chunks, e);
  const auto hit = retrieve_most_similar("The lighthouse keeper counts gulls at dawn.", chunks, e, "self");
  EXPECT_EQ(chunks[hit.index].doc_id, "other");
  EXPECT_THROW(retrieve_most_similar("x", {chunks[0]}, e, "self"), Error);
}

TEST(IndexFile, RoundTrip) {
  wf_test::TempDir dir;
  const HashingEmbedder e(64);
  corpus::SyntheticCorpusOptions opt;
  opt.count = 5;
  const auto built = Index::build(corpus::synthetic_corpus(opt), 300, e);
  built.save(dir / "index.bin");
  const auto loaded = Index::load(dir / "index.bin");
  EXPECT_EQ(loaded.embedder, built.embedder);
  EXPECT_EQ(loaded.dimension, 64u);
  ASSERT_EQ(loaded.chunks.size(), built.chunks.size());
  for (std::size_t i = 0; i < built.chunks.size(); ++i) {
    EXPECT_EQ(loaded.chunks[i].id, built.chunks[i].id);
    EXPECT_EQ(loaded.chunks[i].text, built.chunks[i].text);
    EXPECT_EQ(loaded.chunks[i].embedding, built.chunks[i].embedding);
  }
  std::ofstream(dir / "bad.bin") << "not an index";
  EXPECT_THROW(Index::load(dir / "bad.bin"), Error);
}

std::vector<InstructionPair> pairs_for(std::size_t n) {
  std::vector<InstructionPair> out;
  for (std::size_t i = 0; i < n; ++i) {
    InstructionPair p;
    p.id = "p" + std::to_string(i);
    p.instruction = "Write about item " + std::to_string(i);
    p.response = corpus::synthetic_paragraph(Language::kEn, DomainKind::kTechnicalWriting, 120, i);
    p.source_doc_id = "src-" + std::to_string(i % 7);
    out.push_back(p);
  }
  return out;
}

TEST(Augment, ExactCount) {
  const HashingEmbedder e;
  corpus::SyntheticCorpusOptions opt;
  opt.count = 20;
  const auto index = Index::build(corpus::synthetic_corpus(opt), 400, e);
  const auto pairs = pairs_for(200);
  const auto r = augment(pairs, index, e, 0.10, 42);
  EXPECT_EQ(r.augmented.size(), 20u);
  EXPECT_EQ(r.untouched.size(), 180u);
  for (const auto& a : r.augmented) {
    const auto it = std::find_if(index.chunks.begin(), index.chunks.end(),
                                 [&](const Chunk& c) { return c.id == a.reference_chunk_id; });
    ASSERT_NE(it, index.chunks.end());
    EXPECT_NEAR(a.similarity, cosine(embed(a.base.response, e), it->embedding), 1e-9);
    const auto rendered = render_augmented_input(a);
    EXPECT_LT(rendered.find(a.reference_text), rendered.find(a.base.instruction));
  }
}

TEST(Augment, FloorProperty) {
  const HashingEmbedder e;
  corpus::SyntheticCorpusOptions opt;
  opt.count = 4;
  const auto index = Index::build(corpus::synthetic_corpus(opt), 400, e);
  SplitMix64 rng(5);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = rng.below(60);
    const double f = trial % 5 == 0 ? 0.1 * static_cast<double>(rng.below(11)) : rng.unit();
    const auto r = augment(pairs_for(n), index, e, f, trial);
    const auto expected = static_cast<std::size_t>(std::floor(f * static_cast<double>(n) + 1e-9));
    EXPECT_EQ(r.augmented.size(), expected) << n << " " << f;
    EXPECT_EQ(r.augmented.size() + r.untouched.size(), n);
  }
}

TEST(Augment, FractionZeroAndOne) {
  const HashingEmbedder e;
  Index single;
  single.embedder = e.name();
  single.dimension = e.dimension();
  single.chunks = chunk_corpus({doc("ref", "The only reference paragraph in the index.")}, 100);
  embed_chunks(single.chunks, e);
  const auto pairs = pairs_for(10);
  const auto none = augment(pairs, single, e, 0.0, 1);
  EXPECT_TRUE(none.augmented.empty());
  EXPECT_EQ(none.untouched.size(), 10u);
  const auto all = augment(pairs, single, e, 1.0, 1);
  ASSERT_EQ(all.augmented.size(), 10u);
  for (const auto& a : all.augmented) EXPECT_EQ(a.reference_chunk_id, single.chunks[0].id);
  EXPECT_THROW(augment(pairs, single, e, 1.5, 1), Error);
}

TEST(Augment, SeededAndDeterministic) {
  const HashingEmbedder e;
  corpus::SyntheticCorpusOptions opt;
  opt.count = 10;
  const auto index = Index::build(corpus::synthetic_corpus(opt), 400, e);
  const auto pairs = pairs_for(50);
  const auto a = augment(pairs, index, e, 0.2, 9, 1);
  const auto b = augment(pairs, index, e, 0.2, 9, 3);
  EXPECT_EQ(json(a.augmented).dump(), json(b.augmented).dump());
  const auto c = augment(pairs, index, e, 0.2, 10, 1);
  EXPECT_NE(json(a.augmented).dump(), json(c.augmented).dump());
}

}  // namespace
