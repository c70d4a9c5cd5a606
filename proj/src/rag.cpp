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

#include "weaverforge/rag.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "weaverforge/error.hpp"
#include "weaverforge/jsonl.hpp"
#include "weaverforge/parallel.hpp"
#include "weaverforge/rng.hpp"
#include "weaverforge/sections.hpp"
#include "weaverforge/text.hpp"

namespace weaverforge::rag {

HashingEmbedder::HashingEmbedder(std::size_t dimension) : dimension_(dimension) {
  if (dimension_ == 0) throw Error(ErrorCode::kInvalidArgument, "embedding dimension must be positive");
}

std::string HashingEmbedder::name() const { return "hashing-ngram-1-3/" + std::to_string(dimension_); }

std::vector<float> HashingEmbedder::features(std::string_view text) const {
  std::u32string cps;
  bool in_space = false;
  for (char32_t c : text::decode_utf8(text)) {
    if (text::is_whitespace(c)) {
      in_space = true;
      continue;
    }
    if (in_space && !cps.empty()) cps.push_back(U' ');
    in_space = false;
    cps.push_back(c < 128 ? static_cast<char32_t>(std::tolower(static_cast<int>(c))) : c);
  }
  std::vector<float> v(dimension_, 0.0f);
  for (std::size_t n = 1; n <= 3; ++n) {
    for (std::size_t i = 0; i + n <= cps.size(); ++i) {
      std::string gram(1, static_cast<char>('0' + n));
      for (std::size_t k = 0; k < n; ++k) text::append_utf8(gram, cps[i + k]);
      v[text::fnv1a64(gram) % dimension_] += 1.0f;
    }
  }
  return v;
}

std::vector<float> embed(std::string_view s, const Embedder& embedder) {
  if (text::trim(s).empty()) throw Error(ErrorCode::kEmptyText, "cannot embed empty text");
  std::vector<float> v = embedder.features(s);
  double norm = 0.0;
  for (float x : v) norm += static_cast<double>(x) * x;
  norm = std::sqrt(norm);
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw Error(ErrorCode::kEmptyText, "embedder " + embedder.name() + " produced a zero vector");
  }
  for (float& x : v) x = static_cast<float>(x / norm);
  return v;
}

double cosine(const std::vector<float>& a, const std::vector<float>& b) {
  if (a.size() != b.size()) throw Error(ErrorCode::kInvalidArgument, "vector dimensions differ");
  double dot = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) dot += static_cast<double>(a[i]) * b[i];
  return dot;
}

// ---------------------------------------------------------------------------

namespace {

void push_chunk(std::vector<Chunk>& out, const corpus::Document& d, std::size_t begin, std::size_t end,
                std::size_t& counter) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "#%04zu", counter++);
  Chunk c;
  c.id = d.id + buf;
  c.doc_id = d.id;
  c.start = begin;
  c.end = end;
  c.text = d.text.substr(begin, end - begin);
  out.push_back(std::move(c));
}

// Cuts [begin, end) into pieces of at most max_chars code points.
void hard_split(std::vector<Chunk>& out, const corpus::Document& d, std::size_t begin, std::size_t end,
                std::size_t max_chars, std::size_t& counter) {
  while (begin < end) {
    const std::string_view rest(d.text.data() + begin, end - begin);
    std::size_t cut = begin + text::byte_offset_of_char(rest, max_chars);
    // Leading whitespace of the next piece becomes a gap.
    std::size_t piece_end = cut;
    while (piece_end > begin && std::isspace(static_cast<unsigned char>(d.text[piece_end - 1]))) --piece_end;
    if (piece_end == begin) piece_end = cut;
    push_chunk(out, d, begin, piece_end, counter);
    begin = cut;
    while (begin < end && std::isspace(static_cast<unsigned char>(d.text[begin]))) ++begin;
  }
}

}  // namespace

std::vector<Chunk> chunk_corpus(const std::vector<corpus::Document>& docs, std::size_t max_chunk_chars) {
  if (max_chunk_chars < 100) throw Error(ErrorCode::kInvalidArgument, "max_chunk_chars must be at least 100");
  std::vector<Chunk> out;
  for (const auto& d : docs) {
    std::size_t counter = 0;
    const std::string_view s = d.text;
    for (const auto& para : text::paragraph_ranges(s)) {
      if (text::char_count(para.of(s)) <= max_chunk_chars) {
        push_chunk(out, d, para.begin, para.end, counter);
        continue;
      }
      auto sentences = text::sentence_ranges(para.of(s));
      for (auto& r : sentences) {
        r.begin += para.begin;
        r.end += para.begin;
      }
      std::size_t i = 0;
      while (i < sentences.size()) {
        const std::size_t begin = sentences[i].begin;
        if (text::char_count(sentences[i].of(s)) > max_chunk_chars) {
          hard_split(out, d, begin, sentences[i].end, max_chunk_chars, counter);
          ++i;
          continue;
        }
        std::size_t j = i;
        while (j + 1 < sentences.size() &&
               text::char_count(s.substr(begin, sentences[j + 1].end - begin)) <= max_chunk_chars) {
          ++j;
        }
        push_chunk(out, d, begin, sentences[j].end, counter);
        i = j + 1;
      }
    }
  }
  return out;
}

void embed_chunks(std::vector<Chunk>& chunks, const Embedder& embedder, std::size_t workers) {
  auto vectors = parallel_map(chunks.size(), workers, [&](std::size_t i) { return embed(chunks[i].text, embedder); });
  for (std::size_t i = 0; i < chunks.size(); ++i) chunks[i].embedding = std::move(vectors[i]);
}

Hit retrieve_most_similar(const std::vector<float>& query, const std::vector<Chunk>& index,
                          const std::optional<std::string>& exclude_doc_id) {
  std::optional<Hit> best;
  for (std::size_t i = 0; i < index.size(); ++i) {
    const Chunk& c = index[i];
    if (exclude_doc_id && c.doc_id == *exclude_doc_id) continue;
    const double sim = cosine(query, c.embedding);
    if (!best || sim > best->similarity || (sim == best->similarity && c.id < best->chunk_id)) {
      best = Hit{c.id, sim, i};
    }
  }
  if (!best) {
    throw Error(ErrorCode::kEmptyIndex,
                exclude_doc_id ? "no chunk outside document " + *exclude_doc_id : std::string("index is empty"));
  }
  return *best;
}

Hit retrieve_most_similar(std::string_view query_text, const std::vector<Chunk>& index, const Embedder& embedder,
                          const std::optional<std::string>& exclude_doc_id) {
  if (index.empty()) throw Error(ErrorCode::kEmptyIndex, "index is empty");
  return retrieve_most_similar(embed(query_text, embedder), index, exclude_doc_id);
}

// ---------------------------------------------------------------------------

namespace {

constexpr char kMagic[5] = {'W', 'F', 'I', 'D', 'X'};

template <typename T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

void put_string(std::string& out, const std::string& s) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out += s;
}

class Reader {
 public:
  Reader(std::string data, std::string path) : data_(std::move(data)), path_(std::move(path)) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, data_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::string get_string() {
    const auto n = get<std::uint32_t>();
    need(n);
    std::string s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::string_view raw(std::size_t n) {
    need(n);
    std::string_view v(data_.data() + pos_, n);
    pos_ += n;
    return v;
  }
  bool done() const { return pos_ == data_.size(); }
  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorCode::kInvalidArgument, path_ + ": " + what);
  }

 private:
  void need(std::size_t n) const {
    if (data_.size() - pos_ < n) fail("truncated index file");
  }
  std::string data_;
  std::string path_;
  std::size_t pos_ = 0;
};

}  // namespace

Index Index::build(const std::vector<corpus::Document>& docs, std::size_t max_chunk_chars, const Embedder& embedder,
                   std::size_t workers) {
  Index idx;
  idx.embedder = embedder.name();
  idx.dimension = embedder.dimension();
  idx.chunks = chunk_corpus(docs, max_chunk_chars);
  embed_chunks(idx.chunks, embedder, workers);
  return idx;
}

void Index::save(const fs::path& path) const {
  std::string out(kMagic, sizeof kMagic);
  put<std::uint32_t>(out, kIndexVersion);
  put_string(out, embedder);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(dimension));
  put<std::uint64_t>(out, chunks.size());
  for (const auto& c : chunks) {
    if (c.embedding.size() != dimension) {
      throw Error(ErrorCode::kInvalidArgument, "chunk " + c.id + " has no embedding of the index dimension");
    }
    put_string(out, c.id);
    put_string(out, c.doc_id);
    put_string(out, c.text);
    put<std::uint64_t>(out, c.start);
    put<std::uint64_t>(out, c.end);
    out.append(reinterpret_cast<const char*>(c.embedding.data()), c.embedding.size() * sizeof(float));
  }
  io::write_file_atomic(path, out);
}

Index Index::load(const fs::path& path) {
  Reader r(io::read_file(path), path.string());
  if (r.raw(sizeof kMagic) != std::string_view(kMagic, sizeof kMagic)) r.fail("not a WFIDX index file");
  const auto version = r.get<std::uint32_t>();
  if (version != kIndexVersion) r.fail("unsupported index version " + std::to_string(version));
  Index idx;
  idx.embedder = r.get_string();
  idx.dimension = r.get<std::uint32_t>();
  const auto count = r.get<std::uint64_t>();
  for (std::uint64_t i = 0; i < count; ++i) {
    Chunk c;
    c.id = r.get_string();
    c.doc_id = r.get_string();
    c.text = r.get_string();
    c.start = r.get<std::uint64_t>();
    c.end = r.get<std::uint64_t>();
    const auto bytes = r.raw(idx.dimension * sizeof(float));
    c.embedding.resize(idx.dimension);
    std::memcpy(c.embedding.data(), bytes.data(), bytes.size());
    idx.chunks.push_back(std::move(c));
  }
  if (!r.done()) r.fail("trailing bytes after the last chunk");
  return idx;
}

// ---------------------------------------------------------------------------

std::string render_augmented_input(const AugmentedSample& s) {
  std::string out = render_section("REFERENCE", s.reference_text);
  if (s.base.context) out += render_section("CONTEXT", *s.base.context);
  out += render_section("INSTRUCTION", s.base.instruction);
  return out;
}

void to_json(json& j, const AugmentedSample& s) {
  j = json{{"id", s.base.id},
           {"input", render_augmented_input(s)},
           {"target", s.base.response},
           {"reference_chunk_id", s.reference_chunk_id},
           {"reference_text", s.reference_text},
           {"similarity", s.similarity},
           {"base", s.base}};
}

std::size_t augment_count(std::size_t n, double fraction) {
  // The epsilon keeps products such as 0.29 * 100 from flooring to 28.
  return std::min(n, static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n) + 1e-9)));
}

AugmentResult augment(const std::vector<InstructionPair>& pairs, const Index& index, const Embedder& embedder,
                      double fraction, std::uint64_t seed, std::size_t workers) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "augment fraction must lie in [0, 1]");
  }
  if (index.embedder != embedder.name()) {
    throw Error(ErrorCode::kInvalidArgument,
                "index was built with " + index.embedder + ", not " + embedder.name());
  }
  const std::size_t k = augment_count(pairs.size(), fraction);
  SplitMix64 rng(derive_seed(seed, "rag/augment"));
  auto picked = sample_indices(pairs.size(), k, rng);
  std::sort(picked.begin(), picked.end());

  const auto hits = parallel_map(picked.size(), workers, [&](std::size_t i) {
    const InstructionPair& p = pairs[picked[i]];
    const std::optional<std::string> exclude =
        p.source_doc_id.empty() ? std::nullopt : std::optional<std::string>(p.source_doc_id);
    return retrieve_most_similar(embed(p.response, embedder), index.chunks, exclude);
  });

  AugmentResult result;
  std::size_t next = 0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (next < picked.size() && picked[next] == i) {
      const Hit& h = hits[next++];
      result.augmented.push_back({pairs[i], h.chunk_id, index.chunks[h.index].text, h.similarity});
    } else {
      result.untouched.push_back(pairs[i]);
    }
  }
  return result;
}

}  // namespace weaverforge::rag
