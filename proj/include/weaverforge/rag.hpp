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

#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "weaverforge/corpus.hpp"
#include "weaverforge/pair.hpp"

namespace weaverforge::rag {

namespace fs = std::filesystem;

struct Chunk {
  std::string id;
  std::string doc_id;
  std::string text;
  // Byte range of `text` in the source document.
  std::size_t start = 0;
  std::size_t end = 0;
  std::vector<float> embedding;
};

class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::string name() const = 0;
  virtual std::size_t dimension() const = 0;
  // Raw (not necessarily normalized) vector of `dimension()` entries.
  virtual std::vector<float> features(std::string_view text) const = 0;
};

// Bag of character 1..3-grams (ASCII lowercased, whitespace runs folded)
// hashed into `dimension` buckets.
class HashingEmbedder final : public Embedder {
 public:
  explicit HashingEmbedder(std::size_t dimension = 256);

  std::string name() const override;
  std::size_t dimension() const override { return dimension_; }
  std::vector<float> features(std::string_view text) const override;

 private:
  std::size_t dimension_;
};

/// Unit-L2 embedding. Throws EmptyText for empty or whitespace-only text.
std::vector<float> embed(std::string_view text, const Embedder& embedder);

double cosine(const std::vector<float>& a, const std::vector<float>& b);

/// Splits every document on paragraph boundaries; a paragraph longer than
/// max_chunk_chars code points is packed sentence by sentence, and a single
/// oversize sentence is cut at code point boundaries. Only whitespace lies
/// between consecutive chunks, so dropping it restores the document.
/// Embeddings are left empty. Throws InvalidArgument if max_chunk_chars < 100.
std::vector<Chunk> chunk_corpus(const std::vector<corpus::Document>& docs, std::size_t max_chunk_chars);

// Fills every chunk's embedding.
void embed_chunks(std::vector<Chunk>& chunks, const Embedder& embedder, std::size_t workers = 4);

struct Hit {
  std::string chunk_id;
  double similarity = 0.0;
  std::size_t index = 0;
};

/// Exhaustive scan for the highest cosine similarity; ties go to the smaller
/// chunk id. Chunks of `exclude_doc_id` are skipped. Throws EmptyIndex when
/// nothing is eligible.
Hit retrieve_most_similar(const std::vector<float>& query, const std::vector<Chunk>& index,
                          const std::optional<std::string>& exclude_doc_id = std::nullopt);
Hit retrieve_most_similar(std::string_view query_text, const std::vector<Chunk>& index, const Embedder& embedder,
                          const std::optional<std::string>& exclude_doc_id = std::nullopt);

// Single-file index: "WFIDX" magic, format version, embedder name,
// dimension, then every chunk with its vector.
inline constexpr std::uint32_t kIndexVersion = 1;

struct Index {
  std::string embedder;
  std::size_t dimension = 0;
  std::vector<Chunk> chunks;

  static Index build(const std::vector<corpus::Document>& docs, std::size_t max_chunk_chars,
                     const Embedder& embedder, std::size_t workers = 4);
  void save(const fs::path& path) const;
  // Throws InvalidArgument for a foreign or truncated file.
  static Index load(const fs::path& path);
};

struct AugmentedSample {
  InstructionPair base;
  std::string reference_chunk_id;
  std::string reference_text;
  double similarity = 0.0;
};

// Training input with the reference as a block ahead of the instruction.
std::string render_augmented_input(const AugmentedSample& s);

void to_json(json& j, const AugmentedSample& s);

struct AugmentResult {
  std::vector<AugmentedSample> augmented;
  std::vector<InstructionPair> untouched;
};

/// Augments exactly floor(fraction * N) pairs drawn uniformly with the seed;
/// each gets the chunk most similar to its response, excluding chunks of its
/// own source document. Both outputs keep input order. Throws
/// InvalidArgument for a fraction outside [0, 1].
AugmentResult augment(const std::vector<InstructionPair>& pairs, const Index& index, const Embedder& embedder,
                      double fraction, std::uint64_t seed, std::size_t workers = 4);

std::size_t augment_count(std::size_t n, double fraction);

}  // namespace weaverforge::rag
