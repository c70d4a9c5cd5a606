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
#include <string>
#include <vector>

#include "weaverforge/corpus.hpp"

namespace weaverforge::corpus {

// Deterministic pseudo-natural corpus used for fixtures, demos and the
// acceptance suite. Not meant to look like real writing, only to have
// realistic shape: paragraphs, sentences, zh/en mix, domain vocabulary.
struct SyntheticCorpusOptions {
  std::size_t count = 200;
  std::uint64_t seed = 42;
  double fiction_share = 0.5;
  double zh_share = 0.75;
  // Fraction of documents replaced by filter bait (too short, symbol-heavy,
  // mislabeled language, exact and near duplicates).
  double noise_share = 0.0;
  std::string id_prefix = "doc";
};

// One subdomain per domain by default; these match the shipped exemplar and
// principle fixtures.
std::string default_subdomain(DomainKind domain);

std::vector<Document> synthetic_corpus(const SyntheticCorpusOptions& options);

// A single paragraph of roughly `approx_chars` code points.
std::string synthetic_paragraph(Language lang, DomainKind domain, std::size_t approx_chars,
                                std::uint64_t seed);

}  // namespace weaverforge::corpus
