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

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace weaverforge::text {

// Half-open byte range [begin, end) into a UTF-8 string.
struct Range {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  std::string_view of(std::string_view s) const { return s.substr(begin, end - begin); }
  bool operator==(const Range&) const = default;
};

// Malformed sequences decode to U+FFFD.
std::u32string decode_utf8(std::string_view s);
std::string encode_utf8(std::u32string_view s);
void append_utf8(std::string& out, char32_t cp);

std::size_t char_count(std::string_view s);
bool is_char_boundary(std::string_view s, std::size_t byte_offset);

// Byte offset of the `n`-th code point (or s.size() past the end).
std::size_t byte_offset_of_char(std::string_view s, std::size_t n);

bool is_cjk(char32_t cp);
bool is_whitespace(char32_t cp);
bool is_word_char(char32_t cp);

// Fraction of non-whitespace code points that are neither letters nor
// digits. Zero for whitespace-only input.
double symbol_ratio(std::string_view s);

// Fraction of alphabetic code points that are CJK ideographs / kana / hangul.
// Zero when the text has no alphabetic characters.
double cjk_fraction(std::string_view s);

// Paragraphs are separated by any whitespace run containing at least two
// newlines. Returned ranges exclude the separators and any leading/trailing
// whitespace of the whole text.
std::vector<Range> paragraph_ranges(std::string_view s);

// Sentence ranges inside `s`; sentences end after terminal punctuation
// (.!?。！？… plus trailing closing quotes). Whitespace between sentences is
// not part of any range.
std::vector<Range> sentence_ranges(std::string_view s);

std::size_t levenshtein(std::u32string_view a, std::u32string_view b);

// Levenshtein distance over code points divided by the longer length; 0 for
// two empty strings.
double normalized_edit_distance(std::string_view a, std::string_view b);

std::string sha256_hex(std::string_view data);
std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ULL);

std::string_view trim(std::string_view s);
std::string_view trim_newlines(std::string_view s);
std::string to_lower_ascii(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);

}  // namespace weaverforge::text
