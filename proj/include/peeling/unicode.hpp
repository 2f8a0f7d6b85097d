// Copyright 2026 The Peeling Authors
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

// Text helpers. All offsets in this project count Unicode scalar values.

#ifndef PEELING_UNICODE_HPP_
#define PEELING_UNICODE_HPP_

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace peeling {

// Decodes UTF-8; invalid sequences decode to U+FFFD.
std::u32string to_u32(std::string_view utf8);
std::string to_utf8(std::u32string_view text);

// Number of scalar values in a UTF-8 string.
std::size_t char_length(std::string_view utf8);

// Scalar-indexed substring [start, end) of a UTF-8 string.
std::string char_substr(std::string_view utf8, std::size_t start,
                        std::size_t end);

bool is_space(char32_t c);
// ASCII letters plus any non-ASCII scalar outside the general punctuation
// and symbol blocks. Good enough for word segmentation without ICU.
bool is_letter(char32_t c);
bool is_digit(char32_t c);
char32_t ascii_lower(char32_t c);
char32_t ascii_upper(char32_t c);
bool is_ascii_upper(char32_t c);

std::string to_lower(std::string_view utf8);
std::u32string to_lower(std::u32string_view text);

// Trims and collapses every whitespace run to a single ASCII space.
std::string normalize_whitespace(std::string_view utf8);
std::string trim(std::string_view utf8);

// Counts non-overlapping occurrences of needle in haystack.
std::size_t count_occurrences(std::string_view haystack,
                              std::string_view needle);

// A maximal run of characters, located by scalar offsets.
struct Token {
  std::u32string text;
  std::size_t start = 0;
  std::size_t end = 0;
};

// Maximal runs of letters (digits and apostrophes are treated as letters
// inside a run so "d'logo" or "3d" stay whole).
std::vector<Token> letter_runs(std::u32string_view text);

// Whitespace-separated tokens with leading/trailing punctuation trimmed.
std::vector<Token> word_tokens(std::u32string_view text);

}  // namespace peeling

#endif  // PEELING_UNICODE_HPP_
