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

#include "peeling/recombine.hpp"

#include <algorithm>

#include "peeling/errors.hpp"
#include "peeling/unicode.hpp"

namespace peeling {

namespace {

bool is_determiner(std::u32string_view word) {
  const auto w = to_lower(word);
  return w == U"a" || w == U"an" || w == U"the";
}

// Appends every size-s combination of {0..k-1} in lexicographic order,
// stopping once out holds cap entries.
void append_combinations(std::size_t k, std::size_t s, std::size_t cap,
                         std::vector<std::vector<std::size_t>>& out) {
  std::vector<std::size_t> combo(s);
  for (std::size_t i = 0; i < s; ++i) combo[i] = i;
  while (out.size() < cap) {
    out.push_back(combo);
    // Advance to the next combination.
    std::size_t i = s;
    while (i > 0 && combo[i - 1] == k - s + (i - 1)) --i;
    if (i == 0) return;
    ++combo[i - 1];
    for (std::size_t j = i; j < s; ++j) combo[j] = combo[j - 1] + 1;
  }
}

std::string build_text(std::u32string_view text, const ExtractionResult& ex,
                       const std::vector<std::size_t>& retained) {
  std::vector<bool> deleted(text.size(), false);
  for (std::size_t p = 0; p < ex.properties.size(); ++p) {
    if (std::binary_search(retained.begin(), retained.end(), p)) continue;
    const auto& span = ex.properties[p];
    for (std::size_t i = span.start; i < span.end; ++i) deleted[i] = true;
  }
  std::u32string kept;
  for (std::size_t i = 0; i < text.size(); ++i) {
    kept.push_back(deleted[i] ? U' ' : text[i]);
  }
  // A leading determiner swallowed by a deleted span stays with the object.
  const auto original = word_tokens(text);
  std::size_t shift = 0;
  if (!original.empty() && is_determiner(original.front().text) &&
      original.front().end <= ex.object.start &&
      deleted[original.front().start]) {
    kept = original.front().text + U" " + kept;
    shift = original.front().text.size() + 1;
  }
  // A determiner left dangling at the end refers to nothing.
  auto words = word_tokens(kept);
  while (words.size() > 1 && is_determiner(words.back().text) &&
         words.back().start >= ex.object.end + shift) {
    kept.resize(words.back().start);
    words.pop_back();
  }
  return normalize_whitespace(to_utf8(kept));
}

}  // namespace

std::optional<SubsetPolicy> parse_subset_policy(std::string_view name) {
  if (name == "all_proper") return SubsetPolicy::kAllProper;
  if (name == "drop_one") return SubsetPolicy::kDropOne;
  return std::nullopt;
}

std::string_view to_string(SubsetPolicy policy) {
  return policy == SubsetPolicy::kAllProper ? "all_proper" : "drop_one";
}

std::vector<std::vector<std::size_t>> candidate_subsets(
    std::size_t k, const RecombineOptions& options) {
  if (options.cap == 0) throw ConfigError("candidate cap must be at least 1");
  std::vector<std::vector<std::size_t>> out;
  if (k == 0) return {{}};
  if (options.policy == SubsetPolicy::kDropOne) {
    out.push_back({});
    if (k > 1) append_combinations(k, k - 1, options.cap, out);
    if (out.size() > options.cap) out.resize(options.cap);
    return out;
  }
  for (std::size_t s = 0; s < k && out.size() < options.cap; ++s) {
    append_combinations(k, s, options.cap, out);
  }
  return out;
}

std::vector<CandidateExpression> generate_candidates(
    const Expression& expr, const ExtractionResult& ex,
    const RecombineOptions& options) {
  require_expression(expr);
  if (auto violations = validate_extraction(expr, ex); !violations.empty()) {
    throw InvalidExpression("extraction for '" + expr.id + "' is invalid: " +
                            violations.front().detail);
  }
  const auto text = to_u32(expr.text);
  std::vector<CandidateExpression> out;
  if (ex.properties.empty()) {
    // The object phrase: the object with its leading determiner, if any.
    std::u32string phrase;
    const auto words = word_tokens(text);
    if (!words.empty() && is_determiner(words.front().text) &&
        words.front().end <= ex.object.start) {
      phrase = words.front().text + U" ";
    }
    phrase += std::u32string_view(text).substr(
        ex.object.start, ex.object.end - ex.object.start);
    out.push_back({normalize_whitespace(to_utf8(phrase)), {}, expr.id,
                   ex.object.text});
    return out;
  }
  for (auto& subset : candidate_subsets(ex.properties.size(), options)) {
    CandidateExpression c;
    c.text = build_text(text, ex, subset);
    c.retained = std::move(subset);
    c.parent = expr.id;
    c.head = ex.object.text;
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace peeling
