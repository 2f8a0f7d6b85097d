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

// Object and property extraction from referring expressions, either by
// prompting a chat model with in-context samples or by a deterministic
// grammar over the simulator's closed vocabulary.

#ifndef PEELING_EXTRACT_HPP_
#define PEELING_EXTRACT_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "peeling/backends.hpp"
#include "peeling/core.hpp"
#include "peeling/lexicon.hpp"
#include "peeling/unicode.hpp"

namespace peeling {

inline constexpr std::string_view kDefaultPlaceholder = "[Input expression]";
inline constexpr std::size_t kDefaultIclCount = 10;

struct IclSample {
  std::string input;   // the expression
  std::string answer;  // two labelled lines, see format_answer()
};

struct PromptTemplate {
  std::string task_description;
  std::vector<IclSample> icl_samples;
  // Rendered once per ICL sample and once for the input; must contain the
  // placeholder exactly once.
  std::string query = "Expression: [Input expression]\nAnswer:";
  std::string input_placeholder = std::string(kDefaultPlaceholder);

  // Task description plus the bundled hand-labelled samples.
  static PromptTemplate bundled();

  // Throws MissingPlaceholder, or EmptyIcl when require_icl and there are no
  // samples.
  void validate(bool require_icl = true) const;
};

// "object: <object>\nproperties: <p1>; <p2>"
std::string format_answer(std::string_view object,
                          const std::vector<std::string>& properties);

struct ParsedAnswer {
  std::string object;
  std::vector<std::string> properties;
};

// Parses the two labelled lines out of a model reply. Throws ParseError.
ParsedAnswer parse_answer(std::string_view reply);

// The template rendered with every ICL sample in question-and-answer form
// and the placeholder still in place.
std::string render_template(const PromptTemplate& tmpl);

// render_template() with the placeholder replaced by expr.text.
// Throws InvalidExpression, MissingPlaceholder, EmptyIcl.
std::string build_prompt(const PromptTemplate& tmpl, const Expression& expr);

// Up to n expressions drawn uniformly (seeded) from those whose length in
// characters strictly exceeds the corpus mean. Returned in corpus order.
// Throws EmptyCorpus.
std::vector<Expression> select_icl_samples(const std::vector<Expression>& corpus,
                                           std::size_t n, std::uint64_t seed);

// Leftmost case-insensitive occurrence of phrase in text that overlaps none
// of the taken ranges. Whitespace in phrase matches any whitespace run.
std::optional<std::pair<std::size_t, std::size_t>> locate_phrase(
    std::u32string_view text, std::u32string_view phrase,
    const std::vector<std::pair<std::size_t, std::size_t>>& taken = {});

// Throws InvalidExpression, BackendError, ParseError, SpanNotFound.
ExtractionResult extract_llm(const Expression& expr, ChatBackend& backend,
                             const PromptTemplate& tmpl);

// Builds an ExtractionResult from an already-parsed answer (used by
// extract_llm and by gold-file loaders). Throws SpanNotFound.
ExtractionResult locate_answer(const Expression& expr,
                               const ParsedAnswer& answer,
                               ExtractionSource source,
                               const Vocabulary& vocab);

// Grammar: [article] attribute* noun phrase*, where each phrase opens with
// an intro word and runs until the next intro word that follows a noun.
// Falls back to the last known noun, no properties and low_confidence.
ExtractionResult extract_rule_based(const Expression& expr,
                                    const Vocabulary& vocab);
ExtractionResult extract_rule_based(const Expression& expr);

// Resolved vocabulary entry for each word token of text (nullptr if
// unknown). Shared by the rule-based extractor and the simulator.
struct ResolvedToken {
  Token token;
  std::string word;  // resolved lowercase surface, or the raw lowercase token
  const Vocabulary::WordInfo* info = nullptr;
};
std::vector<ResolvedToken> resolve_tokens(std::u32string_view text,
                                          const Vocabulary& vocab);

}  // namespace peeling

#endif  // PEELING_EXTRACT_HPP_
