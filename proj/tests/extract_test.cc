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

#include <algorithm>
#include <numeric>
#include <set>

#include <gtest/gtest.h>

#include "peeling/errors.hpp"
#include "peeling/extract.hpp"
#include "peeling/lexicon.hpp"
#include "peeling/random.hpp"
#include "peeling/unicode.hpp"
#include "testing.hpp"

namespace peeling {
namespace {

using testing::FakeChat;

std::vector<std::string> property_texts(const ExtractionResult& ex) {
  std::vector<std::string> out;
  for (const auto& p : ex.properties) out.push_back(p.text);
  return out;
}

PromptTemplate one_sample_template() {
  PromptTemplate t;
  t.task_description = "Find the object and its properties.";
  t.icl_samples = {{"a small dog", format_answer("dog", {"small"})}};
  return t;
}

TEST(BuildPrompt, ContainsExpressionVerbatim) {
  const auto t = one_sample_template();
  const Expression e{"e", "blue bag with a D logo"};
  const auto prompt = build_prompt(t, e);
  EXPECT_NE(prompt.find("blue bag with a D logo"), std::string::npos);
  EXPECT_EQ(prompt.find(kDefaultPlaceholder), std::string::npos);
}

TEST(BuildPrompt, AddsExactlyOneOccurrence) {
  auto t = one_sample_template();
  t.icl_samples.push_back({"a dog", format_answer("dog", {})});
  for (const std::string text : {"dog", "a small dog", "small"}) {
    const auto before = count_occurrences(render_template(t), text);
    const auto after = count_occurrences(build_prompt(t, {"e", text}), text);
    EXPECT_EQ(after, before + 1) << text;
  }
}

TEST(BuildPrompt, Errors) {
  auto t = one_sample_template();
  EXPECT_THROW(build_prompt(t, {"e", ""}), InvalidExpression);
  t.icl_samples.clear();
  EXPECT_THROW(build_prompt(t, {"e", "bird"}), EmptyIcl);
  t = one_sample_template();
  t.query = "Expression: [Input expression] [Input expression]";
  EXPECT_THROW(build_prompt(t, {"e", "bird"}), MissingPlaceholder);
  t.query = "Expression:";
  EXPECT_THROW(build_prompt(t, {"e", "bird"}), MissingPlaceholder);
}

TEST(BuildPrompt, BundledTemplateIsValid) {
  const auto t = PromptTemplate::bundled();
  EXPECT_NO_THROW(t.validate());
  EXPECT_GE(t.icl_samples.size(), kDefaultIclCount);
  for (const auto& s : t.icl_samples) {
    EXPECT_NO_THROW(parse_answer(s.answer)) << s.answer;
  }
}

TEST(Answer, FormatParseRoundTrip) {
  const auto text = format_answer("man", {"in a red shirt", "jumping"});
  const auto parsed = parse_answer(text);
  EXPECT_EQ(parsed.object, "man");
  EXPECT_EQ(parsed.properties,
            (std::vector<std::string>{"in a red shirt", "jumping"}));
  EXPECT_TRUE(parse_answer(format_answer("bird", {})).properties.empty());
  EXPECT_THROW(parse_answer("I think it is a man."), ParseError);
}

std::vector<Expression> corpus_of_lengths(const std::vector<std::size_t>& lens) {
  std::vector<Expression> out;
  for (std::size_t i = 0; i < lens.size(); ++i) {
    out.push_back({"c" + std::to_string(i), std::string(lens[i], 'x')});
  }
  return out;
}

TEST(SelectIclSamples, OnlyTheLongOne) {
  const auto corpus = corpus_of_lengths({4, 6, 20});
  const auto picked = select_icl_samples(corpus, 1, 3);
  ASSERT_EQ(picked.size(), 1u);
  EXPECT_EQ(picked[0].id, "c2");
}

TEST(SelectIclSamples, EqualLengthsGiveNothing) {
  EXPECT_TRUE(select_icl_samples(corpus_of_lengths({5, 5, 5}), 2, 0).empty());
}

TEST(SelectIclSamples, TwoOfThreeLong) {
  const auto corpus = corpus_of_lengths({30, 2, 31, 3, 32, 1});
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto picked = select_icl_samples(corpus, 2, seed);
    ASSERT_EQ(picked.size(), 2u);
    for (const auto& e : picked) EXPECT_GE(e.text.size(), 30u);
    EXPECT_NE(picked[0].id, picked[1].id);
  }
  EXPECT_THROW(select_icl_samples({}, 2, 0), EmptyCorpus);
}

TEST(SelectIclSamples, RandomCorporaAgainstMean) {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::size_t> lens(1 + rng.uniform_index(15));
    for (auto& l : lens) l = 1 + rng.uniform_index(40);
    const double mean =
        std::accumulate(lens.begin(), lens.end(), 0.0) / lens.size();
    const auto eligible = std::count_if(
        lens.begin(), lens.end(), [&](std::size_t l) { return l > mean; });
    const std::size_t n = 1 + rng.uniform_index(11);
    const auto picked = select_icl_samples(corpus_of_lengths(lens), n, trial);
    EXPECT_EQ(picked.size(), std::min<std::size_t>(n, eligible));
    std::set<std::string> ids;
    for (const auto& e : picked) {
      EXPECT_GT(static_cast<double>(e.text.size()), mean);
      ids.insert(e.id);
    }
    EXPECT_EQ(ids.size(), picked.size());
  }
}

TEST(ExtractLlm, ParsesAndLocatesSpans) {
  const std::string text = "a man in a red shirt jumping on a skateboard";
  FakeChat chat(
      format_answer("man", {"in a red shirt", "jumping on a skateboard"}));
  const auto ex = extract_llm({"e", text}, chat, PromptTemplate::bundled());
  EXPECT_EQ(ex.object.text, "man");
  EXPECT_EQ(ex.object.start, 2u);
  EXPECT_EQ(property_texts(ex),
            (std::vector<std::string>{"in a red shirt",
                                      "jumping on a skateboard"}));
  EXPECT_EQ(ex.source, ExtractionSource::kLlm);
  EXPECT_TRUE(validate_extraction({"e", text}, ex).empty());
  ASSERT_FALSE(chat.last_.empty());
  EXPECT_NE(chat.last_.back().content.find(text), std::string::npos);
}

TEST(ExtractLlm, Faults) {
  const Expression e{"e", "a man in a red shirt"};
  FakeChat prose("The main object is clearly a man.");
  EXPECT_THROW(extract_llm(e, prose, PromptTemplate::bundled()), ParseError);
  FakeChat hallucinated(format_answer("man", {"green hat"}));
  EXPECT_THROW(extract_llm(e, hallucinated, PromptTemplate::bundled()),
               SpanNotFound);
}

TEST(LocatePhrase, LeftmostCaseInsensitiveAvoidingTaken) {
  const auto text = to_u32("Red bird near a red  car");
  auto hit = locate_phrase(text, U"red");
  ASSERT_TRUE(hit);
  EXPECT_EQ(*hit, std::make_pair(std::size_t{0}, std::size_t{3}));
  hit = locate_phrase(text, U"red", {{0, 3}});
  ASSERT_TRUE(hit);
  EXPECT_EQ(hit->first, 16u);
  hit = locate_phrase(text, U"red car");
  ASSERT_TRUE(hit);
  EXPECT_EQ(*hit, std::make_pair(std::size_t{16}, std::size_t{24}));
  EXPECT_FALSE(locate_phrase(text, U"blue"));
}

TEST(ExtractRuleBased, BirdBehindBirds) {
  const auto ex =
      extract_rule_based({"e", "white bird standing behind two brown birds"});
  EXPECT_EQ(ex.object.text, "bird");
  EXPECT_EQ(property_texts(ex),
            (std::vector<std::string>{"white",
                                      "standing behind two brown birds"}));
  EXPECT_FALSE(ex.low_confidence);
  EXPECT_EQ(ex.source, ExtractionSource::kRuleBased);
}

TEST(ExtractRuleBased, BareNoun) {
  const auto ex = extract_rule_based({"e", "bird"});
  EXPECT_EQ(ex.object.text, "bird");
  EXPECT_TRUE(ex.properties.empty());
}

TEST(ExtractRuleBased, BagWithLogo) {
  const auto ex = extract_rule_based({"e", "blue bag with a D logo"});
  EXPECT_EQ(ex.object.text, "bag");
  EXPECT_EQ(property_texts(ex),
            (std::vector<std::string>{"blue", "with a D logo"}));
}

TEST(ExtractRuleBased, OutsideGrammarIsLowConfidence) {
  const auto ex = extract_rule_based({"e", "xyzzy plugh"});
  EXPECT_TRUE(ex.low_confidence);
}

TEST(ExtractRuleBased, SpansReproducePropertyText) {
  const std::vector<std::string> inputs = {
      "the tall man wearing a red shirt near two dogs",
      "a small green car to the left of the tree",
      "Brown  horse behind a white fence",
      "the woman in a blue hat",
      "three cats",
  };
  for (const auto& text : inputs) {
    const Expression e{"e", text};
    const auto ex = extract_rule_based(e);
    EXPECT_TRUE(validate_extraction(e, ex).empty()) << text;
    for (const auto& p : ex.properties) {
      EXPECT_EQ(normalize_whitespace(char_substr(text, p.start, p.end)),
                normalize_whitespace(p.text));
    }
    EXPECT_EQ(extract_rule_based(e), ex) << "not deterministic: " << text;
  }
}

TEST(Vocabulary, TyposResolveToTheirWord) {
  const auto& vocab = bundled_lexicons().vocabulary;
  const auto& layout = bundled_lexicons().keyboard;
  // Every one-key slip of a known word resolves to a word of the same
  // meaning, or stays unresolved when it is ambiguous.
  std::size_t checked = 0;
  for (const auto& [word, info] : vocab.words()) {
    if (word.find(' ') != std::string::npos || word.size() < 3) continue;
    const auto u = to_u32(word);
    for (std::size_t i = 0; i < u.size(); ++i) {
      for (char32_t n : layout.neighbors(u[i])) {
        auto typo = u;
        typo[i] = n;
        const auto typo8 = to_utf8(typo);
        const auto r = vocab.resolve(typo8);
        if (!r) continue;
        if (vocab.find(typo8) != nullptr) {
          EXPECT_EQ(*r, typo8);
        } else {
          EXPECT_EQ(vocab.semantic_key(*r), vocab.semantic_key(word))
              << word << " -> " << typo8 << " -> " << *r;
        }
        ++checked;
      }
    }
  }
  EXPECT_GT(checked, 100u);
}

}  // namespace
}  // namespace peeling
