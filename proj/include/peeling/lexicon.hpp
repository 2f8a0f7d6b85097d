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

// Word-level data shared by the extractor, the perturbations and the scene
// simulator: keyboard adjacency, synonym classes, the paraphrase table and
// the closed vocabulary of the simulator's expression language.
//
// The bundled copies are compiled in from data/ at build time.

#ifndef PEELING_LEXICON_HPP_
#define PEELING_LEXICON_HPP_

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "peeling/core.hpp"

namespace peeling {

std::string read_text_file(const std::string& path);

// Letter-key adjacency. Keys and neighbours are lowercase.
class KeyboardLayout {
 public:
  // "k: n1 n2 ..." per line, '#' comments. Throws LexiconLoadError.
  static KeyboardLayout parse(std::string_view text, std::string name);
  static KeyboardLayout load(const std::string& path);

  const std::string& name() const { return name_; }
  const std::u32string& neighbors(char32_t lower_key) const;
  bool has_key(char32_t lower_key) const {
    return !neighbors(lower_key).empty();
  }
  const std::map<char32_t, std::u32string>& table() const { return table_; }

 private:
  std::string name_;
  std::map<char32_t, std::u32string> table_;
};

// Flat synonym classes: "word: syn1, syn2" per line. Every word on a line
// belongs to one class whose canonical member is the first word.
class SynonymLexicon {
 public:
  static SynonymLexicon parse(std::string_view text);
  static SynonymLexicon load(const std::string& path);

  bool has_entry(std::string_view word) const;
  // Other members of word's class, in file order. Empty if no entry.
  std::vector<std::string> synonyms(std::string_view word) const;
  // Canonical member of word's class, or the lowercased word itself.
  std::string canonical(std::string_view word) const;
  const std::vector<std::vector<std::string>>& classes() const {
    return classes_;
  }
  const std::string& source() const { return source_; }

 private:
  std::vector<std::vector<std::string>> classes_;
  std::unordered_map<std::string, std::size_t> index_;
  std::string source_;
};

// Phrase-to-phrase rewrite map: "phrase => replacement" per line.
class ParaphraseTable {
 public:
  struct Entry {
    std::vector<std::u32string> key;  // lowercase word tokens
    std::string replacement;
  };

  static ParaphraseTable parse(std::string_view text);
  static ParaphraseTable load(const std::string& path);

  bool empty() const { return entries_.empty(); }
  const std::vector<Entry>& entries() const { return entries_; }
  const std::string& source() const { return source_; }

  struct Applied {
    std::string text;
    std::size_t replacements = 0;
  };
  // One greedy left-to-right pass; at each word the longest matching key
  // wins and matching resumes after the replaced phrase.
  Applied apply(std::string_view text) const;

 private:
  std::vector<Entry> entries_;
  std::string source_;
};

enum class RelationType { kBehind, kNear, kLeftOf, kRightOf, kWear };

std::string_view to_string(RelationType type);
std::optional<RelationType> parse_relation_type(std::string_view name);

// The closed vocabulary of the simulator's expression language. Also the
// lexicon of the rule-based extractor.
class Vocabulary {
 public:
  struct NounInfo {
    std::string category;  // canonical singular, e.g. "man" for "gentlemen"
    std::string group;     // person, animal, thing, garment
    bool plural = false;
  };
  struct AttributeInfo {
    PropertyKind kind = PropertyKind::kOther;
    std::string value;  // canonical class member
  };
  struct WordInfo {
    bool article = false;
    std::optional<int> number;
    std::optional<AttributeInfo> attribute;
    std::optional<NounInfo> noun;
    bool intro = false;   // may open a post-noun phrase
    bool filler = false;  // carries no meaning inside a relation phrase
  };

  static Vocabulary parse(std::string_view json_text,
                          const SynonymLexicon& synonyms,
                          const KeyboardLayout& layout);

  // Exact lookup; word must be lowercase.
  const WordInfo* find(std::string_view word) const;

  // Known surface form for a lowercase token: itself if known, otherwise the
  // unique meaning reachable by one adjacent-key substitution. Typos that
  // could stem from words of different meanings stay unresolved.
  std::optional<std::string> resolve(std::string_view word) const;

  // Meaning-level identity used to decide typo ambiguity: noun category,
  // attribute value, or the word itself.
  std::string semantic_key(std::string_view word) const;

  const std::vector<std::vector<std::string>>& relation_patterns(
      RelationType type) const;
  const std::map<RelationType, std::vector<std::vector<std::string>>>&
  relation_patterns() const {
    return relations_;
  }

  // Lists the simulator draws from when rendering expressions.
  const std::vector<std::string>& sim_categories() const {
    return sim_categories_;
  }
  const std::vector<std::string>& sim_colors() const { return sim_colors_; }
  const std::vector<std::string>& sim_sizes() const { return sim_sizes_; }
  const std::vector<std::string>& sim_garments() const { return sim_garments_; }
  const std::map<RelationType, std::vector<std::vector<std::string>>>&
  sim_relation_surfaces() const {
    return sim_relation_surfaces_;
  }

  // Singular or plural surface of a category.
  std::string noun_form(std::string_view category, bool plural) const;
  std::string number_word(int n) const;
  const std::map<std::string, WordInfo>& words() const { return words_; }
  const std::string& source() const { return source_; }

 private:
  std::map<std::string, WordInfo> words_;
  std::map<std::string, std::pair<std::string, std::string>> noun_forms_;
  std::map<RelationType, std::vector<std::vector<std::string>>> relations_;
  std::map<RelationType, std::vector<std::vector<std::string>>>
      sim_relation_surfaces_;
  std::vector<std::string> sim_categories_;
  std::vector<std::string> sim_colors_;
  std::vector<std::string> sim_sizes_;
  std::vector<std::string> sim_garments_;
  // typo -> (semantic keys, representative surface)
  std::unordered_map<std::string, std::pair<std::set<std::string>, std::string>>
      typos_;
  std::string source_;
};

struct Lexicons {
  KeyboardLayout keyboard;
  SynonymLexicon synonyms;
  ParaphraseTable paraphrases;
  Vocabulary vocabulary;
};

// Lexicons compiled in from data/. Built once, immutable, thread-safe.
const Lexicons& bundled_lexicons();

namespace bundled {
std::string_view keyboard_qwerty_us();
std::string_view synonyms();
std::string_view paraphrases();
std::string_view vocabulary();
std::string_view icl_samples();
}  // namespace bundled

}  // namespace peeling

#endif  // PEELING_LEXICON_HPP_
