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

#include "peeling/lexicon.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "peeling/errors.hpp"
#include "peeling/unicode.hpp"

namespace peeling {

namespace {

// Non-empty, non-comment lines with their 1-based line numbers.
std::vector<std::pair<std::size_t, std::string>> data_lines(
    std::string_view text) {
  std::vector<std::pair<std::size_t, std::string>> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    ++line_no;
    auto line = trim(text.substr(pos, nl - pos));
    if (!line.empty() && line[0] != '#') out.emplace_back(line_no, line);
    pos = nl + 1;
  }
  return out;
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    auto next = s.find(sep, pos);
    out.push_back(trim(s.substr(pos, next - pos)));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

LexiconLoadError load_error(std::string_view what, std::size_t line,
                            std::string_view detail) {
  return LexiconLoadError(std::string(what) + ":" + std::to_string(line) +
                          ": " + std::string(detail));
}

const std::vector<std::vector<std::string>> kNoPatterns;

}  // namespace

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// --- KeyboardLayout --------------------------------------------------------

KeyboardLayout KeyboardLayout::parse(std::string_view text, std::string name) {
  KeyboardLayout layout;
  layout.name_ = std::move(name);
  for (const auto& [line_no, line] : data_lines(text)) {
    auto colon = line.find(':');
    if (colon == std::string::npos) {
      throw load_error("keyboard", line_no, "expected 'key: neighbours'");
    }
    auto key = to_lower(to_u32(trim(std::string_view(line).substr(0, colon))));
    if (key.size() != 1) {
      throw load_error("keyboard", line_no, "key must be one character");
    }
    std::u32string neighbors;
    for (char32_t c : to_lower(to_u32(line.substr(colon + 1)))) {
      if (!is_space(c)) neighbors.push_back(c);
    }
    if (neighbors.empty()) {
      throw load_error("keyboard", line_no, "key has no neighbours");
    }
    layout.table_[key[0]] = neighbors;
  }
  if (layout.table_.empty()) {
    throw LexiconLoadError("keyboard layout '" + layout.name_ + "' is empty");
  }
  return layout;
}

KeyboardLayout KeyboardLayout::load(const std::string& path) {
  try {
    return parse(read_text_file(path), path);
  } catch (const IoError& e) {
    throw LexiconLoadError(e.what());
  }
}

const std::u32string& KeyboardLayout::neighbors(char32_t lower_key) const {
  static const std::u32string kNone;
  auto it = table_.find(lower_key);
  return it == table_.end() ? kNone : it->second;
}

// --- SynonymLexicon --------------------------------------------------------

SynonymLexicon SynonymLexicon::parse(std::string_view text) {
  SynonymLexicon lex;
  lex.source_ = std::string(text);
  for (const auto& [line_no, line] : data_lines(text)) {
    auto colon = line.find(':');
    if (colon == std::string::npos) {
      throw load_error("synonyms", line_no, "expected 'word: syn1, syn2'");
    }
    std::vector<std::string> members{
        to_lower(trim(std::string_view(line).substr(0, colon)))};
    for (auto& s : split(std::string_view(line).substr(colon + 1), ',')) {
      members.push_back(to_lower(s));
    }
    for (const auto& m : members) {
      if (m.empty()) throw load_error("synonyms", line_no, "empty word");
      if (word_tokens(to_u32(m)).size() != 1 ||
          m.find(' ') != std::string::npos) {
        throw load_error("synonyms", line_no,
                         "'" + m + "' is not a single word");
      }
      if (lex.index_.count(m) != 0) {
        throw load_error("synonyms", line_no,
                         "'" + m + "' already belongs to another class");
      }
      lex.index_[m] = lex.classes_.size();
    }
    if (members.size() < 2) {
      throw load_error("synonyms", line_no, "class needs at least one synonym");
    }
    lex.classes_.push_back(std::move(members));
  }
  return lex;
}

SynonymLexicon SynonymLexicon::load(const std::string& path) {
  try {
    return parse(read_text_file(path));
  } catch (const IoError& e) {
    throw LexiconLoadError(e.what());
  }
}

bool SynonymLexicon::has_entry(std::string_view word) const {
  return index_.count(to_lower(word)) != 0;
}

std::vector<std::string> SynonymLexicon::synonyms(std::string_view word) const {
  const auto key = to_lower(word);
  auto it = index_.find(key);
  if (it == index_.end()) return {};
  std::vector<std::string> out;
  for (const auto& m : classes_[it->second]) {
    if (m != key) out.push_back(m);
  }
  return out;
}

std::string SynonymLexicon::canonical(std::string_view word) const {
  auto key = to_lower(word);
  auto it = index_.find(key);
  return it == index_.end() ? key : classes_[it->second].front();
}

// --- ParaphraseTable -------------------------------------------------------

ParaphraseTable ParaphraseTable::parse(std::string_view text) {
  ParaphraseTable table;
  table.source_ = std::string(text);
  for (const auto& [line_no, line] : data_lines(text)) {
    auto arrow = line.find("=>");
    if (arrow == std::string::npos) {
      throw load_error("paraphrases", line_no, "expected 'phrase => phrase'");
    }
    Entry e;
    for (auto& t : word_tokens(to_lower(to_u32(line.substr(0, arrow))))) {
      e.key.push_back(std::move(t.text));
    }
    e.replacement = normalize_whitespace(line.substr(arrow + 2));
    if (e.key.empty() || e.replacement.empty()) {
      throw load_error("paraphrases", line_no, "empty phrase");
    }
    table.entries_.push_back(std::move(e));
  }
  return table;
}

ParaphraseTable ParaphraseTable::load(const std::string& path) {
  try {
    return parse(read_text_file(path));
  } catch (const IoError& e) {
    throw LexiconLoadError(e.what());
  }
}

ParaphraseTable::Applied ParaphraseTable::apply(std::string_view text) const {
  const auto u = to_u32(text);
  const auto tokens = word_tokens(u);
  std::vector<std::u32string> lowered;
  lowered.reserve(tokens.size());
  for (const auto& t : tokens) lowered.push_back(to_lower(t.text));

  Applied out;
  std::u32string result;
  std::size_t copied = 0;  // scalar offset in u already emitted
  std::size_t i = 0;
  while (i < tokens.size()) {
    const Entry* best = nullptr;
    for (const auto& e : entries_) {
      if (i + e.key.size() > tokens.size()) continue;
      if (best != nullptr && e.key.size() <= best->key.size()) continue;
      if (std::equal(e.key.begin(), e.key.end(), lowered.begin() + i)) {
        best = &e;
      }
    }
    if (best == nullptr) {
      ++i;
      continue;
    }
    const auto& first = tokens[i];
    const auto& last = tokens[i + best->key.size() - 1];
    result.append(u, copied, first.start - copied);
    auto replacement = to_u32(best->replacement);
    if (is_ascii_upper(first.text[0]) && !replacement.empty()) {
      replacement[0] = ascii_upper(replacement[0]);
    }
    result += replacement;
    copied = last.end;
    ++out.replacements;
    i += best->key.size();
  }
  result.append(u, copied, std::u32string::npos);
  out.text = to_utf8(result);
  return out;
}

// --- Vocabulary ------------------------------------------------------------

std::string_view to_string(RelationType type) {
  switch (type) {
    case RelationType::kBehind: return "behind";
    case RelationType::kNear: return "near";
    case RelationType::kLeftOf: return "left_of";
    case RelationType::kRightOf: return "right_of";
    case RelationType::kWear: return "wear";
  }
  return "unknown";
}

std::optional<RelationType> parse_relation_type(std::string_view name) {
  for (auto t : {RelationType::kBehind, RelationType::kNear,
                 RelationType::kLeftOf, RelationType::kRightOf,
                 RelationType::kWear}) {
    if (to_string(t) == name) return t;
  }
  return std::nullopt;
}

Vocabulary Vocabulary::parse(std::string_view json_text,
                             const SynonymLexicon& synonyms,
                             const KeyboardLayout& layout) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw LexiconLoadError(std::string("vocabulary: ") + e.what());
  }

  Vocabulary v;
  v.source_ = std::string(json_text);
  auto word = [&](const std::string& w) -> WordInfo& {
    return v.words_[to_lower(w)];
  };
  auto strings = [](const json& arr) {
    return arr.get<std::vector<std::string>>();
  };
  auto pattern_map = [&](const json& obj) {
    std::map<RelationType, std::vector<std::vector<std::string>>> out;
    for (const auto& [name, patterns] : obj.items()) {
      auto type = parse_relation_type(name);
      if (!type) throw LexiconLoadError("vocabulary: unknown relation " + name);
      out[*type] = patterns.get<std::vector<std::vector<std::string>>>();
    }
    return out;
  };

  try {
    for (const auto& a : strings(doc.at("articles"))) word(a).article = true;
    for (const auto& [w, n] : doc.at("numbers").items()) {
      word(w).number = n.get<int>();
    }
    for (const auto& [kind_name, values] : doc.at("attributes").items()) {
      auto kind = parse_property_kind(kind_name);
      if (!kind && kind_name == "size") kind = PropertyKind::kShape;
      if (!kind) {
        throw LexiconLoadError("vocabulary: unknown attribute kind " +
                               kind_name);
      }
      for (const auto& a : strings(values)) {
        word(a).attribute = AttributeInfo{*kind, synonyms.canonical(a)};
      }
    }
    for (const auto& n : doc.at("nouns")) {
      const auto singular = to_lower(n.at("singular").get<std::string>());
      const auto plural = to_lower(n.at("plural").get<std::string>());
      const auto group = n.at("group").get<std::string>();
      const auto category = synonyms.canonical(singular);
      word(plural).noun = NounInfo{category, group, true};
      word(singular).noun = NounInfo{category, group, false};
      v.noun_forms_.try_emplace(singular, singular, plural);
    }
    for (const auto& w : strings(doc.at("relation_intro"))) word(w).intro = true;
    for (const auto& w : strings(doc.at("fillers"))) word(w).filler = true;
    v.relations_ = pattern_map(doc.at("relations"));
    for (const auto& [type, patterns] : v.relations_) {
      for (const auto& p : patterns) {
        for (const auto& w : p) word(w);
      }
    }
    v.sim_categories_ = strings(doc.at("sim_categories"));
    v.sim_colors_ = strings(doc.at("sim_colors"));
    v.sim_sizes_ = strings(doc.at("sim_sizes"));
    v.sim_garments_ = strings(doc.at("sim_garments"));
    v.sim_relation_surfaces_ = pattern_map(doc.at("sim_relation_surfaces"));
  } catch (const json::exception& e) {
    throw LexiconLoadError(std::string("vocabulary: ") + e.what());
  }

  for (const auto& c : v.sim_categories_) {
    if (v.noun_forms_.count(c) == 0) {
      throw LexiconLoadError("vocabulary: sim category '" + c +
                             "' is not a noun");
    }
  }

  // Precompute the one-substitution typo neighbourhood of every word.
  for (const auto& [surface, info] : v.words_) {
    const auto u = to_u32(surface);
    const auto key = v.semantic_key(surface);
    for (std::size_t i = 0; i < u.size(); ++i) {
      for (char32_t n : layout.neighbors(u[i])) {
        auto typo = u;
        typo[i] = n;
        auto typo8 = to_utf8(typo);
        if (v.words_.count(typo8) != 0) continue;
        auto& slot = v.typos_[typo8];
        slot.first.insert(key);
        if (slot.second.empty() || surface < slot.second) slot.second = surface;
      }
    }
  }
  return v;
}

const Vocabulary::WordInfo* Vocabulary::find(std::string_view word) const {
  auto it = words_.find(std::string(word));
  return it == words_.end() ? nullptr : &it->second;
}

std::optional<std::string> Vocabulary::resolve(std::string_view word) const {
  std::string w(word);
  if (words_.count(w) != 0) return w;
  auto it = typos_.find(w);
  if (it == typos_.end() || it->second.first.size() != 1) return std::nullopt;
  return it->second.second;
}

std::string Vocabulary::semantic_key(std::string_view word) const {
  const auto* info = find(word);
  if (info == nullptr) return std::string(word);
  if (info->noun) return "noun:" + info->noun->category;
  if (info->attribute) return "attr:" + info->attribute->value;
  return std::string(word);
}

const std::vector<std::vector<std::string>>& Vocabulary::relation_patterns(
    RelationType type) const {
  auto it = relations_.find(type);
  return it == relations_.end() ? kNoPatterns : it->second;
}

std::string Vocabulary::noun_form(std::string_view category,
                                  bool plural) const {
  auto it = noun_forms_.find(std::string(category));
  if (it == noun_forms_.end()) return std::string(category);
  return plural ? it->second.second : it->second.first;
}

std::string Vocabulary::number_word(int n) const {
  for (const auto& [w, info] : words_) {
    if (info.number == n) return w;
  }
  return std::to_string(n);
}

const Lexicons& bundled_lexicons() {
  static const Lexicons lexicons = [] {
    auto keyboard =
        KeyboardLayout::parse(bundled::keyboard_qwerty_us(), "qwerty_us");
    auto synonyms = SynonymLexicon::parse(bundled::synonyms());
    auto paraphrases = ParaphraseTable::parse(bundled::paraphrases());
    auto vocabulary =
        Vocabulary::parse(bundled::vocabulary(), synonyms, keyboard);
    return Lexicons{std::move(keyboard), std::move(synonyms),
                    std::move(paraphrases), std::move(vocabulary)};
  }();
  return lexicons;
}

}  // namespace peeling
