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

#include "peeling/extract.hpp"

#include <algorithm>
#include <sstream>

#include <json.hpp>

#include "peeling/errors.hpp"
#include "peeling/random.hpp"
#include "peeling/unicode.hpp"

namespace peeling {

namespace {

constexpr std::string_view kTaskDescription =
    "Identify the target object of a referring expression and the phrases "
    "that describe it.\n"
    "The object is the head noun naming the thing being referred to. "
    "Properties are the phrases attached to that object, such as its color, "
    "size, clothing, action, or its position relative to other things.\n"
    "Copy every phrase exactly as it is written in the expression and list "
    "properties in the order they appear.\n"
    "Reply with exactly two lines:\n"
    "object: <object>\n"
    "properties: <property>; <property>; ...\n"
    "Write \"properties: none\" when the expression has no properties.";

bool starts_with_ci(std::string_view s, std::string_view prefix) {
  if (s.size() < prefix.size()) return false;
  return to_lower(s.substr(0, prefix.size())) == to_lower(prefix);
}

std::string replace_once(std::string s, std::string_view what,
                         std::string_view with) {
  auto pos = s.find(what);
  if (pos != std::string::npos) s.replace(pos, what.size(), with);
  return s;
}

bool is_action_word(std::string_view w) {
  return w == "standing" || w == "jumping" || w == "holding" ||
         w == "sitting";
}

// Kind of a located property, from the vocabulary. Advisory only.
PropertyKind classify_property(std::u32string_view phrase,
                               const Vocabulary& vocab) {
  const auto tokens = resolve_tokens(phrase, vocab);
  if (tokens.empty()) return PropertyKind::kOther;
  if (tokens.size() == 1 && tokens[0].info != nullptr &&
      tokens[0].info->attribute) {
    return tokens[0].info->attribute->kind;
  }
  std::vector<std::string> words;
  for (const auto& t : tokens) {
    if (t.info != nullptr && t.info->filler && words.empty()) continue;
    words.push_back(t.word);
  }
  for (const auto& [type, patterns] : vocab.relation_patterns()) {
    for (const auto& p : patterns) {
      if (p.size() <= words.size() &&
          std::equal(p.begin(), p.end(), words.begin())) {
        return type == RelationType::kWear ? PropertyKind::kWear
                                           : PropertyKind::kLocation;
      }
    }
  }
  if (is_action_word(tokens.front().word)) return PropertyKind::kAction;
  return PropertyKind::kOther;
}

PropertySpan make_span(std::u32string_view text, std::size_t start,
                       std::size_t end, PropertyKind kind) {
  return {to_utf8(text.substr(start, end - start)), start, end, kind};
}

}  // namespace

PromptTemplate PromptTemplate::bundled() {
  PromptTemplate t;
  t.task_description = std::string(kTaskDescription);
  std::istringstream lines{std::string(bundled::icl_samples())};
  std::string line;
  while (std::getline(lines, line)) {
    if (trim(line).empty()) continue;
    auto j = nlohmann::json::parse(line);
    t.icl_samples.push_back(
        {j.at("expression").get<std::string>(),
         format_answer(j.at("object").get<std::string>(),
                       j.at("properties").get<std::vector<std::string>>())});
  }
  return t;
}

void PromptTemplate::validate(bool require_icl) const {
  if (input_placeholder.empty()) {
    throw MissingPlaceholder("prompt template has an empty placeholder");
  }
  const auto in_query = count_occurrences(query, input_placeholder);
  if (in_query != 1) {
    throw MissingPlaceholder("query must contain '" + input_placeholder +
                             "' exactly once, found " +
                             std::to_string(in_query));
  }
  if (count_occurrences(task_description, input_placeholder) != 0) {
    throw MissingPlaceholder("placeholder appears in the task description");
  }
  for (const auto& s : icl_samples) {
    if (count_occurrences(s.input, input_placeholder) != 0 ||
        count_occurrences(s.answer, input_placeholder) != 0) {
      throw MissingPlaceholder("placeholder appears in an ICL sample");
    }
  }
  if (require_icl && icl_samples.empty()) {
    throw EmptyIcl("prompt template has no in-context samples");
  }
}

std::string format_answer(std::string_view object,
                          const std::vector<std::string>& properties) {
  std::string out = "object: " + std::string(object) + "\nproperties: ";
  if (properties.empty()) return out + "none";
  for (std::size_t i = 0; i < properties.size(); ++i) {
    if (i > 0) out += "; ";
    out += properties[i];
  }
  return out;
}

ParsedAnswer parse_answer(std::string_view reply) {
  std::optional<std::string> object;
  std::optional<std::string> properties;
  std::istringstream in{std::string(reply)};
  std::string raw;
  while (std::getline(in, raw)) {
    auto line = trim(raw);
    for (std::string_view prefix : {"answer:", "a:"}) {
      if (starts_with_ci(line, prefix) && line.size() > prefix.size()) {
        line = trim(std::string_view(line).substr(prefix.size()));
      }
    }
    if (!object && starts_with_ci(line, "object:")) {
      object = trim(std::string_view(line).substr(7));
    } else if (!properties && starts_with_ci(line, "properties:")) {
      properties = trim(std::string_view(line).substr(11));
    }
  }
  if (!object || object->empty()) {
    throw ParseError("reply has no 'object:' line");
  }
  if (!properties) throw ParseError("reply has no 'properties:' line");

  ParsedAnswer out;
  out.object = *object;
  const auto lowered = to_lower(*properties);
  if (lowered.empty() || lowered == "none" || lowered == "[]") return out;
  std::size_t pos = 0;
  while (pos <= properties->size()) {
    auto next = properties->find(';', pos);
    auto item = trim(std::string_view(*properties).substr(pos, next - pos));
    if (!item.empty()) out.properties.push_back(item);
    if (next == std::string::npos) break;
    pos = next + 1;
  }
  return out;
}

std::string render_template(const PromptTemplate& tmpl) {
  std::string out = tmpl.task_description;
  if (!out.empty()) out += "\n\n";
  for (const auto& s : tmpl.icl_samples) {
    out += replace_once(tmpl.query, tmpl.input_placeholder, s.input);
    out += "\n" + s.answer + "\n\n";
  }
  out += tmpl.query;
  return out;
}

std::string build_prompt(const PromptTemplate& tmpl, const Expression& expr) {
  require_expression(expr);
  tmpl.validate();
  return replace_once(render_template(tmpl), tmpl.input_placeholder,
                      expr.text);
}

std::vector<Expression> select_icl_samples(const std::vector<Expression>& corpus,
                                           std::size_t n, std::uint64_t seed) {
  if (corpus.empty()) throw EmptyCorpus("ICL corpus is empty");
  if (n == 0) throw ConfigError("ICL sample count must be at least 1");

  std::vector<std::size_t> lengths;
  lengths.reserve(corpus.size());
  std::size_t total = 0;
  for (const auto& e : corpus) {
    lengths.push_back(char_length(e.text));
    total += lengths.back();
  }
  // length > total / size, compared exactly in integers.
  std::vector<std::size_t> long_ones;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (lengths[i] * corpus.size() > total) long_ones.push_back(i);
  }
  auto picks = sample_indices(long_ones.size(), n, seed);
  std::sort(picks.begin(), picks.end());
  std::vector<Expression> out;
  out.reserve(picks.size());
  for (auto p : picks) out.push_back(corpus[long_ones[p]]);
  return out;
}

std::optional<std::pair<std::size_t, std::size_t>> locate_phrase(
    std::u32string_view text, std::u32string_view phrase,
    const std::vector<std::pair<std::size_t, std::size_t>>& taken) {
  const auto needle = to_u32(normalize_whitespace(to_utf8(phrase)));
  if (needle.empty()) return std::nullopt;
  for (std::size_t start = 0; start < text.size(); ++start) {
    std::size_t i = start;
    std::size_t j = 0;
    while (j < needle.size() && i < text.size()) {
      if (needle[j] == U' ') {
        if (!is_space(text[i])) break;
        while (i < text.size() && is_space(text[i])) ++i;
        ++j;
        continue;
      }
      if (ascii_lower(needle[j]) != ascii_lower(text[i])) break;
      ++i;
      ++j;
    }
    if (j != needle.size()) continue;
    const std::size_t end = i;
    const bool clash = std::any_of(taken.begin(), taken.end(), [&](auto r) {
      return start < r.second && r.first < end;
    });
    if (!clash) return std::make_pair(start, end);
  }
  return std::nullopt;
}

ExtractionResult locate_answer(const Expression& expr,
                               const ParsedAnswer& answer,
                               ExtractionSource source,
                               const Vocabulary& vocab) {
  const auto text = to_u32(expr.text);
  std::vector<std::pair<std::size_t, std::size_t>> taken;

  auto place = [&](const std::string& phrase) {
    auto range = locate_phrase(text, to_u32(phrase), taken);
    if (!range) {
      throw SpanNotFound("'" + phrase + "' does not occur in '" + expr.text +
                         "'");
    }
    taken.push_back(*range);
    return *range;
  };

  ExtractionResult ex;
  ex.source = source;
  auto [os, oe] = place(answer.object);
  ex.object = make_span(text, os, oe, PropertyKind::kOther);
  for (const auto& p : answer.properties) {
    auto [ps, pe] = place(p);
    ex.properties.push_back(make_span(
        text, ps, pe,
        classify_property(std::u32string_view(text).substr(ps, pe - ps),
                          vocab)));
  }
  std::stable_sort(ex.properties.begin(), ex.properties.end(),
                   [](const auto& a, const auto& b) { return a.start < b.start; });
  return ex;
}

ExtractionResult extract_llm(const Expression& expr, ChatBackend& backend,
                             const PromptTemplate& tmpl) {
  const auto prompt = build_prompt(tmpl, expr);
  const auto reply = backend.complete({{"user", prompt}});
  return locate_answer(expr, parse_answer(reply), ExtractionSource::kLlm,
                       bundled_lexicons().vocabulary);
}

std::vector<ResolvedToken> resolve_tokens(std::u32string_view text,
                                          const Vocabulary& vocab) {
  std::vector<ResolvedToken> out;
  for (auto& t : word_tokens(text)) {
    ResolvedToken r;
    r.word = to_utf8(to_lower(t.text));
    if (auto known = vocab.resolve(r.word)) {
      r.word = *known;
      r.info = vocab.find(r.word);
    }
    r.token = std::move(t);
    out.push_back(std::move(r));
  }
  return out;
}

ExtractionResult extract_rule_based(const Expression& expr,
                                    const Vocabulary& vocab) {
  const auto text = to_u32(expr.text);
  const auto tokens = resolve_tokens(text, vocab);
  auto info = [&](std::size_t i) { return tokens[i].info; };
  auto is_noun = [&](std::size_t i) {
    return info(i) != nullptr && info(i)->noun.has_value();
  };
  auto is_intro = [&](std::size_t i) {
    return info(i) != nullptr && info(i)->intro;
  };

  ExtractionResult ex;
  ex.source = ExtractionSource::kRuleBased;

  auto fallback = [&]() {
    ExtractionResult fb;
    fb.source = ExtractionSource::kRuleBased;
    fb.low_confidence = true;
    if (tokens.empty()) return fb;
    std::size_t pick = tokens.size() - 1;
    for (std::size_t i = tokens.size(); i-- > 0;) {
      if (is_noun(i)) {
        pick = i;
        break;
      }
    }
    const auto& t = tokens[pick].token;
    fb.object = make_span(text, t.start, t.end, PropertyKind::kOther);
    return fb;
  };

  std::size_t i = 0;
  const std::size_t n = tokens.size();
  if (i < n && info(i) != nullptr && (info(i)->article || info(i)->number)) {
    ++i;
  }
  std::vector<std::size_t> attributes;
  while (i < n && info(i) != nullptr && info(i)->attribute && !is_noun(i)) {
    attributes.push_back(i++);
  }
  if (i >= n || !is_noun(i)) return fallback();
  const std::size_t head = i++;

  ex.object = make_span(text, tokens[head].token.start, tokens[head].token.end,
                        PropertyKind::kOther);
  for (auto a : attributes) {
    ex.properties.push_back(make_span(text, tokens[a].token.start,
                                      tokens[a].token.end,
                                      info(a)->attribute->kind));
  }
  while (i < n) {
    if (!is_intro(i)) return fallback();
    const std::size_t first = i++;
    bool seen_noun = false;
    while (i < n && !(seen_noun && is_intro(i))) {
      seen_noun = seen_noun || is_noun(i);
      ++i;
    }
    const auto start = tokens[first].token.start;
    const auto end = tokens[i - 1].token.end;
    ex.properties.push_back(make_span(
        text, start, end,
        classify_property(std::u32string_view(text).substr(start, end - start),
                          vocab)));
  }
  return ex;
}

ExtractionResult extract_rule_based(const Expression& expr) {
  return extract_rule_based(expr, bundled_lexicons().vocabulary);
}

}  // namespace peeling
