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

#include "peeling/core.hpp"

#include <array>
#include <utility>

#include "peeling/errors.hpp"
#include "peeling/unicode.hpp"

namespace peeling {

namespace {

template <typename E, std::size_t N>
std::optional<E> lookup(const std::array<std::pair<E, std::string_view>, N>& t,
                        std::string_view name) {
  for (const auto& [value, text] : t) {
    if (text == name) return value;
  }
  return std::nullopt;
}

template <typename E, std::size_t N>
std::string_view name_of(const std::array<std::pair<E, std::string_view>, N>& t,
                         E value) {
  for (const auto& [v, text] : t) {
    if (v == value) return text;
  }
  return "unknown";
}

constexpr std::array<std::pair<PropertyKind, std::string_view>, 7> kKinds{{
    {PropertyKind::kColor, "color"},
    {PropertyKind::kWear, "wear"},
    {PropertyKind::kAction, "action"},
    {PropertyKind::kLocation, "location"},
    {PropertyKind::kShape, "shape"},
    {PropertyKind::kMood, "mood"},
    {PropertyKind::kOther, "other"},
}};

constexpr std::array<std::pair<ExtractionSource, std::string_view>, 3>
    kSources{{
        {ExtractionSource::kLlm, "llm"},
        {ExtractionSource::kRuleBased, "rule_based"},
        {ExtractionSource::kManual, "manual"},
    }};

constexpr std::array<std::pair<Stage, std::string_view>, 4> kStages{{
    {Stage::kP1Reduction, "p1_reduction"},
    {Stage::kP2Sentence, "p2_sentence"},
    {Stage::kP2Word, "p2_word"},
    {Stage::kP2Char, "p2_char"},
}};

std::string span_label(const PropertySpan& s) {
  return "\"" + s.text + "\" [" + std::to_string(s.start) + "," +
         std::to_string(s.end) + ")";
}

}  // namespace

std::string_view to_string(PropertyKind kind) { return name_of(kKinds, kind); }

std::optional<PropertyKind> parse_property_kind(std::string_view name) {
  if (name == "behavior") return PropertyKind::kAction;
  return lookup(kKinds, name);
}

std::string_view to_string(ExtractionSource source) {
  return name_of(kSources, source);
}

std::optional<ExtractionSource> parse_extraction_source(std::string_view name) {
  return lookup(kSources, name);
}

std::string_view to_string(Stage stage) { return name_of(kStages, stage); }

std::optional<Stage> parse_stage(std::string_view name) {
  return lookup(kStages, name);
}

std::string_view to_string(Violation::Kind kind) {
  switch (kind) {
    case Violation::Kind::kEmptySpan: return "empty_span";
    case Violation::Kind::kOutOfRange: return "out_of_range";
    case Violation::Kind::kTextMismatch: return "text_mismatch";
    case Violation::Kind::kOverlap: return "overlap";
    case Violation::Kind::kUnordered: return "unordered";
  }
  return "unknown";
}

std::vector<Violation> validate_extraction(const Expression& expr,
                                           const ExtractionResult& ex) {
  std::vector<Violation> out;
  const auto text = to_u32(expr.text);

  std::vector<const PropertySpan*> in_range;
  auto check_span = [&](const PropertySpan& s) {
    if (s.start >= s.end) {
      out.push_back({Violation::Kind::kEmptySpan, span_label(s)});
      return;
    }
    if (s.end > text.size()) {
      out.push_back({Violation::Kind::kOutOfRange,
                     span_label(s) + " exceeds length " +
                         std::to_string(text.size())});
      return;
    }
    const auto actual = to_utf8(
        std::u32string_view(text).substr(s.start, s.end - s.start));
    if (normalize_whitespace(actual) != normalize_whitespace(s.text)) {
      out.push_back({Violation::Kind::kTextMismatch,
                     span_label(s) + " covers \"" + actual + "\""});
    }
    in_range.push_back(&s);
  };

  check_span(ex.object);
  for (const auto& p : ex.properties) check_span(p);

  for (std::size_t i = 1; i < ex.properties.size(); ++i) {
    if (ex.properties[i].start < ex.properties[i - 1].start) {
      out.push_back({Violation::Kind::kUnordered,
                     span_label(ex.properties[i]) + " after " +
                         span_label(ex.properties[i - 1])});
    }
  }

  for (std::size_t i = 0; i < in_range.size(); ++i) {
    for (std::size_t j = i + 1; j < in_range.size(); ++j) {
      const auto& a = *in_range[i];
      const auto& b = *in_range[j];
      if (a.start < b.end && b.start < a.end) {
        out.push_back({Violation::Kind::kOverlap,
                       span_label(a) + " overlaps " + span_label(b)});
      }
    }
  }
  return out;
}

void require_expression(const Expression& expr) {
  if (trim(expr.text).empty()) {
    throw InvalidExpression("expression '" + expr.id + "' is empty");
  }
}

}  // namespace peeling
