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

#include "peeling/oracle.hpp"

#include "peeling/errors.hpp"
#include "peeling/parallel.hpp"
#include "peeling/unicode.hpp"

namespace peeling {

namespace {

constexpr std::string_view kSlot = "{c}";

constexpr std::array<std::string_view, 11> kNumberWords{
    "zero", "one", "two", "three", "four", "five",
    "six",  "seven", "eight", "nine", "ten"};

std::vector<std::string> answer_tokens(std::string_view raw) {
  std::u32string cleaned;
  for (char32_t c : to_lower(to_u32(raw))) {
    cleaned.push_back(is_letter(c) || is_digit(c) ? c : U' ');
  }
  std::vector<std::string> out;
  for (const auto& t : word_tokens(cleaned)) out.push_back(to_utf8(t.text));
  return out;
}

bool all_digits(std::string_view s) {
  return !s.empty() &&
         std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

}  // namespace

std::string_view to_string(QueryKind kind) {
  switch (kind) {
    case QueryKind::kHowMany: return "how_many";
    case QueryKind::kWhether: return "whether";
    case QueryKind::kReflection: return "reflection";
  }
  return "unknown";
}

std::string_view expected_answer(QueryKind kind) {
  return kind == QueryKind::kHowMany ? "1" : "no";
}

const std::string& QueryTemplates::of(QueryKind kind) const {
  switch (kind) {
    case QueryKind::kHowMany: return how_many;
    case QueryKind::kWhether: return whether;
    case QueryKind::kReflection: return reflection;
  }
  return how_many;
}

std::string strip_leading_article(std::string_view text) {
  auto normalized = normalize_whitespace(text);
  const auto lowered = to_lower(normalized);
  for (std::string_view article : {"a ", "an ", "the "}) {
    if (lowered.rfind(article, 0) == 0 && lowered.size() > article.size()) {
      return normalized.substr(article.size());
    }
  }
  return normalized;
}

std::vector<VqaQuery> build_queries(const CandidateExpression& candidate,
                                    const QueryTemplates& templates) {
  const auto subject = strip_leading_article(candidate.text);
  if (subject.empty()) {
    throw InvalidExpression("cannot build queries for an empty candidate");
  }
  std::vector<VqaQuery> out;
  for (auto kind : kQueryOrder) {
    auto text = templates.of(kind);
    if (auto pos = text.find(kSlot); pos != std::string::npos) {
      text.replace(pos, kSlot.size(), subject);
    }
    out.push_back({kind, std::move(text), std::string(expected_answer(kind))});
  }
  return out;
}

std::optional<std::pair<QueryKind, std::string>> parse_query(
    std::string_view question, const QueryTemplates& templates) {
  for (auto kind : kQueryOrder) {
    const auto& t = templates.of(kind);
    const auto pos = t.find(kSlot);
    if (pos == std::string::npos) continue;
    const std::string_view prefix(t.data(), pos);
    const std::string_view suffix(t.data() + pos + kSlot.size(),
                                  t.size() - pos - kSlot.size());
    if (question.size() > prefix.size() + suffix.size() &&
        question.substr(0, prefix.size()) == prefix &&
        question.substr(question.size() - suffix.size()) == suffix) {
      return std::make_pair(
          kind, std::string(question.substr(
                    prefix.size(),
                    question.size() - prefix.size() - suffix.size())));
    }
  }
  return std::nullopt;
}

std::string normalize_answer(std::string_view raw, QueryKind kind) {
  const auto tokens = answer_tokens(raw);
  if (kind == QueryKind::kHowMany) {
    for (const auto& t : tokens) {
      if (all_digits(t)) {
        auto nz = t.find_first_not_of('0');
        return nz == std::string::npos ? "0" : t.substr(nz);
      }
      for (std::size_t n = 0; n < kNumberWords.size(); ++n) {
        if (t == kNumberWords[n]) return std::to_string(n);
      }
    }
    return "other";
  }
  for (const auto& t : tokens) {
    if (t == "yes" || t == "no") return t;
  }
  return "other";
}

std::vector<SelectionVerdict> select(
    const std::vector<CandidateExpression>& candidates, const ImageRef& image,
    VqaBackend& backend, const SelectOptions& options) {
  std::vector<SelectionVerdict> verdicts(candidates.size());
  parallel_for(candidates.size(), options.jobs, [&](std::size_t i) {
    auto& v = verdicts[i];
    v.candidate = candidates[i];
    bool ok = true;
    for (const auto& q : build_queries(candidates[i], options.templates)) {
      if (!ok && !options.ask_all) {
        v.answers[q.kind] = std::string(kSkippedAnswer);
        continue;
      }
      try {
        auto raw = backend.answer(image, q.text);
        ok = ok && normalize_answer(raw, q.kind) == q.expected;
        v.answers[q.kind] = std::move(raw);
      } catch (const BackendError&) {
        v.answers[q.kind] = std::string(kErrorAnswer);
        ok = false;
      }
    }
    v.accepted = ok;
  });
  return verdicts;
}

}  // namespace peeling
