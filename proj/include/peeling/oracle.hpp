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

// Image-aware candidate selection. Each candidate gets three VQA queries
// (how many, whether more than one, reflection) and is accepted only when
// every answer is the expected one.

#ifndef PEELING_ORACLE_HPP_
#define PEELING_ORACLE_HPP_

#include <array>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "peeling/backends.hpp"
#include "peeling/core.hpp"

namespace peeling {

enum class QueryKind { kHowMany, kWhether, kReflection };

inline constexpr std::array<QueryKind, 3> kQueryOrder{
    QueryKind::kHowMany, QueryKind::kWhether, QueryKind::kReflection};

std::string_view to_string(QueryKind kind);
// "1" for how_many, "no" for the other two.
std::string_view expected_answer(QueryKind kind);

// Question wordings; "{c}" is replaced by the candidate text with its
// leading article removed.
struct QueryTemplates {
  std::string how_many = "How many {c} are in the image?";
  std::string whether = "Is there more than one {c} in the image?";
  std::string reflection =
      "Are the {c} in the image reflections, such as in a mirror?";

  const std::string& of(QueryKind kind) const;
};

struct VqaQuery {
  QueryKind kind;
  std::string text;
  std::string expected;
};

std::string strip_leading_article(std::string_view text);

// Exactly [how_many, whether, reflection]. Throws InvalidExpression on an
// empty candidate.
std::vector<VqaQuery> build_queries(const CandidateExpression& candidate,
                                    const QueryTemplates& templates = {});

// Recovers the {c} slot from a question produced by build_queries.
std::optional<std::pair<QueryKind, std::string>> parse_query(
    std::string_view question, const QueryTemplates& templates = {});

// Lowercased, trimmed, punctuation-free answer. how_many yields the first
// integer (number words zero to ten become digits); yes/no kinds yield the
// first standalone "yes" or "no". Anything else is "other".
std::string normalize_answer(std::string_view raw, QueryKind kind);

inline constexpr std::string_view kSkippedAnswer = "skipped";
inline constexpr std::string_view kErrorAnswer = "error";

struct SelectionVerdict {
  CandidateExpression candidate;
  std::map<QueryKind, std::string> answers;  // raw, "skipped" or "error"
  bool accepted = false;
};

struct SelectOptions {
  // Ask all three queries even after one fails.
  bool ask_all = false;
  QueryTemplates templates;
  std::size_t jobs = 1;
};

// One verdict per candidate, in input order. A backend fault rejects its
// candidate (answer "error") and never propagates.
std::vector<SelectionVerdict> select(
    const std::vector<CandidateExpression>& candidates, const ImageRef& image,
    VqaBackend& backend, const SelectOptions& options = {});

}  // namespace peeling

#endif  // PEELING_ORACLE_HPP_
