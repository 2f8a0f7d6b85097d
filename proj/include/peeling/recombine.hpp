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

#ifndef PEELING_RECOMBINE_HPP_
#define PEELING_RECOMBINE_HPP_

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "peeling/core.hpp"

namespace peeling {

enum class SubsetPolicy {
  kAllProper,  // every proper subset of the properties
  kDropOne,    // the bare object plus every subset missing exactly one
};

std::optional<SubsetPolicy> parse_subset_policy(std::string_view name);
std::string_view to_string(SubsetPolicy policy);

struct RecombineOptions {
  std::size_t cap = 63;
  SubsetPolicy policy = SubsetPolicy::kAllProper;
};

// Property-reduction candidates of expr, smallest retained sets first, then
// lexicographic by index set. A candidate is the original text with every
// unretained property span deleted, so surviving words keep their original
// order. With no properties the single candidate is the object phrase.
//
// Throws InvalidExpression if ex is not valid for expr.
std::vector<CandidateExpression> generate_candidates(
    const Expression& expr, const ExtractionResult& ex,
    const RecombineOptions& options = {});

// Retained index sets in emission order, before text construction.
std::vector<std::vector<std::size_t>> candidate_subsets(
    std::size_t k, const RecombineOptions& options = {});

}  // namespace peeling

#endif  // PEELING_RECOMBINE_HPP_
