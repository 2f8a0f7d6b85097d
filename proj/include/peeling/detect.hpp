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

// Issue detection by intersection over union, and the metrics computed over
// a detection run: accuracy on originals and on adversarial tests, the
// relative accuracy drop (MMI), the adversarial-test correct rate (ATCR) and
// span-level extraction precision/recall/F1.

#ifndef PEELING_DETECT_HPP_
#define PEELING_DETECT_HPP_

#include <compare>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "peeling/backends.hpp"
#include "peeling/core.hpp"

namespace peeling {

// A prediction at or below this IoU against the oracle is an issue.
inline constexpr double kIssueThreshold = 0.5;

// Area(a ∩ b) / Area(a ∪ b); 0 when the union is empty.
double iou(const BoundingBox& a, const BoundingBox& b);

bool is_issue_iou(double iou_value, double threshold = kIssueThreshold);
bool is_issue(const BoundingBox& predicted, const BoundingBox& oracle,
              double threshold = kIssueThreshold);

// (a_o - a_a) / a_o. Throws ZeroOriginalAccuracy when a_o <= 0.
double compute_mmi(double acc_original, double acc_adversarial);

// correct / total. Throws EmptySample when total == 0.
double compute_atcr(std::size_t correct, std::size_t total);

struct LabeledSpan {
  std::string expression_id;
  std::size_t start = 0;
  std::size_t end = 0;
  std::string category;  // "object" or "property"

  auto operator<=>(const LabeledSpan&) const = default;
};

struct Prf {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
};

// Exact-span matching (multiset semantics). Both sides empty counts as a
// perfect score.
Prf compute_prf(const std::vector<LabeledSpan>& predicted,
                const std::vector<LabeledSpan>& gold);

struct Counts {
  std::size_t total = 0;
  std::size_t correct = 0;
  std::size_t issues = 0;
  std::size_t indeterminate = 0;  // backend faults, outside every ratio

  std::size_t scored() const { return correct + issues; }
  friend bool operator==(const Counts&, const Counts&) = default;
};

struct MetricsReport {
  double acc_original = 0;
  double acc_adversarial = 0;
  std::optional<double> mmi;   // undefined when nothing was scored
  std::optional<double> atcr;  // only when correctness labels exist
  Counts counts;               // adversarial tests
  Counts original_counts;      // empty when a baseline accuracy was supplied
  std::optional<std::map<std::string, Prf>> extraction_metrics;
};

enum class Outcome { kCorrect, kIssue, kIndeterminate };
std::string_view to_string(Outcome outcome);

struct TestRecord {
  std::string id;
  std::string final_expression;
  std::vector<PerturbationRecord> provenance;
  std::optional<BoundingBox> predicted;
  std::optional<double> iou;
  Outcome outcome = Outcome::kIndeterminate;
  std::string error;
};

struct DetectionOptions {
  double threshold = kIssueThreshold;
  // Accuracy on the original cases; computed with the same backend if unset.
  std::optional<double> baseline_accuracy;
  std::size_t jobs = 1;
  // Whether an adversarial test's expression still describes its target;
  // nullopt when unknown. Drives ATCR.
  std::function<std::optional<bool>(const AdversarialTest&)> judge;
};

struct DetectionRun {
  MetricsReport report;
  std::vector<TestRecord> records;           // in test order
  std::vector<TestRecord> original_records;  // in originals order
};

// Scores every test with vg. originals defaults to the distinct base cases
// of tests, in first-seen order.
DetectionRun run_detection(const std::vector<AdversarialTest>& tests,
                           VgBackend& vg, const DetectionOptions& options = {},
                           const std::vector<TestCase>* originals = nullptr);

}  // namespace peeling

#endif  // PEELING_DETECT_HPP_
