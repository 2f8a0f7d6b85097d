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

#include "peeling/detect.hpp"

#include <algorithm>
#include <set>

#include "peeling/errors.hpp"
#include "peeling/parallel.hpp"

namespace peeling {

namespace {

TestRecord score(const std::string& id, const ImageRef& image,
                 const std::string& expression, const BoundingBox& oracle,
                 VgBackend& vg, double threshold) {
  TestRecord r;
  r.id = id;
  r.final_expression = expression;
  try {
    const auto box = vg.locate(image, expression);
    r.predicted = box;
    r.iou = iou(box, oracle);
    r.outcome =
        is_issue_iou(*r.iou, threshold) ? Outcome::kIssue : Outcome::kCorrect;
  } catch (const BackendError& e) {
    r.outcome = Outcome::kIndeterminate;
    r.error = e.what();
  }
  return r;
}

Counts tally(const std::vector<TestRecord>& records) {
  Counts c;
  c.total = records.size();
  for (const auto& r : records) {
    switch (r.outcome) {
      case Outcome::kCorrect: ++c.correct; break;
      case Outcome::kIssue: ++c.issues; break;
      case Outcome::kIndeterminate: ++c.indeterminate; break;
    }
  }
  return c;
}

double accuracy(const Counts& c) {
  return c.scored() == 0 ? 0.0
                         : static_cast<double>(c.correct) /
                               static_cast<double>(c.scored());
}

}  // namespace

double iou(const BoundingBox& a, const BoundingBox& b) {
  const double iw = std::max(0.0, std::min(a.right(), b.right()) -
                                      std::max(a.x, b.x));
  const double ih = std::max(0.0, std::min(a.bottom(), b.bottom()) -
                                      std::max(a.y, b.y));
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  if (uni <= 0) return 0.0;
  return inter / uni;
}

bool is_issue_iou(double iou_value, double threshold) {
  return iou_value <= threshold;
}

bool is_issue(const BoundingBox& predicted, const BoundingBox& oracle,
              double threshold) {
  return is_issue_iou(iou(predicted, oracle), threshold);
}

double compute_mmi(double acc_original, double acc_adversarial) {
  if (!(acc_original > 0)) {
    throw ZeroOriginalAccuracy("MMI is undefined when original accuracy is 0");
  }
  return (acc_original - acc_adversarial) / acc_original;
}

double compute_atcr(std::size_t correct, std::size_t total) {
  if (total == 0) throw EmptySample("ATCR needs at least one test");
  return static_cast<double>(correct) / static_cast<double>(total);
}

Prf compute_prf(const std::vector<LabeledSpan>& predicted,
                const std::vector<LabeledSpan>& gold) {
  if (predicted.empty() && gold.empty()) return {1.0, 1.0, 1.0};
  std::multiset<LabeledSpan> remaining(gold.begin(), gold.end());
  std::size_t correct = 0;
  for (const auto& p : predicted) {
    if (auto it = remaining.find(p); it != remaining.end()) {
      remaining.erase(it);
      ++correct;
    }
  }
  Prf out;
  out.precision = predicted.empty() ? 0.0
                                    : static_cast<double>(correct) /
                                          static_cast<double>(predicted.size());
  out.recall = gold.empty() ? 0.0
                            : static_cast<double>(correct) /
                                  static_cast<double>(gold.size());
  const double sum = out.precision + out.recall;
  out.f1 = sum == 0 ? 0.0 : 2 * out.precision * out.recall / sum;
  return out;
}

std::string_view to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::kCorrect: return "correct";
    case Outcome::kIssue: return "issue";
    case Outcome::kIndeterminate: return "indeterminate";
  }
  return "unknown";
}

DetectionRun run_detection(const std::vector<AdversarialTest>& tests,
                           VgBackend& vg, const DetectionOptions& options,
                           const std::vector<TestCase>* originals) {
  DetectionRun run;

  run.records.resize(tests.size());
  parallel_for(tests.size(), options.jobs, [&](std::size_t i) {
    const auto& t = tests[i];
    run.records[i] = score(t.id, t.base.image, t.final_expression, t.oracle(),
                           vg, options.threshold);
    run.records[i].provenance = t.provenance;
  });

  auto& report = run.report;
  report.counts = tally(run.records);
  report.acc_adversarial = accuracy(report.counts);

  if (options.baseline_accuracy) {
    report.acc_original = *options.baseline_accuracy;
  } else {
    std::vector<TestCase> bases;
    if (originals != nullptr) {
      bases = *originals;
    } else {
      std::set<std::string> seen;
      for (const auto& t : tests) {
        if (seen.insert(t.base.id()).second) bases.push_back(t.base);
      }
    }
    run.original_records.resize(bases.size());
    parallel_for(bases.size(), options.jobs, [&](std::size_t i) {
      const auto& b = bases[i];
      run.original_records[i] = score(b.id(), b.image, b.expression.text,
                                       b.oracle, vg, options.threshold);
    });
    report.original_counts = tally(run.original_records);
    report.acc_original = accuracy(report.original_counts);
  }

  if (report.counts.scored() > 0 && report.acc_original > 0) {
    report.mmi = compute_mmi(report.acc_original, report.acc_adversarial);
  }

  if (options.judge) {
    std::size_t judged = 0;
    std::size_t correct = 0;
    for (const auto& t : tests) {
      if (auto verdict = options.judge(t)) {
        ++judged;
        correct += *verdict ? 1 : 0;
      }
    }
    if (judged > 0) report.atcr = compute_atcr(correct, judged);
  }
  return run;
}

}  // namespace peeling
