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
#include <cmath>

#include <gtest/gtest.h>

#include "peeling/detect.hpp"
#include "peeling/errors.hpp"
#include "peeling/random.hpp"
#include "testing.hpp"

namespace peeling {
namespace {

using testing::FakeVg;

// Cell-counting IoU for integer boxes on a grid.
double raster_iou(const BoundingBox& a, const BoundingBox& b, int grid) {
  long inter = 0;
  long uni = 0;
  auto inside = [](const BoundingBox& r, int x, int y) {
    return x >= r.x && x < r.right() && y >= r.y && y < r.bottom();
  };
  for (int x = 0; x < grid; ++x) {
    for (int y = 0; y < grid; ++y) {
      const bool in_a = inside(a, x, y);
      const bool in_b = inside(b, x, y);
      inter += in_a && in_b;
      uni += in_a || in_b;
    }
  }
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

BoundingBox random_box(Rng& rng, int grid) {
  const int x1 = static_cast<int>(rng.uniform_index(grid + 1));
  const int x2 = static_cast<int>(rng.uniform_index(grid + 1));
  const int y1 = static_cast<int>(rng.uniform_index(grid + 1));
  const int y2 = static_cast<int>(rng.uniform_index(grid + 1));
  return BoundingBox::from_corners(std::min(x1, x2), std::min(y1, y2),
                                   std::max(x1, x2), std::max(y1, y2));
}

TEST(Iou, Examples) {
  EXPECT_EQ(iou({0, 0, 10, 10}, {0, 0, 10, 10}), 1.0);
  EXPECT_EQ(iou({0, 0, 10, 10}, {20, 20, 5, 5}), 0.0);
  EXPECT_DOUBLE_EQ(iou({0, 0, 10, 10}, {5, 0, 10, 10}), 50.0 / 150.0);
  EXPECT_EQ(iou({0, 0, 0, 0}, {0, 0, 0, 0}), 0.0);
  EXPECT_EQ(iou({0, 0, 10, 10}, {10, 0, 10, 10}), 0.0);
}

TEST(Iou, MatchesRasterCount) {
  Rng rng(2024);
  for (int i = 0; i < 300; ++i) {
    const auto a = random_box(rng, 40);
    const auto b = random_box(rng, 40);
    EXPECT_DOUBLE_EQ(iou(a, b), raster_iou(a, b, 40));
    EXPECT_EQ(iou(a, b), iou(b, a));
    if (a.area() > 0) EXPECT_EQ(iou(a, a), 1.0);
  }
}

TEST(IsIssue, ThresholdIsInclusive) {
  EXPECT_TRUE(is_issue_iou(0.49));
  EXPECT_TRUE(is_issue_iou(0.50));
  EXPECT_FALSE(is_issue_iou(0.51));
  EXPECT_FALSE(is_issue_iou(0.5 + 1e-9));
  // Exactly half overlap.
  EXPECT_EQ(iou({0, 0, 10, 10}, {0, 0, 5, 10}), 0.5);
  EXPECT_TRUE(is_issue({0, 0, 5, 10}, {0, 0, 10, 10}));
  EXPECT_FALSE(is_issue({0, 0, 10, 10}, {0, 0, 10, 10}));
  EXPECT_FALSE(is_issue_iou(0.3, 0.25));
}

TEST(Mmi, Examples) {
  EXPECT_DOUBLE_EQ(compute_mmi(0.8, 0.6), 0.25);
  EXPECT_EQ(compute_mmi(0.7, 0.7), 0.0);
  EXPECT_NEAR(compute_mmi(0.9, 0.7074), 0.214, 1e-12);
  EXPECT_THROW(compute_mmi(0.0, 0.0), ZeroOriginalAccuracy);
}

TEST(Mmi, StrictlyDecreasingInAdversarialAccuracy) {
  Rng rng(3);
  for (int i = 0; i < 500; ++i) {
    const double ao = 0.01 + rng.uniform01();
    const double a1 = rng.uniform01();
    const double a2 = a1 + 1e-6 + rng.uniform01();
    EXPECT_GT(compute_mmi(ao, a1), compute_mmi(ao, a2));
  }
}

TEST(Atcr, Examples) {
  EXPECT_EQ(compute_atcr(92, 100), 0.92);
  EXPECT_EQ(compute_atcr(0, 5), 0.0);
  EXPECT_THROW(compute_atcr(0, 0), EmptySample);
}

LabeledSpan span(std::string id, std::size_t s, std::size_t e) {
  return {std::move(id), s, e, "property"};
}

TEST(Prf, Examples) {
  const std::vector<LabeledSpan> gold = {span("a", 0, 3), span("a", 4, 8),
                                         span("b", 0, 2), span("b", 3, 9)};
  const std::vector<LabeledSpan> pred = {span("a", 0, 3), span("b", 3, 9)};
  const auto p = compute_prf(pred, gold);
  EXPECT_NEAR(p.precision, 1.0, 1e-12);
  EXPECT_NEAR(p.recall, 0.5, 1e-12);
  EXPECT_NEAR(p.f1, 2.0 / 3.0, 1e-12);

  const auto perfect = compute_prf(gold, gold);
  EXPECT_EQ(perfect.precision, 1.0);
  EXPECT_EQ(perfect.f1, 1.0);
  const auto empty = compute_prf({}, {});
  EXPECT_EQ(empty.precision, 1.0);
  EXPECT_EQ(empty.recall, 1.0);
  EXPECT_EQ(empty.f1, 1.0);
  const auto none = compute_prf({span("a", 1, 2)}, {});
  EXPECT_EQ(none.precision, 0.0);
  EXPECT_EQ(none.f1, 0.0);
}

TEST(Prf, F1BetweenPrecisionAndRecall) {
  Rng rng(17);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<LabeledSpan> gold, pred;
    for (std::size_t i = 0; i < 1 + rng.uniform_index(8); ++i) {
      gold.push_back(span("e", i, i + 1));
    }
    for (std::size_t i = 0; i < 1 + rng.uniform_index(8); ++i) {
      const auto s = rng.uniform_index(10);
      pred.push_back(span("e", s, s + 1));
    }
    const auto p = compute_prf(pred, gold);
    EXPECT_GE(p.f1, std::min(p.precision, p.recall) - 1e-12);
    EXPECT_LE(p.f1, std::max(p.precision, p.recall) + 1e-12);
  }
}

std::vector<AdversarialTest> numbered_tests(std::size_t n) {
  std::vector<AdversarialTest> tests;
  for (std::size_t i = 0; i < n; ++i) {
    AdversarialTest t;
    t.id = "t" + std::to_string(i);
    t.base.expression = {"base", "the thing"};
    t.base.image = ImageRef::path("img.jpg");
    t.base.oracle = {0, 0, 10, 10};
    t.final_expression = "thing " + std::to_string(i);
    t.provenance.push_back({Stage::kP1Reduction, "the thing", "thing", false, ""});
    tests.push_back(t);
  }
  return tests;
}

TEST(RunDetection, FourIssuesOfTen) {
  const auto tests = numbered_tests(10);
  FakeVg vg([](std::string_view e) -> BoundingBox {
    const int i = std::stoi(std::string(e.substr(6)));
    return i < 4 ? BoundingBox{50, 50, 10, 10} : BoundingBox{0, 0, 10, 10};
  });
  DetectionOptions options;
  options.baseline_accuracy = 1.0;
  const auto run = run_detection(tests, vg, options);
  EXPECT_EQ(run.report.counts.total, 10u);
  EXPECT_EQ(run.report.counts.issues, 4u);
  EXPECT_EQ(run.report.counts.correct, 6u);
  EXPECT_DOUBLE_EQ(run.report.acc_adversarial, 0.6);
  ASSERT_TRUE(run.report.mmi);
  EXPECT_DOUBLE_EQ(*run.report.mmi, 0.4);
  EXPECT_FALSE(run.report.atcr);
  ASSERT_EQ(run.records.size(), 10u);
  EXPECT_EQ(run.records[0].outcome, Outcome::kIssue);
  EXPECT_EQ(run.records[9].outcome, Outcome::kCorrect);
  EXPECT_EQ(*run.records[9].iou, 1.0);
}

TEST(RunDetection, BackendErrorsAreIndeterminate) {
  FakeVg vg([](std::string_view) -> BoundingBox {
    throw BackendError(BackendError::Kind::kTransport, "refused");
  });
  DetectionOptions options;
  options.baseline_accuracy = 0.9;
  const auto run = run_detection(numbered_tests(5), vg, options);
  EXPECT_EQ(run.report.counts.indeterminate, 5u);
  EXPECT_EQ(run.report.counts.scored(), 0u);
  EXPECT_FALSE(run.report.mmi);
  for (const auto& r : run.records) {
    EXPECT_EQ(r.outcome, Outcome::kIndeterminate);
    EXPECT_FALSE(r.error.empty());
  }
}

TEST(RunDetection, OriginalsScoredWithSameBackend) {
  FakeVg vg([](std::string_view e) -> BoundingBox {
    return e == "the thing" ? BoundingBox{0, 0, 10, 10}
                            : BoundingBox{0, 0, 4, 10};
  });
  const auto run = run_detection(numbered_tests(3), vg);
  EXPECT_EQ(run.report.original_counts.total, 1u);
  EXPECT_EQ(run.report.acc_original, 1.0);
  EXPECT_EQ(run.report.acc_adversarial, 0.0);
  EXPECT_EQ(*run.report.mmi, 1.0);
}

TEST(RunDetection, JudgeDrivesAtcr) {
  FakeVg vg([](std::string_view) { return BoundingBox{0, 0, 10, 10}; });
  DetectionOptions options;
  options.judge = [](const AdversarialTest& t) -> std::optional<bool> {
    if (t.id == "t0") return std::nullopt;
    return t.id != "t1";
  };
  const auto run = run_detection(numbered_tests(5), vg, options);
  ASSERT_TRUE(run.report.atcr);
  EXPECT_DOUBLE_EQ(*run.report.atcr, 0.75);
}

TEST(RunDetection, JobsDoNotChangeResults) {
  const auto tests = numbered_tests(64);
  auto fn = [](std::string_view e) -> BoundingBox {
    if (e == "the thing") return {0, 0, 10, 10};
    const double i = std::stoi(std::string(e.substr(6)));
    return {i / 10.0, 0, 10, 10};
  };
  FakeVg a(fn), b(fn);
  DetectionOptions options;
  const auto one = run_detection(tests, a, options);
  options.jobs = 8;
  const auto many = run_detection(tests, b, options);
  EXPECT_EQ(one.report.counts, many.report.counts);
  for (std::size_t i = 0; i < tests.size(); ++i) {
    EXPECT_EQ(one.records[i].id, many.records[i].id);
    EXPECT_EQ(one.records[i].iou, many.records[i].iou);
  }
}

}  // namespace
}  // namespace peeling
