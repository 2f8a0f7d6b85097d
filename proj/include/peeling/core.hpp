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

// Domain types shared by every stage of the test-generation pipeline.
//
// Everything here is a plain value type. Character offsets count Unicode
// scalar values, not bytes. Boxes are (x, y, w, h) with a top-left origin;
// corner-format input is rejected at the I/O boundary.

#ifndef PEELING_CORE_HPP_
#define PEELING_CORE_HPP_

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace peeling {

struct Expression {
  std::string id;
  std::string text;

  friend bool operator==(const Expression&, const Expression&) = default;
};

// Category of an extracted property. Informational only; no stage of the
// pipeline branches on it except the simulator's faulty VG modes.
enum class PropertyKind { kColor, kWear, kAction, kLocation, kShape, kMood,
                          kOther };

std::string_view to_string(PropertyKind kind);
std::optional<PropertyKind> parse_property_kind(std::string_view name);

struct PropertySpan {
  std::string text;
  std::size_t start = 0;  // scalar offset into the parent expression
  std::size_t end = 0;    // exclusive
  PropertyKind kind = PropertyKind::kOther;

  friend bool operator==(const PropertySpan&, const PropertySpan&) = default;
};

enum class ExtractionSource { kLlm, kRuleBased, kManual };

std::string_view to_string(ExtractionSource source);
std::optional<ExtractionSource> parse_extraction_source(std::string_view name);

struct ExtractionResult {
  PropertySpan object;
  std::vector<PropertySpan> properties;  // ascending by start
  ExtractionSource source = ExtractionSource::kManual;
  // Set by the rule-based extractor when the input fell outside its grammar.
  bool low_confidence = false;

  friend bool operator==(const ExtractionResult&,
                         const ExtractionResult&) = default;
};

struct CandidateExpression {
  std::string text;
  // Indices of the parent's properties kept in this candidate. Always a
  // proper subset of {0..k-1}; empty for the bare-object candidate.
  std::vector<std::size_t> retained;
  std::string parent;  // Expression id
  // Surface form of the object's head word, used to protect it from typos.
  std::string head;

  friend bool operator==(const CandidateExpression&,
                         const CandidateExpression&) = default;
};

struct BoundingBox {
  double x = 0;
  double y = 0;
  double w = 0;
  double h = 0;

  double area() const { return w * h; }
  double right() const { return x + w; }
  double bottom() const { return y + h; }
  double center_x() const { return x + w / 2; }
  double center_y() const { return y + h / 2; }
  bool valid() const { return w >= 0 && h >= 0; }

  static BoundingBox from_corners(double x1, double y1, double x2, double y2) {
    return {x1, y1, x2 - x1, y2 - y1};
  }

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

// An image is either a file on disk or a simulator scene.
struct ImageRef {
  enum class Kind { kPath, kScene };
  Kind kind = Kind::kPath;
  std::string value;

  static ImageRef path(std::string p) { return {Kind::kPath, std::move(p)}; }
  static ImageRef scene(std::string id) { return {Kind::kScene, std::move(id)}; }

  friend bool operator==(const ImageRef&, const ImageRef&) = default;
};

struct TestCase {
  ImageRef image;
  Expression expression;
  BoundingBox oracle;  // ground-truth region of the expression

  const std::string& id() const { return expression.id; }

  friend bool operator==(const TestCase&, const TestCase&) = default;
};

enum class Stage { kP1Reduction, kP2Sentence, kP2Word, kP2Char };

std::string_view to_string(Stage stage);
std::optional<Stage> parse_stage(std::string_view name);

struct PerturbationRecord {
  Stage stage = Stage::kP1Reduction;
  std::string before;
  std::string after;
  // A flagged record is a no-op: the stage could not apply (reason in note).
  bool flagged = false;
  std::string note;

  friend bool operator==(const PerturbationRecord&,
                         const PerturbationRecord&) = default;
};

struct AdversarialTest {
  std::string id;
  TestCase base;
  CandidateExpression candidate;
  std::string final_expression;
  std::vector<PerturbationRecord> provenance;

  // The oracle is never copied: it is the base case's region by construction.
  const BoundingBox& oracle() const { return base.oracle; }

  friend bool operator==(const AdversarialTest&,
                         const AdversarialTest&) = default;
};

struct Violation {
  enum class Kind { kEmptySpan, kOutOfRange, kTextMismatch, kOverlap,
                    kUnordered };
  Kind kind;
  std::string detail;
};

std::string_view to_string(Violation::Kind kind);

// Every invariant violation of ex with respect to expr; empty means valid.
std::vector<Violation> validate_extraction(const Expression& expr,
                                           const ExtractionResult& ex);

// Throws InvalidExpression unless text is non-empty after trimming.
void require_expression(const Expression& expr);

}  // namespace peeling

#endif  // PEELING_CORE_HPP_
