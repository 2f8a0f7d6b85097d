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

// File formats. Every box on disk is [x, y, w, h] in pixels, with (x, y)
// the top-left corner. Corner-format boxes are rejected, not converted.
//
// Test cases (JSONL, one object per line):
//   {"id": "...", "image": {"path": "..."} | {"scene": "..."},
//    "expression": "...", "bbox": [x, y, w, h]}
// Scenes (JSONL):
//   {"id", "width", "height", "target",
//    "objects": [{"id", "category", "attributes": [...],
//                 "relations": [[rel, target_id], ...],
//                 "box": [x, y, w, h], "is_reflection": bool}]}
// Adversarial tests (JSONL): see to_json(AdversarialTest).
// Reports (JSON): {"config_digest", "manifest", "metrics", "tests"}.
//
// JSON objects are written with sorted keys so output bytes depend only on
// content.

#ifndef PEELING_CORPUS_HPP_
#define PEELING_CORPUS_HPP_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "peeling/core.hpp"
#include "peeling/detect.hpp"
#include "peeling/errors.hpp"
#include "peeling/random.hpp"
#include "peeling/scenesim.hpp"

namespace peeling {

using Json = nlohmann::json;

void to_json(Json& j, const BoundingBox& box);
void from_json(const Json& j, BoundingBox& box);
void to_json(Json& j, const ImageRef& image);
void from_json(const Json& j, ImageRef& image);
void to_json(Json& j, const TestCase& tc);
void from_json(const Json& j, TestCase& tc);
void to_json(Json& j, const PropertySpan& span);
void from_json(const Json& j, PropertySpan& span);
void to_json(Json& j, const ExtractionResult& ex);
void from_json(const Json& j, ExtractionResult& ex);
void to_json(Json& j, const CandidateExpression& c);
void from_json(const Json& j, CandidateExpression& c);
void to_json(Json& j, const PerturbationRecord& r);
void from_json(const Json& j, PerturbationRecord& r);
void to_json(Json& j, const AdversarialTest& t);
void from_json(const Json& j, AdversarialTest& t);
void to_json(Json& j, const SceneObject& o);
void from_json(const Json& j, SceneObject& o);
void to_json(Json& j, const SceneGraph& s);
void from_json(const Json& j, SceneGraph& s);
void to_json(Json& j, const Counts& c);
void from_json(const Json& j, Counts& c);
void to_json(Json& j, const Prf& p);
void from_json(const Json& j, Prf& p);
void to_json(Json& j, const MetricsReport& m);
void from_json(const Json& j, MetricsReport& m);
void to_json(Json& j, const TestRecord& r);
void from_json(const Json& j, TestRecord& r);

std::string read_file(const std::string& path);
// Throws IoError, including when the parent directory does not exist.
void write_file(const std::string& path, std::string_view content);

// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view data);

struct LineError {
  std::size_t line = 0;  // 1-based
  std::string message;
};

struct LoadedTestCases {
  std::vector<TestCase> cases;
  std::vector<LineError> errors;
};

// Loads the valid lines and reports the rest. Throws IoError, NoValidLines.
LoadedTestCases load_testcases_report(const std::string& path);
std::vector<TestCase> load_testcases(const std::string& path);
// Parses a single line; throws ParseError.
TestCase parse_testcase(std::string_view line);
void write_testcases(const std::vector<TestCase>& cases,
                     const std::string& path);

std::vector<SceneGraph> load_scenes(const std::string& path);
void write_scenes(const std::vector<SceneGraph>& scenes,
                  const std::string& path);

std::vector<AdversarialTest> load_tests(const std::string& path);
std::string tests_to_jsonl(const std::vector<AdversarialTest>& tests);
void write_tests(const std::vector<AdversarialTest>& tests,
                 const std::string& path);

// n items drawn uniformly without replacement, in draw order. Same seed, same
// sample on every platform. Throws SampleTooLarge.
template <typename T>
std::vector<T> sample(const std::vector<T>& items, std::size_t n,
                      std::uint64_t seed) {
  if (n > items.size()) {
    throw SampleTooLarge("cannot sample " + std::to_string(n) + " of " +
                         std::to_string(items.size()) + " items");
  }
  std::vector<T> out;
  out.reserve(n);
  for (auto i : sample_indices(items.size(), n, seed)) out.push_back(items[i]);
  return out;
}

struct Report {
  std::string config_digest;
  // Seed, effective config and lexicon digests of the run.
  Json manifest = Json::object();
  MetricsReport metrics;
  std::vector<TestRecord> tests;
};

std::string report_to_string(const Report& report);
Report report_from_string(std::string_view text);
// Throws IoError.
void write_report(const Report& report, const std::string& path);
Report read_report(const std::string& path);

}  // namespace peeling

#endif  // PEELING_CORPUS_HPP_
