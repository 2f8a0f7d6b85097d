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

#include "peeling/corpus.hpp"

#include <openssl/evp.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "peeling/lexicon.hpp"
#include "peeling/unicode.hpp"

namespace peeling {

namespace {

template <typename T>
Json optional_json(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

template <typename T>
std::optional<T> optional_from(const Json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

std::vector<std::string> jsonl_lines(const std::string& path) {
  std::istringstream in(read_file(path));
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

template <typename T>
std::vector<T> load_jsonl(const std::string& path, const char* what) {
  std::vector<T> out;
  std::size_t number = 0;
  for (const auto& line : jsonl_lines(path)) {
    ++number;
    if (trim(line).empty()) continue;
    try {
      out.push_back(Json::parse(line).get<T>());
    } catch (const Json::exception& e) {
      throw ParseError(path + ":" + std::to_string(number) + ": bad " + what +
                       ": " + e.what());
    } catch (const Error& e) {
      throw ParseError(path + ":" + std::to_string(number) + ": bad " + what +
                       ": " + e.what());
    }
  }
  return out;
}

template <typename T>
std::string to_jsonl(const std::vector<T>& items) {
  std::string out;
  for (const auto& item : items) {
    out += Json(item).dump();
    out += '\n';
  }
  return out;
}

}  // namespace

void to_json(Json& j, const BoundingBox& box) {
  j = Json::array({box.x, box.y, box.w, box.h});
}

void from_json(const Json& j, BoundingBox& box) {
  if (!j.is_array() || j.size() != 4) {
    throw ParseError("box must be [x, y, w, h], got " + j.dump());
  }
  for (const auto& v : j) {
    if (!v.is_number()) throw ParseError("box entries must be numbers");
  }
  box = {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(),
         j[3].get<double>()};
}

void to_json(Json& j, const ImageRef& image) {
  j = Json::object();
  j[image.kind == ImageRef::Kind::kScene ? "scene" : "path"] = image.value;
}

void from_json(const Json& j, ImageRef& image) {
  if (!j.is_object() || j.size() != 1) {
    throw ParseError("image must be {\"path\": ...} or {\"scene\": ...}");
  }
  if (j.contains("path")) {
    image = ImageRef::path(j.at("path").get<std::string>());
  } else if (j.contains("scene")) {
    image = ImageRef::scene(j.at("scene").get<std::string>());
  } else {
    throw ParseError("image must be {\"path\": ...} or {\"scene\": ...}");
  }
}

void to_json(Json& j, const TestCase& tc) {
  j = Json{{"id", tc.expression.id},
           {"image", tc.image},
           {"expression", tc.expression.text},
           {"bbox", tc.oracle}};
}

void from_json(const Json& j, TestCase& tc) {
  if (!j.is_object()) throw ParseError("test case must be a JSON object");
  for (const char* key : {"id", "image", "expression", "bbox"}) {
    if (!j.contains(key)) throw ParseError(std::string("missing '") + key + "'");
  }
  tc.expression.id = j.at("id").get<std::string>();
  tc.expression.text = j.at("expression").get<std::string>();
  tc.image = j.at("image").get<ImageRef>();
  tc.oracle = j.at("bbox").get<BoundingBox>();
  if (tc.expression.id.empty()) throw ParseError("empty id");
  if (trim(tc.expression.text).empty()) throw ParseError("empty expression");
  if (!(tc.oracle.w > 0 && tc.oracle.h > 0)) {
    throw ParseError("bbox must have positive width and height");
  }
}

void to_json(Json& j, const PropertySpan& span) {
  j = Json{{"text", span.text},
           {"start", span.start},
           {"end", span.end},
           {"kind", to_string(span.kind)}};
}

void from_json(const Json& j, PropertySpan& span) {
  span.text = j.at("text").get<std::string>();
  span.start = j.at("start").get<std::size_t>();
  span.end = j.at("end").get<std::size_t>();
  auto kind = parse_property_kind(j.value("kind", "other"));
  if (!kind) throw ParseError("unknown property kind " + j.at("kind").dump());
  span.kind = *kind;
}

void to_json(Json& j, const ExtractionResult& ex) {
  j = Json{{"object", ex.object},
           {"properties", ex.properties},
           {"source", to_string(ex.source)},
           {"low_confidence", ex.low_confidence}};
}

void from_json(const Json& j, ExtractionResult& ex) {
  ex.object = j.at("object").get<PropertySpan>();
  ex.properties = j.at("properties").get<std::vector<PropertySpan>>();
  auto source = parse_extraction_source(j.value("source", "manual"));
  if (!source) throw ParseError("unknown extraction source");
  ex.source = *source;
  ex.low_confidence = j.value("low_confidence", false);
}

void to_json(Json& j, const CandidateExpression& c) {
  j = Json{{"text", c.text},
           {"retained", c.retained},
           {"parent", c.parent},
           {"head", c.head}};
}

void from_json(const Json& j, CandidateExpression& c) {
  c.text = j.at("text").get<std::string>();
  c.retained = j.at("retained").get<std::vector<std::size_t>>();
  c.parent = j.at("parent").get<std::string>();
  c.head = j.value("head", "");
}

void to_json(Json& j, const PerturbationRecord& r) {
  j = Json{{"stage", to_string(r.stage)},
           {"before", r.before},
           {"after", r.after},
           {"flagged", r.flagged},
           {"note", r.note}};
}

void from_json(const Json& j, PerturbationRecord& r) {
  auto stage = parse_stage(j.at("stage").get<std::string>());
  if (!stage) throw ParseError("unknown stage " + j.at("stage").dump());
  r.stage = *stage;
  r.before = j.at("before").get<std::string>();
  r.after = j.at("after").get<std::string>();
  r.flagged = j.value("flagged", false);
  r.note = j.value("note", "");
}

void to_json(Json& j, const AdversarialTest& t) {
  j = Json{{"id", t.id},
           {"base", t.base},
           {"candidate", t.candidate},
           {"final_expression", t.final_expression},
           {"provenance", t.provenance}};
}

void from_json(const Json& j, AdversarialTest& t) {
  t.id = j.at("id").get<std::string>();
  t.base = j.at("base").get<TestCase>();
  t.candidate = j.at("candidate").get<CandidateExpression>();
  t.final_expression = j.at("final_expression").get<std::string>();
  t.provenance = j.at("provenance").get<std::vector<PerturbationRecord>>();
}

void to_json(Json& j, const SceneObject& o) {
  Json relations = Json::array();
  for (const auto& [rel, to] : o.relations) {
    relations.push_back(Json::array({rel, to}));
  }
  j = Json{{"id", o.id},
           {"category", o.category},
           {"attributes", o.attributes},
           {"relations", relations},
           {"box", o.box},
           {"is_reflection", o.is_reflection}};
}

void from_json(const Json& j, SceneObject& o) {
  o.id = j.at("id").get<std::string>();
  o.category = j.at("category").get<std::string>();
  o.attributes = j.value("attributes", std::vector<std::string>{});
  o.relations.clear();
  for (const auto& r : j.value("relations", Json::array())) {
    if (!r.is_array() || r.size() != 2) {
      throw ParseError("relation must be [rel, target_id]");
    }
    o.relations.emplace_back(r[0].get<std::string>(), r[1].get<std::string>());
  }
  o.box = j.at("box").get<BoundingBox>();
  o.is_reflection = j.value("is_reflection", false);
}

void to_json(Json& j, const SceneGraph& s) {
  j = Json{{"id", s.id},
           {"width", s.width},
           {"height", s.height},
           {"target", s.target},
           {"objects", s.objects}};
}

void from_json(const Json& j, SceneGraph& s) {
  s.id = j.at("id").get<std::string>();
  s.width = j.at("width").get<int>();
  s.height = j.at("height").get<int>();
  s.target = j.at("target").get<std::string>();
  s.objects = j.at("objects").get<std::vector<SceneObject>>();
  validate_scene(s);
}

void to_json(Json& j, const Counts& c) {
  j = Json{{"total", c.total},
           {"correct", c.correct},
           {"issues", c.issues},
           {"indeterminate", c.indeterminate}};
}

void from_json(const Json& j, Counts& c) {
  c.total = j.at("total").get<std::size_t>();
  c.correct = j.at("correct").get<std::size_t>();
  c.issues = j.at("issues").get<std::size_t>();
  c.indeterminate = j.at("indeterminate").get<std::size_t>();
}

void to_json(Json& j, const Prf& p) {
  j = Json{{"precision", p.precision}, {"recall", p.recall}, {"f1", p.f1}};
}

void from_json(const Json& j, Prf& p) {
  p.precision = j.at("precision").get<double>();
  p.recall = j.at("recall").get<double>();
  p.f1 = j.at("f1").get<double>();
}

void to_json(Json& j, const MetricsReport& m) {
  j = Json{{"acc_original", m.acc_original},
           {"acc_adversarial", m.acc_adversarial},
           {"mmi", optional_json(m.mmi)},
           {"counts", m.counts},
           {"original_counts", m.original_counts}};
  if (m.atcr) j["atcr"] = *m.atcr;
  if (m.extraction_metrics) j["extraction"] = *m.extraction_metrics;
}

void from_json(const Json& j, MetricsReport& m) {
  m.acc_original = j.at("acc_original").get<double>();
  m.acc_adversarial = j.at("acc_adversarial").get<double>();
  m.mmi = optional_from<double>(j, "mmi");
  m.atcr = optional_from<double>(j, "atcr");
  m.counts = j.at("counts").get<Counts>();
  m.original_counts = j.value("original_counts", Counts{});
  m.extraction_metrics =
      optional_from<std::map<std::string, Prf>>(j, "extraction");
}

void to_json(Json& j, const TestRecord& r) {
  Json issue = nullptr;
  if (r.outcome != Outcome::kIndeterminate) {
    issue = r.outcome == Outcome::kIssue;
  }
  j = Json{{"id", r.id},
           {"final_expression", r.final_expression},
           {"provenance", r.provenance},
           {"predicted_box", optional_json(r.predicted)},
           {"iou", optional_json(r.iou)},
           {"issue", issue},
           {"outcome", to_string(r.outcome)}};
  if (!r.error.empty()) j["error"] = r.error;
}

void from_json(const Json& j, TestRecord& r) {
  r.id = j.at("id").get<std::string>();
  r.final_expression = j.at("final_expression").get<std::string>();
  r.provenance = j.at("provenance").get<std::vector<PerturbationRecord>>();
  r.predicted = optional_from<BoundingBox>(j, "predicted_box");
  r.iou = optional_from<double>(j, "iou");
  const auto outcome = j.value("outcome", "");
  if (outcome == "correct") {
    r.outcome = Outcome::kCorrect;
  } else if (outcome == "issue") {
    r.outcome = Outcome::kIssue;
  } else {
    r.outcome = Outcome::kIndeterminate;
  }
  r.error = j.value("error", "");
}

std::string read_file(const std::string& path) {
  return read_text_file(path);
}

void write_file(const std::string& path, std::string_view content) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty() && !std::filesystem::is_directory(parent)) {
    throw IoError("directory " + parent.string() + " does not exist");
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoError("short write to " + path);
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(),
                 nullptr) != 1) {
    throw Error("SHA-256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < length; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xf];
  }
  return out;
}

TestCase parse_testcase(std::string_view line) {
  try {
    return Json::parse(line).get<TestCase>();
  } catch (const Json::exception& e) {
    throw ParseError(e.what());
  }
}

LoadedTestCases load_testcases_report(const std::string& path) {
  LoadedTestCases out;
  std::set<std::string> ids;
  std::size_t number = 0;
  for (const auto& line : jsonl_lines(path)) {
    ++number;
    if (trim(line).empty()) continue;
    try {
      auto tc = parse_testcase(line);
      if (!ids.insert(tc.id()).second) {
        throw ParseError("duplicate id '" + tc.id() + "'");
      }
      out.cases.push_back(std::move(tc));
    } catch (const ParseError& e) {
      out.errors.push_back({number, e.what()});
    }
  }
  if (out.cases.empty()) {
    throw NoValidLines(path + ": no valid test cases (" +
                       std::to_string(out.errors.size()) + " bad lines)");
  }
  return out;
}

std::vector<TestCase> load_testcases(const std::string& path) {
  return load_testcases_report(path).cases;
}

void write_testcases(const std::vector<TestCase>& cases,
                     const std::string& path) {
  write_file(path, to_jsonl(cases));
}

std::vector<SceneGraph> load_scenes(const std::string& path) {
  try {
    return load_jsonl<SceneGraph>(path, "scene");
  } catch (const InvalidScene& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void write_scenes(const std::vector<SceneGraph>& scenes,
                  const std::string& path) {
  write_file(path, to_jsonl(scenes));
}

std::vector<AdversarialTest> load_tests(const std::string& path) {
  return load_jsonl<AdversarialTest>(path, "adversarial test");
}

std::string tests_to_jsonl(const std::vector<AdversarialTest>& tests) {
  return to_jsonl(tests);
}

void write_tests(const std::vector<AdversarialTest>& tests,
                 const std::string& path) {
  write_file(path, tests_to_jsonl(tests));
}

std::string report_to_string(const Report& report) {
  Json j{{"config_digest", report.config_digest},
         {"manifest", report.manifest},
         {"metrics", report.metrics},
         {"tests", report.tests}};
  return j.dump(2) + "\n";
}

Report report_from_string(std::string_view text) {
  try {
    const auto j = Json::parse(text);
    Report r;
    r.config_digest = j.at("config_digest").get<std::string>();
    r.manifest = j.at("manifest");
    r.metrics = j.at("metrics").get<MetricsReport>();
    r.tests = j.at("tests").get<std::vector<TestRecord>>();
    return r;
  } catch (const Json::exception& e) {
    throw ParseError(std::string("bad report: ") + e.what());
  }
}

void write_report(const Report& report, const std::string& path) {
  write_file(path, report_to_string(report));
}

Report read_report(const std::string& path) {
  return report_from_string(read_file(path));
}

}  // namespace peeling
