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

#include <set>

#include <gtest/gtest.h>

#include "peeling/corpus.hpp"
#include "peeling/errors.hpp"
#include "peeling/scenesim.hpp"
#include "testing.hpp"

namespace peeling {
namespace {

using testing::TempDir;

AdversarialTest sample_test() {
  AdversarialTest t;
  t.id = "c1#0";
  t.base = {ImageRef::path("images/1.jpg"), {"c1", "a white bird"},
            {1.5, 2, 30, 40}};
  t.candidate.text = "a bird";
  t.candidate.parent = "c1";
  t.candidate.head = "bird";
  t.final_expression = "a birf";
  t.provenance = {{Stage::kP1Reduction, "a white bird", "a bird", false, ""},
                  {Stage::kP2Sentence, "a bird", "a bird", true, "NoApplicablePhrase"},
                  {Stage::kP2Word, "a bird", "a bird", true, "NoEligibleWord"},
                  {Stage::kP2Char, "a bird", "a birf", false, ""}};
  return t;
}

TEST(Json, TestCaseShape) {
  const TestCase tc{ImageRef::scene("s1"), {"s1", "a dog"}, {1, 2, 3, 4}};
  const Json j = tc;
  EXPECT_EQ(j.dump(),
            R"({"bbox":[1.0,2.0,3.0,4.0],"expression":"a dog","id":"s1",)"
            R"("image":{"scene":"s1"}})");
  EXPECT_EQ(j.get<TestCase>(), tc);
}

TEST(Json, ExtractionRoundTripIsByteEqual) {
  const std::string text = "white bird standing behind two brown birds";
  ExtractionResult ex;
  ex.object = testing::span_of(text, "bird");
  ex.properties = {testing::span_of(text, "white", PropertyKind::kColor)};
  ex.source = ExtractionSource::kRuleBased;
  const auto dumped = Json(ex).dump();
  const auto back = Json::parse(dumped).get<ExtractionResult>();
  EXPECT_EQ(back, ex);
  EXPECT_EQ(Json(back).dump(), dumped);
}

TEST(Json, AdversarialTestRoundTrip) {
  const auto t = sample_test();
  const auto back = Json::parse(Json(t).dump()).get<AdversarialTest>();
  EXPECT_EQ(back, t);
  EXPECT_EQ(back.oracle(), t.base.oracle);
}

TEST(Json, SceneRoundTrip) {
  const auto g = gen_scene(4, SceneParams{}, "s");
  const auto back = Json::parse(Json(g.scene).dump()).get<SceneGraph>();
  EXPECT_EQ(back, g.scene);
}

TEST(LoadTestcases, ValidLines) {
  TempDir dir;
  const auto path = dir.write(
      "cases.jsonl",
      R"({"id":"a","image":{"path":"1.jpg"},"expression":"a dog","bbox":[0,0,5,5]})"
      "\n"
      R"({"id":"b","image":{"path":"2.jpg"},"expression":"a cat","bbox":[1,1,5,5]})"
      "\n\n"
      R"({"id":"c","image":{"scene":"s"},"expression":"a cow","bbox":[2,2,5,5]})"
      "\n");
  const auto cases = load_testcases(path);
  ASSERT_EQ(cases.size(), 3u);
  EXPECT_EQ(cases[2].image, ImageRef::scene("s"));
}

TEST(LoadTestcases, BadLinesAreReported) {
  TempDir dir;
  const auto path = dir.write(
      "cases.jsonl",
      R"({"id":"a","image":{"path":"1.jpg"},"expression":"a dog","bbox":[0,0,5,5]})"
      "\n"
      R"({"id":"b","image":{"path":"2.jpg"},"expression":"a cat","bbox":[1,1,5]})"
      "\n"
      R"({"id":"a","image":{"path":"3.jpg"},"expression":"dup","bbox":[1,1,5,5]})"
      "\n"
      R"({"id":"d","image":{"path":"3.jpg"},"expression":"  ","bbox":[1,1,5,5]})"
      "\n"
      R"({"id":"e","image":{"path":"3.jpg"},"expression":"flat","bbox":[1,1,0,5]})"
      "\nnot json\n");
  const auto loaded = load_testcases_report(path);
  ASSERT_EQ(loaded.cases.size(), 1u);
  std::set<std::size_t> lines;
  for (const auto& e : loaded.errors) lines.insert(e.line);
  EXPECT_EQ(lines, (std::set<std::size_t>{2, 3, 4, 5, 6}));
  EXPECT_THROW(parse_testcase(R"({"id":"x"})"), ParseError);
}

TEST(LoadTestcases, MissingAndEmptyFiles) {
  TempDir dir;
  EXPECT_THROW(load_testcases(dir.file("nope.jsonl")), IoError);
  EXPECT_THROW(load_testcases(dir.write("empty.jsonl", "\n")), NoValidLines);
}

TEST(Corpus, WriteLoadIsIdentity) {
  TempDir dir;
  std::vector<TestCase> cases;
  std::vector<SceneGraph> scenes;
  for (std::uint64_t i = 0; i < 10; ++i) {
    auto g = gen_scene(i, SceneParams{}, "s" + std::to_string(i));
    cases.push_back(g.test_case);
    scenes.push_back(g.scene);
  }
  write_testcases(cases, dir.file("c.jsonl"));
  write_scenes(scenes, dir.file("s.jsonl"));
  EXPECT_EQ(load_testcases(dir.file("c.jsonl")), cases);
  EXPECT_EQ(load_scenes(dir.file("s.jsonl")), scenes);

  const std::vector<AdversarialTest> tests = {sample_test()};
  write_tests(tests, dir.file("t.jsonl"));
  EXPECT_EQ(load_tests(dir.file("t.jsonl")), tests);
  EXPECT_EQ(testing::slurp(dir.file("t.jsonl")), tests_to_jsonl(tests));
  EXPECT_THROW(write_tests(tests, dir.file("missing/t.jsonl")), IoError);
}

TEST(Sample, PermutationDeterminismAndSize) {
  std::vector<int> items(10);
  for (int i = 0; i < 10; ++i) items[i] = i;
  auto all = sample(items, 10, 1);
  std::sort(all.begin(), all.end());
  EXPECT_EQ(all, items);
  EXPECT_EQ(sample(items, 4, 77), sample(items, 4, 77));
  EXPECT_THROW(sample(items, 11, 0), SampleTooLarge);

  std::vector<std::string> ids(10834);
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = "r" + std::to_string(i);
  const auto picked = sample(ids, 100, 2024);
  EXPECT_EQ(std::set<std::string>(picked.begin(), picked.end()).size(), 100u);
}

TEST(Sha256, KnownVector) {
  EXPECT_EQ(sha256_hex("abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Report, RoundTripIsByteIdentical) {
  Report r;
  r.config_digest = sha256_hex("x");
  r.manifest = {{"seed", 3}};
  r.metrics.acc_original = 0.9;
  r.metrics.acc_adversarial = 0.7;
  r.metrics.mmi = 0.2222;
  r.metrics.counts = {10, 7, 3, 0};
  r.metrics.extraction_metrics = std::map<std::string, Prf>{{"all", {1, 0.5, 0.6}}};
  TestRecord rec;
  rec.id = "t";
  rec.final_expression = "a bird";
  rec.predicted = BoundingBox{0, 0, 1, 1};
  rec.iou = 0.1;
  rec.outcome = Outcome::kIssue;
  r.tests = {rec};
  TempDir dir;
  write_report(r, dir.file("r.json"));
  const auto text = testing::slurp(dir.file("r.json"));
  EXPECT_EQ(report_to_string(read_report(dir.file("r.json"))), text);
  const auto j = Json::parse(text);
  EXPECT_EQ(j["tests"][0]["issue"], true);
}

TEST(Report, EmptyRunIsValid) {
  Report r;
  const auto text = report_to_string(r);
  const auto j = Json::parse(text);
  EXPECT_TRUE(j["metrics"]["mmi"].is_null());
  EXPECT_TRUE(j["tests"].empty());
  EXPECT_EQ(report_to_string(report_from_string(text)), text);
}

}  // namespace
}  // namespace peeling
