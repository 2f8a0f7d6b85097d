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

#include <sstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include "commands.hpp"
#include "peeling/corpus.hpp"
#include "testing.hpp"

namespace peeling::cli {
namespace {

using peeling::testing::slurp;
using peeling::testing::TempDir;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result call(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::size_t line_count(const std::string& s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto r = call({"simulate", "--scenes", "50", "--seed", "3", "--out",
                         dir_.path().string()});
    ASSERT_EQ(r.code, kExitOk) << r.err;
  }
  std::string cases() const { return dir_.file("testcases.jsonl"); }
  std::string scenes() const { return dir_.file("scenes.jsonl"); }
  TempDir dir_;
};

TEST_F(CliTest, SimulateWritesBothFiles) {
  EXPECT_EQ(load_testcases(cases()).size(), 50u);
  EXPECT_EQ(load_scenes(scenes()).size(), 50u);
  EXPECT_EQ(load_scenes(scenes())[7].id, "scene-00007");
}

TEST_F(CliTest, GenerateThenDetect) {
  const auto tests = dir_.file("tests.jsonl");
  auto r = call({"generate", "--input", cases(), "--backend", "sim", "--seed",
                 "1", "--out", tests});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.err.find(R"("stage":"accepted")"), std::string::npos);
  EXPECT_GT(load_tests(tests).size(), 0u);

  const auto report = dir_.file("report.json");
  r = call({"detect", "--tests", tests, "--vg", "sim:perfect", "--out", report});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("mmi               0.0000"), std::string::npos) << r.out;
  const auto j = nlohmann::json::parse(slurp(report));
  EXPECT_EQ(j["metrics"]["mmi"], 0.0);
  EXPECT_EQ(j["manifest"]["vg"], "sim:perfect");
  EXPECT_EQ(j["config_digest"], sha256_hex(j["manifest"].dump()));

  r = call({"detect", "--tests", tests, "--vg",
            "sim:faulty:ignore_attribute=color", "--baseline-acc", "1"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("acc_original      1.0000"), std::string::npos) << r.out;
}

TEST_F(CliTest, GenerateIsReproducible) {
  const auto a = dir_.file("a.jsonl");
  const auto b = dir_.file("b.jsonl");
  ASSERT_EQ(call({"generate", "--input", cases(), "--seed", "9", "--jobs", "1",
                  "--out", a}).code, kExitOk);
  ASSERT_EQ(call({"generate", "--input", cases(), "--seed", "9", "--jobs", "4",
                  "--out", b}).code, kExitOk);
  EXPECT_EQ(slurp(a), slurp(b));
}

TEST_F(CliTest, EmptyResultExitsThree) {
  // The expression names no object in its scene, so nothing is accepted.
  const auto odd = dir_.write(
      "odd.jsonl",
      R"({"id":"x","image":{"scene":"scene-00000"},"expression":"a purple umbrella near three trucks","bbox":[0,0,5,5]})"
      "\n");
  const auto r = call({"generate", "--input", odd, "--scenes", scenes(),
                       "--out", dir_.file("t.jsonl")});
  EXPECT_EQ(r.code, kExitEmpty) << r.err;
}

TEST_F(CliTest, UnreachableBackendExitsFour) {
  const auto config = dir_.write(
      "c.json",
      R"({"backends": {"vqa": {"url": "http://127.0.0.1:1/vqa", "max_retries": 0,
                               "auth_env": "", "timeout_s": 1}}})");
  const auto r = call({"generate", "--input", cases(), "--backend", "http",
                       "--config", config, "--out", dir_.file("t.jsonl")});
  EXPECT_EQ(r.code, kExitBackend) << r.err;
  EXPECT_NE(r.err.find("unreachable"), std::string::npos);
}

TEST_F(CliTest, ExtractEval) {
  const auto gold = dir_.write(
      "gold.jsonl",
      R"({"id":"1","expression":"white bird standing behind two brown birds","object":"bird","properties":["white","standing behind two brown birds"]})"
      "\n"
      R"({"id":"2","expression":"blue bag with a D logo","object":"bag","properties":["blue","with a D logo"]})"
      "\n");
  auto r = call({"extract-eval", "--gold", gold, "--backend", "rule_based"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("all       1.0000     1.0000  1.0000"), std::string::npos)
      << r.out;

  const auto pred = dir_.write(
      "pred.jsonl",
      R"({"id":"1","expression":"white bird standing behind two brown birds","object":"bird","properties":["white"]})"
      "\n");
  r = call({"extract-eval", "--gold", gold, "--pred", pred});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("property  1.0000     0.2500  0.4000"), std::string::npos)
      << r.out;
  EXPECT_EQ(call({"extract-eval", "--gold", gold}).code, kExitUsage);
}

TEST(Cli, PerturbTrace) {
  const auto r = call({"perturb", "--text", "a bird stands behind two brown birds",
                       "--seed", "4", "--head", "bird"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(line_count(r.out), 5u) << r.out;
  EXPECT_NE(r.out.find("p2_sentence: a bird is standing behind"),
            std::string::npos)
      << r.out;
  EXPECT_EQ(call({"perturb", "--text", "a bird", "--levels", "char,word"}).code,
            kExitUsage);
  const auto one = call({"perturb", "--text", "a bird", "--levels", "char"});
  EXPECT_EQ(line_count(one.out), 3u);
}

TEST(Cli, UsageErrors) {
  auto r = call({});
  EXPECT_EQ(r.code, kExitUsage);
  r = call({"generate", "--input", "x.jsonl", "--out", "y", "--bogus"});
  EXPECT_EQ(r.code, kExitUsage);
  r = call({"detect", "--tests", "/nonexistent/t.jsonl"});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_EQ(line_count(r.err), 1u) << r.err;
  EXPECT_EQ(r.err.rfind("error: ", 0), 0u);
  r = call({"simulate", "--scenes", "3", "--out", "/nonexistent/dir"});
  EXPECT_EQ(r.code, kExitUsage);
  r = call({"simulate", "--scenes", "3", "--out", "/tmp", "--params",
            R"({"n_objects": 1})"});
  EXPECT_EQ(r.code, kExitUsage);
}

TEST(Cli, HelpDocumentsEveryFlag) {
  auto r = call({"--help"});
  EXPECT_EQ(r.code, kExitOk);
  for (const char* sub :
       {"generate", "detect", "simulate", "extract-eval", "perturb"}) {
    EXPECT_NE(r.out.find(sub), std::string::npos) << sub;
  }
  r = call({"detect", "--help"});
  EXPECT_EQ(r.code, kExitOk);
  for (const char* flag : {"--tests", "--vg", "--baseline-acc", "--originals",
                           "--out", "--labels", "--scenes", "--jobs"}) {
    EXPECT_NE(r.out.find(flag), std::string::npos) << flag;
  }
}

}  // namespace
}  // namespace peeling::cli
