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

// Python bindings. Structured values (scenes, test cases, adversarial tests,
// reports) cross the boundary as plain dicts in the same shape as the JSONL
// files; boxes are [x, y, w, h] lists.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <iomanip>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "peeling/config.hpp"
#include "peeling/corpus.hpp"
#include "peeling/detect.hpp"
#include "peeling/errors.hpp"
#include "peeling/extract.hpp"
#include "peeling/oracle.hpp"
#include "peeling/parallel.hpp"
#include "peeling/perturb.hpp"
#include "peeling/pipeline.hpp"
#include "peeling/random.hpp"
#include "peeling/recombine.hpp"
#include "peeling/scenesim.hpp"

namespace py = pybind11;

namespace peeling {
namespace {

Json to_cpp(py::handle obj) {
  const auto json = py::module_::import("json");
  return Json::parse(json.attr("dumps")(obj).cast<std::string>());
}

py::object to_py(const Json& j) {
  const auto json = py::module_::import("json");
  return json.attr("loads")(j.dump());
}

template <typename T>
T from_py(py::handle obj) {
  try {
    return to_cpp(obj).get<T>();
  } catch (const Json::exception& e) {
    throw ParseError(e.what());
  }
}

template <typename T>
std::vector<T> list_from_py(const py::list& items) {
  std::vector<T> out;
  out.reserve(items.size());
  for (const auto& item : items) out.push_back(from_py<T>(item));
  return out;
}

template <typename T>
py::list list_to_py(const std::vector<T>& items) {
  py::list out;
  for (const auto& item : items) out.append(to_py(Json(item)));
  return out;
}

BoundingBox box_from_py(const std::vector<double>& v) {
  if (v.size() != 4) throw InvalidScene("a box is [x, y, w, h]");
  return {v[0], v[1], v[2], v[3]};
}

std::vector<double> box_to_py(const BoundingBox& b) { return {b.x, b.y, b.w, b.h}; }

std::shared_ptr<SceneStore> store_from_py(const py::list& scenes) {
  auto store = std::make_shared<SceneStore>();
  for (auto& s : list_from_py<SceneGraph>(scenes)) {
    validate_scene(s);
    store->add(std::move(s));
  }
  return store;
}

RunConfig config_from_py(const py::object& config) {
  return config.is_none() ? RunConfig{} : RunConfig::from_json(to_cpp(config));
}

ExtractionResult extraction_for(const Expression& expr,
                                const py::object& extraction) {
  if (extraction.is_none()) return extract_rule_based(expr);
  return from_py<ExtractionResult>(extraction);
}

std::vector<Level> levels_from(const std::vector<std::string>& names) {
  std::vector<Level> out;
  for (const auto& n : names) {
    const auto level = parse_level(n);
    if (!level) throw ConfigError("unknown level '" + n + "'");
    out.push_back(*level);
  }
  return out;
}

QueryKind query_kind(const std::string& name) {
  for (auto k : kQueryOrder) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("unknown query kind '" + name + "'");
}

SceneParams params_from(const py::kwargs& kwargs) {
  RunConfig config;
  if (!kwargs.empty()) config.merge(Json{{"sim", to_cpp(kwargs)}});
  return config.sim;
}

std::string scene_id(std::size_t i) {
  std::ostringstream id;
  id << "scene-" << std::setw(5) << std::setfill('0') << i;
  return id.str();
}

void register_errors(py::module_& m) {
  static py::exception<Error> base(m, "PeelingError");
  py::register_exception<InvalidExpression>(m, "InvalidExpression", base);
  py::register_exception<ConfigError>(m, "ConfigError", base);
  py::register_exception<MissingPlaceholder>(m, "MissingPlaceholder", base);
  py::register_exception<EmptyIcl>(m, "EmptyIcl", base);
  py::register_exception<EmptyCorpus>(m, "EmptyCorpus", base);
  py::register_exception<ParseError>(m, "ParseError", base);
  py::register_exception<SpanNotFound>(m, "SpanNotFound", base);
  py::register_exception<LexiconLoadError>(m, "LexiconLoadError", base);
  py::register_exception<ZeroOriginalAccuracy>(m, "ZeroOriginalAccuracy", base);
  py::register_exception<EmptySample>(m, "EmptySample", base);
  py::register_exception<UnparseableSemantics>(m, "UnparseableSemantics", base);
  py::register_exception<GenerationExhausted>(m, "GenerationExhausted", base);
  py::register_exception<UnknownScene>(m, "UnknownScene", base);
  py::register_exception<InvalidScene>(m, "InvalidScene", base);
  py::register_exception<IoError>(m, "IoError", base);
  py::register_exception<NoValidLines>(m, "NoValidLines", base);
  py::register_exception<SampleTooLarge>(m, "SampleTooLarge", base);
  py::register_exception<BackendError>(m, "BackendError", base);
}

}  // namespace
}  // namespace peeling

PYBIND11_MODULE(_core, m) {
  using namespace peeling;
  m.doc() = "Native core of the peeling test harness.";
  register_errors(m);

  m.attr("ISSUE_THRESHOLD") = kIssueThreshold;

  // Metrics.
  m.def(
      "iou",
      [](const std::vector<double>& a, const std::vector<double>& b) {
        return iou(box_from_py(a), box_from_py(b));
      },
      py::arg("a"), py::arg("b"));
  m.def(
      "is_issue",
      [](const std::vector<double>& predicted,
         const std::vector<double>& oracle, double threshold) {
        return is_issue(box_from_py(predicted), box_from_py(oracle), threshold);
      },
      py::arg("predicted"), py::arg("oracle"),
      py::arg("threshold") = kIssueThreshold);
  m.def("compute_mmi", &compute_mmi, py::arg("acc_original"),
        py::arg("acc_adversarial"));
  m.def("compute_atcr", &compute_atcr, py::arg("correct"), py::arg("total"));
  m.def(
      "compute_prf",
      [](const std::vector<std::tuple<std::string, std::size_t, std::size_t,
                                      std::string>>& predicted,
         const std::vector<std::tuple<std::string, std::size_t, std::size_t,
                                      std::string>>& gold) {
        auto spans = [](const auto& items) {
          std::vector<LabeledSpan> out;
          for (const auto& [id, start, end, category] : items) {
            out.push_back({id, start, end, category});
          }
          return out;
        };
        return to_py(Json(compute_prf(spans(predicted), spans(gold))));
      },
      py::arg("predicted"), py::arg("gold"),
      "Spans are (expression_id, start, end, category) tuples.");

  // Extraction and recombination.
  m.def(
      "extract",
      [](const std::string& text, const std::string& id) {
        return to_py(Json(extract_rule_based({id, text})));
      },
      py::arg("text"), py::arg("id") = "e0");
  m.def(
      "generate_candidates",
      [](const std::string& text, const py::object& extraction,
         std::size_t cap, const std::string& policy, const std::string& id) {
        const Expression expr{id, text};
        RecombineOptions options;
        options.cap = cap;
        const auto p = parse_subset_policy(policy);
        if (!p) throw ConfigError("unknown subset policy '" + policy + "'");
        options.policy = *p;
        return list_to_py(
            generate_candidates(expr, extraction_for(expr, extraction), options));
      },
      py::arg("text"), py::arg("extraction") = py::none(), py::arg("cap") = 63,
      py::arg("policy") = "all_proper", py::arg("id") = "e0");
  m.def(
      "candidate_subsets",
      [](std::size_t k, std::size_t cap, const std::string& policy) {
        RecombineOptions options;
        options.cap = cap;
        const auto p = parse_subset_policy(policy);
        if (!p) throw ConfigError("unknown subset policy '" + policy + "'");
        options.policy = *p;
        return candidate_subsets(k, options);
      },
      py::arg("k"), py::arg("cap") = 63, py::arg("policy") = "all_proper");

  // Selection queries.
  m.def(
      "build_queries",
      [](const std::string& candidate) {
        std::vector<std::tuple<std::string, std::string, std::string>> out;
        for (const auto& q : build_queries({candidate, {}, "", ""})) {
          out.emplace_back(std::string(to_string(q.kind)), q.text, q.expected);
        }
        return out;
      },
      py::arg("candidate"),
      "(kind, question, expected answer) for each of the three queries.");
  m.def(
      "normalize_answer",
      [](const std::string& raw, const std::string& kind) {
        return normalize_answer(raw, query_kind(kind));
      },
      py::arg("raw"), py::arg("kind"));

  // Perturbation.
  m.def(
      "perturb",
      [](const std::string& text, std::uint64_t seed,
         const std::vector<std::string>& levels, const std::string& head) {
        PerturbConfig config;
        config.seed = seed;
        config.levels = levels_from(levels);
        config.validate();
        const auto out = perturb_pipeline({text, {}, "", head}, config);
        return to_py(Json{{"final", out.final_text},
                          {"provenance", Json(out.provenance)}});
      },
      py::arg("text"), py::arg("seed") = 0,
      py::arg("levels") = std::vector<std::string>{"sentence", "word", "char"},
      py::arg("head") = "");

  // Simulator.
  m.def(
      "gen_scene",
      [](std::uint64_t seed, const std::string& id, const py::kwargs& kwargs) {
        const auto g = gen_scene(seed, params_from(kwargs), id);
        return to_py(Json{{"scene", Json(g.scene)},
                          {"test_case", Json(g.test_case)}});
      },
      py::arg("seed"), py::arg("id") = "scene-00000",
      "Keyword arguments override scene parameters (n_objects, ...).");
  m.def(
      "simulate",
      [](std::size_t n, std::uint64_t seed, std::size_t jobs,
         const py::kwargs& kwargs) {
        const auto params = params_from(kwargs);
        std::vector<SceneGraph> scenes(n);
        std::vector<TestCase> cases(n);
        {
          py::gil_scoped_release release;
          const auto& vocab = bundled_lexicons().vocabulary;
          parallel_for(n, jobs, [&](std::size_t i) {
            auto g = gen_scene(derive_seed(seed, "simulate", i), params,
                               scene_id(i), vocab);
            scenes[i] = std::move(g.scene);
            cases[i] = std::move(g.test_case);
          });
        }
        return py::make_tuple(list_to_py(scenes), list_to_py(cases));
      },
      py::arg("n"), py::arg("seed") = 0, py::arg("jobs") = 1,
      "(scenes, test_cases), identical to `peeling simulate`.");
  m.def(
      "match_all",
      [](const std::string& expression, const py::dict& scene) {
        return match_all(expression, from_py<SceneGraph>(scene)).matches;
      },
      py::arg("expression"), py::arg("scene"));
  m.def(
      "mock_vg",
      [](const py::dict& scene, const std::string& expression,
         const std::string& mode) {
        return box_to_py(mock_vg(from_py<SceneGraph>(scene), expression,
                                 VgMode::parse(mode),
                                 bundled_lexicons().vocabulary));
      },
      py::arg("scene"), py::arg("expression"), py::arg("mode") = "perfect");

  // End to end, against the simulator backends.
  m.def(
      "generate_tests",
      [](const py::list& cases, const py::list& scenes,
         const py::object& config) {
        const auto tc = list_from_py<TestCase>(cases);
        const auto store = store_from_py(scenes);
        const auto run = config_from_py(config);
        GenerateResult result;
        {
          py::gil_scoped_release release;
          SimVqaBackend vqa(store);
          result = generate_tests(tc, run, {&vqa});
        }
        py::dict out;
        out["tests"] = list_to_py(result.tests);
        out["stats"] = to_py(result.stats.to_json());
        return out;
      },
      py::arg("cases"), py::arg("scenes"), py::arg("config") = py::none());
  m.def(
      "run_detection",
      [](const py::list& tests, const py::list& scenes, const std::string& vg,
         std::optional<double> baseline_accuracy, double threshold,
         std::size_t jobs) {
        const auto ts = list_from_py<AdversarialTest>(tests);
        const auto store = store_from_py(scenes);
        DetectionOptions options;
        options.threshold = threshold;
        options.baseline_accuracy = baseline_accuracy;
        options.jobs = jobs;
        DetectionRun run;
        {
          py::gil_scoped_release release;
          SimVgBackend backend(store, VgMode::parse(vg));
          run = run_detection(ts, backend, options);
        }
        py::dict out;
        out["metrics"] = to_py(Json(run.report));
        out["records"] = list_to_py(run.records);
        return out;
      },
      py::arg("tests"), py::arg("scenes"), py::arg("vg") = "perfect",
      py::arg("baseline_accuracy") = py::none(),
      py::arg("threshold") = kIssueThreshold, py::arg("jobs") = 1);
}
