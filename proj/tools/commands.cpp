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

#include "commands.hpp"

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "peeling/clients.hpp"
#include "peeling/config.hpp"
#include "peeling/corpus.hpp"
#include "peeling/detect.hpp"
#include "peeling/errors.hpp"
#include "peeling/extract.hpp"
#include "peeling/parallel.hpp"
#include "peeling/perturb.hpp"
#include "peeling/pipeline.hpp"
#include "peeling/random.hpp"
#include "peeling/scenesim.hpp"
#include "peeling/unicode.hpp"

namespace peeling::cli {

namespace {

using Json = nlohmann::json;

// Raised when every call to a backend failed at the transport level.
class Unreachable : public Error {
 public:
  using Error::Error;
};

void emit_counts(std::ostream& err, std::string_view command,
                 const Json& counts) {
  for (const auto& [stage, count] : counts.items()) {
    err << Json{{"command", command}, {"stage", stage}, {"count", count}}.dump()
        << '\n';
  }
}

// Counts calls so an unreachable service can be told apart from a run that
// simply produced nothing.
struct CallStats {
  std::atomic<std::size_t> ok{0};
  std::atomic<std::size_t> unreachable{0};

  void record_failure(const BackendError& e) {
    if (e.kind() == BackendError::Kind::kTransport ||
        e.kind() == BackendError::Kind::kTimeout) {
      ++unreachable;
    }
  }
  void check(std::string_view name) const {
    if (ok == 0 && unreachable > 0) {
      throw Unreachable(std::string(name) + " backend unreachable");
    }
  }
};

class CountingVqa : public VqaBackend {
 public:
  CountingVqa(VqaBackend& inner, CallStats& stats)
      : inner_(inner), stats_(stats) {}
  std::string answer(const ImageRef& image,
                     std::string_view question) override {
    try {
      auto a = inner_.answer(image, question);
      ++stats_.ok;
      return a;
    } catch (const BackendError& e) {
      stats_.record_failure(e);
      throw;
    }
  }

 private:
  VqaBackend& inner_;
  CallStats& stats_;
};

class CountingVg : public VgBackend {
 public:
  CountingVg(VgBackend& inner, CallStats& stats)
      : inner_(inner), stats_(stats) {}
  BoundingBox locate(const ImageRef& image,
                     std::string_view expression) override {
    try {
      auto box = inner_.locate(image, expression);
      ++stats_.ok;
      return box;
    } catch (const BackendError& e) {
      stats_.record_failure(e);
      throw;
    }
  }

 private:
  VgBackend& inner_;
  CallStats& stats_;
};

RunConfig load_config(const std::string& path) {
  return path.empty() ? RunConfig{} : RunConfig::load(path);
}

std::shared_ptr<SceneStore> load_store(const std::string& path) {
  auto store = std::make_shared<SceneStore>();
  for (auto& s : load_scenes(path)) store->add(std::move(s));
  return store;
}

std::string default_scenes_path(const std::string& sibling) {
  auto dir = std::filesystem::path(sibling).parent_path();
  return (dir / "scenes.jsonl").string();
}

std::vector<Level> parse_levels(const std::string& list) {
  std::vector<Level> levels;
  std::stringstream in(list);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    auto level = parse_level(item);
    if (!level) throw ConfigError("unknown perturbation level '" + item + "'");
    levels.push_back(*level);
  }
  return levels;
}

std::string fixed(double v) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(4) << v;
  return out.str();
}

// ---------------------------------------------------------------------------

struct GenerateArgs {
  std::string input;
  std::string backend = "sim";
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> jobs;
  std::string scenes;
  std::string out;
};

int cmd_generate(const GenerateArgs& a, std::ostream& out, std::ostream& err) {
  auto config = load_config(a.config);
  if (a.seed) config.seed = *a.seed;
  if (a.jobs) config.jobs = *a.jobs;

  auto loaded = load_testcases_report(a.input);
  for (const auto& e : loaded.errors) {
    err << Json{{"command", "generate"}, {"skipped_line", e.line},
                {"error", e.message}}.dump()
        << '\n';
  }

  std::unique_ptr<VqaBackend> vqa;
  std::unique_ptr<ChatBackend> chat;
  std::unique_ptr<TranslationBackend> translator;
  if (a.backend == "sim") {
    const auto scenes = a.scenes.empty() ? default_scenes_path(a.input)
                                         : a.scenes;
    vqa = std::make_unique<SimVqaBackend>(load_store(scenes));
  } else if (a.backend == "http") {
    vqa = http_vqa(config.backend("vqa"));
  } else {
    throw ConfigError("--backend must be sim or http");
  }
  if (config.extraction == ExtractionMode::kLlm) {
    chat = http_chat(config.backend("llm"));
  }
  if (config.perturb.translation == TranslationMode::kService) {
    translator = http_translate(config.backend("translate"));
  }

  CallStats stats;
  CountingVqa counted(*vqa, stats);
  auto result = generate_tests(loaded.cases, config,
                               {&counted, chat.get(), translator.get()});
  emit_counts(err, "generate", result.stats.to_json());
  stats.check("VQA");

  write_tests(result.tests, a.out);
  out << "wrote " << result.tests.size() << " tests to " << a.out << '\n';
  return result.tests.empty() ? kExitEmpty : kExitOk;
}

// ---------------------------------------------------------------------------

struct DetectArgs {
  std::string tests;
  std::string vg = "sim:perfect";
  std::optional<double> baseline_acc;
  std::string originals;
  std::string labels;
  std::string scenes;
  std::string config;
  std::optional<std::size_t> jobs;
  std::string out;
};

int cmd_detect(const DetectArgs& a, std::ostream& out, std::ostream& err) {
  auto config = load_config(a.config);
  if (a.jobs) config.jobs = *a.jobs;
  const auto tests = load_tests(a.tests);

  std::unique_ptr<VgBackend> vg;
  std::shared_ptr<SceneStore> store;
  constexpr std::string_view kSim = "sim:";
  if (a.vg.rfind(kSim, 0) == 0) {
    const auto mode = VgMode::parse(a.vg.substr(kSim.size()));
    store = load_store(a.scenes.empty() ? default_scenes_path(a.tests)
                                        : a.scenes);
    vg = std::make_unique<SimVgBackend>(store, mode);
  } else if (a.vg == "http") {
    vg = http_vg(config.backend("vg"));
  } else {
    throw ConfigError("--vg must be sim:perfect, sim:faulty:<mode> or http");
  }

  DetectionOptions options;
  options.threshold = config.threshold;
  options.jobs = config.effective_jobs();
  options.baseline_accuracy = a.baseline_acc;
  if (a.baseline_acc && !(*a.baseline_acc >= 0 && *a.baseline_acc <= 1)) {
    throw ConfigError("--baseline-acc must be in [0, 1]");
  }

  std::optional<std::vector<TestCase>> originals;
  if (!a.originals.empty()) originals = load_testcases(a.originals);

  if (!a.labels.empty()) {
    std::map<std::string, bool> labels;
    std::istringstream in(read_file(a.labels));
    std::string line;
    while (std::getline(in, line)) {
      if (trim(line).empty()) continue;
      try {
        auto j = Json::parse(line);
        labels[j.at("id").get<std::string>()] = j.at("correct").get<bool>();
      } catch (const Json::exception& e) {
        throw ConfigError(a.labels + ": " + e.what());
      }
    }
    options.judge = [labels](const AdversarialTest& t) -> std::optional<bool> {
      auto it = labels.find(t.id);
      if (it == labels.end()) return std::nullopt;
      return it->second;
    };
  } else if (store) {
    options.judge = [store](const AdversarialTest& t) -> std::optional<bool> {
      if (!store->contains(t.base.image.value)) return std::nullopt;
      const auto scene = store->get(t.base.image.value);
      try {
        const auto m = match_all(t.final_expression, *scene);
        return m.matches.size() == 1 && m.matches[0] == scene->target;
      } catch (const UnparseableSemantics&) {
        return false;
      }
    };
  }

  CallStats stats;
  CountingVg counted(*vg, stats);
  const auto run = run_detection(tests, counted, options,
                                 originals ? &*originals : nullptr);
  stats.check("VG");

  Report report;
  report.manifest = run_manifest(config);
  report.manifest["vg"] = a.vg;
  report.manifest["tests_digest"] = sha256_hex(read_file(a.tests));
  if (a.baseline_acc) report.manifest["baseline_accuracy"] = *a.baseline_acc;
  if (!a.originals.empty()) {
    report.manifest["originals_digest"] = sha256_hex(read_file(a.originals));
  }
  report.config_digest = sha256_hex(report.manifest.dump());
  report.metrics = run.report;
  report.tests = run.records;
  if (!a.out.empty()) write_report(report, a.out);

  const auto& m = run.report;
  emit_counts(err, "detect",
              {{"tests", m.counts.total},
               {"correct", m.counts.correct},
               {"issues", m.counts.issues},
               {"indeterminate", m.counts.indeterminate}});
  out << std::left << std::setw(18) << "metric" << "value\n";
  out << std::setw(18) << "acc_original" << fixed(m.acc_original) << '\n';
  out << std::setw(18) << "acc_adversarial" << fixed(m.acc_adversarial)
      << '\n';
  out << std::setw(18) << "mmi" << (m.mmi ? fixed(*m.mmi) : "undefined")
      << '\n';
  out << std::setw(18) << "atcr" << (m.atcr ? fixed(*m.atcr) : "n/a") << '\n';
  out << std::setw(18) << "tests" << m.counts.total << '\n';
  out << std::setw(18) << "issues" << m.counts.issues << '\n';
  out << std::setw(18) << "indeterminate" << m.counts.indeterminate << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
  std::size_t scenes = 500;
  std::uint64_t seed = 0;
  std::string params;
  std::string config;
  std::string out;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out, std::ostream& err) {
  auto config = load_config(a.config);
  if (!a.params.empty()) {
    const auto text = trim(a.params).rfind('{', 0) == 0 ? a.params
                                                         : read_file(a.params);
    try {
      config.merge(Json{{"sim", Json::parse(text)}});
    } catch (const Json::exception& e) {
      throw ConfigError(std::string("--params: ") + e.what());
    }
  }
  if (!std::filesystem::is_directory(a.out)) {
    throw IoError("output directory " + a.out + " does not exist");
  }

  std::vector<SceneGraph> scenes(a.scenes);
  std::vector<TestCase> cases(a.scenes);
  const auto& vocab = bundled_lexicons().vocabulary;
  parallel_for(a.scenes, config.effective_jobs(), [&](std::size_t i) {
    std::ostringstream id;
    id << "scene-" << std::setw(5) << std::setfill('0') << i;
    auto g = gen_scene(derive_seed(a.seed, "simulate", i), config.sim,
                       id.str(), vocab);
    scenes[i] = std::move(g.scene);
    cases[i] = std::move(g.test_case);
  });
  const auto dir = std::filesystem::path(a.out);
  write_scenes(scenes, (dir / "scenes.jsonl").string());
  write_testcases(cases, (dir / "testcases.jsonl").string());
  emit_counts(err, "simulate", {{"scenes", scenes.size()}});
  out << "wrote " << scenes.size() << " scenes to " << a.out << '\n';
  return scenes.empty() ? kExitEmpty : kExitOk;
}

// ---------------------------------------------------------------------------

struct Labelled {
  Expression expr;
  ParsedAnswer answer;
};

std::vector<Labelled> load_labelled(const std::string& path) {
  std::vector<Labelled> out;
  std::istringstream in(read_file(path));
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (trim(line).empty()) continue;
    try {
      const auto j = Json::parse(line);
      Labelled l;
      l.expr.text = j.at("expression").get<std::string>();
      l.expr.id = j.value("id", std::to_string(number));
      l.answer.object = j.at("object").get<std::string>();
      l.answer.properties = j.at("properties").get<std::vector<std::string>>();
      out.push_back(std::move(l));
    } catch (const Json::exception& e) {
      throw ParseError(path + ":" + std::to_string(number) + ": " + e.what());
    }
  }
  return out;
}

void add_spans(const std::string& id, const ExtractionResult& ex,
               std::vector<LabeledSpan>& objects,
               std::vector<LabeledSpan>& properties) {
  objects.push_back({id, ex.object.start, ex.object.end, "object"});
  for (const auto& p : ex.properties) {
    properties.push_back({id, p.start, p.end, "property"});
  }
}

struct ExtractEvalArgs {
  std::string gold;
  std::string pred;
  std::string backend;
  std::string config;
};

int cmd_extract_eval(const ExtractEvalArgs& a, std::ostream& out,
                     std::ostream& err) {
  if (a.pred.empty() == a.backend.empty()) {
    throw ConfigError("give exactly one of --pred and --backend");
  }
  const auto config = load_config(a.config);
  const auto& vocab = bundled_lexicons().vocabulary;
  const auto gold = load_labelled(a.gold);

  std::vector<LabeledSpan> gold_objects, gold_properties;
  for (const auto& g : gold) {
    add_spans(g.expr.id,
              locate_answer(g.expr, g.answer, ExtractionSource::kManual, vocab),
              gold_objects, gold_properties);
  }

  std::vector<LabeledSpan> pred_objects, pred_properties;
  std::size_t failed = 0;
  if (!a.pred.empty()) {
    for (const auto& p : load_labelled(a.pred)) {
      try {
        add_spans(p.expr.id,
                  locate_answer(p.expr, p.answer, ExtractionSource::kManual,
                                vocab),
                  pred_objects, pred_properties);
      } catch (const SpanNotFound&) {
        ++failed;
      }
    }
  } else {
    std::unique_ptr<ChatBackend> chat;
    PromptTemplate prompt = PromptTemplate::bundled();
    if (a.backend == "llm") {
      chat = http_chat(config.backend("llm"));
      if (prompt.icl_samples.size() > config.icl_count) {
        prompt.icl_samples.resize(config.icl_count);
      }
    } else if (a.backend != "rule_based") {
      throw ConfigError("--backend must be rule_based or llm");
    }
    for (const auto& g : gold) {
      try {
        const auto ex = chat ? extract_llm(g.expr, *chat, prompt)
                             : extract_rule_based(g.expr, vocab);
        add_spans(g.expr.id, ex, pred_objects, pred_properties);
      } catch (const BackendError&) {
        throw;
      } catch (const Error&) {
        ++failed;
      }
    }
  }

  auto all_pred = pred_objects;
  all_pred.insert(all_pred.end(), pred_properties.begin(),
                  pred_properties.end());
  auto all_gold = gold_objects;
  all_gold.insert(all_gold.end(), gold_properties.begin(),
                  gold_properties.end());
  const std::vector<std::pair<std::string, Prf>> rows{
      {"object", compute_prf(pred_objects, gold_objects)},
      {"property", compute_prf(pred_properties, gold_properties)},
      {"all", compute_prf(all_pred, all_gold)}};

  emit_counts(err, "extract-eval",
              {{"expressions", gold.size()}, {"failed", failed}});
  out << std::left << std::setw(10) << "category" << std::setw(11)
      << "precision" << std::setw(8) << "recall" << "f1\n";
  for (const auto& [name, prf] : rows) {
    out << std::setw(10) << name << std::setw(11) << fixed(prf.precision)
        << std::setw(8) << fixed(prf.recall) << fixed(prf.f1) << '\n';
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct PerturbArgs {
  std::string text;
  std::uint64_t seed = 0;
  std::string levels = "sentence,word,char";
  std::string head;
  std::string config;
};

int cmd_perturb(const PerturbArgs& a, std::ostream& out, std::ostream&) {
  auto config = load_config(a.config);
  PerturbConfig pc = config.perturb;
  pc.seed = a.seed;
  pc.levels = parse_levels(a.levels);
  std::unique_ptr<TranslationBackend> translator;
  if (pc.translation == TranslationMode::kService) {
    translator = http_translate(config.backend("translate"));
  }
  CandidateExpression candidate;
  candidate.text = a.text;
  candidate.head = a.head;
  if (trim(a.text).empty()) throw InvalidExpression("--text is empty");
  const auto outcome = perturb_pipeline(
      candidate, pc, PerturbResources::load(pc, translator.get()));

  out << "input: " << a.text << '\n';
  for (const auto& r : outcome.provenance) {
    out << to_string(r.stage) << ": " << r.after;
    if (r.flagged) out << "  [" << r.note << "]";
    out << '\n';
  }
  out << "final: " << outcome.final_text << '\n';
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Generate and run adversarial tests for visual grounding models",
               "peeling"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  GenerateArgs gen;
  auto* generate = app.add_subcommand(
      "generate", "Build adversarial tests from a test-case corpus");
  generate->add_option("--input", gen.input, "Test cases (JSONL)")
      ->required();
  generate->add_option("--backend", gen.backend, "VQA backend: sim or http")
      ->check(CLI::IsMember({"sim", "http"}));
  generate->add_option("--config", gen.config, "Run config (JSON)");
  generate->add_option("--seed", gen.seed, "Seed; overrides the config");
  generate->add_option("--jobs", gen.jobs,
                       "Worker threads; default one per logical CPU");
  generate->add_option("--scenes", gen.scenes,
                       "Scenes for the sim backend; default scenes.jsonl "
                       "next to --input");
  generate->add_option("--out", gen.out, "Output tests (JSONL)")->required();

  DetectArgs det;
  auto* detect = app.add_subcommand(
      "detect", "Run tests against a grounding model and report metrics");
  detect->add_option("--tests", det.tests, "Adversarial tests (JSONL)")
      ->required();
  detect->add_option("--vg", det.vg,
                     "sim:perfect, sim:faulty:ignore_attribute=<kind>, "
                     "sim:faulty:noisy=<p> or http");
  auto* baseline = detect->add_option(
      "--baseline-acc", det.baseline_acc,
      "Accuracy on the original cases; skips re-running them");
  detect->add_option("--originals", det.originals,
                     "Original test cases (JSONL) to score for the baseline")
      ->excludes(baseline);
  detect->add_option("--labels", det.labels,
                     "Correctness labels (JSONL of {id, correct}) for ATCR");
  detect->add_option("--scenes", det.scenes,
                     "Scenes for sim VG; default scenes.jsonl next to --tests");
  detect->add_option("--config", det.config, "Run config (JSON)");
  detect->add_option("--jobs", det.jobs, "Worker threads");
  detect->add_option("--out", det.out, "Report (JSON)");

  SimulateArgs sim;
  auto* simulate = app.add_subcommand(
      "simulate", "Generate synthetic scenes and their test cases");
  simulate->add_option("--scenes", sim.scenes, "Number of scenes")
      ->capture_default_str();
  simulate->add_option("--seed", sim.seed, "Seed")->capture_default_str();
  simulate->add_option("--params", sim.params,
                       "Scene parameters as inline JSON or a JSON file");
  simulate->add_option("--config", sim.config, "Run config (JSON)");
  simulate->add_option("--out", sim.out,
                       "Existing directory for scenes.jsonl and "
                       "testcases.jsonl")
      ->required();

  ExtractEvalArgs ev;
  auto* extract_eval = app.add_subcommand(
      "extract-eval", "Score extraction against gold labels");
  extract_eval
      ->add_option("--gold", ev.gold,
                   "Gold labels (JSONL of {id, expression, object, "
                   "properties})")
      ->required();
  extract_eval->add_option("--pred", ev.pred, "Predictions, same format");
  extract_eval->add_option("--backend", ev.backend,
                           "Extract with rule_based or llm instead");
  extract_eval->add_option("--config", ev.config, "Run config (JSON)");

  PerturbArgs pt;
  auto* perturb = app.add_subcommand(
      "perturb", "Show the staged perturbation of one expression");
  perturb->add_option("--text", pt.text, "Expression")->required();
  perturb->add_option("--seed", pt.seed, "Seed")->capture_default_str();
  perturb->add_option("--levels", pt.levels,
                      "Comma-separated levels, in order sentence,word,char")
      ->capture_default_str();
  perturb->add_option("--head", pt.head, "Word protected from typos");
  perturb->add_option("--config", pt.config, "Run config (JSON)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*generate) return cmd_generate(gen, out, err);
    if (*detect) return cmd_detect(det, out, err);
    if (*simulate) return cmd_simulate(sim, out, err);
    if (*extract_eval) return cmd_extract_eval(ev, out, err);
    if (*perturb) return cmd_perturb(pt, out, err);
  } catch (const Unreachable& e) {
    err << "error: " << e.what() << '\n';
    return kExitBackend;
  } catch (const BackendError& e) {
    err << "error: " << e.what() << '\n';
    return kExitBackend;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace peeling::cli
