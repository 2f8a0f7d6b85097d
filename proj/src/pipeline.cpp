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

#include "peeling/pipeline.hpp"

#include "peeling/corpus.hpp"
#include "peeling/errors.hpp"
#include "peeling/extract.hpp"
#include "peeling/oracle.hpp"
#include "peeling/parallel.hpp"
#include "peeling/perturb.hpp"
#include "peeling/random.hpp"
#include "peeling/recombine.hpp"

namespace peeling {

namespace {

struct CaseOutput {
  std::vector<AdversarialTest> tests;
  GenerateStats stats;
};

CaseOutput run_case(const TestCase& tc, const RunConfig& config,
                    const GenerateBackends& backends,
                    const PromptTemplate& prompt,
                    const PerturbResources& resources) {
  CaseOutput out;
  ExtractionResult ex;
  try {
    ex = config.extraction == ExtractionMode::kLlm
             ? extract_llm(tc.expression, *backends.chat, prompt)
             : extract_rule_based(tc.expression);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error&) {
    ++out.stats.extraction_failed;
    return out;
  }
  if (ex.low_confidence) {
    ++out.stats.low_confidence;
    return out;
  }
  ++out.stats.extracted;

  std::vector<CandidateExpression> candidates;
  try {
    candidates = generate_candidates(tc.expression, ex, config.recombine);
  } catch (const InvalidExpression&) {
    ++out.stats.extraction_failed;
    return out;
  }
  out.stats.candidates += candidates.size();

  SelectOptions select_options;
  select_options.ask_all = config.ask_all;
  select_options.templates = config.templates;
  const auto verdicts =
      select(candidates, tc.image, *backends.vqa, select_options);

  for (std::size_t idx = 0; idx < verdicts.size(); ++idx) {
    if (!verdicts[idx].accepted) continue;
    ++out.stats.accepted;
    const auto& candidate = verdicts[idx].candidate;

    PerturbConfig pc = config.perturb;
    pc.seed = derive_seed(config.seed, tc.id(), idx);
    auto perturbed = perturb_pipeline(candidate, pc, resources);

    AdversarialTest t;
    t.id = tc.id() + "#" + std::to_string(idx);
    t.base = tc;
    t.candidate = candidate;
    t.final_expression = perturbed.final_text;
    t.provenance.push_back({Stage::kP1Reduction, tc.expression.text,
                            candidate.text, false, ""});
    bool applied = false;
    for (auto& r : perturbed.provenance) {
      applied = applied || !r.flagged;
      t.provenance.push_back(std::move(r));
    }
    if (applied) ++out.stats.perturbed;
    out.tests.push_back(std::move(t));
  }
  out.stats.tests = out.tests.size();
  return out;
}

}  // namespace

nlohmann::json GenerateStats::to_json() const {
  return {{"cases", cases},
          {"extracted", extracted},
          {"extraction_failed", extraction_failed},
          {"low_confidence", low_confidence},
          {"candidates", candidates},
          {"accepted", accepted},
          {"perturbed", perturbed},
          {"tests", tests}};
}

GenerateResult generate_tests(const std::vector<TestCase>& cases,
                              const RunConfig& config,
                              const GenerateBackends& backends) {
  if (backends.vqa == nullptr) throw ConfigError("a VQA backend is required");
  if (config.extraction == ExtractionMode::kLlm && backends.chat == nullptr) {
    throw ConfigError("llm extraction needs a chat backend");
  }
  config.perturb.validate();

  PromptTemplate prompt = PromptTemplate::bundled();
  if (prompt.icl_samples.size() > config.icl_count) {
    prompt.icl_samples.resize(config.icl_count);
  }
  const auto resources =
      PerturbResources::load(config.perturb, backends.translator);

  std::vector<CaseOutput> outputs(cases.size());
  parallel_for(cases.size(), config.effective_jobs(), [&](std::size_t i) {
    outputs[i] = run_case(cases[i], config, backends, prompt, resources);
  });

  GenerateResult result;
  result.stats.cases = cases.size();
  for (auto& o : outputs) {
    result.stats.extracted += o.stats.extracted;
    result.stats.extraction_failed += o.stats.extraction_failed;
    result.stats.low_confidence += o.stats.low_confidence;
    result.stats.candidates += o.stats.candidates;
    result.stats.accepted += o.stats.accepted;
    result.stats.perturbed += o.stats.perturbed;
    for (auto& t : o.tests) result.tests.push_back(std::move(t));
  }
  result.stats.tests = result.tests.size();
  return result;
}

nlohmann::json run_manifest(const RunConfig& config) {
  const auto resources = PerturbResources::load(config.perturb);
  const auto& bundled = bundled_lexicons();
  std::string keyboard_source;
  if (config.perturb.keyboard_layout.empty() ||
      config.perturb.keyboard_layout == "qwerty_us") {
    keyboard_source = std::string(bundled::keyboard_qwerty_us());
  } else {
    keyboard_source = read_file(config.perturb.keyboard_layout);
  }
  return {{"seed", config.seed},
          {"config", config.to_json()},
          {"lexicons",
           {{"keyboard", sha256_hex(keyboard_source)},
            {"synonyms", sha256_hex(resources.synonyms->source())},
            {"paraphrases", sha256_hex(resources.paraphrases->source())},
            {"vocabulary", sha256_hex(bundled.vocabulary.source())},
            {"icl_samples", sha256_hex(bundled::icl_samples())}}}};
}

}  // namespace peeling
