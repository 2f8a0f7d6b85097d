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

// End-to-end test generation: extract, recombine, select, perturb.

#ifndef PEELING_PIPELINE_HPP_
#define PEELING_PIPELINE_HPP_

#include <string>
#include <vector>

#include <json.hpp>

#include "peeling/backends.hpp"
#include "peeling/config.hpp"
#include "peeling/core.hpp"

namespace peeling {

struct GenerateStats {
  std::size_t cases = 0;
  std::size_t extracted = 0;
  std::size_t extraction_failed = 0;
  std::size_t low_confidence = 0;  // outside the grammar; skipped
  std::size_t candidates = 0;
  std::size_t accepted = 0;
  std::size_t perturbed = 0;  // tests with at least one applied P2 stage
  std::size_t tests = 0;

  nlohmann::json to_json() const;
};

struct GenerateResult {
  std::vector<AdversarialTest> tests;  // by case order, then candidate index
  GenerateStats stats;
};

struct GenerateBackends {
  VqaBackend* vqa = nullptr;                // required
  ChatBackend* chat = nullptr;              // required for llm extraction
  TranslationBackend* translator = nullptr;  // for service translation
};

// Output depends only on the cases, the config and the backends' answers,
// never on scheduling. Throws ConfigError, LexiconLoadError.
GenerateResult generate_tests(const std::vector<TestCase>& cases,
                              const RunConfig& config,
                              const GenerateBackends& backends);

// Seed, effective config and digests of every lexicon in use.
nlohmann::json run_manifest(const RunConfig& config);

}  // namespace peeling

#endif  // PEELING_PIPELINE_HPP_
