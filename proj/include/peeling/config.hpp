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

// Run configuration. Config files are JSON; every key is optional and
// unknown keys are errors:
//
// {
//   "seed": 0,
//   "jobs": 0,                         // 0: one per logical CPU
//   "threshold": 0.5,
//   "extraction": {"mode": "rule_based" | "llm", "icl_count": 10},
//   "recombine": {"cap": 63, "policy": "all_proper" | "drop_one"},
//   "oracle": {"ask_all": false,
//              "templates": {"how_many": ..., "whether": ..., "reflection": ...}},
//   "perturb": {"levels": ["sentence", "word", "char"],
//               "translation": "paraphrase_table" | "service",
//               "synonym_lexicon": "", "paraphrase_table": "",
//               "keyboard_layout": "qwerty_us", "protect_head": true},
//   "sim": {"n_objects": 5, "attr_density": 0.7, "relation_density": 0.3,
//           "reflection_prob": 0.1, "distractor_overlap": 0.5,
//           "same_category_prob": 0.5, "width": 640, "height": 480,
//           "max_attempts": 200},
//   "backends": {"llm" | "vqa" | "vg" | "translate": {
//       "url", "auth_env", "timeout_s", "max_retries", "backoff_base_ms",
//       "backoff_factor", "max_in_flight", "model", "reply_pointer",
//       "image_transport": "base64" | "url" | "path", "log"}}
// }
//
// Command-line flags override file values. Environment variables only supply
// auth tokens.

#ifndef PEELING_CONFIG_HPP_
#define PEELING_CONFIG_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <string_view>

#include <json.hpp>

#include "peeling/clients.hpp"
#include "peeling/detect.hpp"
#include "peeling/oracle.hpp"
#include "peeling/perturb.hpp"
#include "peeling/recombine.hpp"
#include "peeling/scenesim.hpp"

namespace peeling {

enum class ExtractionMode { kRuleBased, kLlm };

struct RunConfig {
  std::uint64_t seed = 0;
  std::size_t jobs = 0;
  double threshold = kIssueThreshold;
  ExtractionMode extraction = ExtractionMode::kRuleBased;
  std::size_t icl_count = 10;
  RecombineOptions recombine;
  bool ask_all = false;
  QueryTemplates templates;
  PerturbConfig perturb;
  SceneParams sim;
  std::map<std::string, HttpConfig> backends;  // llm, vqa, vg, translate

  std::size_t effective_jobs() const;

  // Throws ConfigError.
  static RunConfig from_json(const nlohmann::json& j);
  static RunConfig load(const std::string& path);
  // Applies j on top of this config.
  void merge(const nlohmann::json& j);
  // Every effective value, for manifests. Auth tokens are never included.
  nlohmann::json to_json() const;

  // Throws ConfigError when the backend is not configured.
  const HttpConfig& backend(std::string_view name) const;
};

}  // namespace peeling

#endif  // PEELING_CONFIG_HPP_
