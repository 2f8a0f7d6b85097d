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

#include "peeling/config.hpp"

#include <initializer_list>

#include "peeling/errors.hpp"
#include "peeling/lexicon.hpp"
#include "peeling/parallel.hpp"

namespace peeling {

namespace {

using Json = nlohmann::json;

void require_object(const Json& j, std::string_view where,
                    std::initializer_list<std::string_view> keys) {
  if (!j.is_object()) {
    throw ConfigError(std::string(where) + " must be a JSON object");
  }
  for (const auto& [key, value] : j.items()) {
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      throw ConfigError("unknown config key '" + std::string(where) + "." +
                        key + "'");
    }
  }
}

template <typename T>
void read(const Json& j, const char* key, T& out, std::string_view where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const Json::exception&) {
    throw ConfigError("bad value for '" + std::string(where) + "." + key +
                      "': " + j.at(key).dump());
  }
}

template <typename T, typename Parse>
void read_enum(const Json& j, const char* key, T& out, std::string_view where,
               Parse parse) {
  if (!j.contains(key)) return;
  std::string name;
  read(j, key, name, where);
  auto v = parse(name);
  if (!v) {
    throw ConfigError("bad value for '" + std::string(where) + "." + key +
                      "': " + name);
  }
  out = *v;
}

std::optional<ExtractionMode> parse_extraction_mode(std::string_view name) {
  if (name == "rule_based") return ExtractionMode::kRuleBased;
  if (name == "llm") return ExtractionMode::kLlm;
  return std::nullopt;
}

void merge_http(HttpConfig& c, const Json& j, const std::string& where) {
  require_object(j, where,
                 {"url", "auth_env", "timeout_s", "max_retries",
                  "backoff_base_ms", "backoff_factor", "max_in_flight",
                  "model", "reply_pointer", "image_transport", "log"});
  read(j, "url", c.url, where);
  if (j.contains("auth_env")) {
    std::string env;
    read(j, "auth_env", env, where);
    c.auth_env = env;
  }
  read(j, "timeout_s", c.timeout_s, where);
  read(j, "max_retries", c.max_retries, where);
  read(j, "backoff_base_ms", c.backoff_base_ms, where);
  read(j, "backoff_factor", c.backoff_factor, where);
  read(j, "max_in_flight", c.max_in_flight, where);
  read(j, "model", c.model, where);
  read(j, "reply_pointer", c.reply_pointer, where);
  read_enum(j, "image_transport", c.image_transport, where,
            parse_image_transport);
  if (j.contains("log")) {
    std::string path;
    read(j, "log", path, where);
    c.log = path.empty() ? nullptr : std::make_shared<RequestLog>(path);
  }
  if (!(c.timeout_s > 0)) throw ConfigError(where + ".timeout_s must be > 0");
  if (c.max_retries < 0) throw ConfigError(where + ".max_retries must be >= 0");
  if (c.backoff_base_ms < 0) {
    throw ConfigError(where + ".backoff_base_ms must be >= 0");
  }
  if (c.max_in_flight == 0) {
    throw ConfigError(where + ".max_in_flight must be positive");
  }
}

}  // namespace

std::size_t RunConfig::effective_jobs() const {
  return jobs == 0 ? default_jobs() : jobs;
}

void RunConfig::merge(const Json& j) {
  require_object(j, "config",
                 {"seed", "jobs", "threshold", "extraction", "recombine",
                  "oracle", "perturb", "sim", "backends"});
  read(j, "seed", seed, "config");
  read(j, "jobs", jobs, "config");
  read(j, "threshold", threshold, "config");

  if (j.contains("extraction")) {
    const auto& e = j.at("extraction");
    require_object(e, "extraction", {"mode", "icl_count"});
    read_enum(e, "mode", extraction, "extraction", parse_extraction_mode);
    read(e, "icl_count", icl_count, "extraction");
  }
  if (j.contains("recombine")) {
    const auto& r = j.at("recombine");
    require_object(r, "recombine", {"cap", "policy"});
    read(r, "cap", recombine.cap, "recombine");
    read_enum(r, "policy", recombine.policy, "recombine", parse_subset_policy);
  }
  if (j.contains("oracle")) {
    const auto& o = j.at("oracle");
    require_object(o, "oracle", {"ask_all", "templates"});
    read(o, "ask_all", ask_all, "oracle");
    if (o.contains("templates")) {
      const auto& t = o.at("templates");
      require_object(t, "oracle.templates",
                     {"how_many", "whether", "reflection"});
      read(t, "how_many", templates.how_many, "oracle.templates");
      read(t, "whether", templates.whether, "oracle.templates");
      read(t, "reflection", templates.reflection, "oracle.templates");
    }
  }
  if (j.contains("perturb")) {
    const auto& p = j.at("perturb");
    require_object(p, "perturb",
                   {"levels", "translation", "synonym_lexicon",
                    "paraphrase_table", "keyboard_layout", "protect_head"});
    if (p.contains("levels")) {
      std::vector<std::string> names;
      read(p, "levels", names, "perturb");
      perturb.levels.clear();
      for (const auto& n : names) {
        auto level = parse_level(n);
        if (!level) throw ConfigError("unknown perturbation level '" + n + "'");
        perturb.levels.push_back(*level);
      }
    }
    read_enum(p, "translation", perturb.translation, "perturb",
              parse_translation_mode);
    read(p, "synonym_lexicon", perturb.synonym_lexicon, "perturb");
    read(p, "paraphrase_table", perturb.paraphrase_table, "perturb");
    read(p, "keyboard_layout", perturb.keyboard_layout, "perturb");
    read(p, "protect_head", perturb.protect_head, "perturb");
  }
  if (j.contains("sim")) {
    const auto& s = j.at("sim");
    require_object(s, "sim",
                   {"n_objects", "attr_density", "relation_density",
                    "reflection_prob", "distractor_overlap",
                    "same_category_prob", "width", "height", "max_attempts"});
    read(s, "n_objects", sim.n_objects, "sim");
    read(s, "attr_density", sim.attr_density, "sim");
    read(s, "relation_density", sim.relation_density, "sim");
    read(s, "reflection_prob", sim.reflection_prob, "sim");
    read(s, "distractor_overlap", sim.distractor_overlap, "sim");
    read(s, "same_category_prob", sim.same_category_prob, "sim");
    read(s, "width", sim.width, "sim");
    read(s, "height", sim.height, "sim");
    read(s, "max_attempts", sim.max_attempts, "sim");
  }
  if (j.contains("backends")) {
    const auto& b = j.at("backends");
    require_object(b, "backends", {"llm", "vqa", "vg", "translate"});
    for (const auto& [name, value] : b.items()) {
      merge_http(backends[name], value, "backends." + name);
    }
  }

  if (!(threshold >= 0 && threshold <= 1)) {
    throw ConfigError("threshold must be in [0, 1]");
  }
  if (icl_count == 0) throw ConfigError("extraction.icl_count must be >= 1");
  if (recombine.cap == 0) throw ConfigError("recombine.cap must be >= 1");
  perturb.validate();
  sim.validate();
}

RunConfig RunConfig::from_json(const Json& j) {
  RunConfig c;
  c.merge(j);
  return c;
}

RunConfig RunConfig::load(const std::string& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const IoError& e) {
    throw ConfigError(e.what());
  }
  try {
    return from_json(Json::parse(text));
  } catch (const Json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

Json RunConfig::to_json() const {
  Json levels = Json::array();
  for (auto l : perturb.levels) levels.push_back(to_string(l));
  Json out{
      {"seed", seed},
      {"threshold", threshold},
      {"extraction",
       {{"mode", extraction == ExtractionMode::kLlm ? "llm" : "rule_based"},
        {"icl_count", icl_count}}},
      {"recombine",
       {{"cap", recombine.cap}, {"policy", to_string(recombine.policy)}}},
      {"oracle",
       {{"ask_all", ask_all},
        {"templates",
         {{"how_many", templates.how_many},
          {"whether", templates.whether},
          {"reflection", templates.reflection}}}}},
      {"perturb",
       {{"levels", levels},
        {"translation", to_string(perturb.translation)},
        {"synonym_lexicon", perturb.synonym_lexicon},
        {"paraphrase_table", perturb.paraphrase_table},
        {"keyboard_layout", perturb.keyboard_layout},
        {"protect_head", perturb.protect_head}}},
      {"sim",
       {{"n_objects", sim.n_objects},
        {"attr_density", sim.attr_density},
        {"relation_density", sim.relation_density},
        {"reflection_prob", sim.reflection_prob},
        {"distractor_overlap", sim.distractor_overlap},
        {"same_category_prob", sim.same_category_prob},
        {"width", sim.width},
        {"height", sim.height},
        {"max_attempts", sim.max_attempts}}},
  };
  Json b = Json::object();
  for (const auto& [name, c] : backends) {
    b[name] = {{"url", c.url},
               {"auth_env", c.auth_env ? Json(*c.auth_env) : Json(nullptr)},
               {"timeout_s", c.timeout_s},
               {"max_retries", c.max_retries},
               {"backoff_base_ms", c.backoff_base_ms},
               {"backoff_factor", c.backoff_factor},
               {"max_in_flight", c.max_in_flight},
               {"model", c.model},
               {"reply_pointer", c.reply_pointer},
               {"image_transport", to_string(c.image_transport)}};
  }
  out["backends"] = b;
  return out;
}

const HttpConfig& RunConfig::backend(std::string_view name) const {
  auto it = backends.find(std::string(name));
  if (it == backends.end() || it->second.url.empty()) {
    throw ConfigError("backend '" + std::string(name) +
                      "' has no URL; set backends." + std::string(name) +
                      ".url in the config file");
  }
  return it->second;
}

}  // namespace peeling
