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

// Meaning-preserving text perturbations at three levels: sentence (back
// translation or a paraphrase table), word (synonym substitution) and
// character (keyboard typo). A stage that cannot apply returns its input
// unchanged with a flag instead of failing.

#ifndef PEELING_PERTURB_HPP_
#define PEELING_PERTURB_HPP_

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "peeling/backends.hpp"
#include "peeling/core.hpp"
#include "peeling/lexicon.hpp"

namespace peeling {

enum class Level { kSentence, kWord, kChar };
enum class TranslationMode { kService, kParaphraseTable };

std::string_view to_string(Level level);
std::optional<Level> parse_level(std::string_view name);
std::string_view to_string(TranslationMode mode);
std::optional<TranslationMode> parse_translation_mode(std::string_view name);

// Flags reported in PerturbResult::reason.
inline constexpr std::string_view kNoEligibleWord = "NoEligibleWord";
inline constexpr std::string_view kNoApplicablePhrase = "NoApplicablePhrase";
inline constexpr std::string_view kBackendFailure = "BackendError";
inline constexpr std::string_view kUnchanged = "Unchanged";

struct PerturbResult {
  std::string text;
  bool flagged = false;
  std::string reason;
  // Word replaced by a word-level substitution (lowercase before, after).
  std::optional<std::pair<std::string, std::string>> replaced;
};

// Replaces one letter of one randomly chosen word (at least two letters,
// not in protected_words) with a physically adjacent key, keeping case.
PerturbResult perturb_char(std::string_view text, std::uint64_t seed,
                           const KeyboardLayout& layout,
                           const std::vector<std::string>& protected_words = {});

// Replaces one randomly chosen word that has a lexicon entry with one of its
// synonyms, keeping case.
PerturbResult perturb_word(std::string_view text, const SynonymLexicon& lexicon,
                           std::uint64_t seed);

// Paraphrase-table mode. Deterministic; the table is applied in one pass.
PerturbResult perturb_sentence(std::string_view text,
                               const ParaphraseTable& table);

// Service mode: English to German and back.
PerturbResult perturb_sentence(std::string_view text,
                               TranslationBackend& backend);

struct PerturbConfig {
  std::uint64_t seed = 0;
  std::vector<Level> levels{Level::kSentence, Level::kWord, Level::kChar};
  TranslationMode translation = TranslationMode::kParaphraseTable;
  std::string synonym_lexicon;   // path; empty means the bundled lexicon
  std::string paraphrase_table;  // path; empty means the bundled table
  std::string keyboard_layout = "qwerty_us";  // name or path
  bool protect_head = true;

  // Throws ConfigError unless levels are distinct and ordered
  // sentence < word < char.
  void validate() const;
};

// Lexicons loaded for a config. Immutable once built; share freely.
struct PerturbResources {
  std::shared_ptr<const KeyboardLayout> keyboard;
  std::shared_ptr<const SynonymLexicon> synonyms;
  std::shared_ptr<const ParaphraseTable> paraphrases;
  TranslationBackend* translator = nullptr;

  // Throws LexiconLoadError.
  static PerturbResources load(const PerturbConfig& config,
                               TranslationBackend* translator = nullptr);
};

struct PerturbOutcome {
  std::string final_text;
  std::vector<PerturbationRecord> provenance;  // one per configured level
};

// Applies the configured levels in order, recording every stage.
PerturbOutcome perturb_pipeline(const CandidateExpression& candidate,
                                const PerturbConfig& config,
                                const PerturbResources& resources);
// Loads resources from config first; throws LexiconLoadError.
PerturbOutcome perturb_pipeline(const CandidateExpression& candidate,
                                const PerturbConfig& config);

}  // namespace peeling

#endif  // PEELING_PERTURB_HPP_
