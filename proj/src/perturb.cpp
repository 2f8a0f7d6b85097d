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

#include "peeling/perturb.hpp"

#include <algorithm>

#include "peeling/errors.hpp"
#include "peeling/random.hpp"
#include "peeling/unicode.hpp"

namespace peeling {

namespace {

PerturbResult unchanged(std::string_view text, std::string_view reason) {
  return {std::string(text), true, std::string(reason), std::nullopt};
}

std::u32string match_case(std::u32string_view original,
                          std::u32string replacement) {
  if (original.empty() || replacement.empty()) return replacement;
  const bool all_upper =
      original.size() > 1 &&
      std::all_of(original.begin(), original.end(),
                  [](char32_t c) { return !is_letter(c) || is_ascii_upper(c); });
  if (all_upper) {
    for (auto& c : replacement) c = ascii_upper(c);
  } else if (is_ascii_upper(original[0])) {
    replacement[0] = ascii_upper(replacement[0]);
  }
  return replacement;
}

Stage stage_of(Level level) {
  switch (level) {
    case Level::kSentence: return Stage::kP2Sentence;
    case Level::kWord: return Stage::kP2Word;
    case Level::kChar: return Stage::kP2Char;
  }
  return Stage::kP2Char;
}

}  // namespace

std::string_view to_string(Level level) {
  switch (level) {
    case Level::kSentence: return "sentence";
    case Level::kWord: return "word";
    case Level::kChar: return "char";
  }
  return "unknown";
}

std::optional<Level> parse_level(std::string_view name) {
  if (name == "sentence") return Level::kSentence;
  if (name == "word") return Level::kWord;
  if (name == "char") return Level::kChar;
  return std::nullopt;
}

std::string_view to_string(TranslationMode mode) {
  return mode == TranslationMode::kService ? "service" : "paraphrase_table";
}

std::optional<TranslationMode> parse_translation_mode(std::string_view name) {
  if (name == "service") return TranslationMode::kService;
  if (name == "paraphrase_table") return TranslationMode::kParaphraseTable;
  return std::nullopt;
}

PerturbResult perturb_char(std::string_view text, std::uint64_t seed,
                           const KeyboardLayout& layout,
                           const std::vector<std::string>& protected_words) {
  auto u = to_u32(text);
  std::vector<std::u32string> protect;
  for (const auto& w : protected_words) protect.push_back(to_lower(to_u32(w)));

  struct Candidate {
    Token word;
    std::vector<std::size_t> positions;  // offsets into u with a layout key
  };
  std::vector<Candidate> eligible;
  for (auto& run : letter_runs(u)) {
    if (run.text.size() < 2) continue;
    if (std::find(protect.begin(), protect.end(), to_lower(run.text)) !=
        protect.end()) {
      continue;
    }
    Candidate c{run, {}};
    for (std::size_t i = run.start; i < run.end; ++i) {
      if (layout.has_key(ascii_lower(u[i]))) c.positions.push_back(i);
    }
    if (!c.positions.empty()) eligible.push_back(std::move(c));
  }
  if (eligible.empty()) return unchanged(text, kNoEligibleWord);

  Rng rng(seed);
  const auto& word = rng.pick(eligible);
  const auto pos = rng.pick(word.positions);
  const auto& keys = layout.neighbors(ascii_lower(u[pos]));
  char32_t replacement = keys[rng.uniform_index(keys.size())];
  if (is_ascii_upper(u[pos])) replacement = ascii_upper(replacement);
  u[pos] = replacement;
  return {to_utf8(u), false, {}, std::nullopt};
}

PerturbResult perturb_word(std::string_view text, const SynonymLexicon& lexicon,
                           std::uint64_t seed) {
  auto u = to_u32(text);
  std::vector<Token> eligible;
  for (auto& run : letter_runs(u)) {
    if (lexicon.has_entry(to_utf8(run.text))) eligible.push_back(std::move(run));
  }
  if (eligible.empty()) return unchanged(text, kNoEligibleWord);

  Rng rng(seed);
  const auto& word = rng.pick(eligible);
  const auto before = to_lower(to_utf8(word.text));
  const auto synonyms = lexicon.synonyms(before);
  const auto& after = rng.pick(synonyms);
  u.replace(word.start, word.end - word.start,
            match_case(word.text, to_u32(after)));
  return {to_utf8(u), false, {}, std::make_pair(before, after)};
}

PerturbResult perturb_sentence(std::string_view text,
                               const ParaphraseTable& table) {
  auto applied = table.apply(text);
  if (applied.replacements == 0) return unchanged(text, kNoApplicablePhrase);
  return {std::move(applied.text), false, {}, std::nullopt};
}

PerturbResult perturb_sentence(std::string_view text,
                               TranslationBackend& backend) {
  std::string result;
  try {
    const auto german = backend.translate(text, "en", "de");
    if (trim(german).empty()) {
      return unchanged(text, kBackendFailure);
    }
    result = trim(backend.translate(german, "de", "en"));
  } catch (const BackendError&) {
    return unchanged(text, kBackendFailure);
  }
  if (result.empty()) return unchanged(text, kBackendFailure);
  if (result == text) return unchanged(text, kUnchanged);
  return {std::move(result), false, {}, std::nullopt};
}

void PerturbConfig::validate() const {
  for (std::size_t i = 1; i < levels.size(); ++i) {
    if (static_cast<int>(levels[i]) <= static_cast<int>(levels[i - 1])) {
      throw ConfigError(
          "perturbation levels must be distinct and ordered sentence, word, "
          "char");
    }
  }
}

PerturbResources PerturbResources::load(const PerturbConfig& config,
                                        TranslationBackend* translator) {
  const auto& bundled = bundled_lexicons();
  PerturbResources r;
  r.translator = translator;
  if (config.keyboard_layout.empty() || config.keyboard_layout == "qwerty_us") {
    r.keyboard = std::shared_ptr<const KeyboardLayout>(&bundled.keyboard,
                                                       [](auto*) {});
  } else {
    r.keyboard = std::make_shared<const KeyboardLayout>(
        KeyboardLayout::load(config.keyboard_layout));
  }
  if (config.synonym_lexicon.empty()) {
    r.synonyms = std::shared_ptr<const SynonymLexicon>(&bundled.synonyms,
                                                       [](auto*) {});
  } else {
    r.synonyms = std::make_shared<const SynonymLexicon>(
        SynonymLexicon::load(config.synonym_lexicon));
  }
  if (config.paraphrase_table.empty()) {
    r.paraphrases = std::shared_ptr<const ParaphraseTable>(
        &bundled.paraphrases, [](auto*) {});
  } else {
    r.paraphrases = std::make_shared<const ParaphraseTable>(
        ParaphraseTable::load(config.paraphrase_table));
  }
  return r;
}

PerturbOutcome perturb_pipeline(const CandidateExpression& candidate,
                                const PerturbConfig& config,
                                const PerturbResources& resources) {
  config.validate();
  PerturbOutcome out;
  std::string text = candidate.text;
  std::string head = to_lower(candidate.head);

  for (auto level : config.levels) {
    const auto seed = derive_seed(config.seed, to_string(level));
    PerturbResult r;
    switch (level) {
      case Level::kSentence:
        if (config.translation == TranslationMode::kService) {
          r = resources.translator != nullptr
                  ? perturb_sentence(text, *resources.translator)
                  : unchanged(text, kBackendFailure);
        } else {
          r = perturb_sentence(text, *resources.paraphrases);
        }
        break;
      case Level::kWord:
        r = perturb_word(text, *resources.synonyms, seed);
        if (r.replaced && r.replaced->first == head) head = r.replaced->second;
        break;
      case Level::kChar: {
        std::vector<std::string> protect;
        if (config.protect_head && !head.empty()) protect.push_back(head);
        r = perturb_char(text, seed, *resources.keyboard, protect);
        break;
      }
    }
    out.provenance.push_back(
        {stage_of(level), text, r.text, r.flagged, r.reason});
    text = std::move(r.text);
  }
  out.final_text = std::move(text);
  return out;
}

PerturbOutcome perturb_pipeline(const CandidateExpression& candidate,
                                const PerturbConfig& config) {
  return perturb_pipeline(candidate, config, PerturbResources::load(config));
}

}  // namespace peeling
