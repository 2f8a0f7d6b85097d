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

// A synthetic world of scene graphs standing in for images. Scenes are
// generated from a seed, expressions are rendered in the closed vocabulary,
// and in-process VQA and VG backends answer from the scene by brute force.

#ifndef PEELING_SCENESIM_HPP_
#define PEELING_SCENESIM_HPP_

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "peeling/backends.hpp"
#include "peeling/core.hpp"
#include "peeling/lexicon.hpp"

namespace peeling {

struct SceneObject {
  std::string id;
  std::string category;
  // Single words ("white", "small") or wear phrases ("red shirt").
  std::vector<std::string> attributes;
  // (relation token, target id). Only "behind" and "near" are stored;
  // left/right come from the boxes.
  std::vector<std::pair<std::string, std::string>> relations;
  BoundingBox box;
  bool is_reflection = false;

  friend bool operator==(const SceneObject&, const SceneObject&) = default;
};

struct SceneGraph {
  std::string id;
  int width = 640;
  int height = 480;
  std::vector<SceneObject> objects;
  std::string target;

  const SceneObject* find(std::string_view object_id) const;
  const SceneObject& target_object() const;
  BoundingBox full_box() const {
    return {0, 0, static_cast<double>(width), static_cast<double>(height)};
  }

  friend bool operator==(const SceneGraph&, const SceneGraph&) = default;
};

// Throws InvalidScene when a box leaves the frame, a relation points
// nowhere, ids repeat, or the target is missing or a reflection.
void validate_scene(const SceneGraph& scene);

// Who a relation points at: every object of category carrying all attrs.
// An exact count requires exactly count such objects; otherwise at least.
struct TargetDescriptor {
  std::string category;
  std::vector<std::string> attributes;  // canonical, sorted
  int count = 1;
  bool exact = false;

  auto operator<=>(const TargetDescriptor&) const = default;
};

struct Predicate {
  enum class Kind { kAttribute, kRelation };
  Kind kind = Kind::kAttribute;
  PropertyKind property = PropertyKind::kOther;
  std::string value;  // canonical attribute (kAttribute)
  RelationType relation = RelationType::kNear;  // kRelation
  TargetDescriptor target;                      // kRelation

  auto operator<=>(const Predicate&) const = default;
};

// Meaning of an expression: object class plus predicates in surface order.
struct Semantics {
  std::string category;
  std::vector<Predicate> predicates;

  // Predicates sorted, for order-insensitive comparison.
  Semantics canonical() const;
  friend bool operator==(const Semantics&, const Semantics&) = default;
};

// Parses an expression of the simulator language, tolerating the typos,
// synonyms and paraphrases the perturbations produce.
// Throws UnparseableSemantics.
Semantics parse_semantics(std::string_view text, const Vocabulary& vocab);
Semantics parse_semantics(std::string_view text);

bool match(const Semantics& semantics, const SceneObject& obj,
           const SceneGraph& scene, const Vocabulary& vocab);
// Parses first; throws UnparseableSemantics.
bool match(std::string_view expression, const SceneObject& obj,
           const SceneGraph& scene);

struct MatchResult {
  std::vector<std::string> matches;  // object ids in scene order
  bool reflections_among_matches = false;
};

MatchResult match_all(const Semantics& semantics, const SceneGraph& scene,
                      const Vocabulary& vocab);
MatchResult match_all(std::string_view expression, const SceneGraph& scene);

struct SceneParams {
  int n_objects = 5;
  double attr_density = 0.7;
  double relation_density = 0.3;
  double reflection_prob = 0.1;
  double distractor_overlap = 0.5;
  // Chance that a distractor shares the target's category.
  double same_category_prob = 0.5;
  int width = 640;
  int height = 480;
  int max_attempts = 200;

  // Throws ConfigError.
  void validate() const;
};

struct GeneratedScene {
  SceneGraph scene;
  TestCase test_case;
};

// A random scene and an expression that denotes exactly its target.
// Throws ConfigError, GenerationExhausted.
GeneratedScene gen_scene(std::uint64_t seed, const SceneParams& params,
                         const std::string& id, const Vocabulary& vocab);
GeneratedScene gen_scene(std::uint64_t seed, const SceneParams& params,
                         const std::string& id);

// scene with a second copy of the target: same box, attributes and
// relations in both directions, so no expression can tell the two apart.
SceneGraph with_duplicate_target(const SceneGraph& scene, bool as_reflection);

// Thread-safe id -> scene map shared by the in-process backends.
class SceneStore {
 public:
  void add(SceneGraph scene);
  // Throws UnknownScene.
  std::shared_ptr<const SceneGraph> get(std::string_view id) const;
  bool contains(std::string_view id) const;
  std::size_t size() const;

 private:
  mutable std::shared_mutex mutex_;
  std::map<std::string, std::shared_ptr<const SceneGraph>, std::less<>>
      scenes_;
};

// Answers the three selection questions from the scene. Questions it cannot
// parse get "other".
class SimVqaBackend : public VqaBackend {
 public:
  explicit SimVqaBackend(std::shared_ptr<const SceneStore> store);
  std::string answer(const ImageRef& image,
                     std::string_view question) override;

 private:
  std::shared_ptr<const SceneStore> store_;
};

struct VgMode {
  enum class Kind { kPerfect, kIgnoreAttribute, kNoisy };
  Kind kind = Kind::kPerfect;
  PropertyKind ignored = PropertyKind::kColor;
  double noise = 0;

  // "perfect", "faulty:ignore_attribute=<kind>" or "faulty:noisy=<p>".
  // Throws ConfigError.
  static VgMode parse(std::string_view spec);
  std::string to_string() const;
};

// Returns the box of the unique match, or the whole image when the
// expression matches zero or several objects. Faulty modes model a grounding
// model that misses a property class or sometimes picks a distractor.
BoundingBox mock_vg(const SceneGraph& scene, std::string_view expression,
                    const VgMode& mode, const Vocabulary& vocab);

class SimVgBackend : public VgBackend {
 public:
  SimVgBackend(std::shared_ptr<const SceneStore> store, VgMode mode);
  // Throws UnknownScene.
  BoundingBox locate(const ImageRef& image,
                     std::string_view expression) override;

 private:
  std::shared_ptr<const SceneStore> store_;
  VgMode mode_;
};

}  // namespace peeling

#endif  // PEELING_SCENESIM_HPP_
