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

#include "peeling/scenesim.hpp"

#include <algorithm>
#include <bit>
#include <set>
#include <sstream>

#include "peeling/errors.hpp"
#include "peeling/extract.hpp"
#include "peeling/oracle.hpp"
#include "peeling/random.hpp"
#include "peeling/unicode.hpp"

namespace peeling {

namespace {

constexpr int kMaxRenderedCount = 4;

std::vector<std::string> split_words(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream in{std::string(s)};
  std::string w;
  while (in >> w) out.push_back(to_lower(w));
  return out;
}

std::string join(const std::vector<std::string>& words) {
  std::string out;
  for (const auto& w : words) {
    if (!out.empty()) out += ' ';
    out += w;
  }
  return out;
}

std::string canonical_category(std::string_view word, const Vocabulary& vocab) {
  const auto* info = vocab.find(to_lower(word));
  if (info != nullptr && info->noun) return info->noun->category;
  return to_lower(word);
}

std::string canonical_attribute(std::string_view word,
                                const Vocabulary& vocab) {
  const auto* info = vocab.find(to_lower(word));
  if (info != nullptr && info->attribute) return info->attribute->value;
  return to_lower(word);
}

// An object's attributes split into plain values and worn items.
struct Facts {
  std::string category;
  std::set<std::string> attributes;
  std::vector<std::pair<std::string, std::set<std::string>>> wears;
};

Facts facts_of(const SceneObject& obj, const Vocabulary& vocab) {
  Facts f;
  f.category = canonical_category(obj.category, vocab);
  for (const auto& a : obj.attributes) {
    auto words = split_words(a);
    if (words.empty()) continue;
    if (words.size() == 1) {
      f.attributes.insert(canonical_attribute(words[0], vocab));
      continue;
    }
    std::set<std::string> attrs;
    for (std::size_t i = 0; i + 1 < words.size(); ++i) {
      attrs.insert(canonical_attribute(words[i], vocab));
    }
    f.wears.emplace_back(canonical_category(words.back(), vocab),
                         std::move(attrs));
  }
  return f;
}

bool covers(const std::set<std::string>& have,
            const std::vector<std::string>& want) {
  return std::all_of(want.begin(), want.end(),
                     [&](const auto& w) { return have.count(w) != 0; });
}

bool has_edge(const SceneObject& from, std::string_view rel,
              const std::string& to) {
  return std::any_of(from.relations.begin(), from.relations.end(),
                     [&](const auto& r) { return r.first == rel && r.second == to; });
}

bool relation_holds(RelationType type, const SceneObject& a,
                    const SceneObject& b) {
  switch (type) {
    case RelationType::kBehind: return has_edge(a, "behind", b.id);
    case RelationType::kNear:
      return has_edge(a, "near", b.id) || has_edge(b, "near", a.id);
    case RelationType::kLeftOf: return a.box.center_x() < b.box.center_x();
    case RelationType::kRightOf: return a.box.center_x() > b.box.center_x();
    case RelationType::kWear: return false;
  }
  return false;
}

bool count_ok(const TargetDescriptor& d, int count) {
  return d.exact ? count == d.count : count >= d.count;
}

// Matching against precomputed facts; index i is obj's position.
class Matcher {
 public:
  Matcher(const SceneGraph& scene, const Vocabulary& vocab) : scene_(scene) {
    for (const auto& o : scene.objects) facts_.push_back(facts_of(o, vocab));
  }

  int related_count(std::size_t i, RelationType type,
                    const TargetDescriptor& d) const {
    int count = 0;
    if (type == RelationType::kWear) {
      for (const auto& [garment, attrs] : facts_[i].wears) {
        if (garment == d.category && covers(attrs, d.attributes)) ++count;
      }
      return count;
    }
    for (std::size_t j = 0; j < scene_.objects.size(); ++j) {
      if (j == i) continue;
      if (facts_[j].category != d.category ||
          !covers(facts_[j].attributes, d.attributes)) {
        continue;
      }
      if (relation_holds(type, scene_.objects[i], scene_.objects[j])) ++count;
    }
    return count;
  }

  bool satisfies(std::size_t i, const Predicate& p) const {
    if (p.kind == Predicate::Kind::kAttribute) {
      return facts_[i].attributes.count(p.value) != 0;
    }
    return count_ok(p.target, related_count(i, p.relation, p.target));
  }

  bool matches(std::size_t i, const Semantics& s) const {
    if (facts_[i].category != s.category) return false;
    return std::all_of(s.predicates.begin(), s.predicates.end(),
                       [&](const auto& p) { return satisfies(i, p); });
  }

  const Facts& facts(std::size_t i) const { return facts_[i]; }

 private:
  const SceneGraph& scene_;
  std::vector<Facts> facts_;
};

std::string describe_descriptor(const TargetDescriptor& d,
                                const Vocabulary& vocab) {
  std::vector<std::string> rest = d.attributes;
  rest.push_back(vocab.noun_form(d.category, d.count > 1));
  std::string lead;
  if (d.exact) {
    lead = vocab.number_word(d.count);
  } else {
    lead = std::string("aeiou").find(rest.front()[0]) != std::string::npos
               ? "an"
               : "a";
  }
  return lead + " " + join(rest);
}

// One renderable property of the target.
struct Piece {
  bool pre_noun = false;
  int order = 0;  // pre-noun slot: size before color
  std::string surface;
  Predicate predicate;
};

int pre_noun_order(PropertyKind kind) {
  return kind == PropertyKind::kShape ? 0 : 1;
}

std::optional<Piece> relation_piece(Rng& rng, const Matcher& matcher,
                                    std::size_t ti, RelationType type,
                                    std::size_t other_index,
                                    const Vocabulary& vocab) {
  TargetDescriptor d;
  d.category = matcher.facts(other_index).category;
  std::vector<std::string> colors;
  for (const auto& a : matcher.facts(other_index).attributes) {
    const auto* info = vocab.find(a);
    if (info != nullptr && info->attribute &&
        info->attribute->kind == PropertyKind::kColor) {
      colors.push_back(a);
    }
  }
  if (!colors.empty() && rng.bernoulli(0.5)) {
    d.attributes.push_back(rng.pick(colors));
  }
  const int count = matcher.related_count(ti, type, d);
  if (count < 1 || count > kMaxRenderedCount) return std::nullopt;
  d.count = count;
  d.exact = count > 1;

  const auto& surfaces = vocab.sim_relation_surfaces().at(type);
  Piece p;
  p.surface = join(rng.pick(surfaces)) + " " + describe_descriptor(d, vocab);
  p.predicate.kind = Predicate::Kind::kRelation;
  p.predicate.property = PropertyKind::kLocation;
  p.predicate.relation = type;
  p.predicate.target = std::move(d);
  return p;
}

std::vector<Piece> property_pool(Rng& rng, const SceneGraph& scene,
                                 std::size_t ti, const Matcher& matcher,
                                 const Vocabulary& vocab) {
  const auto& target = scene.objects[ti];
  std::vector<Piece> pool;

  for (const auto& a : target.attributes) {
    auto words = split_words(a);
    if (words.size() == 1) {
      const auto* info = vocab.find(words[0]);
      if (info == nullptr || !info->attribute) continue;
      Piece p;
      p.pre_noun = true;
      p.order = pre_noun_order(info->attribute->kind);
      p.surface = words[0];
      p.predicate.property = info->attribute->kind;
      p.predicate.value = info->attribute->value;
      pool.push_back(std::move(p));
    } else if (words.size() > 1) {
      TargetDescriptor d;
      d.category = canonical_category(words.back(), vocab);
      for (std::size_t i = 0; i + 1 < words.size(); ++i) {
        d.attributes.push_back(canonical_attribute(words[i], vocab));
      }
      std::sort(d.attributes.begin(), d.attributes.end());
      auto lead = rng.pick(vocab.sim_relation_surfaces().at(RelationType::kWear));
      if (!lead.empty() && lead.back() == "a" &&
          std::string("aeiou").find(words.front()[0]) != std::string::npos) {
        lead.back() = "an";
      }
      Piece p;
      p.surface = join(lead) + " " + join(words);
      p.predicate.kind = Predicate::Kind::kRelation;
      p.predicate.property = PropertyKind::kWear;
      p.predicate.relation = RelationType::kWear;
      p.predicate.target = std::move(d);
      pool.push_back(std::move(p));
    }
  }

  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < scene.objects.size(); ++i) {
    index[scene.objects[i].id] = i;
  }
  std::set<std::string> used_types;
  for (const auto& [rel, to] : target.relations) {
    if (!used_types.insert(rel).second) continue;
    auto type = parse_relation_type(rel);
    auto it = index.find(to);
    if (!type || it == index.end()) continue;
    if (auto p = relation_piece(rng, matcher, ti, *type, it->second, vocab)) {
      pool.push_back(std::move(*p));
    }
  }

  for (int g = 0; g < 2 && scene.objects.size() > 1; ++g) {
    std::size_t oi = rng.uniform_index(scene.objects.size() - 1);
    if (oi >= ti) ++oi;
    const auto& other = scene.objects[oi];
    const double dx = other.box.center_x() - target.box.center_x();
    if (dx == 0) continue;
    const auto type = dx > 0 ? RelationType::kLeftOf : RelationType::kRightOf;
    auto p = relation_piece(rng, matcher, ti, type, oi, vocab);
    if (!p) continue;
    const bool duplicate = std::any_of(pool.begin(), pool.end(), [&](auto& q) {
      return q.predicate == p->predicate;
    });
    if (!duplicate) pool.push_back(std::move(*p));
  }
  return pool;
}

bool unique_target(const Matcher& matcher, const SceneGraph& scene,
                   std::size_t ti, const Semantics& s) {
  for (std::size_t i = 0; i < scene.objects.size(); ++i) {
    if (matcher.matches(i, s) != (i == ti)) return false;
  }
  return true;
}

std::optional<std::string> render_unique(Rng& rng, const SceneGraph& scene,
                                         const SceneParams& params,
                                         const Vocabulary& vocab) {
  std::size_t ti = 0;
  while (scene.objects[ti].id != scene.target) ++ti;
  const Matcher matcher(scene, vocab);
  const auto pool = property_pool(rng, scene, ti, matcher, vocab);
  const auto category = matcher.facts(ti).category;

  // Subsets by size, then by bit pattern.
  std::vector<std::uint32_t> masks(std::size_t{1} << pool.size());
  for (std::uint32_t m = 0; m < masks.size(); ++m) masks[m] = m;
  std::stable_sort(masks.begin(), masks.end(), [](auto a, auto b) {
    return std::popcount(a) < std::popcount(b);
  });
  std::optional<std::uint32_t> chosen;
  for (auto m : masks) {
    Semantics s{category, {}};
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (m & (1u << i)) s.predicates.push_back(pool[i].predicate);
    }
    if (unique_target(matcher, scene, ti, s)) {
      chosen = m;
      break;
    }
  }
  if (!chosen) return std::nullopt;

  std::uint32_t mask = *chosen;
  if (rng.bernoulli(params.distractor_overlap)) {
    std::vector<std::size_t> spare;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (!(mask & (1u << i))) spare.push_back(i);
    }
    const std::size_t extra = std::min<std::size_t>(spare.size(),
                                                    1 + rng.uniform_index(2));
    for (auto k : sample_indices(spare.size(), extra, rng.next())) {
      mask |= 1u << spare[k];
    }
  }

  std::vector<const Piece*> pre;
  std::vector<const Piece*> post;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (!(mask & (1u << i))) continue;
    (pool[i].pre_noun ? pre : post).push_back(&pool[i]);
  }
  std::stable_sort(pre.begin(), pre.end(),
                   [](auto* a, auto* b) { return a->order < b->order; });
  std::vector<std::string> words;
  if (rng.bernoulli(0.5)) words.push_back("the");
  for (auto* p : pre) words.push_back(p->surface);
  words.push_back(vocab.noun_form(category, false));
  for (auto* p : post) words.push_back(p->surface);
  auto text = join(words);

  // Re-verify through the parser, exactly as a backend will read it.
  try {
    auto parsed = parse_semantics(text, vocab);
    if (!unique_target(matcher, scene, ti, parsed)) return std::nullopt;
  } catch (const UnparseableSemantics&) {
    return std::nullopt;
  }
  return text;
}

BoundingBox random_box(Rng& rng, const SceneParams& params) {
  const int min_w = std::max(1, params.width / 10);
  const int max_w = std::max(min_w, params.width / 4);
  const int min_h = std::max(1, params.height / 10);
  const int max_h = std::max(min_h, params.height / 4);
  const int w = min_w + static_cast<int>(rng.uniform_index(max_w - min_w + 1));
  const int h = min_h + static_cast<int>(rng.uniform_index(max_h - min_h + 1));
  const int x = static_cast<int>(rng.uniform_index(params.width - w + 1));
  const int y = static_cast<int>(rng.uniform_index(params.height - h + 1));
  return {static_cast<double>(x), static_cast<double>(y),
          static_cast<double>(w), static_cast<double>(h)};
}

SceneGraph random_scene(Rng& rng, const SceneParams& params,
                        const std::string& id, const Vocabulary& vocab) {
  SceneGraph scene;
  scene.id = id;
  scene.width = params.width;
  scene.height = params.height;
  const auto n = static_cast<std::size_t>(params.n_objects);
  const std::size_t ti = rng.uniform_index(n);
  const auto& target_category = rng.pick(vocab.sim_categories());

  for (std::size_t k = 0; k < n; ++k) {
    SceneObject o;
    o.id = "o" + std::to_string(k);
    o.category = (k == ti || rng.bernoulli(params.same_category_prob))
                     ? target_category
                     : rng.pick(vocab.sim_categories());
    if (rng.bernoulli(params.attr_density * 0.5)) {
      o.attributes.push_back(rng.pick(vocab.sim_sizes()));
    }
    if (rng.bernoulli(params.attr_density)) {
      o.attributes.push_back(rng.pick(vocab.sim_colors()));
    }
    const auto* info = vocab.find(o.category);
    if (info != nullptr && info->noun && info->noun->group == "person" &&
        rng.bernoulli(params.attr_density)) {
      o.attributes.push_back(rng.pick(vocab.sim_colors()) + " " +
                             rng.pick(vocab.sim_garments()));
    }
    o.box = random_box(rng, params);
    scene.objects.push_back(std::move(o));
  }
  scene.target = scene.objects[ti].id;

  // Reflections mirror a real object's appearance somewhere else in frame.
  std::vector<std::size_t> real;
  std::vector<std::size_t> mirrored;
  for (std::size_t k = 0; k < n; ++k) {
    if (k != ti && rng.bernoulli(params.reflection_prob)) {
      mirrored.push_back(k);
    } else {
      real.push_back(k);
    }
  }
  for (auto k : mirrored) {
    const auto& source = scene.objects[rng.pick(real)];
    scene.objects[k].category = source.category;
    scene.objects[k].attributes = source.attributes;
    scene.objects[k].is_reflection = true;
  }

  for (auto a : real) {
    if (!rng.bernoulli(params.relation_density)) continue;
    const std::string rel = rng.bernoulli(0.5) ? "behind" : "near";
    const std::size_t k = rng.bernoulli(0.5) ? 2 : 1;
    const auto picks =
        sample_indices(n - 1, std::min<std::size_t>(k, n - 1), rng.next());
    for (auto p : picks) {
      const std::size_t b = p >= a ? p + 1 : p;
      scene.objects[a].relations.emplace_back(rel, scene.objects[b].id);
    }
  }
  return scene;
}

}  // namespace

const SceneObject* SceneGraph::find(std::string_view object_id) const {
  for (const auto& o : objects) {
    if (o.id == object_id) return &o;
  }
  return nullptr;
}

const SceneObject& SceneGraph::target_object() const {
  const auto* t = find(target);
  if (t == nullptr) throw InvalidScene("scene " + id + " has no target");
  return *t;
}

void validate_scene(const SceneGraph& scene) {
  std::set<std::string> ids;
  for (const auto& o : scene.objects) {
    if (!ids.insert(o.id).second) {
      throw InvalidScene("scene " + scene.id + ": duplicate object id " + o.id);
    }
  }
  for (const auto& o : scene.objects) {
    const auto& b = o.box;
    if (!b.valid() || b.x < 0 || b.y < 0 || b.right() > scene.width ||
        b.bottom() > scene.height) {
      throw InvalidScene("scene " + scene.id + ": box of " + o.id +
                         " leaves the frame");
    }
    for (const auto& [rel, to] : o.relations) {
      if (ids.count(to) == 0) {
        throw InvalidScene("scene " + scene.id + ": " + o.id + " " + rel +
                           " unknown object " + to);
      }
    }
  }
  const auto* t = scene.find(scene.target);
  if (t == nullptr) {
    throw InvalidScene("scene " + scene.id + ": target " + scene.target +
                       " does not exist");
  }
  if (t->is_reflection) {
    throw InvalidScene("scene " + scene.id + ": target is a reflection");
  }
}

Semantics Semantics::canonical() const {
  Semantics out = *this;
  std::sort(out.predicates.begin(), out.predicates.end());
  return out;
}

Semantics parse_semantics(std::string_view text, const Vocabulary& vocab) {
  const auto tokens = resolve_tokens(to_u32(text), vocab);
  for (const auto& t : tokens) {
    if (t.info == nullptr) {
      throw UnparseableSemantics("unknown word '" + to_utf8(t.token.text) +
                                 "' in '" + std::string(text) + "'");
    }
  }
  auto fail = [&](const std::string& why) {
    return UnparseableSemantics(why + " in '" + std::string(text) + "'");
  };
  const std::size_t n = tokens.size();
  auto info = [&](std::size_t i) { return tokens[i].info; };

  std::size_t i = 0;
  if (i < n && (info(i)->article || info(i)->number)) ++i;

  Semantics s;
  while (i < n && info(i)->attribute && !info(i)->noun) {
    Predicate p;
    p.property = info(i)->attribute->kind;
    p.value = info(i)->attribute->value;
    s.predicates.push_back(std::move(p));
    ++i;
  }
  if (i >= n || !info(i)->noun) throw fail("no object noun");
  s.category = info(i)->noun->category;
  ++i;

  while (i < n) {
    while (i < n && info(i)->filler) ++i;
    if (i >= n) throw fail("dangling words");

    std::optional<RelationType> type;
    std::size_t length = 0;
    for (const auto& [t, patterns] : vocab.relation_patterns()) {
      for (const auto& pattern : patterns) {
        if (pattern.size() <= length || i + pattern.size() > n) continue;
        bool ok = true;
        for (std::size_t j = 0; j < pattern.size() && ok; ++j) {
          ok = tokens[i + j].word == pattern[j];
        }
        if (ok) {
          type = t;
          length = pattern.size();
        }
      }
    }
    if (!type) throw fail("no relation at '" + tokens[i].word + "'");
    i += length;

    TargetDescriptor d;
    if (i < n && info(i)->number) {
      d.count = *info(i)->number;
      d.exact = true;
      ++i;
    } else if (i < n && info(i)->article) {
      ++i;
    }
    while (i < n && info(i)->attribute && !info(i)->noun) {
      d.attributes.push_back(info(i)->attribute->value);
      ++i;
    }
    if (i >= n || !info(i)->noun) throw fail("relation without an object");
    d.category = info(i)->noun->category;
    ++i;
    std::sort(d.attributes.begin(), d.attributes.end());

    Predicate p;
    p.kind = Predicate::Kind::kRelation;
    p.relation = *type;
    p.property = *type == RelationType::kWear ? PropertyKind::kWear
                                              : PropertyKind::kLocation;
    p.target = std::move(d);
    s.predicates.push_back(std::move(p));
  }
  return s;
}

Semantics parse_semantics(std::string_view text) {
  return parse_semantics(text, bundled_lexicons().vocabulary);
}

bool match(const Semantics& semantics, const SceneObject& obj,
           const SceneGraph& scene, const Vocabulary& vocab) {
  const Matcher matcher(scene, vocab);
  for (std::size_t i = 0; i < scene.objects.size(); ++i) {
    if (scene.objects[i].id == obj.id) return matcher.matches(i, semantics);
  }
  throw InvalidScene("object " + obj.id + " is not in scene " + scene.id);
}

bool match(std::string_view expression, const SceneObject& obj,
           const SceneGraph& scene) {
  const auto& vocab = bundled_lexicons().vocabulary;
  return match(parse_semantics(expression, vocab), obj, scene, vocab);
}

MatchResult match_all(const Semantics& semantics, const SceneGraph& scene,
                      const Vocabulary& vocab) {
  const Matcher matcher(scene, vocab);
  MatchResult out;
  for (std::size_t i = 0; i < scene.objects.size(); ++i) {
    if (!matcher.matches(i, semantics)) continue;
    out.matches.push_back(scene.objects[i].id);
    out.reflections_among_matches =
        out.reflections_among_matches || scene.objects[i].is_reflection;
  }
  return out;
}

MatchResult match_all(std::string_view expression, const SceneGraph& scene) {
  const auto& vocab = bundled_lexicons().vocabulary;
  return match_all(parse_semantics(expression, vocab), scene, vocab);
}

void SceneParams::validate() const {
  if (n_objects < 2) throw ConfigError("n_objects must be at least 2");
  for (auto [name, p] :
       {std::pair{"attr_density", attr_density},
        std::pair{"relation_density", relation_density},
        std::pair{"reflection_prob", reflection_prob},
        std::pair{"distractor_overlap", distractor_overlap},
        std::pair{"same_category_prob", same_category_prob}}) {
    if (!(p >= 0 && p <= 1)) {
      throw ConfigError(std::string(name) + " must be in [0, 1]");
    }
  }
  if (width < 10 || height < 10) {
    throw ConfigError("scene width and height must be at least 10");
  }
  if (max_attempts < 1) throw ConfigError("max_attempts must be positive");
}

GeneratedScene gen_scene(std::uint64_t seed, const SceneParams& params,
                         const std::string& id, const Vocabulary& vocab) {
  params.validate();
  for (int attempt = 0; attempt < params.max_attempts; ++attempt) {
    Rng rng(derive_seed(seed, "scene", static_cast<std::uint64_t>(attempt)));
    auto scene = random_scene(rng, params, id, vocab);
    if (auto text = render_unique(rng, scene, params, vocab)) {
      TestCase tc{ImageRef::scene(id), Expression{id, *text},
                  scene.target_object().box};
      return {std::move(scene), std::move(tc)};
    }
  }
  throw GenerationExhausted("no uniquely describable scene for " + id +
                            " after " + std::to_string(params.max_attempts) +
                            " attempts");
}

GeneratedScene gen_scene(std::uint64_t seed, const SceneParams& params,
                         const std::string& id) {
  return gen_scene(seed, params, id, bundled_lexicons().vocabulary);
}

SceneGraph with_duplicate_target(const SceneGraph& scene, bool as_reflection) {
  SceneGraph out = scene;
  SceneObject copy = scene.target_object();
  std::string id = copy.id + "_copy";
  while (out.find(id) != nullptr) id += "_";
  copy.id = id;
  copy.is_reflection = as_reflection;
  for (auto& o : out.objects) {
    const auto n = o.relations.size();
    for (std::size_t r = 0; r < n; ++r) {
      if (o.relations[r].second == scene.target) {
        o.relations.emplace_back(o.relations[r].first, id);
      }
    }
  }
  out.objects.push_back(std::move(copy));
  return out;
}

void SceneStore::add(SceneGraph scene) {
  std::unique_lock lock(mutex_);
  auto id = scene.id;
  scenes_[id] = std::make_shared<const SceneGraph>(std::move(scene));
}

std::shared_ptr<const SceneGraph> SceneStore::get(std::string_view id) const {
  std::shared_lock lock(mutex_);
  auto it = scenes_.find(id);
  if (it == scenes_.end()) {
    throw UnknownScene("unknown scene '" + std::string(id) + "'");
  }
  return it->second;
}

bool SceneStore::contains(std::string_view id) const {
  std::shared_lock lock(mutex_);
  return scenes_.find(id) != scenes_.end();
}

std::size_t SceneStore::size() const {
  std::shared_lock lock(mutex_);
  return scenes_.size();
}

SimVqaBackend::SimVqaBackend(std::shared_ptr<const SceneStore> store)
    : store_(std::move(store)) {}

std::string SimVqaBackend::answer(const ImageRef& image,
                                  std::string_view question) {
  const auto scene = store_->get(image.value);
  const auto query = parse_query(question);
  if (!query) return "other";
  const auto& vocab = bundled_lexicons().vocabulary;
  MatchResult m;
  try {
    m = match_all(parse_semantics(query->second, vocab), *scene, vocab);
  } catch (const UnparseableSemantics&) {
    return "other";
  }
  switch (query->first) {
    case QueryKind::kHowMany: return std::to_string(m.matches.size());
    case QueryKind::kWhether: return m.matches.size() > 1 ? "yes" : "no";
    case QueryKind::kReflection:
      return m.reflections_among_matches ? "yes" : "no";
  }
  return "other";
}

VgMode VgMode::parse(std::string_view spec) {
  VgMode mode;
  if (spec == "perfect") return mode;
  constexpr std::string_view kIgnore = "faulty:ignore_attribute=";
  constexpr std::string_view kNoisy = "faulty:noisy=";
  if (spec.substr(0, kIgnore.size()) == kIgnore) {
    auto kind = parse_property_kind(spec.substr(kIgnore.size()));
    if (!kind) {
      throw ConfigError("unknown property kind in VG mode '" +
                        std::string(spec) + "'");
    }
    mode.kind = Kind::kIgnoreAttribute;
    mode.ignored = *kind;
    return mode;
  }
  if (spec.substr(0, kNoisy.size()) == kNoisy) {
    const std::string value(spec.substr(kNoisy.size()));
    std::size_t used = 0;
    double p = -1;
    try {
      p = std::stod(value, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != value.size() || value.empty() || !(p >= 0 && p <= 1)) {
      throw ConfigError("noise probability must be in [0, 1] in VG mode '" +
                        std::string(spec) + "'");
    }
    mode.kind = Kind::kNoisy;
    mode.noise = p;
    return mode;
  }
  throw ConfigError("unknown VG mode '" + std::string(spec) + "'");
}

std::string VgMode::to_string() const {
  switch (kind) {
    case Kind::kPerfect: return "perfect";
    case Kind::kIgnoreAttribute:
      return "faulty:ignore_attribute=" +
             std::string(peeling::to_string(ignored));
    case Kind::kNoisy: {
      std::ostringstream out;
      out << "faulty:noisy=" << noise;
      return out.str();
    }
  }
  return "perfect";
}

BoundingBox mock_vg(const SceneGraph& scene, std::string_view expression,
                    const VgMode& mode, const Vocabulary& vocab) {
  Semantics s;
  try {
    s = parse_semantics(expression, vocab);
  } catch (const UnparseableSemantics&) {
    return scene.full_box();
  }

  if (mode.kind == VgMode::Kind::kNoisy && scene.objects.size() > 1) {
    Rng rng(derive_seed(stable_hash(scene.id), expression));
    if (rng.bernoulli(mode.noise)) {
      std::vector<const SceneObject*> distractors;
      for (const auto& o : scene.objects) {
        if (o.id != scene.target) distractors.push_back(&o);
      }
      return rng.pick(distractors)->box;
    }
  }

  if (mode.kind == VgMode::Kind::kIgnoreAttribute) {
    std::erase_if(s.predicates,
                  [&](const auto& p) { return p.property == mode.ignored; });
  }
  const auto m = match_all(s, scene, vocab);
  if (m.matches.size() == 1) return scene.find(m.matches[0])->box;
  if (mode.kind == VgMode::Kind::kIgnoreAttribute && !m.matches.empty()) {
    const auto pick = stable_hash(expression) % m.matches.size();
    return scene.find(m.matches[pick])->box;
  }
  return scene.full_box();
}

SimVgBackend::SimVgBackend(std::shared_ptr<const SceneStore> store,
                           VgMode mode)
    : store_(std::move(store)), mode_(mode) {}

BoundingBox SimVgBackend::locate(const ImageRef& image,
                                 std::string_view expression) {
  const auto scene = store_->get(image.value);
  return mock_vg(*scene, expression, mode_, bundled_lexicons().vocabulary);
}

}  // namespace peeling
