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

#include <gtest/gtest.h>

#include "peeling/detect.hpp"
#include "peeling/errors.hpp"
#include "peeling/oracle.hpp"
#include "peeling/scenesim.hpp"
#include "testing.hpp"

namespace peeling {
namespace {

const Vocabulary& vocab() { return bundled_lexicons().vocabulary; }

SceneObject object(std::string id, std::string category,
                   std::vector<std::string> attributes, BoundingBox box) {
  SceneObject o;
  o.id = std::move(id);
  o.category = std::move(category);
  o.attributes = std::move(attributes);
  o.box = box;
  return o;
}

// A white bird behind two brown birds.
SceneGraph birds_scene() {
  SceneGraph s;
  s.id = "birds";
  s.objects = {object("w", "bird", {"white"}, {300, 100, 60, 40}),
               object("b1", "bird", {"brown"}, {100, 200, 60, 40}),
               object("b2", "bird", {"brown"}, {400, 220, 60, 40})};
  s.objects[0].relations = {{"behind", "b1"}, {"behind", "b2"}};
  s.target = "w";
  return s;
}

std::shared_ptr<SceneStore> store_of(const SceneGraph& s) {
  auto store = std::make_shared<SceneStore>();
  store->add(s);
  return store;
}

TEST(Match, AttributeExamples) {
  const auto s = birds_scene();
  EXPECT_TRUE(match("white bird", s.objects[0], s));
  EXPECT_FALSE(match("white bird", s.objects[1], s));
  EXPECT_TRUE(match("the brown bird", s.objects[2], s));
}

TEST(Match, BehindTwoBrownBirdsSelectsOne) {
  const auto s = birds_scene();
  int hits = 0;
  for (const auto& o : s.objects) {
    const bool m = match("bird standing behind two brown birds", o, s);
    hits += m;
    EXPECT_EQ(m, o.id == "w");
  }
  EXPECT_EQ(hits, 1);
  EXPECT_FALSE(match("bird standing behind three brown birds", s.objects[0], s));
  EXPECT_TRUE(match("bird behind a brown bird", s.objects[0], s));
}

TEST(Match, GeometryAndNear) {
  SceneGraph s;
  s.id = "g";
  s.objects = {object("m", "man", {"red shirt"}, {10, 10, 50, 100}),
               object("d", "dog", {"black"}, {300, 10, 50, 50})};
  s.objects[1].relations = {{"near", "m"}};
  s.target = "m";
  EXPECT_TRUE(match("man to the left of a dog", s.objects[0], s));
  EXPECT_FALSE(match("man right of a dog", s.objects[0], s));
  EXPECT_TRUE(match("dog right of the man", s.objects[1], s));
  EXPECT_TRUE(match("man near a black dog", s.objects[0], s));
  EXPECT_TRUE(match("man wearing a red shirt", s.objects[0], s));
  EXPECT_FALSE(match("man wearing a blue shirt", s.objects[0], s));
}

TEST(Match, ToleratesPerturbedSurface) {
  const auto s = birds_scene();
  EXPECT_TRUE(match("whits bird", s.objects[0], s));
  EXPECT_EQ(parse_semantics("a large dog").canonical(),
            parse_semantics("a huge dog").canonical());
  EXPECT_THROW(parse_semantics("qqq zzz"), UnparseableSemantics);
}

TEST(MatchAll, UniqueTwoAndReflection) {
  auto s = birds_scene();
  auto m = match_all("white bird", s);
  EXPECT_EQ(m.matches, std::vector<std::string>{"w"});
  EXPECT_FALSE(m.reflections_among_matches);
  m = match_all("brown bird", s);
  EXPECT_EQ(m.matches, (std::vector<std::string>{"b1", "b2"}));

  s.objects.push_back(object("mirror", "bird", {"white"}, {500, 0, 60, 40}));
  s.objects.back().is_reflection = true;
  m = match_all("white bird", s);
  EXPECT_EQ(m.matches.size(), 2u);
  EXPECT_TRUE(m.reflections_among_matches);
}

TEST(SimVqa, AnswersDriveSelection) {
  auto s = birds_scene();
  s.objects.push_back(object("mirror", "bird", {"white"}, {500, 0, 60, 40}));
  s.objects.back().is_reflection = true;
  SimVqaBackend vqa(store_of(s));
  const auto image = ImageRef::scene("birds");
  EXPECT_EQ(vqa.answer(image, "How many brown bird are in the image?"), "2");
  EXPECT_EQ(vqa.answer(image, "Is there more than one brown bird in the image?"),
            "yes");
  EXPECT_EQ(vqa.answer(image,
                       "Are the white bird in the image reflections, such as "
                       "in a mirror?"),
            "yes");
  EXPECT_EQ(vqa.answer(image, "What is this?"), "other");

  std::vector<CandidateExpression> cands(3);
  cands[0].text = "a bird standing behind two brown birds";
  cands[1].text = "a brown bird";
  cands[2].text = "a white bird";
  const auto v = select(cands, image, vqa);
  EXPECT_TRUE(v[0].accepted);
  EXPECT_FALSE(v[1].accepted);
  EXPECT_FALSE(v[2].accepted);
  EXPECT_THROW(vqa.answer(ImageRef::scene("nope"), "How many bird are in the image?"),
               UnknownScene);
}

TEST(MockVg, Modes) {
  const auto s = birds_scene();
  const auto perfect = VgMode::parse("perfect");
  EXPECT_EQ(mock_vg(s, "white bird", perfect, vocab()), s.objects[0].box);
  EXPECT_EQ(mock_vg(s, "brown bird", perfect, vocab()), s.full_box());
  EXPECT_EQ(mock_vg(s, "green cat", perfect, vocab()), s.full_box());
  EXPECT_TRUE(is_issue(s.full_box(), s.objects[0].box));

  const auto color = VgMode::parse("faulty:ignore_attribute=color");
  const auto box = mock_vg(s, "white bird", color, vocab());
  bool is_a_bird = false;
  for (const auto& o : s.objects) is_a_bird = is_a_bird || o.box == box;
  EXPECT_TRUE(is_a_bird);

  const auto noisy = VgMode::parse("faulty:noisy=1");
  EXPECT_NE(mock_vg(s, "white bird", noisy, vocab()), s.objects[0].box);
  const auto quiet = VgMode::parse("faulty:noisy=0");
  EXPECT_EQ(mock_vg(s, "white bird", quiet, vocab()), s.objects[0].box);
}

TEST(MockVg, ModeStrings) {
  for (const std::string spec :
       {"perfect", "faulty:ignore_attribute=color", "faulty:noisy=0.25"}) {
    EXPECT_EQ(VgMode::parse(spec).to_string(), spec);
  }
  EXPECT_THROW(VgMode::parse("faulty:noisy=2"), ConfigError);
  EXPECT_THROW(VgMode::parse("faulty:ignore_attribute=texture"), ConfigError);
  EXPECT_THROW(VgMode::parse("broken"), ConfigError);
}

TEST(ValidateScene, Rejections) {
  EXPECT_NO_THROW(validate_scene(birds_scene()));
  auto s = birds_scene();
  s.objects[1].box = {620, 0, 40, 10};
  EXPECT_THROW(validate_scene(s), InvalidScene);
  s = birds_scene();
  s.objects[0].relations.push_back({"near", "ghost"});
  EXPECT_THROW(validate_scene(s), InvalidScene);
  s = birds_scene();
  s.objects[2].id = "b1";
  EXPECT_THROW(validate_scene(s), InvalidScene);
  s = birds_scene();
  s.target = "ghost";
  EXPECT_THROW(validate_scene(s), InvalidScene);
  s = birds_scene();
  s.objects[0].is_reflection = true;
  EXPECT_THROW(validate_scene(s), InvalidScene);
}

TEST(GenScene, ExpressionDenotesTarget) {
  SceneParams params;
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    const auto g = gen_scene(seed, params, "s" + std::to_string(seed));
    EXPECT_NO_THROW(validate_scene(g.scene));
    const auto m = match_all(g.test_case.expression.text, g.scene);
    ASSERT_EQ(m.matches, std::vector<std::string>{g.scene.target})
        << g.test_case.expression.text;
    EXPECT_EQ(g.test_case.oracle, g.scene.target_object().box);
    EXPECT_EQ(g.test_case.image, ImageRef::scene(g.scene.id));
    EXPECT_EQ(g.test_case.id(), g.scene.id);
  }
}

TEST(GenScene, Deterministic) {
  SceneParams params;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto a = gen_scene(seed, params, "x");
    const auto b = gen_scene(seed, params, "x");
    EXPECT_EQ(a.scene, b.scene);
    EXPECT_EQ(a.test_case, b.test_case);
  }
}

TEST(GenScene, DistinctCategoriesNeedOnlyTheNoun) {
  SceneParams params;
  params.n_objects = 2;
  params.same_category_prob = 0;
  params.reflection_prob = 0;
  params.relation_density = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto g = gen_scene(seed, params, "p");
    if (g.scene.objects[0].category == g.scene.objects[1].category) continue;
    const auto& target = g.scene.target_object();
    const auto m = match_all(target.category, g.scene);
    EXPECT_EQ(m.matches, std::vector<std::string>{target.id});
  }
}

TEST(GenScene, FullReflectionMirrorsEveryDistractor) {
  SceneParams params;
  params.reflection_prob = 1;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto g = gen_scene(seed, params, "r");
    for (const auto& o : g.scene.objects) {
      EXPECT_EQ(o.is_reflection, o.id != g.scene.target);
    }
  }
}

TEST(GenScene, BadParams) {
  SceneParams params;
  params.n_objects = 1;
  EXPECT_THROW(gen_scene(0, params, "x"), ConfigError);
  params = {};
  params.attr_density = 1.5;
  EXPECT_THROW(gen_scene(0, params, "x"), ConfigError);
}

TEST(WithDuplicateTarget, CopiesAppearance) {
  const auto s = birds_scene();
  const auto d = with_duplicate_target(s, false);
  ASSERT_EQ(d.objects.size(), 4u);
  EXPECT_EQ(d.objects.back().category, "bird");
  EXPECT_EQ(d.objects.back().attributes, s.objects[0].attributes);
  EXPECT_EQ(match_all("white bird", d).matches.size(), 2u);
  const auto r = with_duplicate_target(s, true);
  EXPECT_TRUE(match_all("white bird", r).reflections_among_matches);
}

TEST(SceneStore, Lookup) {
  SceneStore store;
  store.add(birds_scene());
  EXPECT_TRUE(store.contains("birds"));
  EXPECT_EQ(store.size(), 1u);
  EXPECT_EQ(store.get("birds")->target, "w");
  EXPECT_THROW(store.get("fish"), UnknownScene);
}

}  // namespace
}  // namespace peeling
