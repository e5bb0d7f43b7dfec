#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "support/oracles.hpp"
#include "vrap/error.hpp"
#include "vrap/tags.hpp"

using namespace vrap;
using namespace vrap::scene;

namespace {

SceneGraph dog_graph() { return {"dog-001", {{"dog", {"brown"}}, {"ball", {}}}, {{0, "chases", 1}}}; }

SceneGraph kitchen_graph() {
  return {"kitchen",
          {{"person", {"tall"}}, {"handbag", {"black", "leather"}}, {"person", {}}},
          {{0, "holding", 1}, {2, "next to", 0}}};
}

}  // namespace

TEST(TagSetBuild, DogExample) {
  const auto t = build_tag_set(dog_graph());
  EXPECT_EQ(t.object_tags, (std::vector<std::string>{"ball", "dog"}));
  EXPECT_EQ(t.attribute_tags, (std::vector<AttributeTag>{{"dog", "brown"}}));
  EXPECT_EQ(t.relation_tags, (std::vector<RelationTag>{{"dog", "chases", "ball"}}));
  EXPECT_EQ(t.size(), 4u);
  EXPECT_EQ(serialize_tags(t), "ball; dog(brown); (dog, chases, ball)");
}

TEST(TagSetBuild, RepeatedLabelsAreSuffixedInAppearanceOrder) {
  const auto t = build_tag_set(kitchen_graph());
  EXPECT_EQ(t.object_tags, (std::vector<std::string>{"handbag", "person#1", "person#2"}));
  EXPECT_EQ(serialize_tags(t),
            "handbag(black, leather); person#1(tall); person#2; "
            "(person#1, holding, handbag); (person#2, next to, person#1)");
}

TEST(TagSetBuild, EmptyGraph) {
  const auto t = build_tag_set(SceneGraph{"x", {}, {}});
  EXPECT_TRUE(t.empty());
  EXPECT_EQ(serialize_tags(t), "");
  EXPECT_EQ(deserialize_tags(""), t);
}

TEST(TagSetBuild, MatchesUnionOracle) {
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 300; ++i) {
    const auto g = oracle::random_graph(rng);
    const auto t = build_tag_set(g);
    ASSERT_EQ(t, oracle::tag_union(g)) << "graph " << i;
    EXPECT_TRUE(is_canonical(t));
    EXPECT_TRUE(is_referentially_closed(t));
  }
}

TEST(TagSetBuild, InvariantUnderOrderPreservingPermutation) {
  // Objects with distinct labels, so reordering cannot change any suffix.
  SceneGraph g{"x", {{"dog", {"brown"}}, {"cat", {"small"}}, {"ball", {"red"}}, {"tree", {}}}, {}};
  g.relations = {{0, "chases", 1}, {1, "under", 3}, {0, "on", 2}};
  const auto expected = build_tag_set(g);
  std::vector<std::size_t> perm = {0, 1, 2, 3};
  while (std::next_permutation(perm.begin(), perm.end())) {
    SceneGraph p{"x", {}, {}};
    std::vector<std::size_t> where(perm.size());
    for (std::size_t i = 0; i < perm.size(); ++i) {
      p.objects.push_back(g.objects[perm[i]]);
      where[perm[i]] = i;
    }
    for (auto r : g.relations) p.relations.push_back({where[r.subject_idx], r.predicate, where[r.object_idx]});
    std::reverse(p.relations.begin(), p.relations.end());
    EXPECT_EQ(build_tag_set(p), expected);
  }
}

TEST(TagCanonical, SortsDedupesAndIsIdempotent) {
  TagSet raw;
  raw.object_tags = {"dog", "ball", "dog"};
  raw.attribute_tags = {{"dog", "brown"}, {"dog", "brown"}};
  raw.relation_tags = {{"dog", "chases", "ball"}};
  EXPECT_FALSE(is_canonical(raw));
  const auto c = canonicalize(raw);
  EXPECT_TRUE(is_canonical(c));
  EXPECT_EQ(c.object_tags, (std::vector<std::string>{"ball", "dog#1", "dog#2"}));
  EXPECT_EQ(c.attribute_tags, (std::vector<AttributeTag>{{"dog#1", "brown"}}));
  EXPECT_EQ(c.relation_tags, (std::vector<RelationTag>{{"dog#1", "chases", "ball"}}));
  EXPECT_EQ(canonicalize(c), c);
}

TEST(TagSerialize, RoundTripOnRandomGraphs) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 300; ++i) {
    const auto t = build_tag_set(oracle::random_graph(rng));
    const auto line = serialize_tags(t);
    ASSERT_EQ(deserialize_tags(line), t) << line;
    EXPECT_EQ(serialize_tags(deserialize_tags(line)), line);
  }
}

TEST(TagSerialize, RejectsMalformedLines) {
  for (const char* bad : {"dog(brown", "dog)", "(dog, chases)", "(dog, chases, ball", "; dog", "dog;; cat",
                          "dog(brown,)", "(a, b, c, d)", "dog(x) y", "dog#", "dog#x"}) {
    try {
      deserialize_tags(bad);
      ADD_FAILURE() << "accepted '" << bad << "'";
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::MalformedDocument) << bad;
    }
  }
}

TEST(TagSerialize, RefusesOpenSets) {
  TagSet open;
  open.object_tags = {"ball"};
  open.relation_tags = {{"dog", "chases", "ball"}};
  EXPECT_FALSE(is_referentially_closed(open));
  EXPECT_THROW(serialize_tags(open), Error);
}

TEST(TagText, BaseLabelAndMemberTexts) {
  EXPECT_EQ(base_label("person#12"), "person");
  EXPECT_EQ(base_label("person"), "person");
  EXPECT_EQ(base_label("a#b"), "a#b");
  const auto texts = member_texts(build_tag_set(kitchen_graph()));
  EXPECT_NE(std::find(texts.begin(), texts.end(), "person tall"), texts.end());
  EXPECT_NE(std::find(texts.begin(), texts.end(), "person holding handbag"), texts.end());
  EXPECT_EQ(std::count(texts.begin(), texts.end(), "person"), 2);
}

TEST(TagCompleteness, MatchesSetDifference) {
  std::mt19937_64 rng(99);
  for (int i = 0; i < 200; ++i) {
    const auto g = oracle::random_graph(rng);
    const auto full = oracle::tag_union(g);
    TagSet partial;
    std::vector<std::string> miss_o;
    std::vector<AttributeTag> miss_a;
    std::vector<RelationTag> miss_r;
    for (const auto& o : full.object_tags) (rng() % 3 ? partial.object_tags : miss_o).push_back(o);
    for (const auto& a : full.attribute_tags) (rng() % 3 ? partial.attribute_tags : miss_a).push_back(a);
    for (const auto& r : full.relation_tags) (rng() % 3 ? partial.relation_tags : miss_r).push_back(r);
    const auto report = validate_completeness(partial, g);
    EXPECT_EQ(report.missing_objects, miss_o);
    EXPECT_EQ(report.missing_attributes, miss_a);
    EXPECT_EQ(report.missing_relations, miss_r);
    EXPECT_EQ(report.complete(), miss_o.empty() && miss_a.empty() && miss_r.empty());
  }
  const auto g = dog_graph();
  EXPECT_TRUE(validate_completeness(build_tag_set(g), g).complete());
}
