#include <gtest/gtest.h>

#include <random>

#include "support/oracles.hpp"
#include "vrap/error.hpp"
#include "vrap/scene.hpp"

using namespace vrap;
using namespace vrap::scene;

namespace {

ErrorKind kind_of(std::string_view text, const ParseOptions& options = {}) {
  try {
    parse_scene_document(text, options);
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error for:\n" << text;
  return ErrorKind::Io;
}

}  // namespace

TEST(SceneParse, DogDocument) {
  const auto doc = parse_scene_document(
      "SAF 1\n"
      "image dog-001 size 640 480\n"
      "object dog attr brown\n"
      "object ball\n"
      "relation 0 chases 1\n");
  EXPECT_EQ(doc.image.image_id, "dog-001");
  ASSERT_TRUE(doc.image.width && doc.image.height);
  EXPECT_EQ(*doc.image.width, 640u);
  EXPECT_EQ(*doc.image.height, 480u);
  EXPECT_FALSE(doc.image.source_uri);
  ASSERT_EQ(doc.graph.objects.size(), 2u);
  EXPECT_EQ(doc.graph.objects[0], (ObjectNode{"dog", {"brown"}}));
  EXPECT_EQ(doc.graph.objects[1], (ObjectNode{"ball", {}}));
  ASSERT_EQ(doc.graph.relations.size(), 1u);
  EXPECT_EQ(doc.graph.relations[0], (RelationEdge{0, "chases", 1}));
  EXPECT_EQ(doc.graph.image_id, "dog-001");
}

TEST(SceneParse, MultiWordNamesCommentsAndDuplicates) {
  const auto g = parse_scene_graph(
      "# leading comment\n"
      "SAF 1\n"
      "\n"
      "image kitchen uri file:///k.jpg\n"
      "object  red   car  attr  very  shiny attr red attr very shiny\n"
      "   # indented comment\n"
      "object person\n"
      "relation 1 sitting   in 0\n"
      "relation 1 sitting in 0\n");
  ASSERT_EQ(g.objects.size(), 2u);
  EXPECT_EQ(g.objects[0].label, "red car");
  EXPECT_EQ(g.objects[0].attributes, (std::vector<std::string>{"very shiny", "red"}));
  ASSERT_EQ(g.relations.size(), 1u);
  EXPECT_EQ(g.relations[0].predicate, "sitting in");
}

TEST(SceneParse, ErrorKinds) {
  EXPECT_EQ(kind_of(""), ErrorKind::MalformedDocument);
  EXPECT_EQ(kind_of("image x\n"), ErrorKind::MalformedDocument);
  EXPECT_EQ(kind_of("SAF 2\nimage x\n"), ErrorKind::MalformedDocument);
  EXPECT_EQ(kind_of("SAF 1\nobject dog\n"), ErrorKind::MalformedDocument);
  EXPECT_EQ(kind_of("SAF 1\nimage x\nimage y\n"), ErrorKind::MalformedDocument);
  EXPECT_EQ(kind_of("SAF 1\nimage x\nwidget 3\n"), ErrorKind::MalformedDocument);
  EXPECT_EQ(kind_of("SAF 1\nimage x\nobject\n"), ErrorKind::EmptyLabel);
  EXPECT_EQ(kind_of("SAF 1\nimage x\nobject dog attr\n"), ErrorKind::EmptyLabel);
  EXPECT_EQ(kind_of("SAF 1\nimage x\nobject do(g\n"), ErrorKind::InvalidLabel);
  EXPECT_EQ(kind_of("SAF 1\nimage x\nobject dog attr a;b\n"), ErrorKind::InvalidLabel);
  EXPECT_EQ(kind_of("SAF 1\nimage x\nobject dog\nrelation 0 chases 3\n"), ErrorKind::DanglingReference);
  EXPECT_EQ(kind_of("SAF 1\nimage x\nobject dog\nrelation 0 chases 0\n"), ErrorKind::SelfRelation);
  EXPECT_EQ(kind_of("SAF 1\nimage x\nobject dog\nobject b\nrelation a chases 1\n"), ErrorKind::MalformedDocument);
  EXPECT_EQ(kind_of("SAF 1\nimage x size 0 3\n"), ErrorKind::MalformedDocument);
}

TEST(SceneParse, ErrorsCarryLineAndColumn) {
  try {
    parse_scene_document("SAF 1\nimage x\nobject dog\nobject cat\nrelation 0 likes 7\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DanglingReference);
    EXPECT_EQ(e.line(), 5u);
  }
  try {
    parse_scene_document("SAF 1\nimage x\nobject  d#g\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidLabel);
    EXPECT_EQ(e.line(), 3u);
    EXPECT_EQ(e.column(), 9u);
  }
}

TEST(SceneParse, ReflexivePredicatesAreOptIn) {
  ParseOptions options;
  options.reflexive_predicates.insert("looks at");
  const auto g = parse_scene_graph("SAF 1\nimage x\nobject cat\nrelation 0 looks at 0\n", options);
  ASSERT_EQ(g.relations.size(), 1u);
  EXPECT_NO_THROW(validate(g, options));
  EXPECT_THROW(validate(g), Error);
}

TEST(SceneParse, WriteParseRoundTrip) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 200; ++i) {
    SceneDocument doc;
    doc.graph = oracle::random_graph(rng);
    doc.image.image_id = doc.graph.image_id;
    if (i % 3 == 0) doc.image.source_uri = "file:///x/" + std::to_string(i) + ".png";
    if (i % 2 == 0) {
      doc.image.width = 100 + i;
      doc.image.height = 50 + i;
    }
    const auto back = parse_scene_document(write_scene_document(doc));
    EXPECT_EQ(back.image, doc.image);
    EXPECT_EQ(back.graph, doc.graph);
  }
}

TEST(SceneValidate, RejectsBrokenGraphs) {
  SceneGraph g{"x", {{"dog", {"brown", "brown"}}}, {}};
  EXPECT_THROW(validate(g), Error);
  g = {"x", {{"dog", {}}, {"cat", {}}}, {{0, "sees", 2}}};
  try {
    validate(g);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DanglingReference);
  }
  g = {"x", {{" dog", {}}}, {}};
  EXPECT_THROW(validate(g), Error);
}

TEST(SceneLabels, Normalize) {
  EXPECT_EQ(normalize_label("  tall person \t"), "tall person");
  EXPECT_THROW(normalize_label("   "), Error);
  for (char c : kReservedLabelChars) EXPECT_THROW(normalize_label(std::string("a") + c + "b"), Error);
  EXPECT_THROW(normalize_label("a\x01" "b"), Error);
}

TEST(SceneFeatures, DeterministicAndShaped) {
  const auto g = parse_scene_graph("SAF 1\nimage x\nobject dog attr brown\nobject ball\nrelation 0 chases 1\n");
  const auto a = encode_features(g, 4, 3, 5, 9);
  const auto b = encode_features(g, 4, 3, 5, 9);
  EXPECT_EQ(a.grid, b.grid);
  EXPECT_EQ(a.grid.size(), 4u * 3u * 5u);
  EXPECT_EQ(a.image_id, "x");
  EXPECT_NO_THROW(validate(a));
  EXPECT_NE(encode_features(g, 4, 3, 5, 10).grid, a.grid);

  const auto tokens = feature_tokens(a, 7);
  ASSERT_EQ(tokens.size(), 12u);
  for (std::size_t cell = 0; cell < tokens.size(); ++cell) {
    std::size_t best = 0;
    for (std::size_t d = 1; d < 5; ++d) {
      if (a.grid[cell * 5 + d] > a.grid[cell * 5 + best]) best = d;
    }
    EXPECT_EQ(tokens[cell], best % 7);
  }

  auto broken = a;
  broken.grid.pop_back();
  EXPECT_THROW(validate(broken), Error);
  EXPECT_THROW(encode_features(g, 0, 3, 5), Error);
}
