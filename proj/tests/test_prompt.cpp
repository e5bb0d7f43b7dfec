#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "json.hpp"
#include "support/oracles.hpp"
#include "vrap/error.hpp"
#include "vrap/prompt.hpp"

using namespace vrap;
using namespace vrap::prompting;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<retrieval::Enrichment> hits(const nlohmann::json& j) {
  std::vector<retrieval::Enrichment> out;
  for (const auto& h : j) {
    out.push_back({h.at("key"), h.at("snippet"), h.at("ordinal").get<std::size_t>(), h.at("score").get<double>()});
  }
  return out;
}

retrieval::EnrichedTagSet bare(std::string_view tags) {
  retrieval::EnrichedTagSet e;
  e.base = scene::deserialize_tags(tags);
  for (const auto& o : e.base.object_tags) e.object_enrichments[o];
  for (const auto& a : e.base.attribute_tags) e.attribute_enrichments[a];
  return e;
}

struct GoldenCase {
  std::string name;
  Query query;
  std::size_t budget;
  retrieval::EnrichedTagSet tags;
  std::string expected;
};

std::vector<GoldenCase> golden_cases() {
  std::vector<GoldenCase> cases;
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(VRAP_TEST_DATA_DIR "/prompts")) {
    if (entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& path : files) {
    const auto j = nlohmann::json::parse(slurp(path));
    GoldenCase c{path.stem().string(), {j.at("query"), std::nullopt}, j.at("budget"), bare(j.at("tags").get<std::string>()),
                 slurp(fs::path(path).replace_extension(".expected"))};
    if (j.contains("objects")) {
      for (const auto& [label, list] : j.at("objects").items()) c.tags.object_enrichments[label] = hits(list);
    }
    if (j.contains("attributes")) {
      for (const auto& a : j.at("attributes")) {
        c.tags.attribute_enrichments[{a.at("object"), a.at("attribute")}] = hits(a.at("hits"));
      }
    }
    cases.push_back(std::move(c));
  }
  return cases;
}

}  // namespace

TEST(PromptGolden, FixturesReproduceStoredBytes) {
  const auto cases = golden_cases();
  ASSERT_GE(cases.size(), 10u);
  for (const auto& c : cases) {
    const auto p = build_prompt(c.query, c.tags, c.budget);
    EXPECT_EQ(p.text, c.expected) << c.name;
    EXPECT_LE(p.text.size(), c.budget) << c.name;
  }
}

TEST(PromptBuild, TagSeparatorLiteral) {
  EXPECT_EQ(kTagSeparator, " Tags: ");
  EXPECT_EQ(kItemSeparator, "; ");
  const auto p = build_prompt({"Q", std::nullopt}, bare("dog"), 100);
  EXPECT_EQ(p.text, "Q Tags: dog");
  EXPECT_EQ(p.tag_count_included, 1u);
  EXPECT_FALSE(p.truncated);
}

TEST(PromptBuild, TruncationFlagAndCounts) {
  const auto tags = bare("ball; dog(brown); (dog, chases, ball)");
  const Query q{"What?", std::nullopt};
  const auto full = build_prompt(q, tags, 1000);
  EXPECT_EQ(full.tag_count_included, 3u);
  EXPECT_FALSE(full.truncated);
  const auto cut = build_prompt(q, tags, full.text.size() - 1);
  EXPECT_EQ(cut.tag_count_included, 2u);
  EXPECT_TRUE(cut.truncated);
  const auto none = build_prompt(q, tags, q.text.size() + 7);
  EXPECT_EQ(none.text, "What?");
  EXPECT_EQ(none.tag_count_included, 0u);
  EXPECT_TRUE(none.truncated);
}

TEST(PromptBuild, Errors) {
  const auto tags = bare("dog");
  try {
    build_prompt({"What?", std::nullopt}, tags, 11);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::BudgetTooSmall);
  }
  EXPECT_NO_THROW(build_prompt({"What?", std::nullopt}, tags, 12));
  for (const char* bad : {"", "line\nbreak", "tab\there"}) {
    try {
      build_prompt({bad, std::nullopt}, tags, 100);
      ADD_FAILURE() << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::InvalidQuery);
    }
  }
}

TEST(PromptBuild, MatchesGreedyPackingOracleAndIsPrefixClosed) {
  std::mt19937_64 rng(31);
  for (int i = 0; i < 300; ++i) {
    retrieval::EnrichedTagSet tags = bare(scene::serialize_tags(scene::build_tag_set(oracle::random_graph(rng))));
    std::size_t ordinal = 0;
    for (auto& [label, list] : tags.object_enrichments) {
      for (std::size_t h = rng() % 3; h > 0; --h) list.push_back({label, "fact about " + label, ordinal++, 0.5});
    }
    const Query q{"Question " + std::to_string(i) + "?", std::nullopt};
    const auto items = prompt_items(tags);
    const auto unbounded = build_prompt(q, tags, 1 << 20);
    std::size_t previous = 0;
    for (std::size_t budget = q.text.size() + 7; budget <= unbounded.text.size() + 1; budget += 1 + rng() % 9) {
      const auto p = build_prompt(q, tags, budget);
      ASSERT_EQ(p.text, oracle::pack(q.text, items, budget));
      EXPECT_LE(p.text.size(), budget);
      EXPECT_EQ(unbounded.text.compare(0, p.text.size(), p.text), 0);
      EXPECT_GE(p.tag_count_included, previous);
      previous = p.tag_count_included;
    }
  }
}

TEST(PromptItems, ObjectsThenRelationsWithEnrichmentsInline) {
  auto tags = bare("ball; dog(brown); (dog, chases, ball)");
  tags.object_enrichments["dog"] = {{"dog", "Canine [pet].", 0, 1.0}};
  tags.attribute_enrichments[{"dog", "brown"}] = {{"brown dog", "Brown\ncoat.", 3, 0.6}, {"dog", "Canine [pet].", 0, 0.4}};
  const auto items = prompt_items(tags);
  ASSERT_EQ(items.size(), 3u);
  EXPECT_EQ(items[0], "ball");
  EXPECT_EQ(items[1], "dog(brown) [dog: Canine (pet).] [brown dog: Brown coat.]");
  EXPECT_EQ(items[2], "(dog, chases, ball)");
}
