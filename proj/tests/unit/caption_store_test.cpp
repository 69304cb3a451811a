#include "vwsd/caption_store.hpp"
#include "vwsd/error.hpp"

#include <nlohmann/json.hpp>

#include <gtest/gtest.h>

#include <algorithm>

using namespace vwsd;

namespace {

std::vector<std::string> numbered(int n, const std::string& stem = "c") {
  std::vector<std::string> out;
  for (int i = 1; i <= n; ++i) out.push_back(stem + std::to_string(i));
  return out;
}

}  // namespace

TEST(Captions, GreedyRecordFromTheTenderEmbraceQuestion) {
  const auto store = parse_captions_jsonl(
      R"({"image_id":"img1","captioner":"git-l","strategy":"greedy","captions":["a student gets a hug from a student."]})"
      "\n");
  EXPECT_EQ(store.size(), 1u);
  EXPECT_EQ(caption_text(store.at("img1", "git-l", CaptionStrategy::greedy)), "a student gets a hug from a student.");
  EXPECT_EQ(store.find("img1", "git-l", CaptionStrategy::beam), nullptr);
  EXPECT_EQ(store.find("img1", "blip-l", CaptionStrategy::greedy), nullptr);
}

TEST(Captions, CardinalityIsEnforced) {
  EXPECT_THROW(validate_caption_set({"i", "git-l", CaptionStrategy::beam, numbered(9)}), ValidationError);
  EXPECT_THROW(validate_caption_set({"i", "git-l", CaptionStrategy::greedy, numbered(2)}), ValidationError);
  EXPECT_THROW(validate_caption_set({"i", "git-l", CaptionStrategy::greedy, {""}}), ValidationError);
  EXPECT_NO_THROW(validate_caption_set({"i", "git-l", CaptionStrategy::beam, numbered(10)}));

  const CaptionSet nine{"img1", "git-l", CaptionStrategy::beam, numbered(9)};
  nlohmann::json j = {{"image_id", "img1"}, {"captioner", "git-l"}, {"strategy", "beam"}, {"captions", nine.captions}};
  EXPECT_THROW(parse_captions_jsonl(j.dump() + "\n"), ValidationError);
}

TEST(Captions, CaptionText) {
  EXPECT_EQ(caption_text({"i", "git-l", CaptionStrategy::greedy, {"a large stone head in a garden"}}),
            "a large stone head in a garden");
  const auto beam = caption_text({"i", "git-l", CaptionStrategy::beam, numbered(10)});
  EXPECT_EQ(beam, "c1, c2, c3, c4, c5, c6, c7, c8, c9, c10");
  EXPECT_EQ(std::count(beam.begin(), beam.end(), ','), 9);
}

TEST(Captions, InternalCommasAreNotEscaped) {
  auto captions = numbered(10);
  captions[0] = "a large, thin, green plant";
  captions[9] = "dup";
  captions[8] = "dup";
  EXPECT_EQ(caption_text({"i", "git-l", CaptionStrategy::beam, captions}),
            "a large, thin, green plant, c2, c3, c4, c5, c6, c7, c8, dup, dup");
}

TEST(Captions, TenImagesBothStrategies) {
  std::string text;
  for (int i = 0; i < 10; ++i) {
    const std::string id = "image." + std::to_string(i) + ".jpg";
    text += serialize_caption_set({id, "blip-l", CaptionStrategy::greedy, {"caption " + std::to_string(i)}});
    text += serialize_caption_set({id, "blip-l", CaptionStrategy::beam, numbered(10, "b" + std::to_string(i) + "-")});
  }
  const auto store = parse_captions_jsonl(text);
  EXPECT_EQ(store.size(), 20u);
  for (int i = 0; i < 10; ++i) {
    const std::string id = "image." + std::to_string(i) + ".jpg";
    EXPECT_EQ(store.at(id, "blip-l", CaptionStrategy::greedy).captions.front(), "caption " + std::to_string(i));
    EXPECT_EQ(store.at(id, "blip-l", CaptionStrategy::beam).captions.size(), 10u);
  }
}

TEST(Captions, DuplicateKeys) {
  const auto a = serialize_caption_set({"i", "git-l", CaptionStrategy::greedy, {"x"}});
  EXPECT_EQ(parse_captions_jsonl(a + a).size(), 1u);
  const auto b = serialize_caption_set({"i", "git-l", CaptionStrategy::greedy, {"y"}});
  EXPECT_THROW(parse_captions_jsonl(a + b), ValidationError);
}

TEST(Captions, ErrorsCarryLineNumbers) {
  const auto good = serialize_caption_set({"i", "git-l", CaptionStrategy::greedy, {"x"}});
  try {
    parse_captions_jsonl(good + "{bad json\n");
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}
