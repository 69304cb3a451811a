#include "vwsd/config.hpp"
#include "vwsd/error.hpp"
#include "vwsd/io.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

using namespace vwsd;

TEST(Config, Defaults) {
  const RunConfig c;
  EXPECT_EQ(c.measure, SimilarityMeasure::cosine);
  EXPECT_FALSE(c.penalty);
  EXPECT_EQ(c.lambda, 1.0);
  EXPECT_EQ(c.temperature, 0.0);
  EXPECT_EQ(c.max_tokens, 150);
  EXPECT_EQ(c.enhance_template, "meaning_of");
  EXPECT_EQ(c.jobs, 1u);
}

TEST(Config, SectionsCommentsAndQuotes) {
  RunConfig c;
  apply_config_text(c,
                    "# run settings\n"
                    "[data]\n"
                    "tsv = data.tsv\n"
                    "gold = \"gold # file.txt\"  # trailing\n"
                    "\n"
                    "[retrieval]\n"
                    "embeddings = a.bin, b.jsonl\n"
                    "measure = manhattan\n"
                    "[penalty]\n"
                    "enabled = true\n"
                    "lambda = 0.25\n"
                    "[llm]\n"
                    "temperature = 0.7\n"
                    "max_tokens = 64\n"
                    "offline = yes\n"
                    "[qa]\n"
                    "strategy = beam\n"
                    "shots = 3\n"
                    "seed = 12345678901\n"
                    "[run]\n"
                    "jobs = 8\n",
                    "/base");
  EXPECT_EQ(c.data, std::filesystem::path("/base/data.tsv"));
  EXPECT_EQ(c.gold, std::filesystem::path("/base/gold # file.txt"));
  ASSERT_EQ(c.embeddings.size(), 2u);
  EXPECT_EQ(c.embeddings[1], std::filesystem::path("/base/b.jsonl"));
  EXPECT_EQ(c.measure, SimilarityMeasure::manhattan);
  EXPECT_TRUE(c.penalty);
  EXPECT_EQ(c.lambda, 0.25);
  EXPECT_EQ(c.temperature, 0.7);
  EXPECT_EQ(c.max_tokens, 64);
  EXPECT_TRUE(c.offline);
  EXPECT_EQ(c.strategy, CaptionStrategy::beam);
  EXPECT_EQ(c.shots, 3u);
  EXPECT_EQ(c.seed, 12345678901ull);
  EXPECT_EQ(c.jobs, 8u);
}

TEST(Config, AbsolutePathsStay) {
  RunConfig c;
  apply_setting(c, "data.tsv", "/abs/data.tsv", "/base");
  EXPECT_EQ(c.data, std::filesystem::path("/abs/data.tsv"));
  apply_setting(c, "run.out_dir", "out", "");
  EXPECT_EQ(c.out_dir, std::filesystem::path("out"));
}

TEST(Config, Errors) {
  RunConfig c;
  EXPECT_THROW(apply_setting(c, "retrieval.mesure", "cosine"), UsageError);
  EXPECT_THROW(apply_setting(c, "penalty.lambda", "-1"), UsageError);
  EXPECT_THROW(apply_setting(c, "penalty.enabled", "maybe"), UsageError);
  EXPECT_THROW(apply_setting(c, "llm.max_tokens", "0"), UsageError);
  EXPECT_THROW(apply_setting(c, "llm.max_tokens", "12x"), UsageError);
  EXPECT_THROW(apply_setting(c, "run.jobs", "0"), UsageError);
  EXPECT_THROW(apply_setting(c, "retrieval.measure", "dot"), Error);
  EXPECT_THROW(apply_config_text(c, "[llm\nmodel = x\n", "."), UsageError);
  EXPECT_THROW(apply_config_text(c, "model x\n", "."), UsageError);
  try {
    apply_config_text(c, "[llm]\nmodel = x\nbogus = 1\n", ".");
    FAIL();
  } catch (const UsageError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("llm.bogus"), std::string::npos);
  }
}

TEST(Config, EveryKeyIsAccepted) {
  for (auto key : config_keys()) {
    RunConfig c;
    std::string value = "x";
    if (key == "retrieval.measure") value = "cosine";
    else if (key == "qa.strategy") value = "greedy";
    else if (key.find("enabled") != std::string_view::npos || key == "llm.offline") value = "false";
    else if (key == "penalty.lambda" || key == "llm.temperature" || key == "llm.rpm") value = "0.5";
    else if (key == "llm.max_tokens" || key == "qa.shots" || key == "qa.seed" || key == "run.jobs") value = "2";
    EXPECT_NO_THROW(apply_setting(c, key, value)) << key;
  }
}

TEST(Config, FileResolvesRelativeToItsDirectory) {
  vwsd::testing::TempDir dir;
  write_file_atomic(dir / "run.toml", "[data]\ntsv = d.tsv\n");
  RunConfig c;
  apply_config_file(c, dir / "run.toml");
  EXPECT_EQ(c.data, dir / "d.tsv");
  EXPECT_THROW(apply_config_file(c, dir / "missing.toml"), Error);
}
