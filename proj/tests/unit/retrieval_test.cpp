#include "vwsd/error.hpp"
#include "vwsd/retrieval.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

using namespace vwsd;

namespace {

const std::vector<std::string> kThree = {"c1", "c2", "c3"};

std::vector<std::string> order(const RankingResult& r) {
  std::vector<std::string> ids;
  for (const auto& c : r.ranked) ids.push_back(c.image_id);
  return ids;
}

RankingResult plain(const std::string& id, std::vector<std::string> top_first) {
  std::vector<double> sims;
  for (std::size_t i = 0; i < top_first.size(); ++i) sims.push_back(1.0 - 0.1 * static_cast<double>(i));
  return rank_scored(id, id, top_first, sims, top_first.front(), SimilarityMeasure::cosine, nullptr);
}

VwsdInstance instance_with(std::vector<std::string> candidates) {
  VwsdInstance inst;
  inst.instance_id = "000000";
  inst.target_word = "t";
  inst.context_word = "c";
  inst.full_phrase = "t c";
  inst.candidate_ids = std::move(candidates);
  inst.gold_id = inst.candidate_ids.front();
  return inst;
}

}  // namespace

TEST(Ranking, ThreeCandidatesWithoutPenalty) {
  const std::vector<double> sims = {0.9, 0.5, 0.1};
  const auto r = rank_scored("q", "t", kThree, sims, "c1", SimilarityMeasure::cosine, nullptr);
  EXPECT_EQ(order(r), (std::vector<std::string>{"c1", "c2", "c3"}));
  EXPECT_EQ(r.gold_rank, 1u);
  EXPECT_FALSE(r.penalized);
  for (const auto& c : r.ranked) EXPECT_EQ(c.raw_sim, c.final_score);
}

TEST(Ranking, ThreeCandidatesWithPenalty) {
  PenaltyTable p;
  p.values = {{"c1", 0.5}, {"c2", 0.0}, {"c3", 0.0}};
  const std::vector<double> sims = {0.9, 0.5, 0.1};
  const auto r = rank_scored("q", "t", kThree, sims, "c1", SimilarityMeasure::cosine, &p);
  EXPECT_EQ(order(r), (std::vector<std::string>{"c2", "c1", "c3"}));
  EXPECT_NEAR(r.ranked[0].final_score, 0.5, 1e-12);
  EXPECT_NEAR(r.ranked[1].final_score, 0.4, 1e-12);
  EXPECT_NEAR(r.ranked[2].final_score, 0.1, 1e-12);
  EXPECT_EQ(r.gold_rank, 2u);
  EXPECT_TRUE(r.penalized);
}

TEST(Ranking, IdenticalVectorsKeepCandidateOrder) {
  std::vector<std::string> ids;
  EmbeddingStore store;
  for (int i = 0; i < 10; ++i) {
    ids.push_back("img" + std::to_string(9 - i));
    store.add({ids.back(), EmbeddingKind::image, "m", 3, {0.2f, 0.4f, 0.1f}});
  }
  const std::vector<float> phrase = {1.0f, 0.0f, 0.5f};
  for (auto m : {SimilarityMeasure::cosine, SimilarityMeasure::euclidean, SimilarityMeasure::manhattan}) {
    const auto r = rank_candidates(instance_with(ids), "t c", phrase, "m", store, m, nullptr);
    EXPECT_EQ(order(r), ids);
  }
}

TEST(Ranking, MissingCandidateNamesImage) {
  EmbeddingStore store;
  std::vector<std::string> ids;
  for (int i = 0; i < 10; ++i) {
    ids.push_back("img" + std::to_string(i));
    if (i != 6) store.add({ids.back(), EmbeddingKind::image, "m", 2, {1.0f, static_cast<float>(i)}});
  }
  try {
    rank_candidates(instance_with(ids), "t c", std::vector<float>{1.0f, 0.0f}, "m", store, SimilarityMeasure::cosine,
                    nullptr);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("img6"), std::string::npos);
  }
}

TEST(Ranking, DimMismatchThrows) {
  EmbeddingStore store;
  std::vector<std::string> ids;
  for (int i = 0; i < 10; ++i) {
    ids.push_back("img" + std::to_string(i));
    store.add({ids.back(), EmbeddingKind::image, "m", 2, {1.0f, static_cast<float>(i)}});
  }
  EXPECT_THROW(rank_candidates(instance_with(ids), "t c", std::vector<float>{1.0f, 0.0f, 2.0f}, "m", store,
                               SimilarityMeasure::cosine, nullptr),
               ValidationError);
}

TEST(Penalty, ThreePhraseBatch) {
  const std::vector<RankingResult> batch = {plain("p1", {"X", "Y", "Z"}), plain("p2", {"Y", "X", "Z"}),
                                            plain("p3", {"X", "Z", "Y"})};
  const auto table = compute_penalty(batch, 1.0);
  EXPECT_EQ(table.total, 3u);
  EXPECT_EQ(table.counts.at("X"), 2u);
  EXPECT_DOUBLE_EQ(table.penalty_for("X"), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(table.penalty_for("Y"), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(table.penalty_for("Z"), 0.0);
  EXPECT_DOUBLE_EQ(table.penalty_for("never-seen"), 0.0);
}

TEST(Penalty, LambdaZeroAndSinglePhrase) {
  const std::vector<RankingResult> one = {plain("p1", {"X", "Y", "Z"})};
  const auto t1 = compute_penalty(one, 0.7);
  EXPECT_DOUBLE_EQ(t1.penalty_for("X"), 0.7);
  EXPECT_DOUBLE_EQ(t1.penalty_for("Y"), 0.0);

  const auto t0 = compute_penalty(one, 0.0);
  for (const auto& [id, p] : t0.values) EXPECT_EQ(p, 0.0) << id;
}

TEST(Penalty, Errors) {
  EXPECT_THROW(compute_penalty({}, 1.0), ValidationError);
  const std::vector<RankingResult> one = {plain("p1", {"X", "Y"})};
  EXPECT_THROW(compute_penalty(one, -0.1), ValidationError);
  EXPECT_THROW(compute_penalty(one, std::nan("")), ValidationError);
}

// Invariants of any table built from random batches.
TEST(PenaltyProperty, TableInvariants) {
  std::mt19937 rng(21);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<RankingResult> batch;
    const int n = 1 + static_cast<int>(rng() % 20);
    for (int i = 0; i < n; ++i) {
      std::vector<std::string> ids;
      for (int c = 0; c < 10; ++c) ids.push_back("img" + std::to_string(rng() % 25));
      std::sort(ids.begin(), ids.end());
      ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
      std::shuffle(ids.begin(), ids.end(), rng);
      batch.push_back(plain("p" + std::to_string(i), ids));
    }
    const double lambda = std::uniform_real_distribution<double>(0.0, 3.0)(rng);
    const auto table = compute_penalty(batch, lambda);
    std::size_t sum = 0;
    for (const auto& [id, count] : table.counts) {
      sum += count;
      EXPECT_NEAR(table.penalty_for(id), lambda * static_cast<double>(count) / n, 1e-15);
    }
    EXPECT_EQ(sum, static_cast<std::size_t>(n));
    for (const auto& [id, p] : table.values) {
      EXPECT_GE(p, 0.0);
      if (!table.counts.contains(id)) EXPECT_EQ(p, 0.0);
    }
  }
}

TEST(RankingProperty, UniformPenaltyKeepsOrder) {
  std::mt19937 rng(22);
  std::uniform_real_distribution<double> u(-1.0, 1.0), c01(0.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<std::string> ids;
    std::vector<double> sims;
    PenaltyTable base, shifted;
    const double c = c01(rng);
    for (int i = 0; i < 10; ++i) {
      ids.push_back("c" + std::to_string(i));
      sims.push_back(u(rng));
      const double p = trial % 2 ? 0.0 : c01(rng) * 0.1;
      base.values[ids.back()] = p;
      shifted.values[ids.back()] = p + c;
    }
    const auto a = rank_scored("q", "t", ids, sims, "c0", SimilarityMeasure::cosine, &base);
    const auto b = rank_scored("q", "t", ids, sims, "c0", SimilarityMeasure::cosine, &shifted);
    EXPECT_EQ(order(a), order(b));
  }
}

TEST(RankingProperty, FinalScoreIdentityAndGoldRank) {
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> u(-1.0, 1.0), p01(0.0, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<std::string> ids;
    std::vector<double> sims;
    PenaltyTable table;
    for (int i = 0; i < 10; ++i) {
      ids.push_back("c" + std::to_string(i));
      sims.push_back(u(rng));
      if (rng() % 2) table.values[ids.back()] = p01(rng);
    }
    const std::string gold = ids[rng() % 10];
    const auto r = rank_scored("q", "t", ids, sims, gold, SimilarityMeasure::cosine, &table);
    for (std::size_t k = 0; k < r.ranked.size(); ++k) {
      const auto& e = r.ranked[k];
      EXPECT_LE(std::abs(e.final_score - (e.raw_sim - table.penalty_for(e.image_id))), 1e-9);
      if (k) EXPECT_GE(r.ranked[k - 1].final_score, e.final_score);
      if (e.image_id == gold) EXPECT_EQ(r.gold_rank, k + 1);
    }
    const auto again = rank_scored("q", "t", ids, sims, gold, SimilarityMeasure::cosine, &table);
    EXPECT_EQ(to_json(r).dump(), to_json(again).dump());
  }
}

TEST(Ranking, JsonlRoundTrip) {
  PenaltyTable p;
  p.values = {{"c1", 0.25}};
  const std::vector<double> sims = {0.9, 0.5, 0.1};
  const std::vector<RankingResult> rs = {
      rank_scored("000000", "t c", kThree, sims, "c2", SimilarityMeasure::manhattan, &p),
      rank_scored("000001", "u d", kThree, sims, "c3", SimilarityMeasure::cosine, nullptr)};
  const auto text = serialize_rankings_jsonl(rs);
  const auto back = parse_rankings_jsonl(text);
  EXPECT_EQ(serialize_rankings_jsonl(back), text);
  EXPECT_EQ(back[0].measure, SimilarityMeasure::manhattan);
  EXPECT_EQ(back[0].gold_rank, rs[0].gold_rank);
  EXPECT_THROW(parse_rankings_jsonl("{\"instance_id\":1}\n"), ValidationError);
}
