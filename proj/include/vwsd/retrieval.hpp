#pragma once

#include "vwsd/dataset.hpp"
#include "vwsd/vector_store.hpp"

#include <nlohmann/json.hpp>

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace vwsd {

/// Per-image penalty p(i) = lambda * n_top(i) / N, where n_top(i) counts the
/// phrases of a batch whose unpenalised rank-1 candidate is i and N is the
/// number of phrases. Images that never ranked first carry no penalty.
struct PenaltyTable {
  double lambda = 1.0;
  std::map<std::string, std::size_t> counts;
  std::size_t total = 0;
  std::map<std::string, double> values;

  double penalty_for(const std::string& image_id) const;
};

struct RankedCandidate {
  std::string image_id;
  double raw_sim = 0.0;
  double final_score = 0.0;
};

struct RankingResult {
  std::string instance_id;
  std::string phrase_used;
  SimilarityMeasure measure = SimilarityMeasure::cosine;
  bool penalized = false;
  std::vector<RankedCandidate> ranked;  // best first
  std::size_t gold_rank = 0;            // 1-based

  const std::string& top_id() const { return ranked.front().image_id; }
};

/// Ranks already-scored candidates. Sorted by final score descending, equal
/// scores keep their input order. Works for any candidate count.
RankingResult rank_scored(std::string instance_id, std::string phrase_used, std::span<const std::string> candidate_ids,
                          std::span<const double> raw_sims, std::string_view gold_id, SimilarityMeasure measure,
                          const PenaltyTable* penalty);

/// Scores the ten candidates of `instance` against the phrase embedding and
/// ranks them. Candidate vectors are looked up under `model`.
RankingResult rank_candidates(const VwsdInstance& instance, std::string phrase_used,
                              std::span<const float> phrase_embedding, std::string_view model,
                              const EmbeddingStore& store, SimilarityMeasure measure, const PenaltyTable* penalty);

/// Builds the penalty table from one unpenalised ranking per batch phrase.
PenaltyTable compute_penalty(std::span<const RankingResult> plain_rankings, double lambda);

nlohmann::ordered_json to_json(const RankingResult& result);
RankingResult ranking_from_json(const nlohmann::json& j);

std::string serialize_rankings_jsonl(std::span<const RankingResult> rankings);
std::vector<RankingResult> parse_rankings_jsonl(std::string_view text);

}  // namespace vwsd
