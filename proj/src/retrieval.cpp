#include "vwsd/retrieval.hpp"

#include "vwsd/error.hpp"
#include "vwsd/text.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace vwsd {

double PenaltyTable::penalty_for(const std::string& image_id) const {
  const auto it = values.find(image_id);
  return it == values.end() ? 0.0 : it->second;
}

RankingResult rank_scored(std::string instance_id, std::string phrase_used, std::span<const std::string> candidate_ids,
                          std::span<const double> raw_sims, std::string_view gold_id, SimilarityMeasure measure,
                          const PenaltyTable* penalty) {
  if (candidate_ids.size() != raw_sims.size()) throw ValidationError("candidate and score counts differ");
  if (candidate_ids.empty()) throw ValidationError("nothing to rank");

  RankingResult result;
  result.instance_id = std::move(instance_id);
  result.phrase_used = std::move(phrase_used);
  result.measure = measure;
  result.penalized = penalty != nullptr;
  result.ranked.reserve(candidate_ids.size());
  for (std::size_t i = 0; i < candidate_ids.size(); ++i) {
    const double p = penalty ? penalty->penalty_for(candidate_ids[i]) : 0.0;
    result.ranked.push_back({candidate_ids[i], raw_sims[i], penalty ? raw_sims[i] - p : raw_sims[i]});
  }
  std::stable_sort(result.ranked.begin(), result.ranked.end(),
                   [](const RankedCandidate& a, const RankedCandidate& b) { return a.final_score > b.final_score; });

  const auto gold = std::find_if(result.ranked.begin(), result.ranked.end(),
                                 [&](const RankedCandidate& c) { return c.image_id == gold_id; });
  if (gold == result.ranked.end()) {
    throw ValidationError("instance " + result.instance_id + ": gold id " + std::string(gold_id) + " not ranked");
  }
  result.gold_rank = static_cast<std::size_t>(gold - result.ranked.begin()) + 1;
  return result;
}

RankingResult rank_candidates(const VwsdInstance& instance, std::string phrase_used,
                              std::span<const float> phrase_embedding, std::string_view model,
                              const EmbeddingStore& store, SimilarityMeasure measure, const PenaltyTable* penalty) {
  std::vector<double> sims;
  sims.reserve(instance.candidate_ids.size());
  for (const auto& id : instance.candidate_ids) {
    const auto* record = store.find(model, id);
    if (!record) {
      throw ValidationError("instance " + instance.instance_id + ": no embedding for candidate image " + id +
                            " under model " + std::string(model));
    }
    if (record->dim != phrase_embedding.size()) {
      throw ValidationError("instance " + instance.instance_id + ": image " + id + " has dim " +
                            std::to_string(record->dim) + " but the phrase embedding has " +
                            std::to_string(phrase_embedding.size()));
    }
    sims.push_back(similarity(phrase_embedding, record->vector, measure));
  }
  return rank_scored(instance.instance_id, std::move(phrase_used), instance.candidate_ids, sims, instance.gold_id,
                     measure, penalty);
}

PenaltyTable compute_penalty(std::span<const RankingResult> plain_rankings, double lambda) {
  if (plain_rankings.empty()) throw ValidationError("cannot compute a penalty over an empty batch");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw ValidationError("penalty lambda must be a finite non-negative number");
  }
  PenaltyTable table;
  table.lambda = lambda;
  table.total = plain_rankings.size();
  for (const auto& ranking : plain_rankings) {
    if (ranking.penalized) throw ValidationError("compute_penalty expects unpenalised rankings");
    if (ranking.ranked.empty()) throw ValidationError("ranking " + ranking.instance_id + " is empty");
    ++table.counts[ranking.top_id()];
  }
  const auto n = static_cast<double>(table.total);
  for (const auto& ranking : plain_rankings) {
    for (const auto& candidate : ranking.ranked) {
      const auto it = table.counts.find(candidate.image_id);
      const double count = it == table.counts.end() ? 0.0 : static_cast<double>(it->second);
      table.values[candidate.image_id] = lambda * count / n;
    }
  }
  return table;
}

nlohmann::ordered_json to_json(const RankingResult& result) {
  nlohmann::ordered_json j;
  j["instance_id"] = result.instance_id;
  j["phrase_used"] = result.phrase_used;
  j["measure"] = to_string(result.measure);
  j["penalized"] = result.penalized;
  auto ranked = nlohmann::ordered_json::array();
  for (const auto& c : result.ranked) {
    ranked.push_back({{"image_id", c.image_id}, {"raw_sim", c.raw_sim}, {"final_score", c.final_score}});
  }
  j["ranked"] = std::move(ranked);
  j["gold_rank"] = result.gold_rank;
  return j;
}

RankingResult ranking_from_json(const nlohmann::json& j) {
  RankingResult result;
  result.instance_id = j.at("instance_id").get<std::string>();
  result.phrase_used = j.at("phrase_used").get<std::string>();
  result.measure = parse_similarity_measure(j.at("measure").get<std::string>());
  result.penalized = j.at("penalized").get<bool>();
  for (const auto& c : j.at("ranked")) {
    result.ranked.push_back({c.at("image_id").get<std::string>(), c.at("raw_sim").get<double>(),
                             c.at("final_score").get<double>()});
  }
  result.gold_rank = j.at("gold_rank").get<std::size_t>();
  if (result.gold_rank < 1 || result.gold_rank > result.ranked.size()) {
    throw ValidationError("ranking " + result.instance_id + ": gold_rank out of range");
  }
  return result;
}

std::string serialize_rankings_jsonl(std::span<const RankingResult> rankings) {
  std::string out;
  for (const auto& r : rankings) {
    out += to_json(r).dump();
    out += '\n';
  }
  return out;
}

std::vector<RankingResult> parse_rankings_jsonl(std::string_view text) {
  std::vector<RankingResult> out;
  std::size_t line_no = 0;
  for (const auto& line : split(text, '\n')) {
    ++line_no;
    if (normalize_whitespace(line).empty()) continue;
    try {
      out.push_back(ranking_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError("rankings line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace vwsd
