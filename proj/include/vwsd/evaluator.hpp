#pragma once

#include "vwsd/qa.hpp"
#include "vwsd/retrieval.hpp"

#include <nlohmann/json.hpp>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace vwsd {

enum class RunKind { ranking, qa };

std::string_view to_string(RunKind kind);

struct InstanceScore {
  std::string instance_id;
  std::optional<std::size_t> gold_rank;  // ranking runs
  std::optional<std::string> outcome;    // QA runs: letter or "abstain"
  bool correct = false;

  friend bool operator==(const InstanceScore&, const InstanceScore&) = default;
};

/// Accuracy and MRR of one run, kept as exact counts so the printed
/// percentages round half-up without floating-point drift.
struct RunReport {
  std::string run_id;
  RunKind kind = RunKind::ranking;
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
  std::vector<InstanceScore> per_instance;
  std::size_t evaluated = 0;
  std::size_t correct = 0;
  std::uint64_t reciprocal_rank_units = 0;  // sum of 2520 / rank
  std::size_t failures = 0;

  double accuracy() const;
  double mrr() const;
  std::string accuracy_text() const;
  std::string mrr_text() const;
};

/// Least common multiple of 1..10: every reciprocal rank is a whole number of units.
inline constexpr std::uint64_t kRankUnits = 2520;

/// 100 * numerator / denominator with two decimals, halves rounded up.
std::string percent_text(std::uint64_t numerator, std::uint64_t denominator);

/// A hit is gold_rank == 1; MRR averages 1/gold_rank. Throws on empty input.
RunReport score_rankings(std::span<const RankingResult> rankings);

struct ScoredAnswer {
  std::string instance_id;
  ParsedAnswer answer;
  char gold_letter;
};

/// A hit is the gold letter; abstentions miss. MRR equals accuracy.
RunReport score_answers(std::span<const ScoredAnswer> answers);

/// Run id derived from the kind and config, so replays keep their id.
std::string make_run_id(RunKind kind, const nlohmann::ordered_json& config);

enum class ReportFormat { markdown, csv, json };

std::string emit_report(const RunReport& report, ReportFormat format);
RunReport report_from_json(const nlohmann::ordered_json& j);

/// One row per report keyed by config, best acc. and MRR in bold. Throws
/// UsageError on an empty list and ValidationError when two different
/// reports share a run id.
std::string merge_reports_markdown(std::span<const RunReport> reports);

}  // namespace vwsd
