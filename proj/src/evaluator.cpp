#include "vwsd/evaluator.hpp"

#include "vwsd/error.hpp"
#include "vwsd/text.hpp"

#include <algorithm>
#include <map>

namespace vwsd {

std::string_view to_string(RunKind kind) {
  return kind == RunKind::ranking ? "ranking" : "qa";
}

namespace {

RunKind parse_run_kind(std::string_view name) {
  if (name == "ranking") return RunKind::ranking;
  if (name == "qa") return RunKind::qa;
  throw ValidationError("unknown run kind '" + std::string(name) + "'");
}

std::string value_text(const nlohmann::ordered_json& v) {
  return v.is_string() ? v.get<std::string>() : v.dump();
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string md_cell(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '|') out += '\\';
    out += c == '\n' ? ' ' : c;
  }
  return out;
}

// Hundredths of a percent for comparing printed metrics exactly.
long long hundredths(const std::string& text) {
  const auto dot = text.find('.');
  if (dot == std::string::npos) return std::stoll(text) * 100;
  return std::stoll(text.substr(0, dot)) * 100 + std::stoll(text.substr(dot + 1));
}

}  // namespace

std::string percent_text(std::uint64_t numerator, std::uint64_t denominator) {
  if (denominator == 0) return "0.00";
  const std::uint64_t scaled = (20000 * numerator + denominator) / (2 * denominator);
  const std::uint64_t frac = scaled % 100;
  return std::to_string(scaled / 100) + "." + (frac < 10 ? "0" : "") + std::to_string(frac);
}

double RunReport::accuracy() const {
  return evaluated == 0 ? 0.0 : 100.0 * static_cast<double>(correct) / static_cast<double>(evaluated);
}

double RunReport::mrr() const {
  if (evaluated == 0) return 0.0;
  return 100.0 * static_cast<double>(reciprocal_rank_units) / static_cast<double>(kRankUnits * evaluated);
}

std::string RunReport::accuracy_text() const { return percent_text(correct, evaluated); }

std::string RunReport::mrr_text() const { return percent_text(reciprocal_rank_units, kRankUnits * evaluated); }

RunReport score_rankings(std::span<const RankingResult> rankings) {
  if (rankings.empty()) throw ValidationError("cannot score an empty list of rankings");
  RunReport report;
  report.kind = RunKind::ranking;
  for (const auto& r : rankings) {
    if (r.gold_rank < 1 || r.gold_rank > kCandidateCount) {
      throw ValidationError("ranking " + r.instance_id + ": gold rank " + std::to_string(r.gold_rank) +
                            " outside 1..10");
    }
    const bool hit = r.gold_rank == 1;
    report.per_instance.push_back({r.instance_id, r.gold_rank, std::nullopt, hit});
    report.correct += hit ? 1 : 0;
    report.reciprocal_rank_units += kRankUnits / r.gold_rank;
  }
  report.evaluated = rankings.size();
  return report;
}

RunReport score_answers(std::span<const ScoredAnswer> answers) {
  if (answers.empty()) throw ValidationError("cannot score an empty list of answers");
  RunReport report;
  report.kind = RunKind::qa;
  for (const auto& a : answers) {
    const bool hit = a.answer.letter == a.gold_letter;
    report.per_instance.push_back({a.instance_id, std::nullopt, a.answer.outcome(), hit});
    report.correct += hit ? 1 : 0;
    report.reciprocal_rank_units += hit ? kRankUnits : 0;
  }
  report.evaluated = answers.size();
  return report;
}

std::string make_run_id(RunKind kind, const nlohmann::ordered_json& config) {
  return std::string(to_string(kind)) + "-" + sha256_hex(config.dump()).substr(0, 12);
}

namespace {

std::string emit_json(const RunReport& report) {
  nlohmann::ordered_json j;
  j["run_id"] = report.run_id;
  j["kind"] = to_string(report.kind);
  j["config"] = report.config;
  j["metrics"] = {{"accuracy", report.accuracy_text()},
                  {"mrr", report.mrr_text()},
                  {"evaluated", report.evaluated},
                  {"correct", report.correct},
                  {"reciprocal_rank_units", report.reciprocal_rank_units},
                  {"failures", report.failures}};
  auto rows = nlohmann::ordered_json::array();
  for (const auto& s : report.per_instance) {
    nlohmann::ordered_json row;
    row["instance_id"] = s.instance_id;
    if (s.gold_rank) row["gold_rank"] = *s.gold_rank;
    if (s.outcome) row["outcome"] = *s.outcome;
    row["correct"] = s.correct;
    rows.push_back(std::move(row));
  }
  j["per_instance"] = std::move(rows);
  return j.dump(2) + "\n";
}

std::string emit_csv(const RunReport& report) {
  std::vector<std::string> header{"run_id", "kind"};
  std::vector<std::string> row{report.run_id, std::string(to_string(report.kind))};
  for (const auto& [key, value] : report.config.items()) {
    header.push_back(key);
    row.push_back(value_text(value));
  }
  for (const char* h : {"accuracy", "mrr", "evaluated", "failures"}) header.emplace_back(h);
  row.push_back(report.accuracy_text());
  row.push_back(report.mrr_text());
  row.push_back(std::to_string(report.evaluated));
  row.push_back(std::to_string(report.failures));
  for (auto& f : header) f = csv_field(f);
  for (auto& f : row) f = csv_field(f);
  return join(header, ",") + "\n" + join(row, ",") + "\n";
}

std::string emit_markdown(const RunReport& report) {
  std::string out = "# Run " + report.run_id + " (" + std::string(to_string(report.kind)) + ")\n\n";
  out += "| setting | value |\n|---|---|\n";
  for (const auto& [key, value] : report.config.items()) {
    out += "| " + md_cell(key) + " | " + md_cell(value_text(value)) + " |\n";
  }
  out += "\n| acc. | MRR |\n|---:|---:|\n";
  out += "| " + report.accuracy_text() + " | " + report.mrr_text() + " |\n\n";
  out += "evaluated: " + std::to_string(report.evaluated) + "\n";
  out += "failures: " + std::to_string(report.failures) + "\n";
  return out;
}

}  // namespace

std::string emit_report(const RunReport& report, ReportFormat format) {
  switch (format) {
    case ReportFormat::markdown: return emit_markdown(report);
    case ReportFormat::csv: return emit_csv(report);
    case ReportFormat::json: return emit_json(report);
  }
  return emit_json(report);
}

RunReport report_from_json(const nlohmann::ordered_json& j) {
  try {
    RunReport report;
    report.run_id = j.at("run_id").get<std::string>();
    report.kind = parse_run_kind(j.at("kind").get<std::string>());
    report.config = j.at("config");
    const auto& m = j.at("metrics");
    report.evaluated = m.at("evaluated").get<std::size_t>();
    report.correct = m.at("correct").get<std::size_t>();
    report.reciprocal_rank_units = m.at("reciprocal_rank_units").get<std::uint64_t>();
    report.failures = m.at("failures").get<std::size_t>();
    for (const auto& row : j.at("per_instance")) {
      InstanceScore s;
      s.instance_id = row.at("instance_id").get<std::string>();
      if (row.contains("gold_rank")) s.gold_rank = row.at("gold_rank").get<std::size_t>();
      if (row.contains("outcome")) s.outcome = row.at("outcome").get<std::string>();
      s.correct = row.at("correct").get<bool>();
      report.per_instance.push_back(std::move(s));
    }
    if (report.accuracy_text() != m.at("accuracy").get<std::string>() ||
        report.mrr_text() != m.at("mrr").get<std::string>()) {
      throw ValidationError("report " + report.run_id + ": metrics disagree with its counts");
    }
    return report;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed report: ") + e.what());
  }
}

std::string merge_reports_markdown(std::span<const RunReport> reports) {
  if (reports.empty()) throw UsageError("report needs at least one run report");

  std::vector<const RunReport*> rows;
  std::map<std::string, std::string> seen;
  for (const auto& r : reports) {
    const std::string body = emit_report(r, ReportFormat::json);
    if (const auto it = seen.find(r.run_id); it != seen.end()) {
      if (it->second != body) throw ValidationError("conflicting reports share run id " + r.run_id);
      continue;
    }
    seen.emplace(r.run_id, body);
    rows.push_back(&r);
  }

  std::vector<std::string> keys;
  for (const auto* r : rows) {
    for (const auto& [key, value] : r->config.items()) {
      if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
    }
  }

  long long best_acc = -1, best_mrr = -1;
  for (const auto* r : rows) {
    best_acc = std::max(best_acc, hundredths(r->accuracy_text()));
    best_mrr = std::max(best_mrr, hundredths(r->mrr_text()));
  }
  const auto metric = [](const std::string& text, long long best) {
    return hundredths(text) == best ? "**" + text + "**" : text;
  };

  std::string out = "| run_id | kind |";
  std::string rule = "|---|---|";
  for (const auto& k : keys) {
    out += " " + md_cell(k) + " |";
    rule += "---|";
  }
  out += " acc. | MRR |\n" + rule + "---:|---:|\n";
  for (const auto* r : rows) {
    out += "| " + r->run_id + " | " + std::string(to_string(r->kind)) + " |";
    for (const auto& k : keys) {
      out += " " + (r->config.contains(k) ? md_cell(value_text(r->config.at(k))) : std::string("-")) + " |";
    }
    out += " " + metric(r->accuracy_text(), best_acc) + " | " + metric(r->mrr_text(), best_mrr) + " |\n";
  }
  return out;
}

}  // namespace vwsd
