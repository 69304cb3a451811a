#pragma once

#include "vwsd/config.hpp"
#include "vwsd/llm_gateway.hpp"

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

namespace vwsd {

/// Exit status contract of every command.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitInstanceFailures = 2;

struct CommandResult {
  int exit_code = kExitOk;
  std::vector<std::filesystem::path> outputs;
  std::string summary;
  std::vector<std::string> warnings;  // one per failed instance
};

/// Gateway for a run. Offline runs never touch the network; otherwise
/// `transport` is used, or the endpoint named by VWSD_LLM_BASE_URL.
std::unique_ptr<LlmGateway> make_gateway(const RunConfig& config, std::shared_ptr<Transport> transport = nullptr);

/// Ranks every instance, with the two-pass penalty when enabled. Writes
/// rankings.jsonl and report.{md,csv,json}.
CommandResult cmd_retrieve(const RunConfig& config);

/// Writes enhanced.jsonl; failed instances are left out and counted.
CommandResult cmd_enhance(const RunConfig& config, std::shared_ptr<Transport> transport = nullptr);

/// Zero-shot, CoT or few-shot QA. Writes transcripts.jsonl and reports.
CommandResult cmd_qa(const RunConfig& config, std::shared_ptr<Transport> transport = nullptr);

/// Re-scores a rankings.jsonl or transcripts.jsonl into reports.
CommandResult cmd_eval(const RunConfig& config);

/// Merges report.json files into comparison.md.
CommandResult cmd_report(const std::vector<std::filesystem::path>& reports, const std::filesystem::path& out_dir);

}  // namespace vwsd
