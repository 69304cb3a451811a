// vwsd: command-line front end for the retrieval and QA pipelines.

#include "vwsd/commands.hpp"
#include "vwsd/config.hpp"
#include "vwsd/error.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <optional>
#include <string>

namespace {

struct FlagSpec {
  const char* flag;
  const char* key;
  const char* help;
};

// Flags shared by every subcommand; each maps onto a config key.
constexpr FlagSpec kFlags[] = {
    {"--data", "data.tsv", "dataset TSV (target, phrase, ten image ids)"},
    {"--gold", "data.gold", "gold image id per line"},
    {"--embeddings", "retrieval.embeddings", "embedding files, comma-separated (JSONL or binary)"},
    {"--captions", "data.captions", "captions JSONL"},
    {"--measure", "retrieval.measure", "cosine, euclidean or manhattan"},
    {"--retrieval-model", "retrieval.model", "embedding model used for ranking"},
    {"--enhanced", "retrieval.enhanced", "enhanced phrases JSONL to rank with"},
    {"--lambda", "penalty.lambda", "penalty weight"},
    {"--enhance-template", "enhance.template", "exact, what_is, describe or meaning_of"},
    {"--model", "llm.model", "LLM name"},
    {"--temperature", "llm.temperature", "sampling temperature"},
    {"--max-tokens", "llm.max_tokens", "completion length limit"},
    {"--rpm", "llm.rpm", "requests per minute, 0 for unlimited"},
    {"--cache-dir", "llm.cache_dir", "response cache directory"},
    {"--seed-tag", "llm.seed_tag", "extra tag folded into the cache key"},
    {"--qa-template", "qa.template", "QA prompt template"},
    {"--captioner", "qa.captioner", "captioner whose captions stand in for images"},
    {"--strategy", "qa.strategy", "caption strategy: greedy or beam"},
    {"--shots", "qa.shots", "in-context examples per query"},
    {"--selection", "qa.selection", "random, top or inverse-top"},
    {"--seed", "qa.seed", "seed for random shot selection"},
    {"--embedding-model", "qa.embedding_model", "text embedding model for shot selection"},
    {"--rankings", "data.rankings", "rankings JSONL to evaluate"},
    {"--transcripts", "data.transcripts", "QA transcripts JSONL to evaluate"},
    {"--jobs", "run.jobs", "worker threads"},
    {"--out-dir", "run.out_dir", "output directory"},
};

struct Invocation {
  std::optional<std::string> config_file;
  bool offline = false;
  std::string penalty;
  std::map<std::string, std::string> values;
  std::vector<std::string> reports;
};

void add_common(CLI::App& sub, Invocation& inv) {
  sub.add_option("--config", inv.config_file, "config file (flags override it)");
  sub.add_flag("--offline", inv.offline, "serve LLM calls from the cache only");
  sub.add_flag("--penalty{true}", inv.penalty,
               "apply the frequency penalty; --penalty=false turns it off");
  for (const auto& spec : kFlags) {
    sub.add_option_function<std::string>(
        spec.flag, [&inv, key = std::string(spec.key)](const std::string& v) { inv.values[key] = v; }, spec.help);
  }
}

vwsd::RunConfig build_config(const Invocation& inv) {
  vwsd::RunConfig config;
  if (inv.config_file) vwsd::apply_config_file(config, *inv.config_file);
  for (const auto& [key, value] : inv.values) vwsd::apply_setting(config, key, value, std::filesystem::current_path());
  if (!inv.penalty.empty()) vwsd::apply_setting(config, "penalty.enabled", inv.penalty);
  if (inv.offline) config.offline = true;
  return config;
}

int report_result(const vwsd::CommandResult& result) {
  for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
  if (!result.summary.empty()) {
    std::cout << result.summary;
    if (result.summary.back() != '\n') std::cout << '\n';
  }
  for (const auto& p : result.outputs) std::cerr << "wrote " << p.string() << '\n';
  return result.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Visual word sense disambiguation pipelines"};
  app.require_subcommand(1);

  Invocation inv;
  CLI::App* retrieve = app.add_subcommand("retrieve", "rank candidate images for every phrase");
  CLI::App* enhance = app.add_subcommand("enhance", "add LLM knowledge to every phrase");
  CLI::App* qa = app.add_subcommand("qa", "answer each instance as a multiple-choice question");
  CLI::App* eval = app.add_subcommand("eval", "score rankings or transcripts");
  CLI::App* report = app.add_subcommand("report", "merge report.json files into one table");
  for (CLI::App* sub : {retrieve, enhance, qa, eval, report}) add_common(*sub, inv);
  report->add_option("reports", inv.reports, "report.json files");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : vwsd::kExitError;
  }

  try {
    const vwsd::RunConfig config = build_config(inv);
    if (retrieve->parsed()) return report_result(vwsd::cmd_retrieve(config));
    if (enhance->parsed()) return report_result(vwsd::cmd_enhance(config));
    if (qa->parsed()) return report_result(vwsd::cmd_qa(config));
    if (eval->parsed()) return report_result(vwsd::cmd_eval(config));
    std::vector<std::filesystem::path> paths(inv.reports.begin(), inv.reports.end());
    return report_result(vwsd::cmd_report(paths, config.out_dir));
  } catch (const vwsd::UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return vwsd::kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return vwsd::kExitError;
  }
}
