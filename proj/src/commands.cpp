#include "vwsd/commands.hpp"

#include "vwsd/caption_store.hpp"
#include "vwsd/dataset.hpp"
#include "vwsd/error.hpp"
#include "vwsd/evaluator.hpp"
#include "vwsd/io.hpp"
#include "vwsd/knowledge_enhancer.hpp"
#include "vwsd/parallel.hpp"
#include "vwsd/qa.hpp"
#include "vwsd/retrieval.hpp"
#include "vwsd/text.hpp"

#include <map>
#include <optional>

namespace vwsd {

namespace {

void require_path(const std::filesystem::path& p, const char* what) {
  if (p.empty()) throw UsageError(std::string("missing ") + what);
}

Dataset load_run_dataset(const RunConfig& config) {
  require_path(config.data, "dataset file (--data)");
  require_path(config.gold, "gold file (--gold)");
  return load_dataset(config.data, config.gold);
}

EmbeddingStore load_run_embeddings(const RunConfig& config) {
  if (config.embeddings.empty()) throw UsageError("missing embeddings file (--embeddings)");
  EmbeddingStore store;
  for (const auto& path : config.embeddings) {
    try {
      store.merge(load_embeddings(path));
    } catch (const ValidationError& e) {
      throw ValidationError(path.string() + ": " + e.what());
    }
  }
  return store;
}

std::string resolve_retrieval_model(const RunConfig& config, const EmbeddingStore& store) {
  if (!config.retrieval_model.empty()) return config.retrieval_model;
  const auto models = store.models();
  if (models.size() == 1) return models.front();
  throw UsageError("embeddings hold several models; choose one with --retrieval-model");
}

GenerationSettings generation_settings(const RunConfig& config) {
  return {config.model, config.temperature, config.max_tokens, config.seed_tag};
}

std::vector<std::filesystem::path> write_reports(const RunReport& report, const std::filesystem::path& out_dir) {
  std::vector<std::filesystem::path> paths;
  for (auto [name, format] : {std::pair{"report.md", ReportFormat::markdown}, std::pair{"report.csv", ReportFormat::csv},
                              std::pair{"report.json", ReportFormat::json}}) {
    auto path = out_dir / name;
    write_file_atomic(path, emit_report(report, format));
    paths.push_back(std::move(path));
  }
  return paths;
}

std::string summarize(const RunReport& report) {
  return report.run_id + ": acc. " + report.accuracy_text() + ", MRR " + report.mrr_text() + " over " +
         std::to_string(report.evaluated) + " instances, failures: " + std::to_string(report.failures);
}

CommandResult finish(RunReport report, const std::filesystem::path& out_dir,
                     std::vector<std::filesystem::path> outputs, std::vector<std::string> warnings) {
  CommandResult result;
  result.outputs = std::move(outputs);
  for (auto& p : write_reports(report, out_dir)) result.outputs.push_back(std::move(p));
  result.summary = summarize(report);
  result.warnings = std::move(warnings);
  result.exit_code = report.failures > 0 ? kExitInstanceFailures : kExitOk;
  return result;
}

}  // namespace

std::unique_ptr<LlmGateway> make_gateway(const RunConfig& config, std::shared_ptr<Transport> transport) {
  GatewayOptions options;
  options.offline = config.offline;
  options.requests_per_minute = config.rpm;
  options.cache_root = config.cache_dir;
  if (!transport && !config.offline) transport = HttpTransport::from_env();
  return std::make_unique<LlmGateway>(std::move(options), std::move(transport));
}

// ---------------------------------------------------------------------------

CommandResult cmd_retrieve(const RunConfig& config) {
  const Dataset dataset = load_run_dataset(config);
  if (dataset.empty()) throw ValidationError(config.data.string() + ": dataset is empty");
  const EmbeddingStore store = load_run_embeddings(config);
  const std::string model = resolve_retrieval_model(config, store);

  nlohmann::ordered_json snapshot;
  snapshot["embedding_model"] = model;
  snapshot["measure"] = to_string(config.measure);
  snapshot["penalty"] = config.penalty;
  snapshot["lambda"] = config.penalty ? nlohmann::ordered_json(config.lambda) : nlohmann::ordered_json(nullptr);
  snapshot["phrases"] = config.enhanced.empty() ? "original" : "enhanced";

  std::map<std::string, std::string> enhanced;
  if (!config.enhanced.empty()) {
    const auto phrases = parse_enhanced_jsonl(read_file(config.enhanced));
    for (const auto& p : phrases) enhanced.emplace(p.instance_id, p.enhanced);
    if (!phrases.empty()) {
      snapshot["enhance_template"] = to_string(phrases.front().template_name);
      snapshot["llm_model"] = phrases.front().model;
    }
  }

  // Instances without an enhanced phrase failed upstream; they are counted, not ranked.
  std::vector<std::size_t> ranked_indices;
  std::vector<std::string> warnings;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto& inst = dataset.instances[i];
    if (!config.enhanced.empty() && !enhanced.contains(inst.instance_id)) {
      warnings.push_back("instance " + inst.instance_id + ": no enhanced phrase");
      continue;
    }
    ranked_indices.push_back(i);
  }
  if (ranked_indices.empty()) throw ValidationError("no instance has an enhanced phrase to rank");

  std::vector<std::string> phrases(ranked_indices.size());
  std::vector<const EmbeddingRecord*> phrase_vectors(ranked_indices.size());
  for (std::size_t n = 0; n < ranked_indices.size(); ++n) {
    const auto& inst = dataset.instances[ranked_indices[n]];
    phrases[n] = config.enhanced.empty() ? inst.full_phrase : enhanced.at(inst.instance_id);
    const auto key = text_embedding_key(phrases[n], model);
    phrase_vectors[n] = store.find(model, key);
    if (!phrase_vectors[n]) {
      throw ValidationError("instance " + inst.instance_id + ": no " + model + " embedding for phrase '" +
                            phrases[n] + "' (key " + key + ")");
    }
  }

  const auto rank_all = [&](const PenaltyTable* penalty) {
    std::vector<RankingResult> out(ranked_indices.size());
    parallel_for(config.jobs, ranked_indices.size(), [&](std::size_t n) {
      out[n] = rank_candidates(dataset.instances[ranked_indices[n]], phrases[n], phrase_vectors[n]->vector, model,
                               store, config.measure, penalty);
    });
    return out;
  };

  std::vector<RankingResult> rankings = rank_all(nullptr);
  if (config.penalty) {
    const PenaltyTable table = compute_penalty(rankings, config.lambda);
    rankings = rank_all(&table);
  }

  RunReport report = score_rankings(rankings);
  report.config = std::move(snapshot);
  report.run_id = make_run_id(report.kind, report.config);
  report.failures = warnings.size();

  const auto rankings_path = config.out_dir / "rankings.jsonl";
  write_file_atomic(rankings_path, serialize_rankings_jsonl(rankings));
  return finish(std::move(report), config.out_dir, {rankings_path}, std::move(warnings));
}

// ---------------------------------------------------------------------------

CommandResult cmd_enhance(const RunConfig& config, std::shared_ptr<Transport> transport) {
  const EnhancementTemplate t = parse_enhancement_template(config.enhance_template);
  const Dataset dataset = load_run_dataset(config);
  auto gateway = make_gateway(config, std::move(transport));
  const auto settings = generation_settings(config);

  std::vector<std::optional<EnhancedPhrase>> results(dataset.size());
  std::vector<std::string> errors(dataset.size());
  parallel_for(config.jobs, dataset.size(), [&](std::size_t i) {
    try {
      results[i] = enhance_phrase(dataset.instances[i], t, *gateway, settings);
    } catch (const GatewayError& e) {
      errors[i] = "instance " + dataset.instances[i].instance_id + ": " + e.what();
    }
  });

  CommandResult result;
  std::vector<EnhancedPhrase> done;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    if (results[i]) done.push_back(std::move(*results[i]));
    else result.warnings.push_back(std::move(errors[i]));
  }
  const auto path = config.out_dir / "enhanced.jsonl";
  write_file_atomic(path, serialize_enhanced_jsonl(done));
  result.outputs.push_back(path);
  result.summary = "enhanced " + std::to_string(done.size()) + " of " + std::to_string(dataset.size()) +
                   " phrases with " + std::string(to_string(t)) + " / " + config.model +
                   ", failures: " + std::to_string(result.warnings.size());
  result.exit_code = result.warnings.empty() ? kExitOk : kExitInstanceFailures;
  return result;
}

// ---------------------------------------------------------------------------

CommandResult cmd_qa(const RunConfig& config, std::shared_ptr<Transport> transport) {
  const QaTemplate t = resolve_qa_template(config.qa_template, config.strategy);
  const QaFamily family = family_of(t);
  const CaptionStrategy strategy = *strategy_of(t);
  const ShotSelection selection = parse_shot_selection(config.selection);
  if (config.shots > 0 && family != QaFamily::no_cot && family != QaFamily::choose_no_cot) {
    throw UsageError("few-shot prompting needs a no_cot or choose_no_cot template");
  }
  require_path(config.captions, "captions file (--captions)");

  const Dataset dataset = load_run_dataset(config);
  const CaptionStore captions = load_captions(config.captions);
  EmbeddingStore phrase_store;
  if (config.shots > 0 && selection != ShotSelection::random) phrase_store = load_run_embeddings(config);

  InContextConfig in_context;
  in_context.k = config.shots;
  in_context.strategy = selection;
  in_context.seed = config.seed;
  in_context.embedding_model = config.embedding_model;

  auto gateway = make_gateway(config, std::move(transport));
  const auto settings = generation_settings(config);

  // Rendering is pure and fails fast on missing captions.
  std::vector<QaPrompt> prompts;
  prompts.reserve(dataset.size());
  for (const auto& inst : dataset.instances) prompts.push_back(render_qa_prompt(inst, captions, t, config.captioner));

  std::vector<QaExchange> exchanges(dataset.size());
  std::vector<std::vector<std::string>> shot_ids(dataset.size());
  parallel_for(config.jobs, dataset.size(), [&](std::size_t i) {
    if (family == QaFamily::think) {
      exchanges[i] = run_cot(prompts[i], *gateway, settings);
    } else if (config.shots > 0) {
      std::vector<FewShotExample> shots;
      for (const auto& choice : select_in_context(i, dataset, phrase_store, in_context)) {
        const auto& shot = prompts[choice.index];
        shots.push_back({shot, choice.gold_letter, shot.option_texts[dataset.instances[choice.index].gold_position()]});
        shot_ids[i].push_back(dataset.instances[choice.index].instance_id);
      }
      exchanges[i] = run_few_shot(shots, prompts[i], *gateway, settings);
    } else {
      exchanges[i] = run_zero_shot(prompts[i], *gateway, settings);
    }
  });

  nlohmann::ordered_json snapshot;
  snapshot["template"] = family == QaFamily::think ? "cot" : to_string(t);
  snapshot["llm_model"] = config.model;
  snapshot["captioner"] = config.captioner;
  snapshot["strategy"] = to_string(strategy);
  snapshot["shots"] = config.shots;
  snapshot["selection"] = config.shots > 0 ? nlohmann::ordered_json(to_string(selection)) : nlohmann::ordered_json(nullptr);
  snapshot["seed"] = config.shots > 0 && selection == ShotSelection::random ? nlohmann::ordered_json(config.seed)
                                                                           : nlohmann::ordered_json(nullptr);
  snapshot["temperature"] = config.temperature;
  snapshot["max_tokens"] = config.max_tokens;

  std::string transcripts;
  std::vector<ScoredAnswer> scored;
  std::vector<std::string> warnings;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto& inst = dataset.instances[i];
    const auto& ex = exchanges[i];
    auto j = to_json(ex);
    j["gold_letter"] = std::string(1, inst.gold_letter());
    if (!shot_ids[i].empty()) j["shots"] = shot_ids[i];
    if (ex.failed()) {
      warnings.push_back("instance " + inst.instance_id + ": " + *ex.error);
    } else {
      j["correct"] = ex.answer.letter == inst.gold_letter();
      scored.push_back({inst.instance_id, ex.answer, inst.gold_letter()});
    }
    transcripts += j.dump();
    transcripts += '\n';
  }

  RunReport report;
  if (!scored.empty()) report = score_answers(scored);
  report.kind = RunKind::qa;
  report.config = std::move(snapshot);
  report.run_id = make_run_id(report.kind, report.config);
  report.failures = warnings.size();

  const auto transcripts_path = config.out_dir / "transcripts.jsonl";
  write_file_atomic(transcripts_path, transcripts);
  return finish(std::move(report), config.out_dir, {transcripts_path}, std::move(warnings));
}

// ---------------------------------------------------------------------------

CommandResult cmd_eval(const RunConfig& config) {
  if (config.rankings.empty() == config.transcripts.empty()) {
    throw UsageError("eval needs exactly one of --rankings or --transcripts");
  }
  RunReport report;
  if (!config.rankings.empty()) {
    const auto rankings = parse_rankings_jsonl(read_file(config.rankings));
    report = score_rankings(rankings);
    report.config["source"] = config.rankings.filename().string();
    report.config["measure"] = to_string(rankings.front().measure);
    report.config["penalty"] = rankings.front().penalized;
  } else {
    std::vector<ScoredAnswer> scored;
    std::size_t failures = 0;
    std::string template_name;
    std::size_t line_no = 0;
    for (const auto& line : split(read_file(config.transcripts), '\n')) {
      ++line_no;
      if (normalize_whitespace(line).empty()) continue;
      try {
        const auto j = nlohmann::json::parse(line);
        template_name = j.at("template").get<std::string>();
        if (j.contains("error")) {
          ++failures;
          continue;
        }
        ScoredAnswer a;
        a.instance_id = j.at("instance_id").get<std::string>();
        const auto outcome = j.at("parsed").at("outcome").get<std::string>();
        if (outcome != "abstain") {
          if (outcome.size() != 1 || outcome[0] < 'A' || outcome[0] > 'J') {
            throw ValidationError("bad outcome '" + outcome + "'");
          }
          a.answer.letter = outcome[0];
        }
        a.answer.raw = j.at("raw_responses").empty() ? "" : j.at("raw_responses").back().get<std::string>();
        const auto gold = j.at("gold_letter").get<std::string>();
        if (gold.size() != 1) throw ValidationError("bad gold letter '" + gold + "'");
        a.gold_letter = gold[0];
        scored.push_back(std::move(a));
      } catch (const nlohmann::json::exception& e) {
        throw ValidationError(config.transcripts.string() + " line " + std::to_string(line_no) + ": " + e.what());
      } catch (const ValidationError& e) {
        throw ValidationError(config.transcripts.string() + " line " + std::to_string(line_no) + ": " + e.what());
      }
    }
    if (!scored.empty()) report = score_answers(scored);
    report.kind = RunKind::qa;
    report.failures = failures;
    report.config["source"] = config.transcripts.filename().string();
    report.config["template"] = template_name;
  }
  report.run_id = make_run_id(report.kind, report.config);
  return finish(std::move(report), config.out_dir, {}, {});
}

// ---------------------------------------------------------------------------

CommandResult cmd_report(const std::vector<std::filesystem::path>& reports, const std::filesystem::path& out_dir) {
  if (reports.empty()) throw UsageError("report needs at least one report.json");
  std::vector<RunReport> loaded;
  for (const auto& path : reports) {
    try {
      loaded.push_back(report_from_json(nlohmann::ordered_json::parse(read_file(path))));
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(path.string() + ": " + e.what());
    } catch (const ValidationError& e) {
      throw ValidationError(path.string() + ": " + e.what());
    }
  }
  const std::string table = merge_reports_markdown(loaded);
  CommandResult result;
  const auto path = out_dir / "comparison.md";
  write_file_atomic(path, table);
  result.outputs.push_back(path);
  result.summary = table;
  return result;
}

}  // namespace vwsd
