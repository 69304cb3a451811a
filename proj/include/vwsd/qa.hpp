#pragma once

#include "vwsd/caption_store.hpp"
#include "vwsd/dataset.hpp"
#include "vwsd/knowledge_enhancer.hpp"
#include "vwsd/llm_gateway.hpp"
#include "vwsd/vector_store.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace vwsd {

// ---------------------------------------------------------------------------
// Templates

enum class QaTemplate {
  think_greedy,
  think_beam,
  cot,
  no_cot_greedy,
  no_cot_beam,
  choose_no_cot_greedy,
  choose_no_cot_beam,
  choose_cot_greedy,
  choose_cot_beam,
};

inline constexpr std::array kQaTemplates = {
    QaTemplate::think_greedy,         QaTemplate::think_beam,         QaTemplate::cot,
    QaTemplate::no_cot_greedy,        QaTemplate::no_cot_beam,        QaTemplate::choose_no_cot_greedy,
    QaTemplate::choose_no_cot_beam,   QaTemplate::choose_cot_greedy,  QaTemplate::choose_cot_beam,
};

enum class QaFamily { think, cot, no_cot, choose_no_cot, choose_cot };

std::string_view to_string(QaTemplate t);
std::string_view to_string(QaFamily f);
QaTemplate parse_qa_template(std::string_view name);
QaFamily family_of(QaTemplate t);

/// Caption strategy a template renders; cot has none of its own.
std::optional<CaptionStrategy> strategy_of(QaTemplate t);

/// Accepts a full template name ("no_cot_greedy") or a family name ("no_cot")
/// combined with the strategy. A full name whose strategy disagrees with an
/// explicitly given one throws UsageError. "cot" resolves to the think
/// template that opens the two-call pipeline.
QaTemplate resolve_qa_template(std::string_view name, std::optional<CaptionStrategy> strategy);

inline constexpr std::string_view kThinkCue = "A: Let’s think step by step. ";
inline constexpr std::string_view kCotAnswerCue = "Therefore, among A through J, the answer is";
inline constexpr std::size_t kMaxRationaleChars = 2048;

char option_letter(std::size_t index);

/// Renders a template body around the phrase and the ten option texts.
/// think/no_cot put the phrase in their `<context>` slot, choose templates in
/// `<phrase>`. Throws for QaTemplate::cot, which wraps a think exchange.
std::string render_qa_body(QaTemplate t, std::string_view phrase, std::span<const std::string> option_texts);

/// think prompt + " " + rationale (cut to kMaxRationaleChars) + "\n" + answer cue.
std::string render_cot_prompt(std::string_view think_prompt, std::string_view rationale);

struct QaPrompt {
  std::string instance_id;
  QaTemplate template_name = QaTemplate::no_cot_greedy;
  std::string rendered;
  std::vector<std::string> option_order;  // letter A..J -> image id
  std::vector<std::string> option_texts;  // letter A..J -> caption text
  std::string question;                   // body without "Q: " and the answer cue
};

QaPrompt render_qa_prompt(const VwsdInstance& instance, const CaptionStore& captions, QaTemplate t,
                          std::string_view captioner);

// ---------------------------------------------------------------------------
// Answer parsing

enum class AnswerMatcher { paren_letter, answer_is_phrase, leading_letter, caption_fuzzy, none };

std::string_view to_string(AnswerMatcher m);

struct ParsedAnswer {
  std::string raw;
  std::optional<char> letter;  // empty: abstain
  AnswerMatcher matched_by = AnswerMatcher::none;

  bool abstained() const noexcept { return !letter.has_value(); }
  std::string outcome() const;  // "C" or "abstain"
};

inline constexpr double kFuzzyThreshold = 0.8;

/// Extracts the chosen option from a free-text reply. Matchers run in order:
/// an explicit "answer is X" / "final answer: X" / "choose (X)" phrase, a
/// parenthesised letter, a leading bare letter followed by a delimiter, then a
/// fuzzy match of the reply's tail against the option texts. The first
/// matcher that fires decides; if it sees two different letters the reply is
/// an abstention. Never throws.
ParsedAnswer parse_answer(std::string_view raw, std::span<const std::string> option_texts = {});

// ---------------------------------------------------------------------------
// Pipelines

struct QaExchange {
  QaPrompt prompt;
  std::vector<std::string> prompts_sent;
  std::vector<std::string> responses;
  std::optional<std::string> rationale;
  ParsedAnswer answer;
  std::optional<std::string> error;  // set when the gateway failed

  bool failed() const noexcept { return error.has_value(); }
};

/// One gateway call on the rendered prompt, then parse_answer.
QaExchange run_zero_shot(const QaPrompt& prompt, LlmGateway& gateway, const GenerationSettings& settings);

/// Two sequential calls: the think prompt yields a rationale, then the cot
/// prompt built from it yields the final answer.
QaExchange run_cot(const QaPrompt& think_prompt, LlmGateway& gateway, const GenerationSettings& settings);

// ---------------------------------------------------------------------------
// In-context examples

enum class ShotSelection { random, top, inverse_top };

std::string_view to_string(ShotSelection s);
ShotSelection parse_shot_selection(std::string_view name);

struct InContextConfig {
  std::size_t k = 5;
  ShotSelection strategy = ShotSelection::random;
  std::uint64_t seed = 0;
  std::string embedding_model = "align";
};

struct InContextChoice {
  std::size_t index;  // into dataset.instances
  char gold_letter;
};

/// Picks k solved examples for the query at `query_index`, never the query
/// itself. random: seeded sample in dataset order. top: k nearest full-phrase
/// embeddings by cosine, nearest first, ties in dataset order. inverse_top:
/// top reversed.
std::vector<InContextChoice> select_in_context(std::size_t query_index, const Dataset& dataset,
                                               const EmbeddingStore& phrase_embeddings, const InContextConfig& config);

struct FewShotExample {
  QaPrompt prompt;
  char gold_letter;
  std::string gold_caption;
};

/// k blocks "Q: <question>\nA: (<letter>) <gold caption>\n\n" then
/// "Q: <query question>\nA:". With no shots, the query prompt unchanged.
std::string render_few_shot_prompt(std::span<const FewShotExample> shots, const QaPrompt& query);

QaExchange run_few_shot(std::span<const FewShotExample> shots, const QaPrompt& query, LlmGateway& gateway,
                        const GenerationSettings& settings);

nlohmann::ordered_json to_json(const QaExchange& exchange);

}  // namespace vwsd
