#include "vwsd/qa.hpp"

#include "vwsd/error.hpp"
#include "vwsd/text.hpp"

#include <algorithm>
#include <random>
#include <set>

namespace vwsd {

// ---------------------------------------------------------------------------
// Templates

std::string_view to_string(QaTemplate t) {
  switch (t) {
    case QaTemplate::think_greedy: return "think_greedy";
    case QaTemplate::think_beam: return "think_beam";
    case QaTemplate::cot: return "cot";
    case QaTemplate::no_cot_greedy: return "no_cot_greedy";
    case QaTemplate::no_cot_beam: return "no_cot_beam";
    case QaTemplate::choose_no_cot_greedy: return "choose_no_cot_greedy";
    case QaTemplate::choose_no_cot_beam: return "choose_no_cot_beam";
    case QaTemplate::choose_cot_greedy: return "choose_cot_greedy";
    case QaTemplate::choose_cot_beam: return "choose_cot_beam";
  }
  return "no_cot_greedy";
}

std::string_view to_string(QaFamily f) {
  switch (f) {
    case QaFamily::think: return "think";
    case QaFamily::cot: return "cot";
    case QaFamily::no_cot: return "no_cot";
    case QaFamily::choose_no_cot: return "choose_no_cot";
    case QaFamily::choose_cot: return "choose_cot";
  }
  return "no_cot";
}

QaTemplate parse_qa_template(std::string_view name) {
  for (auto t : kQaTemplates) {
    if (to_string(t) == name) return t;
  }
  throw UsageError("unknown QA template '" + std::string(name) + "'");
}

QaFamily family_of(QaTemplate t) {
  switch (t) {
    case QaTemplate::think_greedy:
    case QaTemplate::think_beam: return QaFamily::think;
    case QaTemplate::cot: return QaFamily::cot;
    case QaTemplate::no_cot_greedy:
    case QaTemplate::no_cot_beam: return QaFamily::no_cot;
    case QaTemplate::choose_no_cot_greedy:
    case QaTemplate::choose_no_cot_beam: return QaFamily::choose_no_cot;
    case QaTemplate::choose_cot_greedy:
    case QaTemplate::choose_cot_beam: return QaFamily::choose_cot;
  }
  return QaFamily::no_cot;
}

std::optional<CaptionStrategy> strategy_of(QaTemplate t) {
  switch (t) {
    case QaTemplate::cot: return std::nullopt;
    case QaTemplate::think_beam:
    case QaTemplate::no_cot_beam:
    case QaTemplate::choose_no_cot_beam:
    case QaTemplate::choose_cot_beam: return CaptionStrategy::beam;
    default: return CaptionStrategy::greedy;
  }
}

QaTemplate resolve_qa_template(std::string_view name, std::optional<CaptionStrategy> strategy) {
  const auto pick = [&](QaTemplate greedy, QaTemplate beam) {
    return strategy.value_or(CaptionStrategy::greedy) == CaptionStrategy::greedy ? greedy : beam;
  };
  if (name == "think" || name == "cot") return pick(QaTemplate::think_greedy, QaTemplate::think_beam);
  if (name == "no_cot") return pick(QaTemplate::no_cot_greedy, QaTemplate::no_cot_beam);
  if (name == "choose_no_cot") return pick(QaTemplate::choose_no_cot_greedy, QaTemplate::choose_no_cot_beam);
  if (name == "choose_cot") return pick(QaTemplate::choose_cot_greedy, QaTemplate::choose_cot_beam);

  const QaTemplate t = parse_qa_template(name);
  if (strategy && strategy_of(t) && *strategy_of(t) != *strategy) {
    throw UsageError("QA template " + std::string(name) + " renders " + std::string(to_string(*strategy_of(t))) +
                     " captions but strategy " + std::string(to_string(*strategy)) + " was requested");
  }
  return t;
}

char option_letter(std::size_t index) {
  if (index >= kCandidateCount) throw ValidationError("option index out of range");
  return static_cast<char>('A' + index);
}

namespace {

std::string options_inline(std::span<const std::string> texts) {
  std::string out;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    if (i) out += ' ';
    out += '(';
    out += option_letter(i);
    out += ") ";
    out += texts[i];
  }
  return out;
}

std::string options_lines(std::span<const std::string> texts) {
  std::string out;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    if (i) out += '\n';
    out += '(';
    out += option_letter(i);
    out += ") ";
    out += texts[i];
  }
  return out;
}

constexpr std::string_view kChooseFormat =
    "\n\nUse the following format:\n"
    "Question: What image do you choose?\n"
    "Thought: you should always think about what you choose.\n"
    "Result: the result of your thought.\n";

std::string open_question(bool beam, std::string_view phrase, std::span<const std::string> texts) {
  std::string out = beam ? "Q: What is the most appropriate group of captions for the "
                         : "Q: What is the most appropriate caption for the ";
  out += phrase;
  out += "?\nAnswer choices: ";
  out += options_inline(texts);
  return out;
}

std::string choose_question(bool beam, bool set_preamble, std::string_view phrase,
                            std::span<const std::string> texts) {
  std::string out = set_preamble
                        ? "You have ten images, (A) to (J), which are given to you in the form of a set of captions.\n"
                        : "You have ten images, (A) to (J), which are given to you in the form of captions.\n";
  out += options_lines(texts);
  out += beam ? "\nYou should choose the image, and therefore the set of captions that could better represent the "
              : "\nYou should choose the image, and therefore the caption that could better represent the ";
  out += phrase;
  out += '.';
  return out;
}

// Body of the question as it appears after "Q: " in a few-shot block.
std::string question_of(QaTemplate t, std::string_view phrase, std::span<const std::string> texts) {
  switch (family_of(t)) {
    case QaFamily::think:
    case QaFamily::no_cot: {
      auto q = open_question(strategy_of(t) == CaptionStrategy::beam, phrase, texts);
      return q.substr(3);
    }
    default: return render_qa_body(t, phrase, texts);
  }
}

}  // namespace

std::string render_qa_body(QaTemplate t, std::string_view phrase, std::span<const std::string> option_texts) {
  if (option_texts.size() != kCandidateCount) {
    throw ValidationError("QA prompts need exactly 10 options, got " + std::to_string(option_texts.size()));
  }
  const bool beam = strategy_of(t) == CaptionStrategy::beam;
  switch (t) {
    case QaTemplate::think_greedy:
    case QaTemplate::think_beam:
      return open_question(beam, phrase, option_texts) + "\n" + std::string(kThinkCue);
    case QaTemplate::no_cot_greedy:
    case QaTemplate::no_cot_beam:
      return open_question(beam, phrase, option_texts) + "\nA: ";
    case QaTemplate::choose_no_cot_greedy:
    case QaTemplate::choose_no_cot_beam:
      return choose_question(beam, false, phrase, option_texts) + "\nWhat image do you choose?";
    case QaTemplate::choose_cot_greedy:
      return choose_question(false, false, phrase, option_texts) + std::string(kChooseFormat) +
             "Final Answer: the image that you choose.\n\nBegin!\nQuestion: What image do you choose?";
    case QaTemplate::choose_cot_beam:
      return choose_question(true, true, phrase, option_texts) + std::string(kChooseFormat) +
             "Final Answer: the image that you choose\n\nBegin!\nQuestion: What image do you choose?";
    case QaTemplate::cot: break;
  }
  throw UsageError("the cot template wraps a think exchange; render it with render_cot_prompt");
}

std::string render_cot_prompt(std::string_view think_prompt, std::string_view rationale) {
  std::size_t cut = std::min(rationale.size(), kMaxRationaleChars);
  // Do not split a UTF-8 sequence.
  while (cut < rationale.size() && cut > 0 && (static_cast<unsigned char>(rationale[cut]) & 0xC0) == 0x80) --cut;
  std::string out(think_prompt);
  out += ' ';
  out += rationale.substr(0, cut);
  out += '\n';
  out += kCotAnswerCue;
  return out;
}

QaPrompt render_qa_prompt(const VwsdInstance& instance, const CaptionStore& captions, QaTemplate t,
                          std::string_view captioner) {
  if (t == QaTemplate::cot) t = QaTemplate::think_greedy;
  const CaptionStrategy strategy = *strategy_of(t);
  QaPrompt prompt;
  prompt.instance_id = instance.instance_id;
  prompt.template_name = t;
  prompt.option_order = instance.candidate_ids;
  for (const auto& id : instance.candidate_ids) {
    const auto* set = captions.find(id, captioner, strategy);
    if (!set) {
      throw ValidationError("instance " + instance.instance_id + ": no " + std::string(to_string(strategy)) +
                            " captions from " + std::string(captioner) + " for image " + id);
    }
    prompt.option_texts.push_back(caption_text(*set));
  }
  prompt.rendered = render_qa_body(t, instance.full_phrase, prompt.option_texts);
  prompt.question = question_of(t, instance.full_phrase, prompt.option_texts);
  return prompt;
}

// ---------------------------------------------------------------------------
// Answer parsing

std::string_view to_string(AnswerMatcher m) {
  switch (m) {
    case AnswerMatcher::paren_letter: return "paren_letter";
    case AnswerMatcher::answer_is_phrase: return "answer_is_phrase";
    case AnswerMatcher::leading_letter: return "leading_letter";
    case AnswerMatcher::caption_fuzzy: return "caption_fuzzy";
    case AnswerMatcher::none: return "none";
  }
  return "none";
}

std::string ParsedAnswer::outcome() const {
  return letter ? std::string(1, *letter) : std::string("abstain");
}

namespace {

bool is_option(char c) { return c >= 'A' && c <= 'J'; }
bool is_alnum(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}
bool is_blank(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

using Letters = std::set<char>;

Letters paren_letters(std::string_view raw) {
  Letters found;
  for (std::size_t i = 0; i + 2 < raw.size(); ++i) {
    if (raw[i] == '(' && is_option(raw[i + 1]) && raw[i + 2] == ')') found.insert(raw[i + 1]);
  }
  return found;
}

// Letter that directly follows position `pos`: optional blanks, ':' or '-',
// optional "(", an uppercase option letter, then ")" if "(" was open, or a
// non-alphanumeric boundary.
std::optional<char> letter_after(std::string_view raw, std::size_t pos) {
  while (pos < raw.size() && (is_blank(raw[pos]) || raw[pos] == ':' || raw[pos] == '-' || raw[pos] == '*')) ++pos;
  const bool paren = pos < raw.size() && raw[pos] == '(';
  if (paren) ++pos;
  if (pos >= raw.size() || !is_option(raw[pos])) return std::nullopt;
  const char letter = raw[pos++];
  if (paren) {
    if (pos < raw.size() && raw[pos] == ')') return letter;
    return std::nullopt;
  }
  if (pos == raw.size() || !is_alnum(raw[pos])) return letter;
  return std::nullopt;
}

Letters answer_phrase_letters(std::string_view raw) {
  static constexpr std::string_view kPhrases[] = {"answer is", "answer would be", "final answer", "answer:",
                                                  "i choose", "i would choose", "choose"};
  const std::string lower = to_lower_ascii(raw);
  Letters found;
  for (auto phrase : kPhrases) {
    for (auto pos = lower.find(phrase); pos != std::string::npos; pos = lower.find(phrase, pos + 1)) {
      // "choose" alone must be followed by a parenthesised letter.
      const std::size_t after = pos + phrase.size();
      if (phrase == "choose") {
        std::size_t p = after;
        while (p < raw.size() && is_blank(raw[p])) ++p;
        if (p >= raw.size() || raw[p] != '(') continue;
      }
      if (auto letter = letter_after(raw, after)) found.insert(*letter);
    }
  }
  return found;
}

std::optional<char> leading_letter(std::string_view raw) {
  std::size_t pos = 0;
  while (pos < raw.size() && (is_blank(raw[pos]) || raw[pos] == '*')) ++pos;
  if (pos >= raw.size() || !is_option(raw[pos])) return std::nullopt;
  const char letter = raw[pos++];
  while (pos < raw.size() && (raw[pos] == ' ' || raw[pos] == '\t')) ++pos;
  if (pos == raw.size()) return letter;
  static constexpr std::string_view kDelimiters = ".):,;]-*\n\r";
  if (kDelimiters.find(raw[pos]) != std::string_view::npos) return letter;
  return std::nullopt;
}

std::optional<char> fuzzy_caption_letter(std::string_view raw, std::span<const std::string> option_texts) {
  if (option_texts.empty()) return std::nullopt;
  const auto reply_words = split(fold_for_matching(raw), ' ');
  if (reply_words.size() == 1 && reply_words.front().empty()) return std::nullopt;

  double best = -1.0, second = -1.0;
  std::size_t best_index = 0;
  for (std::size_t i = 0; i < option_texts.size(); ++i) {
    const std::string caption = fold_for_matching(option_texts[i]);
    if (caption.empty()) continue;
    const std::size_t words = split(caption, ' ').size();
    const std::size_t take = std::min(words, reply_words.size());
    const std::vector<std::string> tail(reply_words.end() - static_cast<std::ptrdiff_t>(take), reply_words.end());
    const double score = levenshtein_ratio(join(tail, " "), caption);
    if (score > best) {
      second = best;
      best = score;
      best_index = i;
    } else if (score > second) {
      second = score;
    }
  }
  if (best >= kFuzzyThreshold && best > second) return option_letter(best_index);
  return std::nullopt;
}

}  // namespace

ParsedAnswer parse_answer(std::string_view raw, std::span<const std::string> option_texts) {
  ParsedAnswer parsed;
  parsed.raw = std::string(raw);

  const auto decide = [&](const Letters& letters, AnswerMatcher matcher) {
    if (letters.size() == 1) {
      parsed.letter = *letters.begin();
      parsed.matched_by = matcher;
    }
    return !letters.empty();
  };

  if (decide(answer_phrase_letters(raw), AnswerMatcher::answer_is_phrase)) return parsed;
  if (decide(paren_letters(raw), AnswerMatcher::paren_letter)) return parsed;
  if (auto letter = leading_letter(raw)) {
    parsed.letter = letter;
    parsed.matched_by = AnswerMatcher::leading_letter;
    return parsed;
  }
  if (auto letter = fuzzy_caption_letter(raw, option_texts)) {
    parsed.letter = letter;
    parsed.matched_by = AnswerMatcher::caption_fuzzy;
  }
  return parsed;
}

// ---------------------------------------------------------------------------
// Pipelines

namespace {

std::string call(LlmGateway& gateway, const GenerationSettings& settings, const std::string& prompt) {
  return gateway.complete(make_user_request(settings.model, prompt, settings.temperature, settings.max_tokens,
                                            settings.seed_tag))
      .text;
}

QaExchange single_call(const QaPrompt& prompt, std::string text, LlmGateway& gateway,
                       const GenerationSettings& settings) {
  QaExchange exchange;
  exchange.prompt = prompt;
  exchange.prompts_sent.push_back(std::move(text));
  try {
    exchange.responses.push_back(call(gateway, settings, exchange.prompts_sent.back()));
    exchange.answer = parse_answer(exchange.responses.back(), prompt.option_texts);
  } catch (const GatewayError& e) {
    exchange.error = e.what();
  }
  return exchange;
}

}  // namespace

QaExchange run_zero_shot(const QaPrompt& prompt, LlmGateway& gateway, const GenerationSettings& settings) {
  const auto family = family_of(prompt.template_name);
  if (family == QaFamily::think || family == QaFamily::cot) {
    throw UsageError("template " + std::string(to_string(prompt.template_name)) + " needs the two-call CoT pipeline");
  }
  return single_call(prompt, prompt.rendered, gateway, settings);
}

QaExchange run_cot(const QaPrompt& think_prompt, LlmGateway& gateway, const GenerationSettings& settings) {
  if (family_of(think_prompt.template_name) != QaFamily::think) {
    throw UsageError("the CoT pipeline starts from a think template, got " +
                     std::string(to_string(think_prompt.template_name)));
  }
  QaExchange exchange;
  exchange.prompt = think_prompt;
  exchange.prompts_sent.push_back(think_prompt.rendered);
  try {
    exchange.responses.push_back(call(gateway, settings, think_prompt.rendered));
    exchange.rationale = exchange.responses.back();
    exchange.prompts_sent.push_back(render_cot_prompt(think_prompt.rendered, *exchange.rationale));
    exchange.responses.push_back(call(gateway, settings, exchange.prompts_sent.back()));
    exchange.answer = parse_answer(exchange.responses.back(), think_prompt.option_texts);
  } catch (const GatewayError& e) {
    exchange.error = e.what();
  }
  return exchange;
}

// ---------------------------------------------------------------------------
// In-context examples

std::string_view to_string(ShotSelection s) {
  switch (s) {
    case ShotSelection::random: return "random";
    case ShotSelection::top: return "top";
    case ShotSelection::inverse_top: return "inverse-top";
  }
  return "random";
}

ShotSelection parse_shot_selection(std::string_view name) {
  if (name == "random") return ShotSelection::random;
  if (name == "top") return ShotSelection::top;
  if (name == "inverse-top" || name == "inverse_top") return ShotSelection::inverse_top;
  throw UsageError("unknown selection '" + std::string(name) + "' (expected random, top or inverse-top)");
}

std::vector<InContextChoice> select_in_context(std::size_t query_index, const Dataset& dataset,
                                               const EmbeddingStore& phrase_embeddings, const InContextConfig& config) {
  if (query_index >= dataset.size()) throw ValidationError("query index out of range");
  const std::size_t pool_size = dataset.size() - 1;
  if (config.k == 0) throw UsageError("in-context shot count must be positive");
  if (config.k >= pool_size) {
    throw UsageError("cannot select " + std::to_string(config.k) + " in-context examples from a pool of " +
                     std::to_string(pool_size));
  }

  std::vector<std::size_t> chosen;
  if (config.strategy == ShotSelection::random) {
    // Selection sampling over the pool in dataset order; the raw engine output
    // is specified bit-for-bit, unlike the std distributions.
    std::mt19937_64 rng(config.seed * 0x9E3779B97F4A7C15ULL + query_index);
    std::size_t needed = config.k;
    std::size_t remaining = pool_size;
    for (std::size_t i = 0; i < dataset.size() && needed > 0; ++i) {
      if (i == query_index) continue;
      const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      if (static_cast<double>(remaining) * u < static_cast<double>(needed)) {
        chosen.push_back(i);
        --needed;
      }
      --remaining;
    }
  } else {
    const auto vector_for = [&](std::size_t i) -> const std::vector<float>& {
      const auto& phrase = dataset.instances[i].full_phrase;
      const auto* record = phrase_embeddings.find(config.embedding_model,
                                                  text_embedding_key(phrase, config.embedding_model));
      if (!record) {
        throw ValidationError("no " + config.embedding_model + " embedding for phrase '" + phrase + "'");
      }
      return record->vector;
    };
    const auto& query = vector_for(query_index);
    std::vector<std::pair<double, std::size_t>> scored;
    scored.reserve(pool_size);
    for (std::size_t i = 0; i < dataset.size(); ++i) {
      if (i == query_index) continue;
      scored.emplace_back(similarity(query, vector_for(i), SimilarityMeasure::cosine), i);
    }
    std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t n = 0; n < config.k; ++n) chosen.push_back(scored[n].second);
    if (config.strategy == ShotSelection::inverse_top) std::reverse(chosen.begin(), chosen.end());
  }

  std::vector<InContextChoice> out;
  out.reserve(chosen.size());
  for (auto i : chosen) out.push_back({i, dataset.instances[i].gold_letter()});
  return out;
}

std::string render_few_shot_prompt(std::span<const FewShotExample> shots, const QaPrompt& query) {
  if (shots.empty()) return query.rendered;
  std::string out;
  for (const auto& shot : shots) {
    out += "Q: ";
    out += shot.prompt.question;
    out += "\nA: (";
    out += shot.gold_letter;
    out += ") ";
    out += shot.gold_caption;
    out += "\n\n";
  }
  out += "Q: ";
  out += query.question;
  out += "\nA:";
  return out;
}

QaExchange run_few_shot(std::span<const FewShotExample> shots, const QaPrompt& query, LlmGateway& gateway,
                        const GenerationSettings& settings) {
  const auto family = family_of(query.template_name);
  if (family != QaFamily::no_cot && family != QaFamily::choose_no_cot) {
    throw UsageError("few-shot prompting uses no_cot or choose_no_cot templates, got " +
                     std::string(to_string(query.template_name)));
  }
  return single_call(query, render_few_shot_prompt(shots, query), gateway, settings);
}

nlohmann::ordered_json to_json(const QaExchange& exchange) {
  nlohmann::ordered_json j;
  j["instance_id"] = exchange.prompt.instance_id;
  j["template"] = to_string(exchange.prompt.template_name);
  j["prompt"] = exchange.prompts_sent.empty() ? exchange.prompt.rendered : exchange.prompts_sent.front();
  if (exchange.prompts_sent.size() > 1) j["cot_prompt"] = exchange.prompts_sent[1];
  j["raw_responses"] = exchange.responses;
  j["parsed"] = {{"outcome", exchange.answer.outcome()}, {"matched_by", to_string(exchange.answer.matched_by)}};
  if (exchange.rationale) j["rationale"] = *exchange.rationale;
  if (exchange.error) j["error"] = *exchange.error;
  return j;
}

}  // namespace vwsd
