#pragma once

#include "vwsd/dataset.hpp"
#include "vwsd/llm_gateway.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace vwsd {

/// Zero-shot prompts that ask an LLM for knowledge about a phrase.
enum class EnhancementTemplate { exact, what_is, describe, meaning_of };

inline constexpr std::array kEnhancementTemplates = {EnhancementTemplate::exact, EnhancementTemplate::what_is,
                                                     EnhancementTemplate::describe, EnhancementTemplate::meaning_of};

std::string_view to_string(EnhancementTemplate t);

/// Throws UsageError listing the valid names on a typo.
EnhancementTemplate parse_enhancement_template(std::string_view name);

/// Pattern with a single `<phrase>` placeholder.
std::string_view enhancement_pattern(EnhancementTemplate t);

std::string build_enhancement_prompt(std::string_view phrase, EnhancementTemplate t);

/// original + " " + whitespace-normalised knowledge; just original when the
/// knowledge is blank.
std::string combine_enhanced(std::string_view original, std::string_view knowledge);

struct EnhancedPhrase {
  std::string instance_id;
  EnhancementTemplate template_name = EnhancementTemplate::exact;
  std::string model;
  std::string original;
  std::string knowledge;  // raw LLM output
  std::string enhanced;

  friend bool operator==(const EnhancedPhrase&, const EnhancedPhrase&) = default;
};

struct GenerationSettings {
  std::string model;
  double temperature = 0.0;
  int max_tokens = 150;
  std::string seed_tag;
};

/// Asks the gateway for knowledge about the instance's full phrase. Gateway
/// errors propagate; callers decide whether the run continues.
EnhancedPhrase enhance_phrase(const VwsdInstance& instance, EnhancementTemplate t, LlmGateway& gateway,
                              const GenerationSettings& settings);

nlohmann::ordered_json to_json(const EnhancedPhrase& phrase);
EnhancedPhrase enhanced_phrase_from_json(const nlohmann::json& j);

std::string serialize_enhanced_jsonl(std::span<const EnhancedPhrase> phrases);
std::vector<EnhancedPhrase> parse_enhanced_jsonl(std::string_view text);

}  // namespace vwsd
