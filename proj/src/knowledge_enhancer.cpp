#include "vwsd/knowledge_enhancer.hpp"

#include "vwsd/error.hpp"
#include "vwsd/text.hpp"

namespace vwsd {

namespace {
constexpr std::string_view kPlaceholder = "<phrase>";
}

std::string_view to_string(EnhancementTemplate t) {
  switch (t) {
    case EnhancementTemplate::exact: return "exact";
    case EnhancementTemplate::what_is: return "what_is";
    case EnhancementTemplate::describe: return "describe";
    case EnhancementTemplate::meaning_of: return "meaning_of";
  }
  return "exact";
}

EnhancementTemplate parse_enhancement_template(std::string_view name) {
  for (auto t : kEnhancementTemplates) {
    if (to_string(t) == name) return t;
  }
  throw UsageError("unknown enhancement template '" + std::string(name) +
                   "' (valid: exact, what_is, describe, meaning_of)");
}

std::string_view enhancement_pattern(EnhancementTemplate t) {
  switch (t) {
    case EnhancementTemplate::exact: return "<phrase> ";
    case EnhancementTemplate::what_is: return "What is <phrase>?";
    case EnhancementTemplate::describe: return "Describe <phrase>.";
    case EnhancementTemplate::meaning_of: return "What is the meaning of <phrase>?";
  }
  return "<phrase> ";
}

std::string build_enhancement_prompt(std::string_view phrase, EnhancementTemplate t) {
  std::string prompt(enhancement_pattern(t));
  prompt.replace(prompt.find(kPlaceholder), kPlaceholder.size(), phrase);
  return prompt;
}

std::string combine_enhanced(std::string_view original, std::string_view knowledge) {
  const std::string normalized = normalize_whitespace(knowledge);
  if (normalized.empty()) return std::string(original);
  std::string out(original);
  out += ' ';
  out += normalized;
  return out;
}

EnhancedPhrase enhance_phrase(const VwsdInstance& instance, EnhancementTemplate t, LlmGateway& gateway,
                              const GenerationSettings& settings) {
  const auto request = make_user_request(settings.model, build_enhancement_prompt(instance.full_phrase, t),
                                         settings.temperature, settings.max_tokens, settings.seed_tag);
  const auto response = gateway.complete(request);

  EnhancedPhrase out;
  out.instance_id = instance.instance_id;
  out.template_name = t;
  out.model = settings.model;
  out.original = instance.full_phrase;
  out.knowledge = response.text;
  out.enhanced = combine_enhanced(out.original, out.knowledge);
  return out;
}

nlohmann::ordered_json to_json(const EnhancedPhrase& phrase) {
  nlohmann::ordered_json j;
  j["instance_id"] = phrase.instance_id;
  j["template"] = to_string(phrase.template_name);
  j["model"] = phrase.model;
  j["original"] = phrase.original;
  j["knowledge"] = phrase.knowledge;
  j["enhanced"] = phrase.enhanced;
  return j;
}

EnhancedPhrase enhanced_phrase_from_json(const nlohmann::json& j) {
  EnhancedPhrase p;
  p.instance_id = j.at("instance_id").get<std::string>();
  p.template_name = parse_enhancement_template(j.at("template").get<std::string>());
  p.model = j.at("model").get<std::string>();
  p.original = j.at("original").get<std::string>();
  p.knowledge = j.at("knowledge").get<std::string>();
  p.enhanced = j.at("enhanced").get<std::string>();
  return p;
}

std::string serialize_enhanced_jsonl(std::span<const EnhancedPhrase> phrases) {
  std::string out;
  for (const auto& p : phrases) {
    out += to_json(p).dump();
    out += '\n';
  }
  return out;
}

std::vector<EnhancedPhrase> parse_enhanced_jsonl(std::string_view text) {
  std::vector<EnhancedPhrase> out;
  std::size_t line_no = 0;
  for (const auto& line : split(text, '\n')) {
    ++line_no;
    if (normalize_whitespace(line).empty()) continue;
    try {
      out.push_back(enhanced_phrase_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError("enhanced phrases line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace vwsd
