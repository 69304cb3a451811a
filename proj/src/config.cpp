#include "vwsd/config.hpp"

#include "vwsd/error.hpp"
#include "vwsd/io.hpp"
#include "vwsd/text.hpp"

#include <charconv>

namespace vwsd {

namespace {

bool parse_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "on" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "off" || v == "no" || v == "0") return false;
  throw UsageError(std::string(key) + ": expected a boolean, got '" + std::string(v) + "'");
}

template <class T>
T parse_number(std::string_view key, std::string_view v) {
  T out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw UsageError(std::string(key) + ": expected a number, got '" + std::string(v) + "'");
  }
  return out;
}

double parse_double(std::string_view key, std::string_view v) {
  try {
    std::size_t used = 0;
    const double out = std::stod(std::string(v), &used);
    if (used == v.size()) return out;
  } catch (const std::exception&) {
  }
  throw UsageError(std::string(key) + ": expected a number, got '" + std::string(v) + "'");
}

std::filesystem::path resolve(std::string_view v, const std::filesystem::path& base_dir) {
  std::filesystem::path p{std::string(v)};
  if (p.is_relative() && !base_dir.empty()) return base_dir / p;
  return p;
}

}  // namespace

const std::vector<std::string_view>& config_keys() {
  static const std::vector<std::string_view> keys = {
      "data.tsv",        "data.gold",      "data.captions",     "data.rankings",   "data.transcripts",
      "retrieval.embeddings", "retrieval.measure", "retrieval.model", "retrieval.enhanced",
      "penalty.enabled", "penalty.lambda", "enhance.template",  "llm.model",       "llm.temperature",
      "llm.max_tokens",  "llm.rpm",        "llm.offline",       "llm.cache_dir",   "llm.seed_tag",
      "qa.template",     "qa.captioner",   "qa.strategy",       "qa.shots",        "qa.selection",
      "qa.seed",         "qa.embedding_model", "run.jobs",      "run.out_dir",
  };
  return keys;
}

void apply_setting(RunConfig& c, std::string_view key, std::string_view value, const std::filesystem::path& base) {
  if (key == "data.tsv") c.data = resolve(value, base);
  else if (key == "data.gold") c.gold = resolve(value, base);
  else if (key == "data.captions") c.captions = resolve(value, base);
  else if (key == "data.rankings") c.rankings = resolve(value, base);
  else if (key == "data.transcripts") c.transcripts = resolve(value, base);
  else if (key == "retrieval.embeddings") {
    c.embeddings.clear();
    for (const auto& part : split(value, ',')) {
      const auto trimmed = normalize_whitespace(part);
      if (!trimmed.empty()) c.embeddings.push_back(resolve(trimmed, base));
    }
  } else if (key == "retrieval.measure") c.measure = parse_similarity_measure(value);
  else if (key == "retrieval.model") c.retrieval_model = value;
  else if (key == "retrieval.enhanced") c.enhanced = resolve(value, base);
  else if (key == "penalty.enabled") c.penalty = parse_bool(key, value);
  else if (key == "penalty.lambda") {
    c.lambda = parse_double(key, value);
    if (!(c.lambda >= 0.0)) throw UsageError("penalty.lambda must be non-negative");
  } else if (key == "enhance.template") c.enhance_template = value;
  else if (key == "llm.model") c.model = value;
  else if (key == "llm.temperature") {
    c.temperature = parse_double(key, value);
    if (!(c.temperature >= 0.0)) throw UsageError("llm.temperature must be non-negative");
  } else if (key == "llm.max_tokens") {
    c.max_tokens = parse_number<int>(key, value);
    if (c.max_tokens <= 0) throw UsageError("llm.max_tokens must be positive");
  } else if (key == "llm.rpm") c.rpm = parse_double(key, value);
  else if (key == "llm.offline") c.offline = parse_bool(key, value);
  else if (key == "llm.cache_dir") c.cache_dir = resolve(value, base);
  else if (key == "llm.seed_tag") c.seed_tag = value;
  else if (key == "qa.template") c.qa_template = value;
  else if (key == "qa.captioner") c.captioner = value;
  else if (key == "qa.strategy") c.strategy = parse_caption_strategy(value);
  else if (key == "qa.shots") c.shots = parse_number<std::size_t>(key, value);
  else if (key == "qa.selection") c.selection = value;
  else if (key == "qa.seed") c.seed = parse_number<std::uint64_t>(key, value);
  else if (key == "qa.embedding_model") c.embedding_model = value;
  else if (key == "run.jobs") {
    c.jobs = parse_number<std::size_t>(key, value);
    if (c.jobs == 0) throw UsageError("run.jobs must be at least 1");
  } else if (key == "run.out_dir") c.out_dir = resolve(value, base);
  else throw UsageError("unknown config key '" + std::string(key) + "'");
}

void apply_config_text(RunConfig& config, std::string_view text, const std::filesystem::path& base_dir) {
  std::string section;
  std::size_t line_no = 0;
  for (auto line : split(text, '\n')) {
    ++line_no;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') quoted = !quoted;
      if (line[i] == '#' && !quoted) {
        line.resize(i);
        break;
      }
    }
    line = normalize_whitespace(line);
    if (line.empty()) continue;
    const std::string where = "config line " + std::to_string(line_no) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') throw UsageError(where + "unterminated section header");
      section = normalize_whitespace(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw UsageError(where + "expected key = value");
    const std::string name = normalize_whitespace(line.substr(0, eq));
    std::string value = normalize_whitespace(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    const std::string key = section.empty() ? name : section + "." + name;
    try {
      apply_setting(config, key, value, base_dir);
    } catch (const Error& e) {
      throw UsageError(where + e.what());
    }
  }
}

void apply_config_file(RunConfig& config, const std::filesystem::path& path) {
  const auto text = read_file(path);
  try {
    apply_config_text(config, text, path.parent_path());
  } catch (const UsageError& e) {
    throw UsageError(path.string() + ": " + e.what());
  }
}

}  // namespace vwsd
