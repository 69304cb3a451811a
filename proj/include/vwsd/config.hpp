#pragma once

#include "vwsd/caption_store.hpp"
#include "vwsd/vector_store.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace vwsd {

/// Everything one pipeline run needs. Filled from defaults, then a config
/// file, then command-line flags.
struct RunConfig {
  // inputs
  std::filesystem::path data;
  std::filesystem::path gold;
  std::vector<std::filesystem::path> embeddings;
  std::filesystem::path captions;
  std::filesystem::path enhanced;     // retrieve: rank with enhanced phrases
  std::filesystem::path rankings;     // eval input
  std::filesystem::path transcripts;  // eval input

  // retrieval
  SimilarityMeasure measure = SimilarityMeasure::cosine;
  std::string retrieval_model;  // empty: the only model in the store
  bool penalty = false;
  double lambda = 1.0;

  // enhancement
  std::string enhance_template = "meaning_of";

  // llm
  std::string model = "gpt-3.5-turbo";
  double temperature = 0.0;
  int max_tokens = 150;
  double rpm = 0.0;
  bool offline = false;
  std::filesystem::path cache_dir = "cache";
  std::string seed_tag;

  // qa
  std::string qa_template = "no_cot";
  std::string captioner = "git-l";
  std::optional<CaptionStrategy> strategy;
  std::size_t shots = 0;
  std::string selection = "random";
  std::uint64_t seed = 0;
  std::string embedding_model = "align";

  // run
  std::size_t jobs = 1;
  std::filesystem::path out_dir = "out";
};

/// Keys accepted by apply_setting and config files, "section.name" form.
const std::vector<std::string_view>& config_keys();

/// Parses `value` into the field named by `key`. Relative paths are resolved
/// against `base_dir`. Throws UsageError on unknown keys or bad values.
void apply_setting(RunConfig& config, std::string_view key, std::string_view value,
                   const std::filesystem::path& base_dir = {});

/// Config files hold `key = value` lines grouped under `[section]` headers;
/// `#` starts a comment and values may be double-quoted.
void apply_config_text(RunConfig& config, std::string_view text, const std::filesystem::path& base_dir);
void apply_config_file(RunConfig& config, const std::filesystem::path& path);

}  // namespace vwsd
