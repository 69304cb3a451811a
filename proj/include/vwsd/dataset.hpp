#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

namespace vwsd {

inline constexpr std::size_t kCandidateCount = 10;

/// One disambiguation problem: an ambiguous word in a short phrase plus the
/// ten candidate images, exactly one of which is correct.
struct VwsdInstance {
  std::string instance_id;
  std::string target_word;
  std::string context_word;
  std::string full_phrase;
  std::vector<std::string> candidate_ids;
  std::string gold_id;

  /// 0-based position of gold_id among the candidates.
  std::size_t gold_position() const;

  /// Gold option letter, 'A' for the first candidate.
  char gold_letter() const;

  friend bool operator==(const VwsdInstance&, const VwsdInstance&) = default;
};

struct Dataset {
  std::vector<VwsdInstance> instances;
  /// Every referenced image id, sorted and deduplicated.
  std::vector<std::string> image_ids;

  std::size_t size() const noexcept { return instances.size(); }
  bool empty() const noexcept { return instances.empty(); }

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// The phrase with the first whole-token occurrence of the target removed.
/// Falls back to the whole phrase when the target is not one of its tokens.
std::string derive_context(const std::string& target_word, const std::string& full_phrase);

/// Zero-padded 0-based line index.
std::string instance_id_for_line(std::size_t index);

/// Checks the per-instance invariants; throws ValidationError.
void validate_instance(const VwsdInstance& instance);

/// Builds a Dataset (image id index included) from validated instances.
Dataset make_dataset(std::vector<VwsdInstance> instances);

/// Reads the two-file TSV layout: `data` holds target, phrase and ten image
/// ids per line, `gold` holds the matching gold id per line.
Dataset load_dataset(const std::filesystem::path& data_path, const std::filesystem::path& gold_path);

/// Parses the same layout from in-memory text.
Dataset parse_dataset(const std::string& data_text, const std::string& gold_text);

/// Serialises back to the TSV layout; load(serialize(d)) == d.
std::string serialize_data_tsv(const Dataset& dataset);
std::string serialize_gold(const Dataset& dataset);

}  // namespace vwsd
