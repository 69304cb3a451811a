#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace vwsd {

/// greedy: one caption per image; beam: ten sampled captions per image.
enum class CaptionStrategy { greedy, beam };

inline constexpr std::size_t kBeamCaptionCount = 10;

std::string_view to_string(CaptionStrategy strategy);
CaptionStrategy parse_caption_strategy(std::string_view name);
std::size_t expected_caption_count(CaptionStrategy strategy);

struct CaptionSet {
  std::string image_id;
  std::string captioner;
  CaptionStrategy strategy = CaptionStrategy::greedy;
  std::vector<std::string> captions;

  friend bool operator==(const CaptionSet&, const CaptionSet&) = default;
};

void validate_caption_set(const CaptionSet& set);

/// Text that stands for the image in a prompt: the greedy caption verbatim,
/// or the beam captions joined with ", ".
std::string caption_text(const CaptionSet& set);

class CaptionStore {
public:
  /// Identical duplicates are ignored; conflicting ones throw ValidationError.
  void add(CaptionSet set);

  const CaptionSet* find(std::string_view image_id, std::string_view captioner, CaptionStrategy strategy) const;
  const CaptionSet& at(std::string_view image_id, std::string_view captioner, CaptionStrategy strategy) const;

  std::size_t size() const noexcept { return sets_.size(); }

private:
  static std::string index_key(std::string_view image_id, std::string_view captioner, CaptionStrategy strategy);

  std::vector<CaptionSet> sets_;
  std::unordered_map<std::string, std::size_t> index_;
};

CaptionStore parse_captions_jsonl(std::string_view text);
CaptionStore load_captions(const std::filesystem::path& path);
/// One JSONL line, newline included.
std::string serialize_caption_set(const CaptionSet& set);

}  // namespace vwsd
