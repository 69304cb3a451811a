#include "vwsd/caption_store.hpp"

#include "vwsd/error.hpp"
#include "vwsd/io.hpp"
#include "vwsd/text.hpp"

#include <nlohmann/json.hpp>

namespace vwsd {

std::string_view to_string(CaptionStrategy strategy) {
  return strategy == CaptionStrategy::greedy ? "greedy" : "beam";
}

CaptionStrategy parse_caption_strategy(std::string_view name) {
  if (name == "greedy") return CaptionStrategy::greedy;
  if (name == "beam") return CaptionStrategy::beam;
  throw UsageError("unknown caption strategy '" + std::string(name) + "' (expected greedy or beam)");
}

std::size_t expected_caption_count(CaptionStrategy strategy) {
  return strategy == CaptionStrategy::greedy ? 1 : kBeamCaptionCount;
}

void validate_caption_set(const CaptionSet& set) {
  const std::string where = "captions for " + set.image_id + " (" + set.captioner + ", " +
                            std::string(to_string(set.strategy)) + ")";
  if (set.image_id.empty()) throw ValidationError("caption set with empty image id");
  if (set.captioner.empty()) throw ValidationError(where + ": empty captioner name");
  if (set.captions.size() != expected_caption_count(set.strategy)) {
    throw ValidationError(where + ": expected " + std::to_string(expected_caption_count(set.strategy)) +
                          " captions, got " + std::to_string(set.captions.size()));
  }
  for (const auto& c : set.captions) {
    if (c.empty()) throw ValidationError(where + ": empty caption");
  }
}

std::string caption_text(const CaptionSet& set) {
  if (set.strategy == CaptionStrategy::greedy) return set.captions.front();
  return join(set.captions, ", ");
}

std::string CaptionStore::index_key(std::string_view image_id, std::string_view captioner, CaptionStrategy strategy) {
  std::string key(image_id);
  key.push_back('\0');
  key.append(captioner);
  key.push_back('\0');
  key.append(to_string(strategy));
  return key;
}

void CaptionStore::add(CaptionSet set) {
  validate_caption_set(set);
  auto key = index_key(set.image_id, set.captioner, set.strategy);
  if (const auto it = index_.find(key); it != index_.end()) {
    if (sets_[it->second] == set) return;
    throw ValidationError("conflicting caption sets for " + set.image_id + " (" + set.captioner + ", " +
                          std::string(to_string(set.strategy)) + ")");
  }
  index_.emplace(std::move(key), sets_.size());
  sets_.push_back(std::move(set));
}

const CaptionSet* CaptionStore::find(std::string_view image_id, std::string_view captioner,
                                     CaptionStrategy strategy) const {
  const auto it = index_.find(index_key(image_id, captioner, strategy));
  return it == index_.end() ? nullptr : &sets_[it->second];
}

const CaptionSet& CaptionStore::at(std::string_view image_id, std::string_view captioner,
                                   CaptionStrategy strategy) const {
  if (const auto* set = find(image_id, captioner, strategy)) return *set;
  throw ValidationError("no " + std::string(to_string(strategy)) + " captions from " + std::string(captioner) +
                        " for image " + std::string(image_id));
}

CaptionStore parse_captions_jsonl(std::string_view text) {
  CaptionStore store;
  std::size_t line_no = 0;
  for (const auto& line : split(text, '\n')) {
    ++line_no;
    if (normalize_whitespace(line).empty()) continue;
    const std::string where = "captions line " + std::to_string(line_no) + ": ";
    try {
      const auto j = nlohmann::json::parse(line);
      CaptionSet set;
      set.image_id = j.at("image_id").get<std::string>();
      set.captioner = j.at("captioner").get<std::string>();
      set.strategy = parse_caption_strategy(j.at("strategy").get<std::string>());
      set.captions = j.at("captions").get<std::vector<std::string>>();
      store.add(std::move(set));
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(where + "malformed record: " + e.what());
    } catch (const Error& e) {
      throw ValidationError(where + e.what());
    }
  }
  return store;
}

CaptionStore load_captions(const std::filesystem::path& path) {
  const auto text = read_file(path);
  try {
    return parse_captions_jsonl(text);
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

std::string serialize_caption_set(const CaptionSet& set) {
  nlohmann::ordered_json j;
  j["image_id"] = set.image_id;
  j["captioner"] = set.captioner;
  j["strategy"] = to_string(set.strategy);
  j["captions"] = set.captions;
  return j.dump() + "\n";
}

}  // namespace vwsd
