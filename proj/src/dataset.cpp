#include "vwsd/dataset.hpp"

#include "vwsd/error.hpp"
#include "vwsd/io.hpp"
#include "vwsd/text.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

namespace vwsd {

namespace {

constexpr std::size_t kColumns = 2 + kCandidateCount;

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines = split(text, '\n');
  // A trailing newline terminates the last line rather than opening a new one.
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  for (auto& line : lines) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
  }
  return lines;
}

std::string line_label(std::size_t index) {
  return "line " + std::to_string(index + 1);
}

}  // namespace

std::size_t VwsdInstance::gold_position() const {
  const auto it = std::find(candidate_ids.begin(), candidate_ids.end(), gold_id);
  if (it == candidate_ids.end()) {
    throw ValidationError("instance " + instance_id + ": gold id " + gold_id + " is not a candidate");
  }
  return static_cast<std::size_t>(it - candidate_ids.begin());
}

char VwsdInstance::gold_letter() const {
  return static_cast<char>('A' + gold_position());
}

std::string derive_context(const std::string& target_word, const std::string& full_phrase) {
  const std::string target = normalize_whitespace(target_word);
  std::vector<std::string> tokens = split(normalize_whitespace(full_phrase), ' ');
  const auto it = std::find(tokens.begin(), tokens.end(), target);
  if (it == tokens.end() || tokens.size() == 1) return normalize_whitespace(full_phrase);
  tokens.erase(it);
  return join(tokens, " ");
}

std::string instance_id_for_line(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%06zu", index);
  return buf;
}

void validate_instance(const VwsdInstance& instance) {
  const std::string where = "instance " + instance.instance_id;
  if (instance.candidate_ids.size() != kCandidateCount) {
    throw ValidationError(where + ": expected " + std::to_string(kCandidateCount) + " candidates, got " +
                          std::to_string(instance.candidate_ids.size()));
  }
  std::set<std::string> seen;
  for (const auto& id : instance.candidate_ids) {
    if (id.empty()) throw ValidationError(where + ": empty candidate id");
    if (!seen.insert(id).second) throw ValidationError(where + ": duplicate candidate " + id);
  }
  if (!seen.contains(instance.gold_id)) {
    throw ValidationError(where + ": gold id " + instance.gold_id + " is not among the candidates");
  }
  if (normalize_whitespace(instance.full_phrase).empty()) {
    throw ValidationError(where + ": full phrase is empty");
  }
}

Dataset make_dataset(std::vector<VwsdInstance> instances) {
  Dataset dataset;
  std::set<std::string> ids;
  for (const auto& instance : instances) {
    validate_instance(instance);
    ids.insert(instance.candidate_ids.begin(), instance.candidate_ids.end());
  }
  dataset.instances = std::move(instances);
  dataset.image_ids.assign(ids.begin(), ids.end());
  return dataset;
}

Dataset parse_dataset(const std::string& data_text, const std::string& gold_text) {
  const auto data_lines = split_lines(data_text);
  const auto gold_lines = split_lines(gold_text);
  if (data_lines.size() != gold_lines.size()) {
    throw ValidationError("data has " + std::to_string(data_lines.size()) + " lines but gold has " +
                          std::to_string(gold_lines.size()));
  }

  std::vector<VwsdInstance> instances;
  instances.reserve(data_lines.size());
  for (std::size_t i = 0; i < data_lines.size(); ++i) {
    auto columns = split(data_lines[i], '\t');
    if (columns.size() != kColumns) {
      throw ValidationError(line_label(i) + ": expected " + std::to_string(kColumns) + " tab-separated columns, got " +
                            std::to_string(columns.size()));
    }
    VwsdInstance instance;
    instance.instance_id = instance_id_for_line(i);
    instance.target_word = columns[0];
    instance.full_phrase = columns[1];
    instance.context_word = derive_context(instance.target_word, instance.full_phrase);
    instance.candidate_ids.assign(columns.begin() + 2, columns.end());
    instance.gold_id = normalize_whitespace(gold_lines[i]);
    try {
      validate_instance(instance);
    } catch (const ValidationError& e) {
      throw ValidationError(line_label(i) + ": " + e.what());
    }
    instances.push_back(std::move(instance));
  }
  return make_dataset(std::move(instances));
}

Dataset load_dataset(const std::filesystem::path& data_path, const std::filesystem::path& gold_path) {
  const std::string data = read_file(data_path);
  const std::string gold = read_file(gold_path);
  try {
    return parse_dataset(data, gold);
  } catch (const ValidationError& e) {
    throw ValidationError(data_path.string() + ": " + e.what());
  }
}

std::string serialize_data_tsv(const Dataset& dataset) {
  std::string out;
  for (const auto& instance : dataset.instances) {
    out += instance.target_word;
    out += '\t';
    out += instance.full_phrase;
    for (const auto& id : instance.candidate_ids) {
      out += '\t';
      out += id;
    }
    out += '\n';
  }
  return out;
}

std::string serialize_gold(const Dataset& dataset) {
  std::string out;
  for (const auto& instance : dataset.instances) {
    out += instance.gold_id;
    out += '\n';
  }
  return out;
}

}  // namespace vwsd
