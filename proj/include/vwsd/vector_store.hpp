#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace vwsd {

enum class EmbeddingKind : std::uint8_t { text = 0, image = 1 };

std::string_view to_string(EmbeddingKind kind);
EmbeddingKind parse_embedding_kind(std::string_view name);

/// Higher is better for every measure: distances are negated.
enum class SimilarityMeasure { cosine, euclidean, manhattan };

std::string_view to_string(SimilarityMeasure measure);
SimilarityMeasure parse_similarity_measure(std::string_view name);

/// cosine -> dot/(|u||v|); euclidean -> -|u-v|_2; manhattan -> -|u-v|_1.
/// Accumulates in double. Throws ValidationError on a dimension mismatch or
/// a zero-norm input under cosine.
double similarity(std::span<const float> u, std::span<const float> v, SimilarityMeasure measure);

struct EmbeddingRecord {
  std::string key;
  EmbeddingKind kind = EmbeddingKind::image;
  std::string model;
  std::uint32_t dim = 0;
  std::vector<float> vector;

  friend bool operator==(const EmbeddingRecord&, const EmbeddingRecord&) = default;
};

/// Throws ValidationError unless dim matches the vector and all components are finite.
void validate_record(const EmbeddingRecord& record);

/// Key under which a text embedding is stored: hex SHA-256 of the
/// whitespace-normalised text, then ":" and the model name.
std::string text_embedding_key(std::string_view text, std::string_view model);

/// Write-once collection of embeddings addressed by (model, key).
class EmbeddingStore {
public:
  /// Inserts a record. Re-adding an identical record is a no-op; a differing
  /// payload under the same (model, key), or a dim that disagrees with the
  /// model's earlier records, throws ValidationError.
  void add(EmbeddingRecord record);

  /// Merges every record of another store through add().
  void merge(const EmbeddingStore& other);

  const EmbeddingRecord* find(std::string_view model, std::string_view key) const;
  const EmbeddingRecord& at(std::string_view model, std::string_view key) const;

  std::optional<std::uint32_t> dim_of(std::string_view model) const;
  std::vector<std::string> models() const;

  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }

  /// Records in insertion order.
  const std::vector<EmbeddingRecord>& records() const noexcept { return records_; }

private:
  static std::string index_key(std::string_view model, std::string_view key);

  std::vector<EmbeddingRecord> records_;
  std::unordered_map<std::string, std::size_t> index_;
  std::unordered_map<std::string, std::uint32_t> model_dims_;
};

inline constexpr std::string_view kBinaryEmbeddingMagic = "VWSDEMB1";

EmbeddingStore parse_embeddings_jsonl(std::string_view text);
EmbeddingStore parse_embeddings_binary(std::string_view bytes);

/// Detects the binary format by its magic, JSONL otherwise.
EmbeddingStore load_embeddings(const std::filesystem::path& path);

std::string serialize_embeddings_jsonl(const EmbeddingStore& store);
std::string serialize_embeddings_binary(const EmbeddingStore& store);

}  // namespace vwsd
