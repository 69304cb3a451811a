#include "vwsd/vector_store.hpp"

#include "vwsd/error.hpp"
#include "vwsd/io.hpp"
#include "vwsd/text.hpp"

#include <nlohmann/json.hpp>

#include <bit>
#include <cmath>
#include <cstring>
#include <set>

namespace vwsd {

std::string_view to_string(EmbeddingKind kind) {
  return kind == EmbeddingKind::text ? "text" : "image";
}

EmbeddingKind parse_embedding_kind(std::string_view name) {
  if (name == "text") return EmbeddingKind::text;
  if (name == "image") return EmbeddingKind::image;
  throw ValidationError("unknown embedding kind '" + std::string(name) + "'");
}

std::string_view to_string(SimilarityMeasure measure) {
  switch (measure) {
    case SimilarityMeasure::cosine: return "cosine";
    case SimilarityMeasure::euclidean: return "euclidean";
    case SimilarityMeasure::manhattan: return "manhattan";
  }
  return "cosine";
}

SimilarityMeasure parse_similarity_measure(std::string_view name) {
  if (name == "cosine") return SimilarityMeasure::cosine;
  if (name == "euclidean") return SimilarityMeasure::euclidean;
  if (name == "manhattan") return SimilarityMeasure::manhattan;
  throw UsageError("unknown similarity measure '" + std::string(name) + "' (expected cosine, euclidean or manhattan)");
}

double similarity(std::span<const float> u, std::span<const float> v, SimilarityMeasure measure) {
  if (u.size() != v.size()) {
    throw ValidationError("dimension mismatch: " + std::to_string(u.size()) + " vs " + std::to_string(v.size()));
  }
  switch (measure) {
    case SimilarityMeasure::cosine: {
      double dot = 0.0, nu = 0.0, nv = 0.0;
      for (std::size_t i = 0; i < u.size(); ++i) {
        dot += static_cast<double>(u[i]) * v[i];
        nu += static_cast<double>(u[i]) * u[i];
        nv += static_cast<double>(v[i]) * v[i];
      }
      if (nu == 0.0 || nv == 0.0) throw ValidationError("cosine similarity of a zero-norm vector");
      return dot / (std::sqrt(nu) * std::sqrt(nv));
    }
    case SimilarityMeasure::euclidean: {
      double sum = 0.0;
      for (std::size_t i = 0; i < u.size(); ++i) {
        const double d = static_cast<double>(u[i]) - v[i];
        sum += d * d;
      }
      return -std::sqrt(sum);
    }
    case SimilarityMeasure::manhattan: {
      double sum = 0.0;
      for (std::size_t i = 0; i < u.size(); ++i) sum += std::fabs(static_cast<double>(u[i]) - v[i]);
      return -sum;
    }
  }
  return 0.0;
}

void validate_record(const EmbeddingRecord& record) {
  if (record.key.empty()) throw ValidationError("embedding record with empty key");
  if (record.model.empty()) throw ValidationError("embedding " + record.key + ": empty model name");
  if (record.dim == 0) throw ValidationError("embedding " + record.key + ": dim must be positive");
  if (record.vector.size() != record.dim) {
    throw ValidationError("embedding " + record.key + ": dim " + std::to_string(record.dim) + " but vector has " +
                          std::to_string(record.vector.size()) + " components");
  }
  for (float x : record.vector) {
    if (!std::isfinite(x)) throw ValidationError("embedding " + record.key + ": non-finite component");
  }
}

std::string text_embedding_key(std::string_view text, std::string_view model) {
  return sha256_hex(normalize_whitespace(text)) + ":" + std::string(model);
}

std::string EmbeddingStore::index_key(std::string_view model, std::string_view key) {
  std::string out(model);
  out.push_back('\0');
  out.append(key);
  return out;
}

void EmbeddingStore::add(EmbeddingRecord record) {
  validate_record(record);
  if (const auto it = model_dims_.find(record.model); it != model_dims_.end() && it->second != record.dim) {
    throw ValidationError("embedding " + record.key + ": model " + record.model + " has dim " +
                          std::to_string(it->second) + " elsewhere but " + std::to_string(record.dim) + " here");
  }
  auto ikey = index_key(record.model, record.key);
  if (const auto it = index_.find(ikey); it != index_.end()) {
    if (records_[it->second] == record) return;
    throw ValidationError("embedding " + record.key + " (" + record.model + ") appears twice with different payloads");
  }
  model_dims_.emplace(record.model, record.dim);
  index_.emplace(std::move(ikey), records_.size());
  records_.push_back(std::move(record));
}

void EmbeddingStore::merge(const EmbeddingStore& other) {
  for (const auto& record : other.records()) add(record);
}

const EmbeddingRecord* EmbeddingStore::find(std::string_view model, std::string_view key) const {
  const auto it = index_.find(index_key(model, key));
  return it == index_.end() ? nullptr : &records_[it->second];
}

const EmbeddingRecord& EmbeddingStore::at(std::string_view model, std::string_view key) const {
  if (const auto* record = find(model, key)) return *record;
  throw ValidationError("no embedding for " + std::string(key) + " under model " + std::string(model));
}

std::optional<std::uint32_t> EmbeddingStore::dim_of(std::string_view model) const {
  const auto it = model_dims_.find(std::string(model));
  if (it == model_dims_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> EmbeddingStore::models() const {
  std::set<std::string> names;
  for (const auto& [name, dim] : model_dims_) names.insert(name);
  return {names.begin(), names.end()};
}

EmbeddingStore parse_embeddings_jsonl(std::string_view text) {
  EmbeddingStore store;
  std::size_t line_no = 0;
  for (const auto& line : split(text, '\n')) {
    ++line_no;
    if (normalize_whitespace(line).empty()) continue;
    const std::string where = "embeddings line " + std::to_string(line_no) + ": ";
    EmbeddingRecord record;
    try {
      const auto j = nlohmann::json::parse(line);
      for (const char* field : {"key", "kind", "model", "dim", "vector"}) {
        if (!j.contains(field)) throw ValidationError(std::string("missing field '") + field + "'");
      }
      record.key = j.at("key").get<std::string>();
      record.kind = parse_embedding_kind(j.at("kind").get<std::string>());
      record.model = j.at("model").get<std::string>();
      const auto dim = j.at("dim").get<std::int64_t>();
      if (dim <= 0 || dim > UINT32_MAX) throw ValidationError("dim must be a positive 32-bit integer");
      record.dim = static_cast<std::uint32_t>(dim);
      const auto& vec = j.at("vector");
      if (!vec.is_array()) throw ValidationError("vector must be an array");
      record.vector.reserve(vec.size());
      for (const auto& x : vec) {
        if (!x.is_number()) throw ValidationError("vector component is not a number");
        record.vector.push_back(static_cast<float>(x.get<double>()));
      }
      store.add(std::move(record));
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(where + "malformed record: " + e.what());
    } catch (const ValidationError& e) {
      throw ValidationError(where + e.what());
    }
  }
  return store;
}

namespace {

class ByteReader {
public:
  explicit ByteReader(std::string_view bytes) : bytes_(bytes) {}

  bool done() const { return pos_ == bytes_.size(); }

  std::uint64_t uint(std::size_t width) {
    need(width);
    std::uint64_t value = 0;
    for (std::size_t i = 0; i < width; ++i) {
      value |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += width;
    return value;
  }

  std::string str(std::size_t len) {
    need(len);
    std::string out(bytes_.substr(pos_, len));
    pos_ += len;
    return out;
  }

private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw ValidationError("truncated binary embedding file");
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
};

void put_uint(std::string& out, std::uint64_t value, std::size_t width) {
  for (std::size_t i = 0; i < width; ++i) out.push_back(static_cast<char>((value >> (8 * i)) & 0xFF));
}

}  // namespace

EmbeddingStore parse_embeddings_binary(std::string_view bytes) {
  if (!bytes.starts_with(kBinaryEmbeddingMagic)) throw ValidationError("missing VWSDEMB1 header");
  ByteReader reader(bytes.substr(kBinaryEmbeddingMagic.size()));
  EmbeddingStore store;
  while (!reader.done()) {
    EmbeddingRecord record;
    record.key = reader.str(reader.uint(2));
    const auto kind = reader.uint(1);
    if (kind > 1) throw ValidationError("embedding " + record.key + ": bad kind byte " + std::to_string(kind));
    record.kind = static_cast<EmbeddingKind>(kind);
    record.model = reader.str(reader.uint(2));
    record.dim = static_cast<std::uint32_t>(reader.uint(4));
    record.vector.resize(record.dim);
    for (auto& x : record.vector) x = std::bit_cast<float>(static_cast<std::uint32_t>(reader.uint(4)));
    store.add(std::move(record));
  }
  return store;
}

EmbeddingStore load_embeddings(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  try {
    if (std::string_view(bytes).starts_with(kBinaryEmbeddingMagic)) return parse_embeddings_binary(bytes);
    return parse_embeddings_jsonl(bytes);
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

std::string serialize_embeddings_jsonl(const EmbeddingStore& store) {
  std::string out;
  for (const auto& record : store.records()) {
    nlohmann::ordered_json j;
    j["key"] = record.key;
    j["kind"] = to_string(record.kind);
    j["model"] = record.model;
    j["dim"] = record.dim;
    auto vec = nlohmann::ordered_json::array();
    for (float x : record.vector) vec.push_back(x);
    j["vector"] = std::move(vec);
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::string serialize_embeddings_binary(const EmbeddingStore& store) {
  std::string out(kBinaryEmbeddingMagic);
  for (const auto& record : store.records()) {
    if (record.key.size() > 0xFFFF || record.model.size() > 0xFFFF) {
      throw ValidationError("embedding " + record.key + ": key or model name too long for binary format");
    }
    put_uint(out, record.key.size(), 2);
    out += record.key;
    put_uint(out, static_cast<std::uint8_t>(record.kind), 1);
    put_uint(out, record.model.size(), 2);
    out += record.model;
    put_uint(out, record.dim, 4);
    for (float x : record.vector) put_uint(out, std::bit_cast<std::uint32_t>(x), 4);
  }
  return out;
}

}  // namespace vwsd
