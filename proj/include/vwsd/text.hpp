#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace vwsd {

/// Collapses runs of ASCII whitespace to a single space and trims both ends.
std::string normalize_whitespace(std::string_view text);

std::vector<std::string> split(std::string_view text, char sep);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

std::string to_lower_ascii(std::string_view text);

/// Lowercase, every non-alphanumeric byte becomes a space, whitespace collapsed.
/// Used for fuzzy matching free text against captions.
std::string fold_for_matching(std::string_view text);

/// Lowercase hex SHA-256 digest of the bytes.
std::string sha256_hex(std::string_view bytes);

/// Byte-level edit distance (unit costs).
std::size_t levenshtein(std::string_view a, std::string_view b);

/// 1 - distance / max(len). Two empty strings are identical (1.0).
double levenshtein_ratio(std::string_view a, std::string_view b);

}  // namespace vwsd
