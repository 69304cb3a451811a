#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace vwsd {

/// Whole file as bytes; throws Error naming the path when unreadable.
std::string read_file(const std::filesystem::path& path);

/// Writes via a sibling temp file and rename so readers never see a partial file.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

}  // namespace vwsd
