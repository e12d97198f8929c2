#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace msa {

/// Writes via a sibling temp file and rename, creating parent directories.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

std::string read_file(const std::filesystem::path& path);

}  // namespace msa
