#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace latocc {

/// Lowercase hex SHA-256 of a byte string.
std::string sha256_hex(std::string_view bytes);
/// SHA-256 of a file's contents. Throws DataError if unreadable.
std::string sha256_file(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);

/// Writes via a sibling temp file and rename, creating parent directories.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// `target` relative to `base` when both resolve; otherwise `target` as given.
std::string relative_path(const std::filesystem::path& target, const std::filesystem::path& base);

}  // namespace latocc
