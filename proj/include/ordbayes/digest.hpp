#pragma once

#include <filesystem>
#include <string>

namespace ordbayes {

/// SHA-256 of a file's raw bytes, lowercase hex. Throws DataError when the
/// file cannot be read.
std::string sha256_file(const std::filesystem::path& path);

std::string sha256_bytes(const void* data, std::size_t size);

} // namespace ordbayes
