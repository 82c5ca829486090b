#pragma once

#include <span>
#include <string>

namespace nopde {

/// SHA-256 digest as a lowercase hex string.
std::string sha256_hex(std::span<const char> data);
std::string sha256_file_hex(const std::string& path);

} // namespace nopde
