#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace toolgate {

std::string sha256_hex(std::string_view bytes);

// Throws std::runtime_error if the file cannot be read.
std::string sha256_file(const std::filesystem::path& path);

}  // namespace toolgate
