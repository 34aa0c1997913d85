#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace zmd::io {

std::string sha256_hex(const void* data, size_t size);
std::string sha256_hex(const std::string& text);
std::string sha256_file(const std::string& path);

}  // namespace zmd::io
