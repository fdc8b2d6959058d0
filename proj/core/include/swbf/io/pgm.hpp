#pragma once

#include <filesystem>
#include <string_view>

#include "swbf/envelope.hpp"

namespace swbf::io {

void save_pgm(const BModeImage& img, const std::filesystem::path& path, double dynamic_range = 60.0);

/// Reads a binary P5 image (maxval 255) back into dB: db = dr * (p / 255) - dr.
BModeImage decode_pgm(std::string_view bytes, double dynamic_range = 60.0);
BModeImage load_pgm(const std::filesystem::path& path, double dynamic_range = 60.0);

}  // namespace swbf::io
