#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "swbf/dataset.hpp"

namespace swbf::io {

inline constexpr std::string_view kDatasetMagic = "SWDS";
inline constexpr std::uint32_t kDatasetVersion = 1;

/// Tensor archive with, per split ("train", "val"): <split>.input [S][J][L][K],
/// <split>.targets [S][4][L] and <split>.meta [S][5] (mean, std, level_db, frame, depth).
std::string encode_dataset(const Dataset& ds);
Dataset decode_dataset(std::string_view bytes);

void save_dataset(const Dataset& ds, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

}  // namespace swbf::io
