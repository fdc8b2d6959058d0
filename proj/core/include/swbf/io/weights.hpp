#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "swbf/switchable.hpp"

namespace swbf::io {

inline constexpr std::string_view kWeightsMagic = "SWBF";
inline constexpr std::uint32_t kWeightsVersion = 1;

/// Tensor archive holding "meta.arch", every parameter by name, and the four
/// evaluated codes ("code.<style>.mean", "code.<style>.var"). Codes are taken
/// from the stored set when present, otherwise evaluated through F.
std::string encode_weights(const SwitchableModel<float>& model);
SwitchableModel<float> decode_weights(std::string_view bytes);

void save_weights(const SwitchableModel<float>& model, const std::filesystem::path& path);
SwitchableModel<float> load_weights(const std::filesystem::path& path);

}  // namespace swbf::io
