#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "swbf/geometry.hpp"

namespace swbf::io {

inline constexpr std::string_view kCubeMagic = "URFC";
inline constexpr std::uint32_t kCubeVersion = 1;

/// magic, version u32, L, N, E u32, sampling and center frequency f64,
/// sound speed f64, pitch f64, f32 payload in [l][n][e] order, CRC-32 trailer.
/// Samples are narrowed to f32. Geometry fields outside the header keep
/// their defaults on decode; aperture_size must be set by the caller.
std::string encode_cube(const RfCube& cube);
RfCube decode_cube(std::string_view bytes);

void save_cube(const RfCube& cube, const std::filesystem::path& path);
RfCube load_cube(const std::filesystem::path& path);

/// Widest run of nonzero elements over all scan lines; 0 for an all-zero cube.
std::size_t infer_aperture_size(const RfCube& cube);

}  // namespace swbf::io
