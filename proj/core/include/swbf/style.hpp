#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>

namespace swbf {

/// Output style selected by the AdaIN code.
enum class Style : unsigned char { Das = 0, Despeckle = 1, Deconvolution = 2, DeconvDespeckle = 3 };

inline constexpr std::array<Style, 4> kAllStyles{Style::Das, Style::Despeckle, Style::Deconvolution,
                                                 Style::DeconvDespeckle};

inline constexpr std::size_t index_of(Style s) noexcept { return static_cast<std::size_t>(s); }

/// Scalar style code c fed to the code generator.
inline constexpr double style_code(Style s) noexcept {
  constexpr std::array<double, 4> codes{-1.0, -0.5, 0.5, 1.0};
  return codes[index_of(s)];
}

/// CLI spelling: das, despeckle, deconv, deconv-despeckle.
std::string_view style_name(Style s) noexcept;

/// Identifier-safe spelling used in file formats: das, despeckle, deconv, deconv_despeckle.
std::string_view style_key(Style s) noexcept;

std::optional<Style> parse_style(std::string_view name) noexcept;

}  // namespace swbf
