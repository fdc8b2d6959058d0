#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>

namespace swbf {

/// One step of the splitmix64 sequence; advances `state` and returns the mixed output.
std::uint64_t splitmix64(std::uint64_t& state) noexcept;

/// xoshiro256** seeded through splitmix64. Every stochastic routine in the
/// library takes one of these (or a seed to build one) so runs are reproducible
/// across platforms and standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) noexcept;

  std::uint64_t next_u64() noexcept;

  /// Uniform in [0, 1) with 53 bits of resolution.
  double uniform() noexcept;
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller; caches the second variate.
  double normal() noexcept;

  /// Uniform integer in [0, n), unbiased.
  std::size_t index(std::size_t n) noexcept;

  template <typename T>
  void shuffle(std::span<T> items) noexcept {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[index(i)]);
    }
  }

 private:
  std::array<std::uint64_t, 4> s_{};
  double cached_normal_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace swbf
