#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>

namespace homog {

/// Stateless 64-bit finalizer used for counter-based derivations.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Child seed for stream `id` of `parent`. Pure, so replicas and walkers can
/// be generated in any order.
constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t id) noexcept {
  return mix64(mix64(parent) ^ (id * 0xd1b54a32d192ed03ULL + 0x8cb92ba72f3d8dd7ULL));
}

std::uint64_t derive_seed(std::uint64_t parent, std::initializer_list<std::uint64_t> path) noexcept;

/// Maps 64 random bits onto [0, 1) with 53-bit resolution.
constexpr double to_unit(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// SplitMix64 engine. Satisfies UniformRandomBitGenerator; cheap to seed,
/// which matters when every walker owns its own stream.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform on [0, 1).
  double uniform() noexcept { return to_unit((*this)()); }

  /// Uniform on (0, 1], safe for -log.
  double uniform_open_zero() noexcept { return 1.0 - uniform(); }

 private:
  std::uint64_t state_;
};

}  // namespace homog
