#pragma once

#include <cstdint>
#include <limits>

namespace bgq {

// SplitMix64 output function (Steele, Lea & Flood). Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

// Counter-based 64-bit generator.
//
// The i-th output (i = 1, 2, ...) of a stream with seed s is
//     mix64(s + i * kGoldenGamma)
// which is exactly SplitMix64 started from state s. Sub-streams for replica r
// use the seed derive_seed(s, r) = mix64(s ^ mix64(r + kGoldenGamma)).
// Both rules use only 64-bit unsigned wrap-around arithmetic, so output is
// identical on every conforming platform.
//
// Satisfies std::uniform_random_bit_generator. A stream is single-owner.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  explicit RandomStream(std::uint64_t seed) noexcept : seed_(seed) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept {
    ++counter_;
    return mix64(seed_ + counter_ * kGoldenGamma);
  }

  // Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform() noexcept {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Independent stream for replica `index`; does not advance this stream.
  RandomStream substream(std::uint64_t index) const noexcept {
    return RandomStream(derive_seed(seed_, index));
  }

  static constexpr std::uint64_t derive_seed(std::uint64_t seed,
                                             std::uint64_t index) noexcept {
    return mix64(seed ^ mix64(index + kGoldenGamma));
  }

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

}  // namespace bgq
