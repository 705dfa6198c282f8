#pragma once

#include <cstdint>
#include <limits>

namespace cowqkd {

/// SplitMix64 (Steele, Lea and Flood 2014). Satisfies
/// UniformRandomBitGenerator; copying a stream forks an identical sequence.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

  explicit constexpr SplitMix64(std::uint64_t state) : state_(state) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  constexpr result_type operator()() {
    state_ += kGamma;
    return mix(state_);
  }

  /// Uniform double in [0, 1) from the top 53 bits.
  constexpr double uniform() {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }

 private:
  std::uint64_t state_;
};

/// Independent random lanes consumed by one simulated pulse.
enum class PulseLane : std::uint64_t {
  pulse_class = 0,
  eve = 1,
  block = 2,
  bob = 3,
};

/// Counter-based substream keyed by (seed, pulse index, lane). Any pulse can
/// be simulated in isolation, so results do not depend on how the pulse
/// range is partitioned among threads.
constexpr SplitMix64 pulse_stream(std::uint64_t seed, std::uint64_t pulse,
                                  PulseLane lane) {
  const std::uint64_t key = SplitMix64::mix(seed + SplitMix64::kGamma);
  const std::uint64_t counter = pulse * 4 + static_cast<std::uint64_t>(lane);
  return SplitMix64(SplitMix64::mix(key ^ SplitMix64::mix(counter + 1)));
}

}  // namespace cowqkd
