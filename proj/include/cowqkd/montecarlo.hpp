#pragma once

// Pulse-level simulation of the COW link with ideal threshold detectors,
// with and without the active beam-splitting attack.
//
// Each pulse draws from its own counter-based substream (see rng.hpp), so
// the OpenMP kernels and the serial reference kernels in namespace `serial`
// produce bit-identical tallies for any thread count.

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "cowqkd/attacks.hpp"
#include "cowqkd/core.hpp"
#include "cowqkd/rng.hpp"

namespace cowqkd::mc {

enum class PulseClass : std::uint8_t { bit0 = 0, bit1 = 1, decoy = 2 };
inline constexpr std::size_t kPulseClasses = 3;

/// What Bob's two time-slot detectors show for one pulse.
enum class ClickPattern : std::uint8_t { none = 0, single = 1, both = 2 };
inline constexpr std::size_t kClickPatterns = 3;

const char* to_string(PulseClass cls);
const char* to_string(ClickPattern pattern);

/// Draws bit0, bit1, decoy with probabilities ((1-f)/2, (1-f)/2, f).
PulseClass draw_pulse_class(double decoy_fraction, SplitMix64& rng);

/// Threshold detector on a coherent pulse: fires with probability
/// 1 - exp(-intensity). Consumes exactly one draw.
bool detector_click(double intensity, SplitMix64& rng);

struct ClassTally {
  std::uint64_t sent = 0;
  std::uint64_t eve_conclusive = 0;
  std::uint64_t blocked = 0;
  std::array<std::uint64_t, kClickPatterns> bob{};  // indexed by ClickPattern
  /// Bob conclusive and Eve conclusive on the same pulse.
  std::uint64_t eve_and_bob_conclusive = 0;
  /// [eve conclusive][Bob's arm fired], counted before any blocking.
  std::array<std::array<std::uint64_t, 2>, 2> arm_joint{};

  [[nodiscard]] std::uint64_t bob_conclusive() const {
    return bob[1] + bob[2];
  }

  ClassTally& operator+=(const ClassTally& other);
  friend bool operator==(const ClassTally&, const ClassTally&) = default;
};

/// Empirical proportion with its binomial standard error.
struct Rate {
  double value = 0.0;
  double std_error = 0.0;
  std::uint64_t trials = 0;
};

Rate make_rate(std::uint64_t successes, std::uint64_t trials);

struct TrialStats {
  std::uint64_t n_pulses = 0;
  std::uint64_t seed = 0;
  std::array<ClassTally, kPulseClasses> by_class{};

  [[nodiscard]] const ClassTally& of(PulseClass cls) const {
    return by_class[static_cast<std::size_t>(cls)];
  }
  /// bit0 and bit1 merged.
  [[nodiscard]] ClassTally information() const;

  [[nodiscard]] Rate bob_information_click_rate() const;
  [[nodiscard]] Rate eve_information_conclusive_rate() const;
  [[nodiscard]] Rate information_blocked_fraction() const;
  [[nodiscard]] Rate blocked_fraction() const;
  /// Share of Bob-conclusive information pulses that Eve also read.
  [[nodiscard]] Rate eve_information_proxy() const;
  [[nodiscard]] Rate pattern_rate(PulseClass cls, ClickPattern pattern) const;

  friend bool operator==(const TrialStats&, const TrialStats&) = default;
};

/// Probability with which Eve blocks a pulse she failed to read. Chosen so
/// that exactly the plan's block fraction of information pulses is removed.
double blocking_probability(const ActiveAttackPlan& plan);

/// Closed-form per-class probabilities under a given blocking policy.
struct ClassExpectation {
  double eve_conclusive = 0.0;
  double blocked = 0.0;
  std::array<double, kClickPatterns> bob{};
};

struct ExpectedRates {
  std::array<ClassExpectation, kPulseClasses> by_class{};
  double blocked_fraction = 0.0;  ///< over all pulses
  double eve_information_proxy = 0.0;

  [[nodiscard]] const ClassExpectation& of(PulseClass cls) const {
    return by_class[static_cast<std::size_t>(cls)];
  }
};

ExpectedRates expected_no_attack(const ProtocolParams& params,
                                 double length_km);
ExpectedRates expected_active_attack(const ProtocolParams& params,
                                     const ActiveAttackPlan& plan);

/// Raised when the plan asks Eve to block more pulses than she can.
class InfeasiblePlanError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// threads == 0 uses the OpenMP default.
TrialStats simulate_no_attack(const ProtocolParams& params, double length_km,
                              std::uint64_t n_pulses, std::uint64_t seed,
                              int threads = 0);

TrialStats simulate_active_attack(const ProtocolParams& params,
                                  double length_km,
                                  const ActiveAttackPlan& plan,
                                  std::uint64_t n_pulses, std::uint64_t seed,
                                  int threads = 0);

namespace serial {

TrialStats simulate_no_attack(const ProtocolParams& params, double length_km,
                              std::uint64_t n_pulses, std::uint64_t seed);

TrialStats simulate_active_attack(const ProtocolParams& params,
                                  double length_km,
                                  const ActiveAttackPlan& plan,
                                  std::uint64_t n_pulses, std::uint64_t seed);

}  // namespace serial

/// One (class, pattern) comparison of Bob's statistics with and without the
/// attack.
struct DistortionRow {
  PulseClass cls = PulseClass::bit0;
  ClickPattern pattern = ClickPattern::none;
  Rate attacked;
  Rate baseline;
  /// attacked - baseline, with the standard error of the paired difference.
  double difference = 0.0;
  double difference_std_error = 0.0;
  double z = 0.0;
  bool flagged = false;
};

struct DistortionReport {
  std::uint64_t n_pulses = 0;
  std::uint64_t seed = 0;
  double threshold_sigma = 5.0;
  std::vector<DistortionRow> rows;

  [[nodiscard]] bool any_flagged() const;
  [[nodiscard]] const DistortionRow* find(PulseClass cls,
                                          ClickPattern pattern) const;
};

/// Compares Bob's per-class click patterns under the attack against the
/// unattacked link. Both runs share every random draw except Eve's, so the
/// comparison is paired and its noise is that of the pulses that differ.
/// Classes never sent (e.g. decoys when f = 0) produce no rows.
DistortionReport decoy_distortion(const ProtocolParams& params,
                                  double length_km,
                                  const ActiveAttackPlan& plan,
                                  std::uint64_t n_pulses, std::uint64_t seed,
                                  int threads = 0);

}  // namespace cowqkd::mc
