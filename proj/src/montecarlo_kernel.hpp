#pragma once

// Per-pulse physics shared by the OpenMP and serial drivers.

#include <array>
#include <cstdint>

#include "cowqkd/montecarlo.hpp"

namespace cowqkd::mc::detail {

struct LinkModel {
  double decoy_fraction = 0.0;
  double bob_intensity = 0.0;       ///< what reaches Bob in this scenario
  double baseline_intensity = 0.0;  ///< what reaches Bob with no attack
  double eve_intensity = 0.0;
  double block_probability = 0.0;
  bool attacked = false;
};

/// [class][attacked pattern][baseline pattern]
using PairedCounts =
    std::array<std::array<std::array<std::uint64_t, kClickPatterns>,
                          kClickPatterns>,
               kPulseClasses>;

struct RunTallies {
  std::array<ClassTally, kPulseClasses> by_class{};
  PairedCounts paired{};

  RunTallies& operator+=(const RunTallies& other);
};

inline ClickPattern pattern_of(bool slot0, bool slot1) {
  return static_cast<ClickPattern>(static_cast<int>(slot0) +
                                   static_cast<int>(slot1));
}

inline void simulate_pulse(const LinkModel& model, std::uint64_t seed,
                           std::uint64_t index, RunTallies& tallies) {
  SplitMix64 class_rng = pulse_stream(seed, index, PulseLane::pulse_class);
  const PulseClass cls = draw_pulse_class(model.decoy_fraction, class_rng);
  const bool lit0 = cls != PulseClass::bit1;
  const bool lit1 = cls != PulseClass::bit0;

  bool eve_conclusive = false;
  bool blocked = false;
  if (model.attacked) {
    SplitMix64 eve_rng = pulse_stream(seed, index, PulseLane::eve);
    const bool e0 = detector_click(lit0 ? model.eve_intensity : 0.0, eve_rng);
    const bool e1 = detector_click(lit1 ? model.eve_intensity : 0.0, eve_rng);
    eve_conclusive = e0 || e1;
    if (!eve_conclusive) {
      SplitMix64 block_rng = pulse_stream(seed, index, PulseLane::block);
      blocked = block_rng.uniform() < model.block_probability;
    }
  }

  // The baseline replays Bob's draws at the unattacked intensity.
  SplitMix64 bob_rng = pulse_stream(seed, index, PulseLane::bob);
  SplitMix64 baseline_rng = bob_rng;
  const bool b0 = detector_click(lit0 ? model.bob_intensity : 0.0, bob_rng);
  const bool b1 = detector_click(lit1 ? model.bob_intensity : 0.0, bob_rng);
  const bool r0 =
      detector_click(lit0 ? model.baseline_intensity : 0.0, baseline_rng);
  const bool r1 =
      detector_click(lit1 ? model.baseline_intensity : 0.0, baseline_rng);

  const ClickPattern arm = pattern_of(b0, b1);
  const ClickPattern seen = blocked ? ClickPattern::none : arm;
  const ClickPattern baseline = pattern_of(r0, r1);

  const auto c = static_cast<std::size_t>(cls);
  ClassTally& tally = tallies.by_class[c];
  ++tally.sent;
  tally.eve_conclusive += eve_conclusive;
  tally.blocked += blocked;
  ++tally.bob[static_cast<std::size_t>(seen)];
  tally.eve_and_bob_conclusive += eve_conclusive && seen != ClickPattern::none;
  ++tally.arm_joint[eve_conclusive][arm != ClickPattern::none];
  ++tallies.paired[c][static_cast<std::size_t>(seen)]
                  [static_cast<std::size_t>(baseline)];
}

LinkModel no_attack_model(const ProtocolParams& params, double length_km);

/// Validates the plan against the channel. The model's block probability is
/// clamped to 1; the unclamped value is returned through raw_block_probability.
LinkModel attack_model(const ProtocolParams& params, double length_km,
                       const ActiveAttackPlan& plan,
                       double& raw_block_probability);

/// Throws InfeasiblePlanError when the plan's block fraction exceeds the
/// simulated inconclusive share of information pulses by more than 5 sigma.
void check_blocking_budget(const ActiveAttackPlan& plan,
                           double raw_block_probability,
                           const RunTallies& tallies);

TrialStats to_trial_stats(const RunTallies& tallies, std::uint64_t n_pulses,
                          std::uint64_t seed);

RunTallies run_parallel(const LinkModel& model, std::uint64_t n_pulses,
                        std::uint64_t seed, int threads);
RunTallies run_serial(const LinkModel& model, std::uint64_t n_pulses,
                      std::uint64_t seed);

}  // namespace cowqkd::mc::detail
