#pragma once

#include <optional>

#include "cowqkd/core.hpp"

namespace cowqkd {

/// Eve's choice in the active beam-splitting attack and everything it
/// implies for a given channel point.
struct ActiveAttackPlan {
  double mu_e = 0.0;        ///< intensity tapped off and measured by Eve
  double mu_b_prime = 0.0;  ///< intensity forwarded losslessly to Bob
  double raw_block_fraction = 0.0;  ///< solution of the budget equation
  double block_fraction = 0.0;      ///< raw value clamped to [0, 1 - p_conc_inf]
  double pass_fraction = 1.0;       ///< 1 - block_fraction, without cancellation
  double p_conc_inf = 0.0;          ///< conclusive probability, information states
  double p_conc_cont = 0.0;         ///< conclusive probability, decoy states
  double p_conc_total = 0.0;        ///< decoy-fraction weighted mixture

  /// True when Eve blocks every pulse she failed to read.
  [[nodiscard]] bool blocking_saturated() const {
    return block_fraction >= 1.0 - p_conc_inf;
  }
};

enum class AttackKind { beam_splitting, active_beam_splitting };

const char* to_string(AttackKind kind);

struct AttackReport {
  AttackKind attack_kind = AttackKind::beam_splitting;
  double i_ae = 0.0;           ///< Eve's information per sifted bit
  double qber_critical = 0.5;  ///< QBER at which I_AB = 1 - h2(QBER) = I_AE
  bool fully_insecure = false;
  std::optional<ActiveAttackPlan> plan;  ///< only for the active attack
};

/// i_ae at or above this counts as complete knowledge of the sifted key.
inline constexpr double kFullInformationTolerance = 1e-12;

/// Upper end of the source-intensity search.
inline constexpr double kMaxSourceIntensity = 2.0;

/// Critical QBER for a given eavesdropper information, 0 for full knowledge.
double critical_qber(double i_ae);

/// Standard beam-splitting attack: Eve keeps the line loss and decodes
/// collectively, bounded by the Holevo quantity of her two-mode states.
AttackReport bs_attack(const ProtocolParams& params, double length_km);

/// Throws std::domain_error when mu_e exceeds the withdrawable intensity.
ActiveAttackPlan active_plan(const ProtocolParams& params, double length_km,
                             double mu_e);

/// min(1, p_conc_inf / (1 - b)).
double active_eve_info(const ActiveAttackPlan& plan);

/// Eve's information-maximizing tap intensity, min(mu_e_max, mu / 2).
double optimal_mu_e(const ProtocolParams& params, double length_km);

/// Length beyond which withdrawing mu / 2 and blocking pays off:
/// 10 log10(2) / delta.
double critical_length(double delta);

AttackReport active_attack(const ProtocolParams& params, double length_km);

/// Smallest length at which the active attack gives Eve the whole key
/// without adding errors.
double fully_insecure_length(const ProtocolParams& params);

/// Secret bits per sent pulse, (1 - e^-mu_b)(1 - I_AE), against the
/// Eve-optimal active attack. Non-positive means no key.
double key_rate_margin(const ProtocolParams& params, double length_km);

struct SourceIntensityOptimum {
  double mu = 0.0;
  double margin = 0.0;
  /// False when no intensity in (0, kMaxSourceIntensity] yields a positive
  /// margin; mu and margin then describe the least bad grid point.
  bool secure = false;
};

/// Maximizes key_rate_margin over mu in (0, kMaxSourceIntensity]: coarse grid
/// scan for a bracket, then golden-section refinement.
SourceIntensityOptimum optimal_source_intensity(double delta,
                                                double decoy_fraction,
                                                double length_km);

}  // namespace cowqkd
