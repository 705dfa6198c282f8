#pragma once

// Mathematical primitives for coherent one-way (COW) key distribution:
// channel attenuation, coherent-state overlaps, binary entropy and the
// Holevo quantity of two equiprobable pure states.
//
// Every function here is pure and reentrant. Domain violations throw
// std::domain_error.

namespace cowqkd {

/// Legitimate-user configuration.
struct ProtocolParams {
  double mu = 0.0;              ///< source intensity (mean photon number)
  double decoy_fraction = 0.0;  ///< probability of sending a decoy pulse
  double delta = 0.0;           ///< fiber attenuation, dB/km

  /// Throws std::domain_error unless mu > 0, 0 <= f < 1 and delta > 0.
  void validate() const;
};

/// A channel length together with the intensities it implies.
struct ChannelPoint {
  double length_km = 0.0;
  double mu_b = 0.0;      ///< intensity reaching Bob through the lossy line
  double mu_e_max = 0.0;  ///< intensity an eavesdropper can tap off unnoticed
};

/// mu * 10^(-delta * length / 10).
double attenuate(double mu, double delta, double length_km);

/// mu - attenuate(mu, delta, length_km).
double max_withdrawable_intensity(double mu, double delta, double length_km);

ChannelPoint channel_point(const ProtocolParams& params, double length_km);

/// Shannon entropy of a Bernoulli(q) variable in bits, with 0 log 0 = 0.
double binary_entropy(double q);

/// The q in [0, 1/2] with binary_entropy(q) == y. Bisection to 1e-12 in q.
double binary_entropy_inverse(double y);

/// Inner product of |sqrt(mu_e)>|0> and |0>|sqrt(mu_e)>, i.e. exp(-mu_e).
double coherent_pair_overlap(double mu_e);

/// Holevo quantity of two equiprobable pure states with the given absolute
/// overlap. The mixture has eigenvalues (1 +- s) / 2.
double holevo_two_pure(double overlap);

/// 1 - exp(-mu): probability that a threshold detector fires on a coherent
/// pulse of intensity mu.
double click_probability(double mu);

}  // namespace cowqkd
