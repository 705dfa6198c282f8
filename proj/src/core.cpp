#include "cowqkd/core.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace cowqkd {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::domain_error(what);
}

}  // namespace

void ProtocolParams::validate() const {
  require(std::isfinite(mu) && mu > 0.0, "source intensity must be positive");
  require(decoy_fraction >= 0.0 && decoy_fraction < 1.0,
          "decoy fraction must lie in [0, 1)");
  require(std::isfinite(delta) && delta > 0.0,
          "attenuation coefficient must be positive");
}

double attenuate(double mu, double delta, double length_km) {
  require(mu > 0.0, "attenuate: intensity must be positive");
  require(delta > 0.0, "attenuate: attenuation coefficient must be positive");
  require(length_km >= 0.0, "attenuate: length must be non-negative");
  return mu * std::pow(10.0, -delta * length_km / 10.0);
}

double max_withdrawable_intensity(double mu, double delta, double length_km) {
  return mu - attenuate(mu, delta, length_km);
}

ChannelPoint channel_point(const ProtocolParams& params, double length_km) {
  params.validate();
  ChannelPoint point;
  point.length_km = length_km;
  point.mu_b = attenuate(params.mu, params.delta, length_km);
  point.mu_e_max = params.mu - point.mu_b;
  return point;
}

double binary_entropy(double q) {
  require(q >= 0.0 && q <= 1.0, "binary_entropy: argument outside [0, 1]");
  if (q == 0.0 || q == 1.0) return 0.0;
  if (q == 0.5) return 1.0;
  // log1p keeps the (1 - q) term accurate for small q.
  return (-q * std::log(q) - (1.0 - q) * std::log1p(-q)) / std::log(2.0);
}

double binary_entropy_inverse(double y) {
  require(y >= 0.0 && y <= 1.0,
          "binary_entropy_inverse: argument outside [0, 1]");
  if (y == 0.0) return 0.0;
  if (y == 1.0) return 0.5;
  double lo = 0.0;
  double hi = 0.5;
  while (hi - lo > 1e-13) {
    const double mid = 0.5 * (lo + hi);
    if (binary_entropy(mid) < y) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double coherent_pair_overlap(double mu_e) {
  require(mu_e >= 0.0, "coherent_pair_overlap: negative intensity");
  return std::exp(-mu_e);
}

double holevo_two_pure(double overlap) {
  require(overlap >= 0.0 && overlap <= 1.0,
          "holevo_two_pure: overlap outside [0, 1]");
  return binary_entropy(0.5 * (1.0 + overlap));
}

double click_probability(double mu) {
  require(mu >= 0.0, "click_probability: negative intensity");
  return -std::expm1(-mu);
}

}  // namespace cowqkd
