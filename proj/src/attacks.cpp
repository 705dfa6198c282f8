#include "cowqkd/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace cowqkd {

namespace {

// Golden-section search for the maximum of a unimodal function on [lo, hi].
template <class F>
double golden_section_maximize(F&& f, double lo, double hi, double tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = hi - inv_phi * (hi - lo);
  double d = lo + inv_phi * (hi - lo);
  double fc = f(c);
  double fd = f(d);
  while (hi - lo > tol) {
    if (fc >= fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - inv_phi * (hi - lo);
      fc = f(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + inv_phi * (hi - lo);
      fd = f(d);
    }
  }
  return 0.5 * (lo + hi);
}

// Linear grid over (0, hi] merged with a log grid that resolves the
// maximizer at long distances, where it sits far below the linear step.
std::vector<double> intensity_search_grid(double hi) {
  constexpr int kLinear = 1000;
  constexpr int kLog = 400;
  constexpr double kLogLow = 1e-9;
  std::vector<double> grid;
  grid.reserve(kLinear + kLog);
  for (int i = 1; i <= kLinear; ++i) grid.push_back(hi * i / kLinear);
  const double log_step = std::log(hi / kLogLow) / (kLog - 1);
  for (int i = 0; i < kLog - 1; ++i)
    grid.push_back(kLogLow * std::exp(log_step * i));
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

}  // namespace

const char* to_string(AttackKind kind) {
  switch (kind) {
    case AttackKind::beam_splitting:
      return "beam_splitting";
    case AttackKind::active_beam_splitting:
      return "active_beam_splitting";
  }
  return "unknown";
}

double critical_qber(double i_ae) {
  if (!(i_ae >= 0.0 && i_ae <= 1.0))
    throw std::domain_error("critical_qber: information outside [0, 1]");
  if (i_ae >= 1.0 - kFullInformationTolerance) return 0.0;
  return binary_entropy_inverse(1.0 - i_ae);
}

AttackReport bs_attack(const ProtocolParams& params, double length_km) {
  const ChannelPoint point = channel_point(params, length_km);
  AttackReport report;
  report.attack_kind = AttackKind::beam_splitting;
  report.i_ae = holevo_two_pure(coherent_pair_overlap(point.mu_e_max));
  report.qber_critical = critical_qber(report.i_ae);
  report.fully_insecure = false;
  return report;
}

ActiveAttackPlan active_plan(const ProtocolParams& params, double length_km,
                             double mu_e) {
  const ChannelPoint point = channel_point(params, length_km);
  if (!(mu_e >= 0.0))
    throw std::domain_error("active_plan: negative tap intensity");
  const double slack = mu_e - point.mu_e_max;
  if (slack > 4.0 * std::numeric_limits<double>::epsilon() * params.mu)
    throw std::domain_error(
        "active_plan: tap intensity exceeds the channel loss");

  ActiveAttackPlan plan;
  plan.mu_e = mu_e;
  plan.mu_b_prime = params.mu - mu_e;
  plan.p_conc_inf = click_probability(mu_e);
  plan.p_conc_cont = click_probability(2.0 * mu_e);
  plan.p_conc_total = (1.0 - params.decoy_fraction) * plan.p_conc_inf +
                      params.decoy_fraction * plan.p_conc_cont;

  // (1 - b)(1 - e^-mu_b') = 1 - e^-mu_b, rearranged so that mu_b' == mu_b
  // yields exactly zero.
  const double excess = std::max(0.0, point.mu_e_max - mu_e);
  const double bob_prime = click_probability(plan.mu_b_prime);
  plan.raw_block_fraction =
      std::exp(-point.mu_b) * click_probability(excess) / bob_prime;
  plan.block_fraction =
      std::clamp(plan.raw_block_fraction, 0.0, 1.0 - plan.p_conc_inf);
  if (plan.raw_block_fraction >= 1.0 - plan.p_conc_inf)
    plan.pass_fraction = plan.p_conc_inf;
  else if (excess > 0.0)
    plan.pass_fraction = click_probability(point.mu_b) / bob_prime;
  return plan;
}

double active_eve_info(const ActiveAttackPlan& plan) {
  if (plan.blocking_saturated()) return 1.0;
  return std::min(1.0, plan.p_conc_inf / plan.pass_fraction);
}

double optimal_mu_e(const ProtocolParams& params, double length_km) {
  const ChannelPoint point = channel_point(params, length_km);
  return std::min(point.mu_e_max, params.mu / 2.0);
}

double critical_length(double delta) {
  if (!(delta > 0.0))
    throw std::domain_error("critical_length: attenuation must be positive");
  return 10.0 * std::log10(2.0) / delta;
}

AttackReport active_attack(const ProtocolParams& params, double length_km) {
  AttackReport report;
  report.attack_kind = AttackKind::active_beam_splitting;
  report.plan = active_plan(params, length_km, optimal_mu_e(params, length_km));
  report.i_ae = active_eve_info(*report.plan);
  report.fully_insecure = report.i_ae >= 1.0 - kFullInformationTolerance;
  report.qber_critical = critical_qber(report.i_ae);
  return report;
}

double fully_insecure_length(const ProtocolParams& params) {
  params.validate();
  // Saturation needs 1 - e^-mu_b <= (1 - e^-mu/2)^2 with Eve tapping mu/2.
  const double eve = click_probability(params.mu / 2.0);
  const double mu_b = -std::log1p(-eve * eve);
  return 10.0 / params.delta * std::log10(params.mu / mu_b);
}

double key_rate_margin(const ProtocolParams& params, double length_km) {
  const AttackReport report = active_attack(params, length_km);
  const double bob = click_probability(attenuate(params.mu, params.delta,
                                                 length_km));
  return bob * (1.0 - report.i_ae);
}

SourceIntensityOptimum optimal_source_intensity(double delta,
                                                double decoy_fraction,
                                                double length_km) {
  auto margin = [&](double mu) {
    return key_rate_margin(ProtocolParams{mu, decoy_fraction, delta},
                           length_km);
  };
  // Validates all arguments up front.
  ProtocolParams{kMaxSourceIntensity, decoy_fraction, delta}.validate();
  if (!(length_km >= 0.0))
    throw std::domain_error("optimal_source_intensity: negative length");

  const std::vector<double> grid = intensity_search_grid(kMaxSourceIntensity);
  std::size_t best = 0;
  double best_value = margin(grid[0]);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double value = margin(grid[i]);
    if (value > best_value) {
      best_value = value;
      best = i;
    }
  }

  SourceIntensityOptimum result{grid[best], best_value, best_value > 0.0};
  if (!result.secure) return result;

  const double lo = best == 0 ? 0.5 * grid[0] : grid[best - 1];
  const double hi = best + 1 == grid.size() ? grid[best] : grid[best + 1];
  const double refined =
      golden_section_maximize(margin, lo, hi, 1e-10 * std::max(1.0, hi));
  // An endpoint maximum is approached from inside; snap to it.
  for (double candidate : {refined, hi}) {
    const double value = margin(candidate);
    if (value > result.margin) {
      result.mu = candidate;
      result.margin = value;
    }
  }
  return result;
}

}  // namespace cowqkd
