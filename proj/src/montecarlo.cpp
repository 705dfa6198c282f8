#include "cowqkd/montecarlo.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "montecarlo_kernel.hpp"

namespace cowqkd::mc {

const char* to_string(PulseClass cls) {
  switch (cls) {
    case PulseClass::bit0:
      return "bit0";
    case PulseClass::bit1:
      return "bit1";
    case PulseClass::decoy:
      return "decoy";
  }
  return "unknown";
}

const char* to_string(ClickPattern pattern) {
  switch (pattern) {
    case ClickPattern::none:
      return "no_click";
    case ClickPattern::single:
      return "single_click";
    case ClickPattern::both:
      return "double_click";
  }
  return "unknown";
}

PulseClass draw_pulse_class(double decoy_fraction, SplitMix64& rng) {
  const double u = rng.uniform();
  if (u < decoy_fraction) return PulseClass::decoy;
  return u < decoy_fraction + 0.5 * (1.0 - decoy_fraction) ? PulseClass::bit0
                                                           : PulseClass::bit1;
}

bool detector_click(double intensity, SplitMix64& rng) {
  return rng.uniform() < click_probability(intensity);
}

ClassTally& ClassTally::operator+=(const ClassTally& other) {
  sent += other.sent;
  eve_conclusive += other.eve_conclusive;
  blocked += other.blocked;
  for (std::size_t k = 0; k < kClickPatterns; ++k) bob[k] += other.bob[k];
  eve_and_bob_conclusive += other.eve_and_bob_conclusive;
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) arm_joint[i][j] += other.arm_joint[i][j];
  return *this;
}

Rate make_rate(std::uint64_t successes, std::uint64_t trials) {
  Rate rate;
  rate.trials = trials;
  if (trials == 0) return rate;
  const double n = static_cast<double>(trials);
  rate.value = static_cast<double>(successes) / n;
  rate.std_error = std::sqrt(rate.value * (1.0 - rate.value) / n);
  return rate;
}

ClassTally TrialStats::information() const {
  ClassTally merged = of(PulseClass::bit0);
  merged += of(PulseClass::bit1);
  return merged;
}

Rate TrialStats::bob_information_click_rate() const {
  const ClassTally info = information();
  return make_rate(info.bob_conclusive(), info.sent);
}

Rate TrialStats::eve_information_conclusive_rate() const {
  const ClassTally info = information();
  return make_rate(info.eve_conclusive, info.sent);
}

Rate TrialStats::information_blocked_fraction() const {
  const ClassTally info = information();
  return make_rate(info.blocked, info.sent);
}

Rate TrialStats::blocked_fraction() const {
  std::uint64_t blocked = 0;
  for (const ClassTally& t : by_class) blocked += t.blocked;
  return make_rate(blocked, n_pulses);
}

Rate TrialStats::eve_information_proxy() const {
  const ClassTally info = information();
  return make_rate(info.eve_and_bob_conclusive, info.bob_conclusive());
}

Rate TrialStats::pattern_rate(PulseClass cls, ClickPattern pattern) const {
  const ClassTally& t = of(cls);
  return make_rate(t.bob[static_cast<std::size_t>(pattern)], t.sent);
}

double blocking_probability(const ActiveAttackPlan& plan) {
  const double inconclusive = 1.0 - plan.p_conc_inf;
  if (plan.block_fraction <= 0.0) return 0.0;
  return plan.block_fraction / inconclusive;
}

namespace {

std::array<double, kClickPatterns> patterns(double intensity, int lit_slots,
                                            double pass) {
  const double p = click_probability(intensity);
  std::array<double, kClickPatterns> out{};
  if (lit_slots == 1) {
    out = {1.0 - p, p, 0.0};
  } else {
    out = {(1.0 - p) * (1.0 - p), 2.0 * p * (1.0 - p), p * p};
  }
  for (double& v : out) v *= pass;
  out[0] += 1.0 - pass;
  return out;
}

constexpr int lit_slots(std::size_t cls) {
  return cls == static_cast<std::size_t>(PulseClass::decoy) ? 2 : 1;
}

}  // namespace

ExpectedRates expected_no_attack(const ProtocolParams& params,
                                 double length_km) {
  const ChannelPoint point = channel_point(params, length_km);
  ExpectedRates rates;
  for (std::size_t c = 0; c < kPulseClasses; ++c)
    rates.by_class[c].bob = patterns(point.mu_b, lit_slots(c), 1.0);
  return rates;
}

ExpectedRates expected_active_attack(const ProtocolParams& params,
                                     const ActiveAttackPlan& plan) {
  params.validate();
  const double beta = std::min(1.0, blocking_probability(plan));
  ExpectedRates rates;
  for (std::size_t c = 0; c < kPulseClasses; ++c) {
    ClassExpectation& e = rates.by_class[c];
    e.eve_conclusive = lit_slots(c) == 1 ? plan.p_conc_inf : plan.p_conc_cont;
    e.blocked = (1.0 - e.eve_conclusive) * beta;
    e.bob = patterns(plan.mu_b_prime, lit_slots(c), 1.0 - e.blocked);
  }
  const double f = params.decoy_fraction;
  rates.blocked_fraction = (1.0 - f) * rates.of(PulseClass::bit0).blocked +
                           f * rates.of(PulseClass::decoy).blocked;
  rates.eve_information_proxy =
      plan.p_conc_inf / (1.0 - rates.of(PulseClass::bit0).blocked);
  return rates;
}

namespace detail {

RunTallies& RunTallies::operator+=(const RunTallies& other) {
  for (std::size_t c = 0; c < kPulseClasses; ++c) {
    by_class[c] += other.by_class[c];
    for (std::size_t i = 0; i < kClickPatterns; ++i)
      for (std::size_t j = 0; j < kClickPatterns; ++j)
        paired[c][i][j] += other.paired[c][i][j];
  }
  return *this;
}

LinkModel no_attack_model(const ProtocolParams& params, double length_km) {
  const ChannelPoint point = channel_point(params, length_km);
  LinkModel model;
  model.decoy_fraction = params.decoy_fraction;
  model.bob_intensity = point.mu_b;
  model.baseline_intensity = point.mu_b;
  return model;
}

LinkModel attack_model(const ProtocolParams& params, double length_km,
                       const ActiveAttackPlan& plan,
                       double& raw_block_probability) {
  const ChannelPoint point = channel_point(params, length_km);
  const double tol = 1e-12 * params.mu;
  if (!(plan.mu_e >= 0.0) || plan.mu_e > point.mu_e_max + tol)
    throw std::invalid_argument(
        "attack plan: tap intensity outside [0, mu_e_max]");
  if (std::abs(plan.mu_b_prime - (params.mu - plan.mu_e)) > tol)
    throw std::invalid_argument(
        "attack plan: forwarded intensity inconsistent with the tap");
  if (!(plan.block_fraction >= 0.0 && plan.block_fraction <= 1.0))
    throw std::invalid_argument("attack plan: block fraction outside [0, 1]");

  raw_block_probability = blocking_probability(plan);
  LinkModel model;
  model.decoy_fraction = params.decoy_fraction;
  model.bob_intensity = plan.mu_b_prime;
  model.baseline_intensity = point.mu_b;
  model.eve_intensity = plan.mu_e;
  model.block_probability = std::min(1.0, raw_block_probability);
  model.attacked = true;
  return model;
}

void check_blocking_budget(const ActiveAttackPlan& plan,
                           double raw_block_probability,
                           const RunTallies& tallies) {
  if (raw_block_probability <= 1.0) return;
  ClassTally info = tallies.by_class[0];
  info += tallies.by_class[1];
  const Rate inconclusive = make_rate(info.sent - info.eve_conclusive, info.sent);
  if (plan.block_fraction > inconclusive.value + 5.0 * inconclusive.std_error)
    throw InfeasiblePlanError(
        "attack plan blocks more pulses than Eve fails to read");
}

TrialStats to_trial_stats(const RunTallies& tallies, std::uint64_t n_pulses,
                          std::uint64_t seed) {
  TrialStats stats;
  stats.n_pulses = n_pulses;
  stats.seed = seed;
  stats.by_class = tallies.by_class;
  return stats;
}

RunTallies run_parallel(const LinkModel& model, std::uint64_t n_pulses,
                        std::uint64_t seed, int threads) {
  if (n_pulses == 0) throw std::invalid_argument("n_pulses must be >= 1");
  const int team = threads > 0 ? threads : omp_get_max_threads();
  const auto n = static_cast<std::int64_t>(n_pulses);
  RunTallies total;
#pragma omp parallel num_threads(team)
  {
    RunTallies local;
#pragma omp for schedule(static)
    for (std::int64_t i = 0; i < n; ++i)
      simulate_pulse(model, seed, static_cast<std::uint64_t>(i), local);
#pragma omp critical
    total += local;
  }
  return total;
}

}  // namespace detail

TrialStats simulate_no_attack(const ProtocolParams& params, double length_km,
                              std::uint64_t n_pulses, std::uint64_t seed,
                              int threads) {
  const detail::LinkModel model = detail::no_attack_model(params, length_km);
  return detail::to_trial_stats(
      detail::run_parallel(model, n_pulses, seed, threads), n_pulses, seed);
}

TrialStats simulate_active_attack(const ProtocolParams& params,
                                  double length_km,
                                  const ActiveAttackPlan& plan,
                                  std::uint64_t n_pulses, std::uint64_t seed,
                                  int threads) {
  double raw_beta = 0.0;
  const detail::LinkModel model =
      detail::attack_model(params, length_km, plan, raw_beta);
  const detail::RunTallies tallies =
      detail::run_parallel(model, n_pulses, seed, threads);
  detail::check_blocking_budget(plan, raw_beta, tallies);
  return detail::to_trial_stats(tallies, n_pulses, seed);
}

bool DistortionReport::any_flagged() const {
  return std::any_of(rows.begin(), rows.end(),
                     [](const DistortionRow& r) { return r.flagged; });
}

const DistortionRow* DistortionReport::find(PulseClass cls,
                                            ClickPattern pattern) const {
  for (const DistortionRow& row : rows)
    if (row.cls == cls && row.pattern == pattern) return &row;
  return nullptr;
}

DistortionReport decoy_distortion(const ProtocolParams& params,
                                  double length_km,
                                  const ActiveAttackPlan& plan,
                                  std::uint64_t n_pulses, std::uint64_t seed,
                                  int threads) {
  double raw_beta = 0.0;
  const detail::LinkModel model =
      detail::attack_model(params, length_km, plan, raw_beta);
  const detail::RunTallies tallies =
      detail::run_parallel(model, n_pulses, seed, threads);
  detail::check_blocking_budget(plan, raw_beta, tallies);

  DistortionReport report;
  report.n_pulses = n_pulses;
  report.seed = seed;
  for (std::size_t c = 0; c < kPulseClasses; ++c) {
    const auto& joint = tallies.paired[c];
    const std::uint64_t sent = tallies.by_class[c].sent;
    if (sent == 0) continue;
    const double n = static_cast<double>(sent);
    for (std::size_t k = 0; k < kClickPatterns; ++k) {
      std::uint64_t attacked = 0;
      std::uint64_t baseline = 0;
      for (std::size_t j = 0; j < kClickPatterns; ++j) {
        attacked += joint[k][j];
        baseline += joint[j][k];
      }
      DistortionRow row;
      row.cls = static_cast<PulseClass>(c);
      row.pattern = static_cast<ClickPattern>(k);
      row.attacked = make_rate(attacked, sent);
      row.baseline = make_rate(baseline, sent);
      // D = 1[attacked == k] - 1[baseline == k] per pulse.
      const double mean = row.attacked.value - row.baseline.value;
      const double mean_sq =
          static_cast<double>(attacked + baseline - 2 * joint[k][k]) / n;
      const double var = std::max(0.0, mean_sq - mean * mean);
      row.difference = mean;
      row.difference_std_error = std::sqrt(var / n);
      if (mean != 0.0) {
        row.z = row.difference_std_error > 0.0
                    ? mean / row.difference_std_error
                    : std::copysign(std::numeric_limits<double>::infinity(),
                                    mean);
      }
      row.flagged = std::abs(row.z) > report.threshold_sigma;
      report.rows.push_back(row);
    }
  }
  return report;
}

}  // namespace cowqkd::mc
