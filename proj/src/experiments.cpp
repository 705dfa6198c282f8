#include "cowqkd/experiments.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>

namespace cowqkd {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Evaluates fill(i) for i in [0, count) across an OpenMP team. The first
// exception thrown by any worker is rethrown on the calling thread.
template <class Fill>
void parallel_fill(std::size_t count, int threads, Fill&& fill) {
  const int team = threads > 0 ? threads : omp_get_max_threads();
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const auto n = static_cast<std::int64_t>(count);
#pragma omp parallel for schedule(dynamic, 4) num_threads(team)
  for (std::int64_t i = 0; i < n; ++i) {
    try {
      fill(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

void fill_active(SweepRow& row, const ProtocolParams& params,
                 double length_km) {
  const AttackReport active = active_attack(params, length_km);
  row.qber_active = active.qber_critical;
  row.i_ae_active = active.i_ae;
  row.mu_e_opt = active.plan->mu_e;
  row.block_fraction = active.plan->block_fraction;
  row.fully_insecure = active.fully_insecure;
  row.margin = click_probability(attenuate(params.mu, params.delta,
                                           length_km)) *
               (1.0 - active.i_ae);
}

}  // namespace

void SweepSpec::validate() const {
  if (mu_list.empty()) throw InvalidSpecError("mu list must not be empty");
  for (double mu : mu_list)
    if (!(std::isfinite(mu) && mu > 0.0))
      throw InvalidSpecError("every mu must be positive");
  if (!(std::isfinite(delta) && delta > 0.0))
    throw InvalidSpecError("delta must be positive");
  if (!(decoy_fraction >= 0.0 && decoy_fraction < 1.0))
    throw InvalidSpecError("decoy fraction must lie in [0, 1)");
  lengths.validate();
  if (!attacks.bs && !attacks.active)
    throw InvalidSpecError("at least one attack must be selected");
}

SweepTable sweep_qber_curves(const SweepSpec& spec, int threads) {
  spec.validate();
  const std::vector<double> lengths = spec.lengths.points();
  SweepTable table(spec.mu_list.size() * lengths.size());
  // Row order is fixed by index: mu-major, then ascending length.
  std::vector<double> mus = spec.mu_list;
  std::sort(mus.begin(), mus.end());
  parallel_fill(table.size(), threads, [&](std::size_t index) {
    const double mu = mus[index / lengths.size()];
    const double length = lengths[index % lengths.size()];
    const ProtocolParams params{mu, spec.decoy_fraction, spec.delta};
    SweepRow row{mu, length, kNaN, kNaN, kNaN, kNaN, kNaN, false, kNaN, kNaN};
    if (spec.attacks.bs) row.qber_bs = bs_attack(params, length).qber_critical;
    if (spec.attacks.active) fill_active(row, params, length);
    table[index] = row;
  });
  return table;
}

SweepTable sweep_optimal_intensity(double delta, double decoy_fraction,
                                   const LengthRange& lengths, int threads) {
  SweepSpec spec;
  spec.delta = delta;
  spec.decoy_fraction = decoy_fraction;
  spec.lengths = lengths;
  spec.validate();

  const std::vector<double> points = lengths.points();
  SweepTable table(points.size());
  parallel_fill(table.size(), threads, [&](std::size_t index) {
    const double length = points[index];
    const SourceIntensityOptimum best =
        optimal_source_intensity(delta, decoy_fraction, length);
    const ProtocolParams params{best.mu, decoy_fraction, delta};
    SweepRow row{best.mu, length, kNaN, kNaN, kNaN,
                 kNaN,    kNaN,   false, kNaN, best.mu};
    row.qber_bs = bs_attack(params, length).qber_critical;
    fill_active(row, params, length);
    table[index] = row;
  });
  return table;
}

// Monte Carlo cross-validation -------------------------------------------

const char* to_string(CheckStatus status) {
  switch (status) {
    case CheckStatus::pass:
      return "pass";
    case CheckStatus::fail:
      return "fail";
    case CheckStatus::low_power:
      return "low_power";
  }
  return "unknown";
}

ValidationCheck compare_rate(std::string name, const mc::Rate& rate,
                             double analytic, double sigma) {
  ValidationCheck check;
  check.name = std::move(name);
  check.empirical = rate.value;
  check.analytic = analytic;
  check.trials = rate.trials;
  const double n = static_cast<double>(rate.trials);
  const double variance = analytic * (1.0 - analytic);
  if (rate.trials == 0) {
    check.status = CheckStatus::low_power;
    return check;
  }
  if (variance <= 0.0) {
    // Degenerate rate: the outcome is certain, so any deviation is a failure.
    const bool same = rate.value == analytic;
    check.z = same ? 0.0 : std::numeric_limits<double>::infinity();
    check.status = same ? CheckStatus::pass : CheckStatus::fail;
    return check;
  }
  check.std_error = std::sqrt(variance / n);
  check.z = (rate.value - analytic) / check.std_error;
  if (n * variance < kLowPowerVariance) {
    check.status = CheckStatus::low_power;
  } else {
    check.status =
        std::abs(check.z) <= sigma ? CheckStatus::pass : CheckStatus::fail;
  }
  return check;
}

bool ValidationReport::passed() const {
  return std::none_of(checks.begin(), checks.end(), [](const auto& c) {
    return c.status == CheckStatus::fail;
  });
}

ValidationReport run_montecarlo_validation(const ProtocolParams& params,
                                           double length_km,
                                           std::uint64_t n_pulses,
                                           std::uint64_t seed, int threads) {
  using mc::ClickPattern;
  using mc::PulseClass;
  params.validate();
  if (n_pulses == 0) throw InvalidSpecError("pulse count must be >= 1");

  ValidationReport report;
  report.params = params;
  report.length_km = length_km;
  report.n_pulses = n_pulses;
  report.seed = seed;
  report.plan = active_plan(params, length_km, optimal_mu_e(params, length_km));
  const ChannelPoint point = channel_point(params, length_km);
  const double bob_rate = click_probability(point.mu_b);
  const bool decoys = params.decoy_fraction > 0.0;

  const mc::TrialStats clean =
      mc::simulate_no_attack(params, length_km, n_pulses, seed, threads);
  auto& checks = report.checks;
  checks.push_back(compare_rate("no_attack.bob_information_click_rate",
                                clean.bob_information_click_rate(), bob_rate));
  if (decoys)
    checks.push_back(compare_rate(
        "no_attack.decoy_double_click_rate",
        clean.pattern_rate(PulseClass::decoy, ClickPattern::both),
        bob_rate * bob_rate));

  const mc::TrialStats attacked = mc::simulate_active_attack(
      params, length_km, report.plan, n_pulses, seed, threads);
  const mc::ExpectedRates expected =
      mc::expected_active_attack(params, report.plan);
  checks.push_back(compare_rate("attack.bob_information_click_rate",
                                attacked.bob_information_click_rate(),
                                bob_rate));
  checks.push_back(compare_rate("attack.eve_information_conclusive_rate",
                                attacked.eve_information_conclusive_rate(),
                                report.plan.p_conc_inf));
  checks.push_back(compare_rate("attack.information_blocked_fraction",
                                attacked.information_blocked_fraction(),
                                report.plan.block_fraction));
  checks.push_back(compare_rate("attack.eve_information_proxy",
                                attacked.eve_information_proxy(),
                                active_eve_info(report.plan)));
  checks.push_back(compare_rate("attack.blocked_fraction",
                                attacked.blocked_fraction(),
                                expected.blocked_fraction));
  if (decoys)
    checks.push_back(compare_rate(
        "attack.decoy_double_click_rate",
        attacked.pattern_rate(PulseClass::decoy, ClickPattern::both),
        expected.of(PulseClass::decoy).bob[2]));

  report.distortion = mc::decoy_distortion(params, length_km, report.plan,
                                           n_pulses, seed, threads);
  report.distortion_expected = report.plan.mu_e < point.mu_e_max;
  return report;
}

}  // namespace cowqkd
