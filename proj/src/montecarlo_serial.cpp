// Single-threaded reference drivers. Kept for testing the OpenMP kernels and
// as the baseline in the benchmark.

#include <stdexcept>

#include "cowqkd/montecarlo.hpp"
#include "montecarlo_kernel.hpp"

namespace cowqkd::mc {

namespace detail {

RunTallies run_serial(const LinkModel& model, std::uint64_t n_pulses,
                      std::uint64_t seed) {
  if (n_pulses == 0) throw std::invalid_argument("n_pulses must be >= 1");
  RunTallies total;
  for (std::uint64_t i = 0; i < n_pulses; ++i)
    simulate_pulse(model, seed, i, total);
  return total;
}

}  // namespace detail

namespace serial {

TrialStats simulate_no_attack(const ProtocolParams& params, double length_km,
                              std::uint64_t n_pulses, std::uint64_t seed) {
  const detail::LinkModel model = detail::no_attack_model(params, length_km);
  return detail::to_trial_stats(detail::run_serial(model, n_pulses, seed),
                                n_pulses, seed);
}

TrialStats simulate_active_attack(const ProtocolParams& params,
                                  double length_km,
                                  const ActiveAttackPlan& plan,
                                  std::uint64_t n_pulses, std::uint64_t seed) {
  double raw_beta = 0.0;
  const detail::LinkModel model =
      detail::attack_model(params, length_km, plan, raw_beta);
  const detail::RunTallies tallies = detail::run_serial(model, n_pulses, seed);
  detail::check_blocking_budget(plan, raw_beta, tallies);
  return detail::to_trial_stats(tallies, n_pulses, seed);
}

}  // namespace serial

}  // namespace cowqkd::mc
