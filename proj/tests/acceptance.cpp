// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit status if
// any criterion fails. Runtime bounds are enforced as part of each criterion.

#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <random>
#include <sys/wait.h>
#include <string>
#include <vector>

#include "cowqkd/attacks.hpp"
#include "cowqkd/core.hpp"
#include "cowqkd/experiments.hpp"
#include "cowqkd/montecarlo.hpp"
#include "oracles.hpp"

using namespace cowqkd;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;

  void require(bool condition, const std::string& what) {
    if (!condition && ok) {
      ok = false;
      detail = what;
    }
  }
};

struct Criterion {
  int id;
  std::string title;
  double max_seconds;
  std::function<Outcome()> run;
};

double bs_floor(double mu) {
  return binary_entropy_inverse(
      1.0 - binary_entropy(0.5 * (1.0 + std::exp(-mu))));
}

Outcome critical_length_matches() {
  Outcome out;
  const double l = critical_length(0.2);
  out.require(std::abs(l - 10.0 * std::log10(2.0) / 0.2) <= 1e-12,
              "closed form mismatch");
  out.require(std::abs(l - 15.0) <= 0.1, fmt::format("l_crit = {}", l));
  out.detail = fmt::format("l_crit = {:.4f} km", l);
  return out;
}

Outcome qber_curve_shape() {
  Outcome out;
  for (double mu : {0.1, 0.2, 0.5}) {
    const ProtocolParams params{mu, 0.1, 0.2};
    const double floor = bs_floor(mu);
    std::vector<double> lengths;
    for (int i = 0; i <= 1500; ++i) lengths.push_back(0.1 * i);
    std::vector<double> bs;
    std::vector<double> active;
    for (double l : lengths) {
      bs.push_back(bs_attack(params, l).qber_critical);
      active.push_back(active_attack(params, l).qber_critical);
    }
    out.require(bs[0] == 0.5 && active[0] == 0.5,
                fmt::format("mu={}: curves do not start at 0.5", mu));
    std::size_t first_zero = lengths.size();
    for (std::size_t i = 1; i < lengths.size(); ++i) {
      out.require(bs[i] <= bs[i - 1] && active[i] <= active[i - 1],
                  fmt::format("mu={}: increase at l={}", mu, lengths[i]));
      out.require(bs[i] >= floor - 1e-9,
                  fmt::format("mu={}: BS below floor at l={}", mu, lengths[i]));
      if (active[i] == 0.0 && first_zero == lengths.size()) first_zero = i;
      if (first_zero < i)
        out.require(active[i] == 0.0,
                    fmt::format("mu={}: active curve leaves 0", mu));
    }
    out.require(first_zero < lengths.size(),
                fmt::format("mu={}: active curve never reaches 0", mu));
    int crossings = 0;
    int last_sign = 0;
    for (std::size_t i = 1; i < first_zero; ++i) {
      const double d = active[i] - bs[i];
      const int sign = (d > 0) - (d < 0);
      if (sign == 0) continue;
      if (last_sign != 0 && sign != last_sign) ++crossings;
      last_sign = sign;
    }
    out.require(crossings == 1,
                fmt::format("mu={}: {} crossings before l={}", mu, crossings,
                            lengths[first_zero]));
    if (out.ok)
      out.detail += fmt::format("mu={}: zero at {:.1f} km; ", mu,
                                lengths[first_zero]);
  }
  return out;
}

Outcome full_insecurity_length() {
  Outcome out;
  const ProtocolParams params{0.5, 0.1, 0.2};
  const double l = fully_insecure_length(params);
  const double bisected = oracle::bisect_switch(
      [&](double x) { return active_attack(params, x).fully_insecure; }, 0.0,
      150.0, 1e-9);
  out.require(std::abs(l - 49.93) <= 0.05, fmt::format("l = {}", l));
  out.require(std::abs(bisected - 49.93) <= 0.05,
              fmt::format("bisection l = {}", bisected));
  out.require(std::abs(l - bisected) <= 1e-6, "closed form vs bisection");
  if (out.ok)
    out.detail = fmt::format("closed form {:.6f} km, bisection {:.6f} km", l,
                             bisected);
  return out;
}

Outcome eve_information_forms_agree() {
  Outcome out;
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int accepted = 0;
  double worst = 0.0;
  while (accepted < 10000) {
    const ProtocolParams params{0.01 + 1.99 * unit(rng), 0.1,
                                0.1 + 0.5 * unit(rng)};
    const double l = 200.0 * unit(rng);
    const ChannelPoint point = channel_point(params, l);
    const double mu_e = point.mu_e_max * unit(rng);
    const ActiveAttackPlan plan = active_plan(params, l, mu_e);
    if (plan.raw_block_fraction >= 1.0 - plan.p_conc_inf) continue;
    const double composed = plan.p_conc_inf / plan.pass_fraction;
    const double expanded = -std::expm1(-(params.mu - mu_e)) *
                            -std::expm1(-mu_e) / -std::expm1(-point.mu_b);
    if (expanded == 0.0) {
      out.require(composed == 0.0, "zero mismatch");
    } else {
      worst = std::max(worst, std::abs(composed - expanded) / expanded);
    }
    ++accepted;
  }
  out.require(worst <= 1e-12, fmt::format("worst relative error {:.3e}", worst));
  if (out.ok) out.detail = fmt::format("worst relative error {:.3e}", worst);
  return out;
}

Outcome eve_intensity_optimal() {
  Outcome out;
  std::mt19937_64 rng(2718);
  std::uniform_real_distribution<double> mu_dist(0.01, 2.0);
  std::uniform_real_distribution<double> delta_dist(0.1, 0.6);
  std::uniform_real_distribution<double> len_dist(0.0, 150.0);
  constexpr int kGrid = 10000;
  int saturated = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const ProtocolParams params{mu_dist(rng), 0.1, delta_dist(rng)};
    const double l = len_dist(rng);
    const double mu_e_max = channel_point(params, l).mu_e_max;
    const double step = mu_e_max / (kGrid - 1);
    double best_value = -1.0;
    double best_mu_e = 0.0;
    for (int i = 0; i < kGrid; ++i) {
      const double mu_e = i == kGrid - 1 ? mu_e_max : step * i;
      const double v = active_eve_info(active_plan(params, l, mu_e));
      if (v > best_value) {
        best_value = v;
        best_mu_e = mu_e;
      }
    }
    const double closed = optimal_mu_e(params, l);
    const double closed_value = active_eve_info(active_plan(params, l, closed));
    if (closed_value == 1.0) {
      // Saturated: every intensity reaching full information is optimal.
      ++saturated;
      out.require(best_value == 1.0, "grid misses saturation");
    } else {
      out.require(std::abs(best_mu_e - closed) <= step + 1e-15,
                  fmt::format("argmax {} vs closed form {} (step {})",
                              best_mu_e, closed, step));
      out.require(closed_value >= best_value - 1e-12, "grid beats closed form");
    }
  }
  if (out.ok)
    out.detail = fmt::format("100 triples, {} saturated at I_AE = 1", saturated);
  return out;
}

Outcome holevo_matches_oracle() {
  Outcome out;
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double s = i / 999.0;
    worst = std::max(worst,
                     std::abs(holevo_two_pure(s) - oracle::gram_basis_holevo(s)));
  }
  out.require(worst <= 1e-12, fmt::format("worst error {:.3e}", worst));
  out.require(holevo_two_pure(1.0) == 0.0, "chi(1) != 0");
  out.require(holevo_two_pure(0.0) == 1.0, "chi(0) != 1");
  if (out.ok) out.detail = fmt::format("worst error {:.3e}", worst);
  return out;
}

Outcome entropy_round_trip() {
  Outcome out;
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double y = i / 999.0;
    worst = std::max(worst,
                     std::abs(binary_entropy(binary_entropy_inverse(y)) - y));
  }
  out.require(worst <= 1e-10, fmt::format("worst error {:.3e}", worst));
  if (out.ok) out.detail = fmt::format("worst error {:.3e}", worst);
  return out;
}

Outcome monte_carlo_cross_validation() {
  Outcome out;
  const ProtocolParams params{0.2, 0.1, 0.2};
  const double l = 20.0;
  const std::uint64_t n = 1000000;
  const std::uint64_t seed = 42;
  const ActiveAttackPlan plan = active_plan(params, l, optimal_mu_e(params, l));
  const mc::TrialStats stats =
      mc::simulate_active_attack(params, l, plan, n, seed);
  const auto ref = oracle::active_point(0.2, 0.2, l, plan.mu_e);

  const auto within = [&](const mc::Rate& rate, double analytic,
                          const char* name) {
    const double se = std::sqrt(analytic * (1.0 - analytic) /
                                static_cast<double>(rate.trials));
    const double z = (rate.value - analytic) / se;
    out.require(std::abs(z) <= 4.0, fmt::format("{}: z = {:.2f}", name, z));
    out.detail += fmt::format("{} z={:+.2f}; ", name, z);
  };
  within(stats.bob_information_click_rate(), 1.0 - std::exp(-ref.mu_b),
         "bob_click");
  within(stats.eve_information_conclusive_rate(), 1.0 - std::exp(-plan.mu_e),
         "eve_conclusive");
  within(stats.information_blocked_fraction(), ref.block_fraction, "blocked");
  within(stats.eve_information_proxy(), ref.i_ae, "i_ae_proxy");

  const mc::DistortionReport half =
      mc::decoy_distortion(params, l, active_plan(params, l, params.mu / 2), n,
                           seed);
  const mc::DistortionRow* row =
      half.find(mc::PulseClass::decoy, mc::ClickPattern::both);
  out.require(row != nullptr && row->flagged,
              "decoy double-click not flagged at mu_E = mu/2");
  const mc::DistortionReport full = mc::decoy_distortion(
      params, l, active_plan(params, l, channel_point(params, l).mu_e_max), n,
      seed);
  out.require(!full.any_flagged(), "distortion flagged at mu_E = mu_E^max");
  if (row) out.detail += fmt::format("decoy double-click z={:.1f}", row->z);
  return out;
}

int run_cli(const std::string& args) {
  const std::string command = fmt::format("\"{}\" {}", COWQKD_CLI_PATH, args);
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome determinism() {
  Outcome out;
  const auto dir = std::filesystem::temp_directory_path() / "cowqkd_acceptance";
  std::filesystem::create_directories(dir);
  const auto a = dir / "report_a.json";
  const auto b = dir / "report_b.json";
  const std::string validate =
      "validate-mc --mu 0.2 --delta 0.2 --length 20 --decoy-fraction 0.1 "
      "--pulses 1000000 --seed 42 --out ";
  out.require(run_cli(validate + a.string() + " 2>/dev/null") == 0,
              "validate-mc run 1 failed");
  out.require(run_cli(validate + b.string() + " 2>/dev/null") == 0,
              "validate-mc run 2 failed");
  if (out.ok)
    out.require(read_text_file(a) == read_text_file(b),
                "validate-mc reports differ");

  const auto s1 = dir / "fig1_t1.csv";
  const auto s4 = dir / "fig1_t4.csv";
  const std::string sweep =
      "qber-curves --mu 0.1,0.2,0.5 --delta 0.2 --decoy-fraction 0.1 "
      "--length 0:150:1 --attacks bs,active --threads {} --out {} 2>/dev/null";
  out.require(run_cli(fmt::format(fmt::runtime(sweep), 1, s1.string())) == 0, "sweep t=1");
  out.require(run_cli(fmt::format(fmt::runtime(sweep), 4, s4.string())) == 0, "sweep t=4");
  if (out.ok)
    out.require(read_text_file(s1) == read_text_file(s4),
                "sweep output depends on worker count");

  const SweepSpec spec;
  out.require(same_table(sweep_qber_curves(spec, 1), sweep_qber_curves(spec, 7)),
              "library sweep depends on worker count");
  const auto r1 = to_json(run_montecarlo_validation({0.2, 0.1, 0.2}, 20.0,
                                                    200000, 42, 1));
  const auto r6 = to_json(run_montecarlo_validation({0.2, 0.1, 0.2}, 20.0,
                                                    200000, 42, 6));
  out.require(r1.dump() == r6.dump(), "MC report depends on worker count");
  std::filesystem::remove_all(dir);
  if (out.ok)
    out.detail = "byte-identical reports; identical sweeps for 1/4/7 workers";
  return out;
}

Outcome source_intensity_optimization() {
  Outcome out;
  for (double l : {10.0, 30.0, 50.0}) {
    const SourceIntensityOptimum best = optimal_source_intensity(0.2, 0.1, l);
    double grid_best = -1.0;
    for (int i = 1; i <= 2000; ++i) {
      const double mu = kMaxSourceIntensity * i / 2000.0;
      grid_best = std::max(grid_best, key_rate_margin({mu, 0.1, 0.2}, l));
    }
    out.require(best.margin >= grid_best - 1e-12,
                fmt::format("l={}: margin {} below grid {}", l, best.margin,
                            grid_best));
    const double l_ins = fully_insecure_length({best.mu, 0.1, 0.2});
    if (l < l_ins)
      out.require(best.margin > 0.0, fmt::format("l={}: margin not positive", l));
    out.require(l < l_ins, fmt::format("l={}: optimum is fully insecure", l));
    out.detail += fmt::format("l={}: mu*={:.5f} margin={:.4e}; ", l, best.mu,
                              best.margin);
  }
  return out;
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "critical length for 0.2 dB/km", 1.0, critical_length_matches},
      {2, "critical-QBER curve shape (mu = 0.1, 0.2, 0.5)", 5.0,
       qber_curve_shape},
      {3, "full-insecurity length mu=0.5 within 49.93 +- 0.05 km", 1.0,
       full_insecurity_length},
      {4, "budget-equation vs expanded Eve information, 1e4 plans", 1.0,
       eve_information_forms_agree},
      {5, "closed-form Eve intensity vs 1e4-point grid, 100 triples", 5.0,
       eve_intensity_optimal},
      {6, "Holevo quantity vs Gram-basis eigen oracle", 1.0,
       holevo_matches_oracle},
      {7, "binary entropy inverse round trip", 1.0, entropy_round_trip},
      {8, "Monte Carlo cross-validation at 4 sigma", 30.0,
       monte_carlo_cross_validation},
      {9, "determinism of reports and sweeps", 60.0, determinism},
      {10, "source-intensity optimum dominates 2000-point grid", 5.0,
       source_intensity_optimization},
  };

  int failures = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = c.run();
    } catch (const std::exception& e) {
      outcome.ok = false;
      outcome.detail = fmt::format("exception: {}", e.what());
    }
    const double seconds = std::chrono::duration<double>(
                               std::chrono::steady_clock::now() - start)
                               .count();
    if (outcome.ok && seconds > c.max_seconds) {
      outcome.ok = false;
      outcome.detail = fmt::format("took {:.2f} s, limit {:.0f} s", seconds,
                                   c.max_seconds);
    }
    failures += !outcome.ok;
    fmt::print("[{}] AC{:02d} {} ({:.2f} s): {}\n",
               outcome.ok ? "PASS" : "FAIL", c.id, c.title, seconds,
               outcome.detail);
  }
  fmt::print("{} of {} criteria passed\n", criteria.size() - failures,
             criteria.size());
  return failures == 0 ? 0 : 1;
}
