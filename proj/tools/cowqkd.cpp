// Command-line front end: parameter sweeps, single-point attack reports and
// Monte Carlo validation.
//
// Exit codes: 0 success, 1 validation failure, 2 invalid arguments,
// 3 I/O error.

#include <fmt/format.h>

#include <CLI11.hpp>
#include <cstdint>
#include <iostream>
#include <string>

#include "cowqkd/attacks.hpp"
#include "cowqkd/experiments.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidationFailed = 1;
constexpr int kExitInvalidArguments = 2;
constexpr int kExitIoError = 3;

struct Options {
  std::string mu_list = "0.1,0.2,0.5";
  double mu = 0.2;
  double report_mu = 0.5;
  double delta = 0.2;
  double decoy_fraction = 0.1;
  std::string length_range = "0:150:1";
  std::string optimal_range = "1:100:1";
  double length = 20.0;
  std::string attacks = "bs,active";
  std::string out;
  std::string format;
  std::uint64_t pulses = 1000000;
  std::uint64_t seed = 42;
  int threads = 0;
};

cowqkd::OutputFormat resolve_format(const std::string& format,
                                    const std::string& out) {
  if (format == "csv") return cowqkd::OutputFormat::csv;
  if (format == "json") return cowqkd::OutputFormat::json;
  if (!format.empty())
    throw cowqkd::InvalidSpecError("format must be csv or json");
  return out.size() > 5 && out.substr(out.size() - 5) == ".json"
             ? cowqkd::OutputFormat::json
             : cowqkd::OutputFormat::csv;
}

const char* format_name(cowqkd::OutputFormat format) {
  return format == cowqkd::OutputFormat::json ? "json" : "csv";
}

std::string join_numbers(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += fmt::format("{}", values[i]);
  }
  return out;
}

std::string range_text(const cowqkd::LengthRange& r) {
  return fmt::format("{}:{}:{}", r.min, r.max, r.step);
}

void emit_table(const cowqkd::SweepTable& table,
                const cowqkd::RunMetadata& metadata, const std::string& out,
                cowqkd::OutputFormat format) {
  if (out.empty() || out == "-") {
    if (format == cowqkd::OutputFormat::csv) {
      std::cout << cowqkd::to_csv(table, metadata);
    } else {
      std::cout << cowqkd::to_json(table, metadata).dump(2) << "\n";
    }
    return;
  }
  cowqkd::write_table(out, table, metadata, format);
  std::cerr << fmt::format("wrote {} rows to {}\n", table.size(), out);
}

int run_qber_curves(const Options& o) {
  cowqkd::SweepSpec spec;
  spec.mu_list = cowqkd::parse_number_list(o.mu_list);
  spec.delta = o.delta;
  spec.decoy_fraction = o.decoy_fraction;
  spec.lengths = cowqkd::parse_length_range(o.length_range);
  spec.attacks = cowqkd::parse_attack_selection(o.attacks);
  spec.output_path = o.out;
  spec.format = resolve_format(o.format, o.out);
  spec.validate();

  std::string attacks;
  if (spec.attacks.bs) attacks += "bs";
  if (spec.attacks.active) attacks += attacks.empty() ? "active" : ",active";
  const cowqkd::RunMetadata metadata{
      "qber-curves",
      {{"mu", join_numbers(spec.mu_list)},
       {"delta", fmt::format("{}", spec.delta)},
       {"decoy_fraction", fmt::format("{}", spec.decoy_fraction)},
       {"length", range_text(spec.lengths)},
       {"attacks", attacks},
       {"format", format_name(spec.format)}}};
  emit_table(cowqkd::sweep_qber_curves(spec, o.threads), metadata, o.out,
             spec.format);
  return kExitOk;
}

int run_optimal_intensity(const Options& o) {
  const cowqkd::LengthRange lengths =
      cowqkd::parse_length_range(o.optimal_range);
  const cowqkd::OutputFormat format = resolve_format(o.format, o.out);
  const cowqkd::RunMetadata metadata{
      "optimal-intensity",
      {{"delta", fmt::format("{}", o.delta)},
       {"decoy_fraction", fmt::format("{}", o.decoy_fraction)},
       {"length", range_text(lengths)},
       {"mu_search_max", fmt::format("{}", cowqkd::kMaxSourceIntensity)},
       {"format", format_name(format)}}};
  emit_table(cowqkd::sweep_optimal_intensity(o.delta, o.decoy_fraction,
                                             lengths, o.threads),
             metadata, o.out, format);
  return kExitOk;
}

int run_attack_report(const Options& o) {
  const cowqkd::ProtocolParams params{o.report_mu, o.decoy_fraction, o.delta};
  params.validate();
  if (!(o.length >= 0.0))
    throw cowqkd::InvalidSpecError("length must be non-negative");
  const cowqkd::ChannelPoint point = cowqkd::channel_point(params, o.length);
  const cowqkd::AttackReport bs = cowqkd::bs_attack(params, o.length);
  const cowqkd::AttackReport active = cowqkd::active_attack(params, o.length);
  const cowqkd::ActiveAttackPlan& plan = *active.plan;

  fmt::print("COW attack report\n");
  fmt::print("  mu={} delta={} dB/km decoy_fraction={} length={} km\n",
             o.report_mu, o.delta, o.decoy_fraction, o.length);
  fmt::print("  critical length      l_crit   = {:.6f} km\n",
             cowqkd::critical_length(params.delta));
  fmt::print("  Bob intensity        mu_B     = {:.9g}\n", point.mu_b);
  fmt::print("  withdrawable         mu_E^max = {:.9g}\n", point.mu_e_max);
  fmt::print("beam-splitting attack\n");
  fmt::print("  I_AE                          = {:.9g}\n", bs.i_ae);
  fmt::print("  QBER_crit                     = {:.9g}\n", bs.qber_critical);
  fmt::print("active beam-splitting attack\n");
  fmt::print("  tap intensity        mu_E*    = {:.9g}\n", plan.mu_e);
  fmt::print("  forwarded intensity  mu_B'    = {:.9g}\n", plan.mu_b_prime);
  fmt::print("  block fraction       b        = {:.9g} (raw {:.9g})\n",
             plan.block_fraction, plan.raw_block_fraction);
  fmt::print("  I_AE                          = {:.9g}\n", active.i_ae);
  fmt::print("  QBER_crit                     = {:.9g}\n",
             active.qber_critical);
  fmt::print("  fully insecure                = {}\n",
             active.fully_insecure ? "yes" : "no");
  fmt::print("  key rate margin      I_AB-I_AE = {:.9g} bits/pulse\n",
             cowqkd::key_rate_margin(params, o.length));
  fmt::print("  fully insecure from            {:.6f} km\n",
             cowqkd::fully_insecure_length(params));
  return kExitOk;
}

int run_validate_mc(const Options& o) {
  const cowqkd::ProtocolParams params{o.mu, o.decoy_fraction, o.delta};
  params.validate();
  if (!(o.length >= 0.0))
    throw cowqkd::InvalidSpecError("length must be non-negative");
  const cowqkd::ValidationReport report = cowqkd::run_montecarlo_validation(
      params, o.length, o.pulses, o.seed, o.threads);
  const std::string text = cowqkd::to_json(report).dump(2) + "\n";
  if (o.out.empty() || o.out == "-") {
    std::cout << text;
  } else {
    cowqkd::write_text_file(o.out, text);
    for (const cowqkd::ValidationCheck& c : report.checks)
      std::cerr << fmt::format("{:<42} z={:+8.3f}  {}\n", c.name, c.z,
                               cowqkd::to_string(c.status));
    std::cerr << fmt::format("decoy distortion flagged: {} (expected: {})\n",
                             report.distortion.any_flagged(),
                             report.distortion_expected);
  }
  return report.passed() ? kExitOk : kExitValidationFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Security analysis of the COW QKD protocol against "
               "beam-splitting attacks"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--delta", o.delta, "attenuation, dB/km")
        ->capture_default_str();
    cmd->add_option("--decoy-fraction", o.decoy_fraction, "decoy fraction f")
        ->capture_default_str();
    cmd->add_option("--threads", o.threads, "worker threads (0 = default)")
        ->capture_default_str();
  };

  auto* curves = app.add_subcommand("qber-curves",
                                    "critical QBER of both attacks vs length");
  add_common(curves);
  curves->add_option("--mu", o.mu_list, "comma-separated source intensities")
      ->capture_default_str();
  curves->add_option("--length", o.length_range, "length range min:max:step")
      ->capture_default_str();
  curves->add_option("--attacks", o.attacks, "subset of bs,active")
      ->capture_default_str();
  curves->add_option("--out", o.out, "output file (stdout if omitted)");
  curves->add_option("--format", o.format, "csv or json");

  auto* optimal = app.add_subcommand(
      "optimal-intensity", "key-rate-optimal source intensity vs length");
  add_common(optimal);
  optimal->add_option("--length", o.optimal_range, "length range min:max:step")
      ->capture_default_str();
  optimal->add_option("--out", o.out, "output file (stdout if omitted)");
  optimal->add_option("--format", o.format, "csv or json");

  auto* report = app.add_subcommand("attack-report",
                                    "single-point attack summary");
  add_common(report);
  report->add_option("--mu", o.report_mu, "source intensity")
      ->capture_default_str();
  report->add_option("--length", o.length, "channel length, km")
      ->capture_default_str();

  auto* validate = app.add_subcommand(
      "validate-mc", "Monte Carlo cross-check of the analytic model");
  add_common(validate);
  validate->add_option("--mu", o.mu, "source intensity")->capture_default_str();
  validate->add_option("--length", o.length, "channel length, km")
      ->capture_default_str();
  validate->add_option("--pulses", o.pulses, "number of simulated pulses")
      ->capture_default_str();
  validate->add_option("--seed", o.seed, "64-bit seed")->capture_default_str();
  validate->add_option("--out", o.out, "report file (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInvalidArguments;
  }

  try {
    if (*curves) return run_qber_curves(o);
    if (*optimal) return run_optimal_intensity(o);
    if (*report) return run_attack_report(o);
    if (*validate) return run_validate_mc(o);
  } catch (const cowqkd::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIoError;
  } catch (const cowqkd::mc::InfeasiblePlanError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidationFailed;
  } catch (const std::logic_error& e) {
    // invalid_argument and domain_error from argument validation
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalidArguments;
  }
  return kExitInvalidArguments;
}
