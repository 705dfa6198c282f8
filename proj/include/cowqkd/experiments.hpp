#pragma once

// Parameter sweeps producing plot-ready critical-QBER and optimal-intensity
// tables, their CSV/JSON serialization, and the Monte Carlo cross-check of
// the analytic attack model.

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "cowqkd/attacks.hpp"
#include "cowqkd/core.hpp"
#include "cowqkd/montecarlo.hpp"

namespace cowqkd {

inline constexpr const char* kToolName = "cowqkd";
inline constexpr const char* kToolVersion = "1.0.0";

/// Raised for malformed sweep specifications or CLI values.
class InvalidSpecError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when an output or input file cannot be written or read.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LengthRange {
  double min = 0.0;
  double max = 0.0;
  double step = 1.0;

  void validate() const;
  /// min, min + step, ... up to max (inclusive, with a relative slack of
  /// 1e-9 steps so that decimal ranges land on their endpoint).
  [[nodiscard]] std::vector<double> points() const;
};

/// Parses "min:max:step".
LengthRange parse_length_range(const std::string& text);
/// Parses a comma-separated list of numbers.
std::vector<double> parse_number_list(const std::string& text);

enum class OutputFormat { csv, json };

struct AttackSelection {
  bool bs = true;
  bool active = true;
};
AttackSelection parse_attack_selection(const std::string& text);

struct SweepSpec {
  std::vector<double> mu_list{0.1, 0.2, 0.5};
  double delta = 0.2;
  double decoy_fraction = 0.1;
  LengthRange lengths{0.0, 150.0, 1.0};
  AttackSelection attacks;
  std::filesystem::path output_path;
  OutputFormat format = OutputFormat::csv;

  /// Throws InvalidSpecError.
  void validate() const;
};

/// One table row. Quantities that were not requested are NaN.
struct SweepRow {
  double mu = 0.0;
  double length_km = 0.0;
  double qber_bs = 0.0;
  double qber_active = 0.0;
  double i_ae_active = 0.0;
  double mu_e_opt = 0.0;
  double block_fraction = 0.0;
  bool fully_insecure = false;
  double margin = 0.0;
  double mu_opt = 0.0;
};

using SweepTable = std::vector<SweepRow>;

/// Column names in output order.
const std::vector<std::string>& sweep_columns();

/// Critical QBER of both attacks per (mu, length), sorted by (mu, length).
/// threads == 0 uses the OpenMP default; the result does not depend on it.
SweepTable sweep_qber_curves(const SweepSpec& spec, int threads = 0);

/// Per length: the key-rate-maximizing source intensity and the critical
/// QBER of both attacks at that intensity.
SweepTable sweep_optimal_intensity(double delta, double decoy_fraction,
                                   const LengthRange& lengths,
                                   int threads = 0);

/// Resolved run configuration, written verbatim into output headers.
struct RunMetadata {
  std::string command;
  std::vector<std::pair<std::string, std::string>> config;
};

/// 17 significant digits; NaN as "nan".
std::string format_number(double value);

std::string to_csv(const SweepTable& table, const RunMetadata& metadata);
/// Parses the CSV dialect written by to_csv; '#' lines are skipped.
SweepTable parse_csv(const std::string& text);
nlohmann::ordered_json to_json(const SweepTable& table,
                               const RunMetadata& metadata);
SweepTable table_from_json(const nlohmann::ordered_json& doc);

/// Throws IoError naming the path.
void write_text_file(const std::filesystem::path& path,
                     const std::string& contents);
std::string read_text_file(const std::filesystem::path& path);

void write_table(const std::filesystem::path& path, const SweepTable& table,
                 const RunMetadata& metadata, OutputFormat format);
/// Reads a table back, choosing the parser from the file extension.
SweepTable read_table(const std::filesystem::path& path);

/// Field-by-field equality treating NaN as equal to NaN.
bool same_table(const SweepTable& a, const SweepTable& b);

// Monte Carlo cross-validation -------------------------------------------

enum class CheckStatus { pass, fail, low_power };
const char* to_string(CheckStatus status);

/// A check is low power when the analytic binomial variance n p (1 - p)
/// falls below this many counts.
inline constexpr double kLowPowerVariance = 25.0;
inline constexpr double kValidationSigma = 4.0;

struct ValidationCheck {
  std::string name;
  double empirical = 0.0;
  double analytic = 0.0;
  double std_error = 0.0;  ///< from the analytic rate
  double z = 0.0;
  std::uint64_t trials = 0;
  CheckStatus status = CheckStatus::pass;
};

/// Compares an empirical rate with its analytic value.
ValidationCheck compare_rate(std::string name, const mc::Rate& rate,
                             double analytic,
                             double sigma = kValidationSigma);

struct ValidationReport {
  ProtocolParams params;
  double length_km = 0.0;
  std::uint64_t n_pulses = 0;
  std::uint64_t seed = 0;
  ActiveAttackPlan plan;
  std::vector<ValidationCheck> checks;
  mc::DistortionReport distortion;
  /// Whether the plan forwards a different intensity than the lossy line.
  bool distortion_expected = false;

  [[nodiscard]] bool passed() const;
};

/// Simulates the unattacked link and the Eve-optimal active attack and
/// checks every empirical rate against its closed form at 4 sigma.
ValidationReport run_montecarlo_validation(const ProtocolParams& params,
                                           double length_km,
                                           std::uint64_t n_pulses,
                                           std::uint64_t seed,
                                           int threads = 0);

nlohmann::ordered_json to_json(const ValidationReport& report);

}  // namespace cowqkd
