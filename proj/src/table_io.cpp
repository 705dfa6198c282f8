#include <fmt/format.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include "cowqkd/experiments.hpp"

namespace cowqkd {

namespace {

double parse_double(std::string_view text, const char* what) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  double value = 0.0;
  const auto [end, ec] =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size() || text.empty())
    throw InvalidSpecError(fmt::format("{}: cannot parse '{}' as a number",
                                       what, text));
  return value;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

nlohmann::ordered_json number_or_null(double value) {
  if (std::isnan(value) || std::isinf(value)) return nullptr;
  return value;
}

double number_from_json(const nlohmann::ordered_json& value) {
  if (value.is_null()) return std::numeric_limits<double>::quiet_NaN();
  return value.get<double>();
}

bool same_number(double a, double b) {
  return (std::isnan(a) && std::isnan(b)) || a == b;
}

}  // namespace

void LengthRange::validate() const {
  if (!(std::isfinite(min) && min >= 0.0))
    throw InvalidSpecError("length range: minimum must be >= 0");
  if (!(std::isfinite(step) && step > 0.0))
    throw InvalidSpecError("length range: step must be > 0");
  if (!(std::isfinite(max) && max >= min))
    throw InvalidSpecError("length range: maximum must be >= minimum");
}

std::vector<double> LengthRange::points() const {
  validate();
  const auto count =
      static_cast<std::size_t>(std::floor((max - min) / step + 1e-9)) + 1;
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i)
    out[i] = min + static_cast<double>(i) * step;
  return out;
}

LengthRange parse_length_range(const std::string& text) {
  const auto parts = split(text, ':');
  if (parts.size() != 3)
    throw InvalidSpecError(
        fmt::format("length range '{}' must have the form min:max:step", text));
  LengthRange range{parse_double(parts[0], "length range"),
                    parse_double(parts[1], "length range"),
                    parse_double(parts[2], "length range")};
  range.validate();
  return range;
}

std::vector<double> parse_number_list(const std::string& text) {
  std::vector<double> values;
  for (std::string_view part : split(text, ','))
    values.push_back(parse_double(part, "number list"));
  return values;
}

AttackSelection parse_attack_selection(const std::string& text) {
  AttackSelection selection{false, false};
  for (std::string_view part : split(text, ',')) {
    if (part == "bs") {
      selection.bs = true;
    } else if (part == "active") {
      selection.active = true;
    } else {
      throw InvalidSpecError(
          fmt::format("unknown attack '{}' (expected bs or active)", part));
    }
  }
  return selection;
}

const std::vector<std::string>& sweep_columns() {
  static const std::vector<std::string> columns{
      "mu",       "length_km",      "qber_bs",        "qber_active",
      "i_ae_active", "mu_e_opt",    "block_fraction", "fully_insecure",
      "margin",   "mu_opt"};
  return columns;
}

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  return fmt::format("{:.17g}", value);
}

std::string to_csv(const SweepTable& table, const RunMetadata& metadata) {
  std::string out;
  out += fmt::format("# tool={} {}\n", kToolName, kToolVersion);
  out += fmt::format("# command={}\n", metadata.command);
  for (const auto& [key, value] : metadata.config)
    out += fmt::format("# {}={}\n", key, value);
  out += fmt::format("{}\n", fmt::join(sweep_columns(), ","));
  for (const SweepRow& r : table) {
    out += fmt::format(
        "{},{},{},{},{},{},{},{},{},{}\n", format_number(r.mu),
        format_number(r.length_km), format_number(r.qber_bs),
        format_number(r.qber_active), format_number(r.i_ae_active),
        format_number(r.mu_e_opt), format_number(r.block_fraction),
        r.fully_insecure ? 1 : 0, format_number(r.margin),
        format_number(r.mu_opt));
  }
  return out;
}

SweepTable parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  bool header_seen = false;
  SweepTable table;
  const std::size_t width = sweep_columns().size();
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    const auto fields = split(line, ',');
    if (!header_seen) {
      if (fields.size() != width)
        throw InvalidSpecError("csv: unexpected header");
      for (std::size_t i = 0; i < width; ++i)
        if (fields[i] != sweep_columns()[i])
          throw InvalidSpecError(
              fmt::format("csv: unexpected column '{}'", fields[i]));
      header_seen = true;
      continue;
    }
    if (fields.size() != width)
      throw InvalidSpecError(
          fmt::format("csv: row has {} fields, expected {}", fields.size(),
                      width));
    SweepRow r;
    r.mu = parse_double(fields[0], "csv");
    r.length_km = parse_double(fields[1], "csv");
    r.qber_bs = parse_double(fields[2], "csv");
    r.qber_active = parse_double(fields[3], "csv");
    r.i_ae_active = parse_double(fields[4], "csv");
    r.mu_e_opt = parse_double(fields[5], "csv");
    r.block_fraction = parse_double(fields[6], "csv");
    r.fully_insecure = parse_double(fields[7], "csv") != 0.0;
    r.margin = parse_double(fields[8], "csv");
    r.mu_opt = parse_double(fields[9], "csv");
    table.push_back(r);
  }
  if (!header_seen) throw InvalidSpecError("csv: missing header row");
  return table;
}

nlohmann::ordered_json to_json(const SweepTable& table,
                               const RunMetadata& metadata) {
  nlohmann::ordered_json doc;
  doc["metadata"]["tool"] = kToolName;
  doc["metadata"]["version"] = kToolVersion;
  doc["metadata"]["command"] = metadata.command;
  auto& config = doc["metadata"]["config"];
  config = nlohmann::ordered_json::object();
  for (const auto& [key, value] : metadata.config) config[key] = value;
  auto& rows = doc["rows"];
  rows = nlohmann::ordered_json::array();
  for (const SweepRow& r : table) {
    rows.push_back({{"mu", number_or_null(r.mu)},
                    {"length_km", number_or_null(r.length_km)},
                    {"qber_bs", number_or_null(r.qber_bs)},
                    {"qber_active", number_or_null(r.qber_active)},
                    {"i_ae_active", number_or_null(r.i_ae_active)},
                    {"mu_e_opt", number_or_null(r.mu_e_opt)},
                    {"block_fraction", number_or_null(r.block_fraction)},
                    {"fully_insecure", r.fully_insecure},
                    {"margin", number_or_null(r.margin)},
                    {"mu_opt", number_or_null(r.mu_opt)}});
  }
  return doc;
}

SweepTable table_from_json(const nlohmann::ordered_json& doc) {
  SweepTable table;
  try {
    for (const auto& row : doc.at("rows")) {
      SweepRow r;
      r.mu = number_from_json(row.at("mu"));
      r.length_km = number_from_json(row.at("length_km"));
      r.qber_bs = number_from_json(row.at("qber_bs"));
      r.qber_active = number_from_json(row.at("qber_active"));
      r.i_ae_active = number_from_json(row.at("i_ae_active"));
      r.mu_e_opt = number_from_json(row.at("mu_e_opt"));
      r.block_fraction = number_from_json(row.at("block_fraction"));
      r.fully_insecure = row.at("fully_insecure").get<bool>();
      r.margin = number_from_json(row.at("margin"));
      r.mu_opt = number_from_json(row.at("mu_opt"));
      table.push_back(r);
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidSpecError(fmt::format("json: {}", e.what()));
  }
  return table;
}

void write_text_file(const std::filesystem::path& path,
                     const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw IoError(fmt::format("cannot open '{}' for writing", path.string()));
  out << contents;
  out.flush();
  if (!out) throw IoError(fmt::format("failed writing '{}'", path.string()));
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw IoError(fmt::format("cannot open '{}' for reading", path.string()));
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_table(const std::filesystem::path& path, const SweepTable& table,
                 const RunMetadata& metadata, OutputFormat format) {
  if (format == OutputFormat::csv) {
    write_text_file(path, to_csv(table, metadata));
  } else {
    write_text_file(path, to_json(table, metadata).dump(2) + "\n");
  }
}

SweepTable read_table(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  if (path.extension() == ".json") {
    try {
      return table_from_json(nlohmann::ordered_json::parse(text));
    } catch (const nlohmann::json::parse_error& e) {
      throw InvalidSpecError(
          fmt::format("{}: {}", path.string(), e.what()));
    }
  }
  return parse_csv(text);
}

bool same_table(const SweepTable& a, const SweepTable& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const SweepRow& x = a[i];
    const SweepRow& y = b[i];
    if (!(same_number(x.mu, y.mu) && same_number(x.length_km, y.length_km) &&
          same_number(x.qber_bs, y.qber_bs) &&
          same_number(x.qber_active, y.qber_active) &&
          same_number(x.i_ae_active, y.i_ae_active) &&
          same_number(x.mu_e_opt, y.mu_e_opt) &&
          same_number(x.block_fraction, y.block_fraction) &&
          x.fully_insecure == y.fully_insecure &&
          same_number(x.margin, y.margin) && same_number(x.mu_opt, y.mu_opt)))
      return false;
  }
  return true;
}

nlohmann::ordered_json to_json(const ValidationReport& report) {
  nlohmann::ordered_json doc;
  doc["metadata"] = {{"tool", kToolName},
                     {"version", kToolVersion},
                     {"command", "validate-mc"},
                     {"seed", report.seed},
                     {"rng", "SplitMix64 counter-based per-pulse substreams"}};
  doc["config"] = {{"mu", report.params.mu},
                   {"delta", report.params.delta},
                   {"decoy_fraction", report.params.decoy_fraction},
                   {"length_km", report.length_km},
                   {"pulses", report.n_pulses},
                   {"seed", report.seed},
                   {"sigma_threshold", kValidationSigma}};
  doc["plan"] = {{"mu_e", report.plan.mu_e},
                 {"mu_b_prime", report.plan.mu_b_prime},
                 {"raw_block_fraction", report.plan.raw_block_fraction},
                 {"block_fraction", report.plan.block_fraction},
                 {"p_conc_inf", report.plan.p_conc_inf},
                 {"p_conc_cont", report.plan.p_conc_cont},
                 {"p_conc_total", report.plan.p_conc_total},
                 {"i_ae", active_eve_info(report.plan)}};
  auto& checks = doc["checks"];
  checks = nlohmann::ordered_json::array();
  for (const ValidationCheck& c : report.checks) {
    checks.push_back({{"name", c.name},
                      {"empirical", c.empirical},
                      {"analytic", c.analytic},
                      {"std_error", c.std_error},
                      {"z", number_or_null(c.z)},
                      {"trials", c.trials},
                      {"status", to_string(c.status)}});
  }
  auto& distortion = doc["decoy_distortion"];
  distortion["expected"] = report.distortion_expected;
  distortion["threshold_sigma"] = report.distortion.threshold_sigma;
  distortion["any_flagged"] = report.distortion.any_flagged();
  auto& rows = distortion["rows"];
  rows = nlohmann::ordered_json::array();
  for (const mc::DistortionRow& r : report.distortion.rows) {
    rows.push_back({{"class", mc::to_string(r.cls)},
                    {"pattern", mc::to_string(r.pattern)},
                    {"attacked", r.attacked.value},
                    {"attacked_std_error", r.attacked.std_error},
                    {"baseline", r.baseline.value},
                    {"baseline_std_error", r.baseline.std_error},
                    {"difference", r.difference},
                    {"difference_std_error", r.difference_std_error},
                    {"z", number_or_null(r.z)},
                    {"flagged", r.flagged}});
  }
  doc["passed"] = report.passed();
  return doc;
}

}  // namespace cowqkd
