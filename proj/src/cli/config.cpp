#include "config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "ecmtk/csv.hpp"
#include "ecmtk/reference_data.hpp"
#include "ecmtk/table_io.hpp"

namespace ecmtk::cli {

namespace fs = std::filesystem;

namespace {

const std::map<std::string, std::string>& default_values() {
  static const std::map<std::string, std::string> kDefaults{
      {"cell.capacity_mah", "3000"},
      {"cell.nominal_voltage_v", "1.5"},
      {"cell.cutoff_voltage_v", "0.8"},
      {"cell.coulombic_efficiency", "1"},
      {"cell.diameter_mm", "14.5"},
      {"cell.height_mm", "50.5"},

      {"profile.amplitude_a", "1.5"},
      {"profile.frequency_hz", "0.0028"},
      {"profile.duty", "0.5"},
      {"profile.duration_s", "14400"},
      {"profile.sample_interval_s", "2.5"},
      {"profile.phase", "pulse_first"},

      // Empty table path selects the bundled 20-breakpoint table.
      {"model.table_csv", ""},
      {"model.ocv_coefficients", "2.33 -6.36 6.62 -3.35 1 1.35"},
      {"model.initial_soc", "1"},

      {"trace.path", ""},
      {"trace.time_column", "time_s"},
      {"trace.current_column", "current_A"},
      {"trace.voltage_column", "voltage_V"},
      {"trace.negate_current", "false"},

      {"simulate.dt_max_s", "2.5"},
      {"simulate.noise_v", "0"},
      {"simulate.stop_at_cutoff", "true"},
      {"simulate.stop_at_depletion", "true"},
      {"simulate.plot_script", "false"},

      {"fit_ocv.degree", "5"},
      {"fit_ocv.current_threshold_a", "0.05"},
      {"fit_ocv.min_rest_samples", "10"},
      {"fit_ocv.polarization_table_csv", ""},

      {"fit_params.breakpoints", "20"},
      {"fit_params.init", "edge"},
      {"fit_params.strategy", "global"},
      {"fit_params.max_iterations", "500"},
      {"fit_params.block_sweeps", "2"},
      {"fit_params.block_iterations", "40"},
      {"fit_params.sensitivity_floor_v", "1e-4"},
      {"fit_params.require_convergence", "false"},

      {"thermal.n_r", "20"},
      {"thermal.n_z", "60"},
      {"thermal.tab_layers", "1"},
      {"thermal.density_kg_m3", "1800"},
      {"thermal.specific_heat_j_kgk", "1100"},
      {"thermal.k_radial_w_mk", "3"},
      {"thermal.k_axial_w_mk", "30"},
      {"thermal.sigma_plus_s_m", "3.8e7"},
      {"thermal.sigma_minus_s_m", "6e7"},
      {"thermal.entropic_coeff_v_k", "0"},
      {"thermal.h_conv_w_m2k", "10"},
      {"thermal.t_ambient_k", "295.15"},
      {"thermal.dt_s", "10"},
      {"thermal.reference_capacity_mah", ""},
      {"thermal.snapshot_interval_s", "0"},
      {"thermal.write_vtk", "true"},
  };
  return kDefaults;
}

std::string trimmed(std::string_view s) { return std::string(csv::trim(s)); }

}  // namespace

CurrentVoltageTrace read_trace_file(const fs::path& path, const ColumnMap& columns) {
  std::ifstream in(path);
  if (!in) throw FileError("cannot open trace file '" + path.string() + "'");
  try {
    return load_trace(in, columns);
  } catch (const ParseError& e) {
    throw ParseError(e.line(), path.string() + ": " + [&] {
      const std::string msg = e.what();
      const auto colon = msg.find(": ");
      return colon == std::string::npos ? msg : msg.substr(colon + 2);
    }());
  }
}

RunConfig::RunConfig() : values_(default_values()), base_dir_(fs::current_path()) {}

void RunConfig::load_file(const fs::path& path) {
  if (!fs::exists(path)) throw FileError("config file '" + path.string() + "' does not exist");
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(path.string(), tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigurationError(path.string() + ":" + std::to_string(e.line()) + ": " + e.message());
  }
  base_dir_ = fs::absolute(path).parent_path();
  for (const auto& [section, body] : tree) {
    if (body.empty()) {
      throw ConfigurationError(path.string() + ": key '" + section + "' is outside any section");
    }
    for (const auto& [name, node] : body) set(section + "." + name, node.data());
  }
}

void RunConfig::set(const std::string& key, const std::string& value) {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigurationError("unknown config key '" + key + "'");
  it->second = trimmed(value);
}

void RunConfig::set_assignment(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) {
    throw ConfigurationError("override '" + assignment + "' is not of the form section.key=value");
  }
  set(trimmed(std::string_view(assignment).substr(0, eq)), assignment.substr(eq + 1));
}

const std::string& RunConfig::raw(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigurationError("unknown config key '" + key + "'");
  return it->second;
}

double RunConfig::number(const std::string& key) const {
  double v = 0.0;
  if (!csv::parse_double(raw(key), v) || !std::isfinite(v)) {
    throw ConfigurationError(key + ": '" + raw(key) + "' is not a finite number");
  }
  return v;
}

double RunConfig::positive(const std::string& key) const {
  const double v = number(key);
  if (!(v > 0.0)) throw ConfigurationError(key + " must be positive");
  return v;
}

long RunConfig::integer(const std::string& key) const {
  const std::string& s = raw(key);
  long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigurationError(key + ": '" + s + "' is not an integer");
  }
  return v;
}

bool RunConfig::flag(const std::string& key) const {
  const std::string& s = raw(key);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ConfigurationError(key + ": '" + s + "' is not a boolean");
}

std::optional<fs::path> RunConfig::existing_path(const std::string& key) const {
  const std::string& s = raw(key);
  if (s.empty()) return std::nullopt;
  fs::path p(s);
  if (p.is_relative()) p = base_dir_ / p;
  if (!fs::exists(p)) throw FileError(key + ": file '" + p.string() + "' does not exist");
  return p;
}

std::vector<std::string> RunConfig::lines() const {
  std::vector<std::string> out;
  out.reserve(values_.size());
  for (const auto& [k, v] : values_) out.push_back(k + "=" + v);
  return out;
}

CellSpec RunConfig::cell() const {
  CellSpec spec = CellSpec::from_datasheet(
      positive("cell.capacity_mah"), positive("cell.nominal_voltage_v"),
      number("cell.cutoff_voltage_v"), positive("cell.coulombic_efficiency"),
      positive("cell.diameter_mm"), positive("cell.height_mm"));
  spec.validate();
  return spec;
}

HppcProfileSpec RunConfig::profile_spec() const {
  HppcProfileSpec spec;
  spec.amplitude = number("profile.amplitude_a");
  spec.frequency = number("profile.frequency_hz");
  spec.duty_cycle = number("profile.duty");
  spec.duration = number("profile.duration_s");
  spec.sample_interval = number("profile.sample_interval_s");
  const std::string& phase = raw("profile.phase");
  if (phase == "pulse_first") {
    spec.phase = PulsePhase::PulseFirst;
  } else if (phase == "rest_first") {
    spec.phase = PulsePhase::RestFirst;
  } else {
    throw ConfigurationError("profile.phase must be pulse_first or rest_first");
  }
  spec.validate();
  return spec;
}

OcvPolynomial RunConfig::ocv() const {
  std::vector<double> coeffs;
  std::istringstream in(raw("model.ocv_coefficients"));
  std::string token;
  while (in >> token) {
    double v = 0.0;
    if (!csv::parse_double(token, v)) {
      throw ConfigurationError("model.ocv_coefficients: '" + token + "' is not a number");
    }
    coeffs.push_back(v);
  }
  if (coeffs.empty()) throw ConfigurationError("model.ocv_coefficients is empty");
  return OcvPolynomial(std::move(coeffs));
}

SocParameterTable RunConfig::parameter_table() const {
  const auto path = existing_path("model.table_csv");
  if (!path) return reference::lifes2_parameters();
  std::ifstream in(*path);
  if (!in) throw FileError("cannot open parameter table '" + path->string() + "'");
  return load_parameter_table(in);
}

SimulationOptions RunConfig::simulation_options() const {
  SimulationOptions opt;
  opt.dt_max = positive("simulate.dt_max_s");
  opt.stop_at_cutoff = flag("simulate.stop_at_cutoff");
  opt.stop_at_depletion = flag("simulate.stop_at_depletion");
  return opt;
}

ColumnMap RunConfig::columns(bool require_voltage) const {
  ColumnMap map;
  map.time = raw("trace.time_column");
  map.current = raw("trace.current_column");
  map.voltage = raw("trace.voltage_column");
  map.require_voltage = require_voltage;
  map.negate_current = flag("trace.negate_current");
  return map;
}

CurrentVoltageTrace RunConfig::profile_or_trace() const {
  const auto path = existing_path("trace.path");
  if (path) return read_trace_file(*path, columns(false));
  return generate_profile(profile_spec());
}

CurrentVoltageTrace RunConfig::measured_trace() const {
  const auto path = existing_path("trace.path");
  if (!path) throw ConfigurationError("trace.path is required for this command");
  return read_trace_file(*path, columns(true));
}

MaterialMap RunConfig::materials() const {
  MaterialMap m;
  m.active.density = positive("thermal.density_kg_m3");
  m.active.specific_heat = positive("thermal.specific_heat_j_kgk");
  m.active.k_radial = positive("thermal.k_radial_w_mk");
  m.active.k_axial = positive("thermal.k_axial_w_mk");
  m.active.sigma_plus = positive("thermal.sigma_plus_s_m");
  m.active.sigma_minus = positive("thermal.sigma_minus_s_m");
  m.active.entropic_coeff = number("thermal.entropic_coeff_v_k");
  m.validate();
  return m;
}

ThermalBoundary RunConfig::boundary() const {
  ThermalBoundary b;
  b.h_conv = number("thermal.h_conv_w_m2k");
  b.t_ambient = number("thermal.t_ambient_k");
  b.validate();
  return b;
}

CylMesh RunConfig::mesh(const CellSpec& cell) const {
  const long n_r = integer("thermal.n_r");
  const long n_z = integer("thermal.n_z");
  const long tabs = integer("thermal.tab_layers");
  if (n_r < 1 || n_z < 3 || tabs < 1) {
    throw ConfigurationError("thermal mesh needs n_r >= 1, n_z >= 3 and tab_layers >= 1");
  }
  return CylMesh::uniform(static_cast<std::size_t>(n_r), static_cast<std::size_t>(n_z),
                          cell.radius(), cell.height, static_cast<std::size_t>(tabs));
}

}  // namespace ecmtk::cli
