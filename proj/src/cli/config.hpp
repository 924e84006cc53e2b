#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ecmtk/cell.hpp"
#include "ecmtk/ecm.hpp"
#include "ecmtk/errors.hpp"
#include "ecmtk/hppc.hpp"
#include "ecmtk/thermal.hpp"

namespace ecmtk::cli {

// Error from a file the run refers to but cannot read.
class FileError : public ConfigurationError {
 public:
  using ConfigurationError::ConfigurationError;
};

/// Resolved run description: every known `section.key` with its value after
/// defaults, the config file and `--set` overrides have been applied. Unit
/// suffixes in key names fix the units (capacity_mah, dt_s, h_conv_w_m2k).
class RunConfig {
 public:
  RunConfig();

  // Reads an INI file. Relative paths inside it resolve against its directory.
  void load_file(const std::filesystem::path& path);
  // Overrides one value; `key` is `section.name`.
  void set(const std::string& key, const std::string& value);
  void set_assignment(const std::string& assignment);

  const std::string& raw(const std::string& key) const;
  double number(const std::string& key) const;
  double positive(const std::string& key) const;
  long integer(const std::string& key) const;
  bool flag(const std::string& key) const;
  // Empty value maps to nullopt. Throws FileError if the file does not exist.
  std::optional<std::filesystem::path> existing_path(const std::string& key) const;

  // "section.key=value", sorted by key.
  std::vector<std::string> lines() const;

  CellSpec cell() const;
  HppcProfileSpec profile_spec() const;
  OcvPolynomial ocv() const;
  SocParameterTable parameter_table() const;
  SimulationOptions simulation_options() const;
  ColumnMap columns(bool require_voltage) const;
  // Measured trace from [trace] path, or the generated profile when unset.
  CurrentVoltageTrace profile_or_trace() const;
  CurrentVoltageTrace measured_trace() const;

  MaterialMap materials() const;
  ThermalBoundary boundary() const;
  CylMesh mesh(const CellSpec& cell) const;

 private:
  std::map<std::string, std::string> values_;
  std::filesystem::path base_dir_;
};

CurrentVoltageTrace read_trace_file(const std::filesystem::path& path, const ColumnMap& columns);

}  // namespace ecmtk::cli
