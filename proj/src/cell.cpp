#include "ecmtk/cell.hpp"

#include <cmath>
#include <numbers>

#include "ecmtk/errors.hpp"

namespace ecmtk {

CellSpec CellSpec::from_datasheet(double capacity_mah, double nominal_voltage,
                                  double cutoff_voltage, double coulombic_efficiency,
                                  double diameter_mm, double height_mm) {
  CellSpec spec;
  spec.capacity_coulombs = mah_to_coulombs(capacity_mah);
  spec.nominal_voltage = nominal_voltage;
  spec.cutoff_voltage = cutoff_voltage;
  spec.coulombic_efficiency = coulombic_efficiency;
  spec.diameter = diameter_mm * 1e-3;
  spec.height = height_mm * 1e-3;
  spec.validate();
  return spec;
}

void CellSpec::validate() const {
  if (!(capacity_coulombs > 0.0) || !std::isfinite(capacity_coulombs)) {
    throw ConfigurationError("cell capacity must be positive");
  }
  if (!(cutoff_voltage < nominal_voltage)) {
    throw ConfigurationError("cutoff voltage must be below nominal voltage");
  }
  if (!(coulombic_efficiency > 0.0 && coulombic_efficiency <= 1.0)) {
    throw ConfigurationError("coulombic efficiency must lie in (0, 1]");
  }
  if (!(diameter > 0.0) || !(height > 0.0)) {
    throw ConfigurationError("cell diameter and height must be positive");
  }
}

double CellSpec::volume() const { return std::numbers::pi * radius() * radius() * height; }

double CellSpec::surface_area() const {
  const double r = radius();
  return 2.0 * std::numbers::pi * r * height + 2.0 * std::numbers::pi * r * r;
}

}  // namespace ecmtk
