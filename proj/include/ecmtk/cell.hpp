#pragma once

namespace ecmtk {

inline constexpr double kCoulombsPerMilliampHour = 3.6;

constexpr double mah_to_coulombs(double mah) { return mah * kCoulombsPerMilliampHour; }
constexpr double coulombs_to_mah(double coulombs) { return coulombs / kCoulombsPerMilliampHour; }

/// Static constants of a cylindrical cell. Capacity is held in coulombs;
/// use `CellSpec::from_datasheet` to build one from mAh and millimetres.
struct CellSpec {
  double capacity_coulombs = mah_to_coulombs(3000.0);
  double nominal_voltage = 1.5;
  double cutoff_voltage = 0.8;
  double coulombic_efficiency = 1.0;
  double diameter = 14.5e-3;
  double height = 50.5e-3;

  static CellSpec from_datasheet(double capacity_mah, double nominal_voltage, double cutoff_voltage,
                                 double coulombic_efficiency, double diameter_mm, double height_mm);

  /// Throws ConfigurationError if any invariant is broken.
  void validate() const;

  double radius() const { return 0.5 * diameter; }
  double volume() const;
  double surface_area() const;
};

}  // namespace ecmtk
