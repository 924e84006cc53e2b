#include "ecmtk/reference_data.hpp"

#include <array>

namespace ecmtk::reference {

CellSpec lifes2_aa_cell() { return CellSpec::from_datasheet(3000.0, 1.5, 0.8, 1.0, 14.5, 50.5); }

OcvPolynomial lifes2_ocv() { return OcvPolynomial({2.33, -6.36, 6.62, -3.35, 1.0, 1.35}); }

SocParameterTable lifes2_parameters() {
  struct Row {
    double soc;
    RcParameters p;
  };
  static constexpr std::array<Row, 20> kRows{{
      {0.05, {2.60E-05, 2.68E-01, 8.51E-02, 2.33E+02, 4.00E+03}},
      {0.10, {2.32E-04, 3.47E-01, 1.71E-03, 1.92E+02, 3.08E+03}},
      {0.15, {2.66E-02, 2.98E-01, 7.76E-04, 1.99E+02, 5.33E+03}},
      {0.20, {1.13E-02, 3.12E-01, 3.44E-04, 1.73E+02, 3.70E+03}},
      {0.25, {1.07E-02, 2.82E-01, 1.55E-02, 1.82E+02, 3.89E+03}},
      {0.30, {1.48E-02, 2.67E-01, 1.45E-02, 1.85E+02, 1.28E+03}},
      {0.35, {1.18E-02, 2.64E-01, 8.72E-03, 1.76E+02, 1.23E+03}},
      {0.40, {1.29E-02, 2.56E-01, 9.20E-03, 1.68E+02, 1.34E+03}},
      {0.45, {2.14E-02, 2.39E-01, 6.93E-03, 1.71E+02, 1.39E+03}},
      {0.50, {2.82E-02, 2.22E-01, 9.52E-03, 1.60E+02, 1.54E+03}},
      {0.55, {3.19E-02, 2.01E-01, 2.11E-02, 1.21E+02, 1.65E+03}},
      {0.60, {3.19E-02, 1.91E-01, 2.47E-02, 1.05E+02, 1.78E+03}},
      {0.65, {3.25E-02, 1.80E-01, 2.89E-02, 8.71E+01, 1.86E+03}},
      {0.70, {3.13E-02, 1.68E-01, 3.26E-02, 1.74E+01, 1.91E+03}},
      {0.75, {5.49E-02, 1.40E-01, 3.16E-02, 6.40E+01, 1.86E+03}},
      {0.80, {8.20E-02, 1.09E-01, 3.27E-02, 1.09E+02, 2.01E+03}},
      {0.85, {1.11E-01, 8.03E-02, 3.27E-02, 1.62E+02, 2.08E+03}},
      {0.90, {1.46E-01, 5.24E-02, 3.20E-02, 2.22E+02, 2.46E+03}},
      {0.95, {1.64E-01, 4.05E-02, 3.25E-02, 2.77E+02, 3.50E+03}},
      {1.00, {1.75E-01, 5.45E-02, 6.80E-02, 4.20E+02, 9.24E+03}},
  }};
  std::vector<double> soc;
  std::vector<RcParameters> rows;
  for (const auto& r : kRows) {
    soc.push_back(r.soc);
    rows.push_back(r.p);
  }
  return SocParameterTable(std::move(soc), std::move(rows));
}

HppcProfileSpec half_c_hppc() {
  HppcProfileSpec spec;
  spec.amplitude = 1.5;
  spec.frequency = 2.8e-3;
  spec.duty_cycle = 0.5;
  spec.duration = 14400.0;
  spec.sample_interval = 2.5;
  spec.phase = PulsePhase::PulseFirst;
  return spec;
}

std::vector<double> default_breakpoints(std::size_t count) {
  // Evenly spaced ending at 1.0 with the same step as the first point.
  std::vector<double> bp(count);
  for (std::size_t i = 0; i < count; ++i) {
    bp[i] = static_cast<double>(i + 1) / static_cast<double>(count);
  }
  return bp;
}

}  // namespace ecmtk::reference
