#pragma once

#include <cstddef>
#include <vector>

#include "ecmtk/cell.hpp"
#include "ecmtk/ecm.hpp"
#include "ecmtk/hppc.hpp"

namespace ecmtk {

struct OcvSample {
  double soc = 0.0;
  double ocv = 0.0;
  int source_pulse_index = -1;
  std::size_t sample_index = 0;  // index of the extracted sample in the trace
  // Final rest sample is more than 1 mV below the window maximum.
  bool peak_mismatch = false;
};

struct OcvSampleSet {
  std::vector<OcvSample> points;
  std::size_t excluded_windows = 0;  // rest windows below the minimum length
};

inline constexpr std::size_t kMinRestSamples = 10;
inline constexpr double kPeakMismatchTolerance = 1e-3;  // V

/// One OCV sample per rest window: the last (most relaxed) voltage of the
/// window, paired with the coulomb-counted SOC at that instant.
OcvSampleSet extract_ocv_points(const CurrentVoltageTrace& trace, const PulseSegmentation& seg,
                                const CellSpec& spec, double initial_soc = 1.0,
                                std::size_t min_window_samples = kMinRestSamples);

/// Branch polarization v1 + v2 remaining at each extracted sample, predicted
/// by simulating the trace's current through a fitted model.
std::vector<double> residual_polarization(const CurrentVoltageTrace& trace,
                                          const OcvSampleSet& samples, const CellSpec& spec,
                                          const SocParameterTable& table,
                                          const OcvPolynomial& poly, double initial_soc = 1.0);

struct FitReport {
  OcvPolynomial coefficients{std::vector<double>{0.0}};
  double r_squared = 0.0;
  double residual_rms = 0.0;
  std::size_t n_points = 0;
};

/// Least-squares polynomial in SOC, solved by column-pivoted Householder QR
/// on the Vandermonde matrix. Needs at least degree + 2 points.
FitReport fit_polynomial(const OcvSampleSet& samples, int degree = 5);

}  // namespace ecmtk
