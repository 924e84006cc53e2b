#include "ecmtk/ocv_fit.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

#include "ecmtk/errors.hpp"

namespace ecmtk {

OcvSampleSet extract_ocv_points(const CurrentVoltageTrace& trace, const PulseSegmentation& seg,
                                const CellSpec& spec, double initial_soc,
                                std::size_t min_window_samples) {
  if (!trace.has_voltage()) throw ArgumentError("extract_ocv_points: trace has no voltage");
  const std::vector<double> charge = trace.cumulative_charge();

  OcvSampleSet set;
  for (const RestWindow& w : seg.rest_windows(trace.size())) {
    if (w.end > trace.size() || w.begin >= w.end) {
      throw ArgumentError("extract_ocv_points: segmentation does not match trace");
    }
    if (w.end - w.begin < min_window_samples) {
      ++set.excluded_windows;
      continue;
    }
    const std::size_t last = w.end - 1;
    double window_max = trace[w.begin].voltage;
    for (std::size_t i = w.begin; i < w.end; ++i) window_max = std::max(window_max, trace[i].voltage);

    OcvSample p;
    p.sample_index = last;
    p.ocv = trace[last].voltage;
    p.soc = std::clamp(
        initial_soc - spec.coulombic_efficiency * charge[last] / spec.capacity_coulombs, 0.0, 1.0);
    p.source_pulse_index = w.source_pulse_index;
    p.peak_mismatch = window_max - p.ocv > kPeakMismatchTolerance;
    set.points.push_back(p);
  }
  return set;
}

std::vector<double> residual_polarization(const CurrentVoltageTrace& trace,
                                          const OcvSampleSet& samples, const CellSpec& spec,
                                          const SocParameterTable& table,
                                          const OcvPolynomial& poly, double initial_soc) {
  EcmState initial;
  initial.soc = initial_soc;
  SimulationOptions options;
  options.stop_at_cutoff = false;
  options.stop_at_depletion = false;
  const SimulationResult sim = simulate(trace, spec, table, poly, initial, options);

  std::vector<double> out;
  out.reserve(samples.points.size());
  for (const auto& p : samples.points) {
    const EcmState& s = sim.states.at(p.sample_index);
    out.push_back(s.v1 + s.v2);
  }
  return out;
}

FitReport fit_polynomial(const OcvSampleSet& samples, int degree) {
  if (degree < 0) throw ArgumentError("fit_polynomial: negative degree");
  const auto n = static_cast<Eigen::Index>(samples.points.size());
  const Eigen::Index cols = degree + 1;
  if (n < cols + 1) {
    throw ArgumentError("fit_polynomial: need at least " + std::to_string(cols + 1) +
                        " points for degree " + std::to_string(degree) + ", got " +
                        std::to_string(n));
  }

  // Column j holds soc^(degree - j) so the solution comes out highest-first.
  Eigen::MatrixXd vandermonde(n, cols);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double s = samples.points[static_cast<std::size_t>(i)].soc;
    y(i) = samples.points[static_cast<std::size_t>(i)].ocv;
    double power = 1.0;
    for (Eigen::Index j = cols - 1; j >= 0; --j) {
      vandermonde(i, j) = power;
      power *= s;
    }
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(vandermonde);
  qr.setThreshold(1e-12);
  if (qr.rank() < cols) {
    throw FitError("fit_polynomial: Vandermonde system is rank deficient (rank " +
                   std::to_string(qr.rank()) + " < " + std::to_string(cols) +
                   "); SOC values are not distinct enough");
  }
  const Eigen::VectorXd coeffs = qr.solve(y);
  const Eigen::VectorXd residual = y - vandermonde * coeffs;

  const double ss_res = residual.squaredNorm();
  const double mean = y.mean();
  const double ss_tot = (y.array() - mean).square().sum();
  // Spread below round-off of the data is treated as exactly constant.
  const double scale = std::max(1.0, y.cwiseAbs().maxCoeff());
  const double negligible = static_cast<double>(n) * std::pow(1e-14 * scale, 2);

  FitReport report;
  report.coefficients = OcvPolynomial(std::vector<double>(coeffs.data(), coeffs.data() + cols));
  report.n_points = static_cast<std::size_t>(n);
  report.residual_rms = std::sqrt(ss_res / static_cast<double>(n));
  if (ss_tot <= negligible) {
    report.r_squared = ss_res <= negligible ? 1.0 : 0.0;
  } else {
    report.r_squared = 1.0 - ss_res / ss_tot;
  }
  return report;
}

}  // namespace ecmtk
