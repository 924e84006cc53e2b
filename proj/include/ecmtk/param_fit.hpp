#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "ecmtk/cell.hpp"
#include "ecmtk/ecm.hpp"
#include "ecmtk/least_squares.hpp"
#include "ecmtk/trace.hpp"

namespace ecmtk {

struct ParameterBounds {
  RcParameters lower{1e-6, 1e-6, 1e-6, 1.0, 1.0};
  RcParameters upper{10.0, 10.0, 10.0, 1e5, 1e5};

  void validate() const;
  bool contains(const RcParameters& p) const;
};

/// Identification problem: a measured trace, a fixed OCV curve and the SOC
/// grid on which the five circuit components are estimated.
struct FitProblem {
  CurrentVoltageTrace trace;
  OcvPolynomial poly;
  CellSpec spec;
  std::vector<double> breakpoints;
  ParameterBounds bounds;
  std::optional<SocParameterTable> initial_table;
  double initial_soc = 1.0;
  // Residual simulations run over the whole trace by default: the cutoff and
  // depletion stops are protocol limits, not model failures.
  SimulationOptions simulation{2.5, false, false};
};

struct ResidualVector {
  std::vector<double> values;  // V_sim - V_meas per timestamp
  bool truncated = false;      // simulation stopped early; tail holds the sentinel
};

inline constexpr double kTruncationSentinel = 100.0;  // V

ResidualVector residuals(const FitProblem& problem, const SocParameterTable& table);

enum class InitStrategy { Provided, MidBounds, EdgeEstimate };
enum class FitStrategy { Global, BlockThenPolish };

struct FitOptions {
  int max_iterations = 500;  // global LM iterations; 0 disables optimization
  double cost_rtol = 1e-8;
  double step_rtol = 1e-8;
  InitStrategy init = InitStrategy::EdgeEstimate;
  FitStrategy strategy = FitStrategy::Global;
  int block_sweeps = 2;
  int block_iterations = 40;  // per breakpoint per sweep
};

struct FitResult {
  SocParameterTable table;
  double rms_error = 0.0;
  double max_error = 0.0;
  int iterations = 0;
  bool converged = false;
  std::string stop_reason;
  bool truncated = false;
  std::vector<double> per_breakpoint_rms;  // NaN where no sample maps to the breakpoint
};

/// Column-wise geometric midpoint of the bounds. C_1 and C_2 are placed one
/// decade below and above the midpoint so the two branches start distinct
/// (otherwise their Jacobian columns coincide and never separate).
SocParameterTable mid_bounds_table(const std::vector<double>& breakpoints,
                                   const ParameterBounds& bounds);

/// Direct HPPC estimates: R_s from the voltage step at each pulse onset, the
/// branches from a two-exponential peel of each relaxation tail. Breakpoints
/// without data fall back to the nearest estimated one, then to mid-bounds.
SocParameterTable edge_estimate_table(const FitProblem& problem);

SocParameterTable initial_table(const FitProblem& problem, InitStrategy strategy);

FitResult fit(const FitProblem& problem, const FitOptions& options = {});

/// RMS and max of the residuals plus the per-breakpoint RMS.
FitResult evaluate_table(const FitProblem& problem, const SocParameterTable& table);

enum class WeakReason { None, BelowFloor, Unvisited, SubSampleTimeConstant };

std::string_view to_string(WeakReason reason);

struct ParameterSensitivity {
  std::size_t breakpoint = 0;
  double soc = 0.0;
  RcComponent component = RcComponent::RSeries;
  double value = 0.0;
  // L2 norm of the change in simulated voltage for a +/- relative_step
  // perturbation of this parameter alone, halved. Volts.
  double sensitivity = 0.0;
  bool weakly_identified = false;
  WeakReason reason = WeakReason::None;
};

struct IdentifiabilityOptions {
  double relative_step = 0.01;
  // 0.1 x a 1 mV noise floor: a 10 % change then moves the trace by less
  // than one noise standard deviation.
  double floor = 1e-4;
};

std::vector<ParameterSensitivity> identifiability_report(
    const FitProblem& problem, const FitResult& result, const IdentifiabilityOptions& options = {});

}  // namespace ecmtk
