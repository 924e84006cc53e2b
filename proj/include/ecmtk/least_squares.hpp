#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

namespace ecmtk::lsq {

// Fills r (size m) for parameters x. Non-finite residuals reject the point.
using ResidualFunction = std::function<void(std::span<const double> x, std::span<double> r)>;

struct Options {
  int max_iterations = 500;  // Jacobian evaluations
  double cost_rtol = 1e-8;
  double step_rtol = 1e-8;
  double fd_step = 1e-6;       // absolute, in parameter units
  double initial_damping = 1e-3;
};

enum class StopReason { IterationCap, CostTolerance, StepTolerance, ZeroCost };

std::string_view to_string(StopReason reason);

struct Result {
  std::vector<double> x;
  double cost = 0.0;  // sum of squared residuals
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
  StopReason reason = StopReason::IterationCap;
};

/// Box-constrained Levenberg-Marquardt with forward-difference Jacobians.
/// Trial points are projected onto [lower, upper]; only improving steps are
/// accepted, so the returned cost never exceeds the initial one. `free`
/// restricts the search to a subset of coordinates (empty = all).
Result minimize(const ResidualFunction& residuals, std::size_t residual_count,
                std::vector<double> x0, std::span<const double> lower,
                std::span<const double> upper, const Options& options,
                std::span<const std::size_t> free = {});

}  // namespace ecmtk::lsq
