#include "ecmtk/least_squares.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "ecmtk/errors.hpp"

namespace ecmtk::lsq {

std::string_view to_string(StopReason reason) {
  switch (reason) {
    case StopReason::IterationCap: return "iteration_cap";
    case StopReason::CostTolerance: return "cost_tolerance";
    case StopReason::StepTolerance: return "step_tolerance";
    case StopReason::ZeroCost: return "zero_cost";
  }
  return "unknown";
}

namespace {

double sum_squares(std::span<const double> r) {
  double s = 0.0;
  for (double v : r) s += v * v;
  return std::isfinite(s) ? s : std::numeric_limits<double>::infinity();
}

}  // namespace

Result minimize(const ResidualFunction& residuals, std::size_t residual_count,
                std::vector<double> x0, std::span<const double> lower,
                std::span<const double> upper, const Options& options,
                std::span<const std::size_t> free) {
  const std::size_t n = x0.size();
  if (lower.size() != n || upper.size() != n) throw ArgumentError("minimize: bound size mismatch");

  std::vector<std::size_t> active(free.begin(), free.end());
  if (active.empty()) {
    active.resize(n);
    std::iota(active.begin(), active.end(), std::size_t{0});
  }
  const auto p = static_cast<Eigen::Index>(active.size());
  const auto m = static_cast<Eigen::Index>(residual_count);

  Result result;
  for (std::size_t i = 0; i < n; ++i) x0[i] = std::clamp(x0[i], lower[i], upper[i]);
  result.x = std::move(x0);

  Eigen::VectorXd r(m);
  residuals(result.x, {r.data(), residual_count});
  ++result.evaluations;
  result.cost = sum_squares({r.data(), residual_count});
  if (!std::isfinite(result.cost)) {
    throw FitError("non-finite cost at the initial point; widen the bounds or change the start");
  }
  if (result.cost == 0.0) {
    result.converged = true;
    result.reason = StopReason::ZeroCost;
    return result;
  }

  Eigen::MatrixXd jac(m, p);
  Eigen::VectorXd r_probe(m);
  Eigen::VectorXd r_trial(m);
  std::vector<double> x_trial(n);
  double damping = options.initial_damping;
  double growth = 2.0;

  while (result.iterations < options.max_iterations) {
    ++result.iterations;

    for (Eigen::Index j = 0; j < p; ++j) {
      const std::size_t idx = active[static_cast<std::size_t>(j)];
      std::vector<double> probe = result.x;
      double h = options.fd_step;
      if (probe[idx] + h > upper[idx]) h = -h;
      probe[idx] += h;
      residuals(probe, {r_probe.data(), residual_count});
      ++result.evaluations;
      jac.col(j) = (r_probe - r) / h;
      if (!jac.col(j).allFinite()) jac.col(j).setZero();
    }

    const Eigen::MatrixXd normal = jac.transpose() * jac;
    const Eigen::VectorXd gradient = jac.transpose() * r;
    const double diag_max = std::max(normal.diagonal().maxCoeff(), 1e-300);
    const Eigen::VectorXd scale = normal.diagonal().cwiseMax(1e-12 * diag_max);

    bool accepted = false;
    while (!accepted) {
      Eigen::MatrixXd system = normal;
      system.diagonal() += damping * scale;
      const Eigen::VectorXd delta = system.ldlt().solve(-gradient);

      x_trial = result.x;
      for (Eigen::Index j = 0; j < p; ++j) {
        const std::size_t idx = active[static_cast<std::size_t>(j)];
        x_trial[idx] = std::clamp(result.x[idx] + delta(j), lower[idx], upper[idx]);
      }
      Eigen::VectorXd taken(p);
      double x_norm = 0.0;
      for (Eigen::Index j = 0; j < p; ++j) {
        const std::size_t idx = active[static_cast<std::size_t>(j)];
        taken(j) = x_trial[idx] - result.x[idx];
        x_norm += result.x[idx] * result.x[idx];
      }
      if (!taken.allFinite() ||
          taken.norm() <= options.step_rtol * (std::sqrt(x_norm) + options.step_rtol)) {
        result.converged = true;
        result.reason = StopReason::StepTolerance;
        return result;
      }

      residuals(x_trial, {r_trial.data(), residual_count});
      ++result.evaluations;
      const double trial_cost = sum_squares({r_trial.data(), residual_count});
      const double predicted = -(2.0 * gradient.dot(taken) + taken.dot(normal * taken));

      if (trial_cost < result.cost) {
        const double decrease = result.cost - trial_cost;
        const double rho = predicted > 0.0 ? decrease / predicted : 0.0;
        damping *= std::max(1.0 / 3.0, 1.0 - std::pow(2.0 * rho - 1.0, 3));
        growth = 2.0;
        const double relative = decrease / result.cost;
        result.x = x_trial;
        r = r_trial;
        result.cost = trial_cost;
        accepted = true;
        if (trial_cost == 0.0) {
          result.converged = true;
          result.reason = StopReason::ZeroCost;
          return result;
        }
        if (relative < options.cost_rtol) {
          result.converged = true;
          result.reason = StopReason::CostTolerance;
          return result;
        }
      } else {
        damping *= growth;
        growth *= 2.0;
      }
    }
  }
  result.reason = StopReason::IterationCap;
  return result;
}

}  // namespace ecmtk::lsq
