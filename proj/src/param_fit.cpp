#include "ecmtk/param_fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ecmtk/errors.hpp"
#include "ecmtk/hppc.hpp"

namespace ecmtk {

namespace {

constexpr std::array<RcComponent, kRcComponentCount> kComponents{
    RcComponent::RSeries, RcComponent::R1, RcComponent::R2, RcComponent::C1, RcComponent::C2};

std::vector<double> to_log_vector(const SocParameterTable& table) {
  std::vector<double> x;
  x.reserve(table.size() * kRcComponentCount);
  for (const auto& row : table.rows()) {
    for (RcComponent c : kComponents) x.push_back(std::log(get(row, c)));
  }
  return x;
}

std::vector<RcParameters> rows_from_log(std::span<const double> x) {
  std::vector<RcParameters> rows(x.size() / kRcComponentCount);
  for (std::size_t b = 0; b < rows.size(); ++b) {
    for (std::size_t c = 0; c < kRcComponentCount; ++c) {
      set(rows[b], kComponents[c], std::exp(x[b * kRcComponentCount + c]));
    }
  }
  return rows;
}

// exp(log(bound)) can land one ulp outside the bound.
std::vector<RcParameters> clamp_rows(std::vector<RcParameters> rows, const ParameterBounds& b) {
  for (auto& row : rows) {
    for (RcComponent c : kComponents) {
      set(row, c, std::clamp(get(row, c), get(b.lower, c), get(b.upper, c)));
    }
  }
  return rows;
}

std::vector<double> coulomb_soc(const FitProblem& problem) {
  const std::vector<double> q = problem.trace.cumulative_charge();
  std::vector<double> soc(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    soc[i] = std::clamp(problem.initial_soc - problem.spec.coulombic_efficiency * q[i] /
                                                  problem.spec.capacity_coulombs,
                        0.0, 1.0);
  }
  return soc;
}

std::size_t nearest_breakpoint(const std::vector<double>& breakpoints, double soc) {
  std::size_t best = 0;
  for (std::size_t b = 1; b < breakpoints.size(); ++b) {
    if (std::abs(breakpoints[b] - soc) < std::abs(breakpoints[best] - soc)) best = b;
  }
  return best;
}

// Fills r from a candidate table; shared by residuals() and the optimizer.
bool fill_residuals(const FitProblem& problem, const SocParameterTable& table,
                    std::span<double> r) {
  EcmState initial;
  initial.soc = problem.initial_soc;
  const std::size_t reached =
      simulate_voltage(problem.trace, problem.spec, table, problem.poly, initial,
                       problem.simulation, r);
  for (std::size_t k = 0; k < reached; ++k) r[k] -= problem.trace[k].voltage;
  for (std::size_t k = reached; k < r.size(); ++k) r[k] = kTruncationSentinel;
  return reached < r.size();
}

void validate_problem(const FitProblem& problem) {
  if (problem.trace.empty()) throw ArgumentError("fit problem: empty trace");
  if (!problem.trace.has_voltage()) throw ArgumentError("fit problem: trace has no voltage");
  problem.spec.validate();
  problem.bounds.validate();
  if (problem.breakpoints.size() < 2) {
    throw ConfigurationError("fit problem: need at least 2 breakpoints");
  }
}

// Least-squares line through (x, y); returns {slope, intercept}.
std::pair<double, double> line_fit(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  const double slope = sxx > 0.0 ? sxy / sxx : 0.0;
  return {slope, my - slope * mx};
}

struct TailEstimate {
  bool ok = false;
  double a_fast = 0.0, tau_fast = 0.0;
  double a_slow = 0.0, tau_slow = 0.0;
};

// Two-exponential peel of an overpotential decay sampled at times t.
TailEstimate peel_tail(const std::vector<double>& t, const std::vector<double>& dv) {
  constexpr double kMinSignal = 3e-3;  // V, well above typical DMM noise
  TailEstimate est;
  const std::size_t n = t.size();
  if (n < 8) return est;

  std::vector<double> xs, ys;
  for (std::size_t i = n / 2; i < n; ++i) {
    if (dv[i] > kMinSignal) {
      xs.push_back(t[i]);
      ys.push_back(std::log(dv[i]));
    }
  }
  if (xs.size() < 3) return est;
  const auto [slow_slope, slow_icpt] = line_fit(xs, ys);
  if (!(slow_slope < 0.0)) return est;
  est.tau_slow = -1.0 / slow_slope;
  est.a_slow = std::exp(slow_icpt);

  xs.clear();
  ys.clear();
  for (std::size_t i = 0; i < std::max<std::size_t>(n / 3, 3); ++i) {
    const double rest = dv[i] - est.a_slow * std::exp(-t[i] / est.tau_slow);
    if (rest > kMinSignal) {
      xs.push_back(t[i]);
      ys.push_back(std::log(rest));
    }
  }
  if (xs.size() >= 2) {
    const auto [fast_slope, fast_icpt] = line_fit(xs, ys);
    if (fast_slope < 0.0) {
      est.tau_fast = -1.0 / fast_slope;
      est.a_fast = std::exp(fast_icpt);
    }
  }
  est.ok = true;
  return est;
}

RcParameters clamp_to(const RcParameters& p, const ParameterBounds& b) {
  RcParameters out;
  for (RcComponent c : kComponents) set(out, c, std::clamp(get(p, c), get(b.lower, c), get(b.upper, c)));
  return out;
}

}  // namespace

void ParameterBounds::validate() const {
  for (RcComponent c : kComponents) {
    const double lo = get(lower, c);
    const double hi = get(upper, c);
    if (!(lo > 0.0) || !(hi >= lo) || !std::isfinite(hi)) {
      throw ConfigurationError("invalid bounds for " + std::string(component_name(c)));
    }
  }
}

bool ParameterBounds::contains(const RcParameters& p) const {
  return std::all_of(kComponents.begin(), kComponents.end(), [&](RcComponent c) {
    return get(p, c) >= get(lower, c) && get(p, c) <= get(upper, c);
  });
}

ResidualVector residuals(const FitProblem& problem, const SocParameterTable& table) {
  if (problem.trace.empty()) throw ArgumentError("residuals: empty trace");
  ResidualVector out;
  out.values.resize(problem.trace.size());
  out.truncated = fill_residuals(problem, table, out.values);
  return out;
}

SocParameterTable mid_bounds_table(const std::vector<double>& breakpoints,
                                   const ParameterBounds& bounds) {
  RcParameters mid;
  for (RcComponent c : kComponents) {
    set(mid, c, std::sqrt(get(bounds.lower, c) * get(bounds.upper, c)));
  }
  mid.c1 = std::clamp(mid.c1 / 10.0, bounds.lower.c1, bounds.upper.c1);
  mid.c2 = std::clamp(mid.c2 * 10.0, bounds.lower.c2, bounds.upper.c2);
  return SocParameterTable(breakpoints, std::vector<RcParameters>(breakpoints.size(), mid));
}

SocParameterTable edge_estimate_table(const FitProblem& problem) {
  validate_problem(problem);
  const CurrentVoltageTrace& trace = problem.trace;
  const std::vector<double> soc = coulomb_soc(problem);
  const std::size_t nb = problem.breakpoints.size();
  const double threshold = 0.5 * trace.max_abs_current();

  struct Accumulator {
    double log_sum[kRcComponentCount] = {};
    int count[kRcComponentCount] = {};
    void add(RcComponent c, double v) {
      if (!(v > 0.0) || !std::isfinite(v)) return;
      log_sum[static_cast<int>(c)] += std::log(v);
      ++count[static_cast<int>(c)];
    }
  };
  std::vector<Accumulator> acc(nb);

  if (threshold > 0.0) {
    const PulseSegmentation seg = segment_pulses(trace, threshold);
    for (const PulseWindow& w : seg.pulses) {
      const double mid_soc = soc[(w.on_start + w.rest_end - 1) / 2];
      Accumulator& a = acc[nearest_breakpoint(problem.breakpoints, mid_soc)];

      if (w.on_start > 0) {
        const double di = trace[w.on_start].current - trace[w.on_start - 1].current;
        const double dv = trace[w.on_start - 1].voltage - trace[w.on_start].voltage;
        if (std::abs(di) > 0.0) a.add(RcComponent::RSeries, dv / di);
      }

      if (w.on_end >= trace.size() || w.rest_end <= w.on_end) continue;
      const double pulse_current = trace[w.on_end - 1].current;
      const double on_time = trace[w.on_end].t - trace[w.on_start].t;
      std::vector<double> t, dv;
      for (std::size_t i = w.on_end; i < w.rest_end; ++i) {
        t.push_back(trace[i].t - trace[w.on_end].t);
        dv.push_back(problem.poly(soc[i]) - trace[i].voltage);
      }
      const TailEstimate tail = peel_tail(t, dv);
      if (!tail.ok || !(pulse_current > 0.0)) continue;

      struct Branch {
        double r, c;
      };
      std::vector<Branch> branches;
      for (auto [amp, tau] : {std::pair{tail.a_fast, tail.tau_fast},
                              std::pair{tail.a_slow, tail.tau_slow}}) {
        if (!(amp > 0.0) || !(tau > 0.0)) continue;
        const double r = amp / (pulse_current * -std::expm1(-on_time / tau));
        branches.push_back({r, tau / r});
      }
      std::sort(branches.begin(), branches.end(),
                [](const Branch& x, const Branch& y) { return x.c < y.c; });
      if (branches.size() == 2) {
        a.add(RcComponent::R1, branches[0].r);
        a.add(RcComponent::C1, branches[0].c);
        a.add(RcComponent::R2, branches[1].r);
        a.add(RcComponent::C2, branches[1].c);
      } else if (branches.size() == 1) {
        a.add(RcComponent::R1, branches[0].r);
        a.add(RcComponent::C1, branches[0].c);
      }
    }
  }

  const SocParameterTable fallback = mid_bounds_table(problem.breakpoints, problem.bounds);
  std::vector<RcParameters> rows(nb);
  for (std::size_t b = 0; b < nb; ++b) {
    for (RcComponent c : kComponents) {
      const int ci = static_cast<int>(c);
      // Nearest breakpoint (by index distance) that has an estimate.
      double value = get(fallback.row(b), c);
      for (std::size_t d = 0; d < nb; ++d) {
        const std::size_t cand[2] = {b >= d ? b - d : nb, b + d};
        bool found = false;
        for (std::size_t k : cand) {
          if (k < nb && acc[k].count[ci] > 0) {
            value = std::exp(acc[k].log_sum[ci] / acc[k].count[ci]);
            found = true;
            break;
          }
        }
        if (found) break;
      }
      set(rows[b], c, value);
    }
    rows[b] = clamp_to(rows[b], problem.bounds);
  }
  return SocParameterTable(problem.breakpoints, std::move(rows));
}

SocParameterTable initial_table(const FitProblem& problem, InitStrategy strategy) {
  switch (strategy) {
    case InitStrategy::Provided:
      if (!problem.initial_table) {
        throw ArgumentError("fit: initial table requested but none provided");
      }
      if (std::vector<double>(problem.initial_table->breakpoints().begin(),
                              problem.initial_table->breakpoints().end()) != problem.breakpoints) {
        throw ArgumentError("fit: initial table breakpoints differ from the problem grid");
      }
      return *problem.initial_table;
    case InitStrategy::MidBounds:
      return mid_bounds_table(problem.breakpoints, problem.bounds);
    case InitStrategy::EdgeEstimate:
      return edge_estimate_table(problem);
  }
  throw ArgumentError("fit: unknown init strategy");
}

FitResult evaluate_table(const FitProblem& problem, const SocParameterTable& table) {
  const ResidualVector r = residuals(problem, table);
  FitResult result{table, 0.0, 0.0, 0, false, {}, false, {}};
  double ss = 0.0;
  for (double v : r.values) {
    ss += v * v;
    result.max_error = std::max(result.max_error, std::abs(v));
  }
  result.rms_error = std::sqrt(ss / static_cast<double>(r.values.size()));
  result.truncated = r.truncated;

  const std::vector<double> soc = coulomb_soc(problem);
  const std::size_t nb = table.size();
  std::vector<double> bin_ss(nb, 0.0);
  std::vector<std::size_t> bin_n(nb, 0);
  const std::vector<double> bps(table.breakpoints().begin(), table.breakpoints().end());
  for (std::size_t k = 0; k < r.values.size(); ++k) {
    const std::size_t b = nearest_breakpoint(bps, soc[k]);
    bin_ss[b] += r.values[k] * r.values[k];
    ++bin_n[b];
  }
  result.per_breakpoint_rms.resize(nb);
  for (std::size_t b = 0; b < nb; ++b) {
    result.per_breakpoint_rms[b] = bin_n[b] > 0
                                       ? std::sqrt(bin_ss[b] / static_cast<double>(bin_n[b]))
                                       : std::numeric_limits<double>::quiet_NaN();
  }
  return result;
}

FitResult fit(const FitProblem& problem, const FitOptions& options) {
  validate_problem(problem);
  const SocParameterTable start = initial_table(problem, options.init);
  if (options.max_iterations <= 0) {
    FitResult result = evaluate_table(problem, start);
    result.stop_reason = "iteration_cap";
    return result;
  }

  const std::size_t nb = problem.breakpoints.size();
  std::vector<double> lower, upper;
  for (std::size_t b = 0; b < nb; ++b) {
    for (RcComponent c : kComponents) {
      lower.push_back(std::log(get(problem.bounds.lower, c)));
      upper.push_back(std::log(get(problem.bounds.upper, c)));
    }
  }

  const std::size_t m = problem.trace.size();
  const lsq::ResidualFunction fn = [&](std::span<const double> x, std::span<double> r) {
    const SocParameterTable table(problem.breakpoints, rows_from_log(x));
    fill_residuals(problem, table, r);
  };

  lsq::Options lm;
  lm.cost_rtol = options.cost_rtol;
  lm.step_rtol = options.step_rtol;

  std::vector<double> x = to_log_vector(start);
  int iterations = 0;

  if (options.strategy == FitStrategy::BlockThenPolish) {
    // Visit breakpoints in the order the discharge reaches them.
    const std::vector<double> soc = coulomb_soc(problem);
    std::vector<std::size_t> order;
    for (std::size_t k = 0; k < soc.size(); ++k) {
      const std::size_t b = nearest_breakpoint(problem.breakpoints, soc[k]);
      if (std::find(order.begin(), order.end(), b) == order.end()) order.push_back(b);
    }
    lsq::Options block = lm;
    block.max_iterations = options.block_iterations;
    for (int sweep = 0; sweep < options.block_sweeps; ++sweep) {
      for (std::size_t b : order) {
        std::vector<std::size_t> free(kRcComponentCount);
        std::iota(free.begin(), free.end(), b * kRcComponentCount);
        const lsq::Result r = lsq::minimize(fn, m, x, lower, upper, block, free);
        x = r.x;
        iterations += r.iterations;
      }
    }
  }

  lsq::Options global = lm;
  global.max_iterations = options.max_iterations;
  const lsq::Result polished = lsq::minimize(fn, m, x, lower, upper, global);
  iterations += polished.iterations;

  FitResult result =
      evaluate_table(problem, SocParameterTable(problem.breakpoints,
                                                clamp_rows(rows_from_log(polished.x), problem.bounds)));
  result.iterations = iterations;
  result.converged = polished.converged;
  result.stop_reason = std::string(lsq::to_string(polished.reason));
  return result;
}

std::string_view to_string(WeakReason reason) {
  switch (reason) {
    case WeakReason::None: return "none";
    case WeakReason::BelowFloor: return "below_floor";
    case WeakReason::Unvisited: return "unvisited";
    case WeakReason::SubSampleTimeConstant: return "sub_sample_time_constant";
  }
  return "unknown";
}

std::vector<ParameterSensitivity> identifiability_report(const FitProblem& problem,
                                                         const FitResult& result,
                                                         const IdentifiabilityOptions& options) {
  const SocParameterTable& table = result.table;
  const std::size_t m = problem.trace.size();

  // Shortest sampling interval sets the resolvable time constant.
  double min_interval = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k + 1 < m; ++k) min_interval = std::min(min_interval, problem.trace.interval(k));

  std::vector<double> plus(m), minus(m);
  std::vector<ParameterSensitivity> report;
  for (std::size_t b = 0; b < table.size(); ++b) {
    for (RcComponent c : kComponents) {
      const double value = get(table.row(b), c);
      std::vector<RcParameters> rows(table.rows().begin(), table.rows().end());
      set(rows[b], c, value * (1.0 + options.relative_step));
      fill_residuals(problem, table.with_rows(rows), plus);
      set(rows[b], c, value * (1.0 - options.relative_step));
      fill_residuals(problem, table.with_rows(rows), minus);

      double ss = 0.0;
      for (std::size_t k = 0; k < m; ++k) ss += (plus[k] - minus[k]) * (plus[k] - minus[k]);

      ParameterSensitivity s;
      s.breakpoint = b;
      s.soc = table.breakpoints()[b];
      s.component = c;
      s.value = value;
      s.sensitivity = 0.5 * std::sqrt(ss);

      const RcParameters& row = table.row(b);
      if (s.sensitivity == 0.0) {
        s.reason = WeakReason::Unvisited;
      } else if ((c == RcComponent::C1 && row.tau1() < min_interval) ||
                 (c == RcComponent::C2 && row.tau2() < min_interval)) {
        s.reason = WeakReason::SubSampleTimeConstant;
      } else if (s.sensitivity < options.floor) {
        s.reason = WeakReason::BelowFloor;
      }
      s.weakly_identified = s.reason != WeakReason::None;
      report.push_back(s);
    }
  }
  return report;
}

}  // namespace ecmtk
