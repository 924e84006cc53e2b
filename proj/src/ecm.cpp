#include "ecmtk/ecm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ecmtk/errors.hpp"

namespace ecmtk {

namespace {

bool all_finite(std::initializer_list<double> values) {
  return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

// v(dt) for a branch driven by constant current from v0.
double branch_update(double v0, double current, double r, double c, double dt) {
  const double tau = r * c;
  const double decay = std::exp(-dt / tau);
  const double charge_fraction = -std::expm1(-dt / tau);
  return v0 * decay + current * r * charge_fraction;
}

// Integral of the branch voltage over [0, dt].
double branch_integral(double v0, double current, double r, double c, double dt) {
  const double tau = r * c;
  const double steady = current * r;
  return steady * dt + (v0 - steady) * tau * -std::expm1(-dt / tau);
}

}  // namespace

std::string_view component_name(RcComponent c) {
  switch (c) {
    case RcComponent::RSeries: return "R_s";
    case RcComponent::R1: return "R_1";
    case RcComponent::R2: return "R_2";
    case RcComponent::C1: return "C_1";
    case RcComponent::C2: return "C_2";
  }
  return "?";
}

double get(const RcParameters& p, RcComponent c) {
  switch (c) {
    case RcComponent::RSeries: return p.r_series;
    case RcComponent::R1: return p.r1;
    case RcComponent::R2: return p.r2;
    case RcComponent::C1: return p.c1;
    case RcComponent::C2: return p.c2;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

void set(RcParameters& p, RcComponent c, double value) {
  switch (c) {
    case RcComponent::RSeries: p.r_series = value; break;
    case RcComponent::R1: p.r1 = value; break;
    case RcComponent::R2: p.r2 = value; break;
    case RcComponent::C1: p.c1 = value; break;
    case RcComponent::C2: p.c2 = value; break;
  }
}

SocParameterTable::SocParameterTable(std::vector<double> breakpoints,
                                     std::vector<RcParameters> rows)
    : breakpoints_(std::move(breakpoints)), rows_(std::move(rows)) {
  if (breakpoints_.size() < 2) {
    throw ConfigurationError("parameter table needs at least 2 breakpoints");
  }
  if (breakpoints_.size() != rows_.size()) {
    throw ConfigurationError("parameter table has " + std::to_string(breakpoints_.size()) +
                             " breakpoints but " + std::to_string(rows_.size()) + " rows");
  }
  for (std::size_t i = 0; i < breakpoints_.size(); ++i) {
    const double bp = breakpoints_[i];
    if (!std::isfinite(bp) || bp < 0.0 || bp > 1.0) {
      throw ConfigurationError("breakpoint " + std::to_string(i) + " outside [0, 1]");
    }
    if (i > 0 && !(bp > breakpoints_[i - 1])) {
      throw ConfigurationError("breakpoints must be strictly ascending");
    }
    const RcParameters& r = rows_[i];
    if (!all_finite({r.r_series, r.r1, r.r2, r.c1, r.c2})) {
      throw ConfigurationError("non-finite parameter in row " + std::to_string(i));
    }
    if (r.r_series < 0.0 || r.r1 < 0.0 || r.r2 < 0.0) {
      throw ConfigurationError("negative resistance in row " + std::to_string(i));
    }
    if (!(r.c1 > 0.0) || !(r.c2 > 0.0)) {
      throw ConfigurationError("non-positive capacitance in row " + std::to_string(i));
    }
  }
}

RcParameters SocParameterTable::interpolate(double soc) const {
  if (!(soc > breakpoints_.front())) return rows_.front();
  if (!(soc < breakpoints_.back())) return rows_.back();

  const auto upper = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), soc);
  const std::size_t hi = static_cast<std::size_t>(upper - breakpoints_.begin());
  const std::size_t lo = hi - 1;
  const double w = (soc - breakpoints_[lo]) / (breakpoints_[hi] - breakpoints_[lo]);

  const auto lerp = [w](double a, double b) {
    const double v = a + w * (b - a);
    return std::clamp(v, std::min(a, b), std::max(a, b));
  };
  const RcParameters& a = rows_[lo];
  const RcParameters& b = rows_[hi];
  return {lerp(a.r_series, b.r_series), lerp(a.r1, b.r1), lerp(a.r2, b.r2), lerp(a.c1, b.c1),
          lerp(a.c2, b.c2)};
}

SocParameterTable SocParameterTable::with_rows(std::vector<RcParameters> rows) const {
  return SocParameterTable(breakpoints_, std::move(rows));
}

RcParameters interpolate_params(const SocParameterTable& table, double soc) {
  return table.interpolate(soc);
}

OcvPolynomial::OcvPolynomial(std::vector<double> coefficients_high_first)
    : coefficients_(std::move(coefficients_high_first)) {
  if (coefficients_.empty()) throw ConfigurationError("OCV polynomial has no coefficients");
  for (double c : coefficients_) {
    if (!std::isfinite(c)) throw ConfigurationError("OCV polynomial has a non-finite coefficient");
  }
}

double OcvPolynomial::evaluate_raw(double soc) const {
  double acc = 0.0;
  for (double c : coefficients_) acc = acc * soc + c;
  return acc;
}

double OcvPolynomial::operator()(double soc, bool* clamped) const {
  const double s = std::clamp(soc, 0.0, 1.0);
  if (clamped != nullptr) *clamped = (s != soc);
  return evaluate_raw(s);
}

void OcvPolynomial::check_sanity() const {
  constexpr int kSamples = 1000;
  for (int i = 0; i <= kSamples; ++i) {
    const double v = evaluate_raw(static_cast<double>(i) / kSamples);
    if (!(v >= 0.0 && v <= 5.0)) {
      throw ConfigurationError("OCV polynomial leaves [0, 5] V on SOC in [0, 1]");
    }
  }
}

double ocv_eval(const OcvPolynomial& poly, double soc, bool* clamped) { return poly(soc, clamped); }

StateDerivatives state_derivatives(const EcmState& state, double current, const CellSpec& spec,
                                   const SocParameterTable& table) {
  if (!all_finite({state.soc, state.v1, state.v2, current})) {
    throw NumericError("state_derivatives: non-finite input");
  }
  const RcParameters p = table.interpolate(state.soc);
  StateDerivatives d;
  d.d_soc = -spec.coulombic_efficiency * current / spec.capacity_coulombs;
  d.d_v1 = -state.v1 / (p.r1 * p.c1) + current / p.c1;
  d.d_v2 = -state.v2 / (p.r2 * p.c2) + current / p.c2;
  if (!all_finite({d.d_soc, d.d_v1, d.d_v2})) {
    throw NumericError("state_derivatives: non-finite derivative (zero time constant?)");
  }
  return d;
}

double terminal_voltage(const EcmState& state, double current, const OcvPolynomial& poly,
                        const SocParameterTable& table) {
  const RcParameters p = table.interpolate(state.soc);
  return poly(state.soc) - state.v1 - state.v2 - p.r_series * current;
}

EcmState step(const EcmState& state, double current, double dt, const CellSpec& spec,
              const SocParameterTable& table) {
  if (!(dt > 0.0)) throw ArgumentError("step: dt must be positive");
  const RcParameters p = table.interpolate(state.soc);

  EcmState next = state;
  next.v1 = branch_update(state.v1, current, p.r1, p.c1, dt);
  next.v2 = branch_update(state.v2, current, p.r2, p.c2, dt);
  const double soc = state.soc - spec.coulombic_efficiency * current * dt / spec.capacity_coulombs;
  next.soc = std::clamp(soc, 0.0, 1.0);
  next.soc_clamped = state.soc_clamped || next.soc != soc;
  next.t = state.t + dt;
  return next;
}

double dissipated_energy(const EcmState& state, double current, double dt,
                         const SocParameterTable& table) {
  const RcParameters p = table.interpolate(state.soc);
  const double branches = branch_integral(state.v1, current, p.r1, p.c1, dt) +
                          branch_integral(state.v2, current, p.r2, p.c2, dt);
  return current * (branches + p.r_series * current * dt);
}

std::string_view to_string(TerminationReason reason) {
  switch (reason) {
    case TerminationReason::EndOfProfile: return "end_of_profile";
    case TerminationReason::CutoffVoltage: return "cutoff_voltage";
    case TerminationReason::SocDepleted: return "soc_depleted";
  }
  return "unknown";
}

namespace {

struct RunSummary {
  std::size_t emitted = 0;
  TerminationReason reason = TerminationReason::EndOfProfile;
  double termination_time = 0.0;
  bool soc_clamped = false;
};

// Drives the ECM through the profile. `emit(k, state, voltage)` is called for
// every reached timestamp, `heat(k, joules)` once per completed interval.
template <typename Emit, typename Heat>
RunSummary run_profile(const CurrentVoltageTrace& profile, const CellSpec& spec,
                       const SocParameterTable& table, const OcvPolynomial& poly,
                       const EcmState& initial, const SimulationOptions& options, Emit&& emit,
                       Heat&& heat) {
  if (profile.empty()) throw ArgumentError("simulate: empty profile");
  if (!(options.dt_max > 0.0)) throw ArgumentError("simulate: dt_max must be positive");

  RunSummary summary;
  EcmState state = initial;
  state.t = profile.start_time();
  bool depleted = state.soc <= 0.0;
  double depletion_time = depleted ? state.t : 0.0;
  const std::size_t n = profile.size();

  for (std::size_t k = 0; k < n; ++k) {
    const double current = profile[k].current;
    const double v = terminal_voltage(state, current, poly, table);
    emit(k, state, v);
    summary.emitted = k + 1;

    if (options.stop_at_cutoff && v < spec.cutoff_voltage) {
      summary.reason = TerminationReason::CutoffVoltage;
      summary.termination_time = profile[k].t;
      break;
    }
    if (options.stop_at_depletion && depleted) {
      summary.reason = TerminationReason::SocDepleted;
      summary.termination_time = depletion_time;
      break;
    }
    if (k + 1 == n) break;

    const double span = profile[k + 1].t - profile[k].t;
    const auto substeps = static_cast<std::size_t>(std::ceil(span / options.dt_max - 1e-12));
    const std::size_t count = std::max<std::size_t>(substeps, 1);
    const double h = span / static_cast<double>(count);
    double joules = 0.0;
    for (std::size_t s = 0; s < count; ++s) {
      joules += dissipated_energy(state, current, h, table);
      const double soc_before = state.soc;
      const double t_before = state.t;
      state = step(state, current, h, spec, table);
      if (!depleted && soc_before > 0.0 && current > 0.0 &&
          soc_before - spec.coulombic_efficiency * current * h / spec.capacity_coulombs <= 0.0) {
        depleted = true;
        depletion_time =
            t_before + soc_before * spec.capacity_coulombs / (spec.coulombic_efficiency * current);
      }
    }
    // Anchor time to the profile grid so long runs do not drift.
    state.t = profile[k + 1].t;
    heat(k, joules);
    if (!std::isfinite(state.v1) || !std::isfinite(state.v2)) {
      throw NumericError("simulate: branch voltage became non-finite");
    }
  }
  summary.soc_clamped = state.soc_clamped;
  if (summary.reason == TerminationReason::EndOfProfile) summary.termination_time = state.t;
  return summary;
}

}  // namespace

SimulationResult simulate(const CurrentVoltageTrace& profile, const CellSpec& spec,
                          const SocParameterTable& table, const OcvPolynomial& poly,
                          const EcmState& initial, const SimulationOptions& options) {
  std::vector<TraceSample> samples;
  SimulationResult result;
  samples.reserve(profile.size());
  result.states.reserve(profile.size());
  result.interval_heat.reserve(profile.size());

  const RunSummary summary = run_profile(
      profile, spec, table, poly, initial, options,
      [&](std::size_t k, const EcmState& state, double v) {
        samples.push_back({profile[k].t, profile[k].current, v});
        result.states.push_back(state);
      },
      [&](std::size_t, double joules) { result.interval_heat.push_back(joules); });

  // Heat is only meaningful between emitted samples.
  result.interval_heat.resize(samples.empty() ? 0 : samples.size() - 1);
  result.trace = CurrentVoltageTrace(std::move(samples), true);
  result.reason = summary.reason;
  result.termination_time = summary.termination_time;
  result.soc_clamped = summary.soc_clamped;
  return result;
}

std::size_t simulate_voltage(const CurrentVoltageTrace& profile, const CellSpec& spec,
                             const SocParameterTable& table, const OcvPolynomial& poly,
                             const EcmState& initial, const SimulationOptions& options,
                             std::span<double> out) {
  if (out.size() < profile.size()) throw ArgumentError("simulate_voltage: output span too short");
  const RunSummary summary = run_profile(
      profile, spec, table, poly, initial, options,
      [&](std::size_t k, const EcmState&, double v) { out[k] = v; }, [](std::size_t, double) {});
  return summary.emitted;
}

}  // namespace ecmtk
