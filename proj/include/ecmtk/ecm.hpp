#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "ecmtk/cell.hpp"
#include "ecmtk/trace.hpp"

namespace ecmtk {

/// Passive components of the two-branch Thevenin circuit at one SOC.
struct RcParameters {
  double r_series = 0.0;  // ohm
  double r1 = 0.0;        // ohm
  double r2 = 0.0;        // ohm
  double c1 = 0.0;        // farad
  double c2 = 0.0;        // farad

  double tau1() const { return r1 * c1; }
  double tau2() const { return r2 * c2; }

  friend bool operator==(const RcParameters&, const RcParameters&) = default;
};

inline constexpr int kRcComponentCount = 5;

enum class RcComponent { RSeries = 0, R1 = 1, R2 = 2, C1 = 3, C2 = 4 };

std::string_view component_name(RcComponent c);
double get(const RcParameters& p, RcComponent c);
void set(RcParameters& p, RcComponent c, double value);

/// SOC-indexed lookup of the circuit components, linear between breakpoints
/// and clamped to the end rows outside them.
class SocParameterTable {
 public:
  SocParameterTable(std::vector<double> breakpoints, std::vector<RcParameters> rows);

  std::size_t size() const { return breakpoints_.size(); }
  std::span<const double> breakpoints() const { return breakpoints_; }
  std::span<const RcParameters> rows() const { return rows_; }
  const RcParameters& row(std::size_t i) const { return rows_[i]; }

  RcParameters interpolate(double soc) const;

  // Same breakpoints, different values. Validates like the constructor.
  SocParameterTable with_rows(std::vector<RcParameters> rows) const;

 private:
  std::vector<double> breakpoints_;
  std::vector<RcParameters> rows_;
};

RcParameters interpolate_params(const SocParameterTable& table, double soc);

/// OCV(SOC) polynomial, coefficients stored highest degree first.
class OcvPolynomial {
 public:
  explicit OcvPolynomial(std::vector<double> coefficients_high_first);

  std::span<const double> coefficients() const { return coefficients_; }
  int degree() const { return static_cast<int>(coefficients_.size()) - 1; }

  // Horner evaluation without clamping.
  double evaluate_raw(double soc) const;

  // Clamps soc to [0,1]; sets *clamped when it had to.
  double operator()(double soc, bool* clamped = nullptr) const;

  // Throws ConfigurationError if the polynomial leaves [0, 5] V on [0, 1].
  void check_sanity() const;

 private:
  std::vector<double> coefficients_;
};

double ocv_eval(const OcvPolynomial& poly, double soc, bool* clamped = nullptr);

struct EcmState {
  double soc = 1.0;
  double v1 = 0.0;  // V, first RC branch
  double v2 = 0.0;  // V, second RC branch
  double t = 0.0;
  bool soc_clamped = false;
};

struct StateDerivatives {
  double d_soc = 0.0;
  double d_v1 = 0.0;
  double d_v2 = 0.0;
};

// Positive current discharges the cell and charges both branches positively.
StateDerivatives state_derivatives(const EcmState& state, double current, const CellSpec& spec,
                                   const SocParameterTable& table);

double terminal_voltage(const EcmState& state, double current, const OcvPolynomial& poly,
                        const SocParameterTable& table);

/// Exact update for a constant current held over dt, with the circuit
/// parameters frozen at the starting SOC.
EcmState step(const EcmState& state, double current, double dt, const CellSpec& spec,
              const SocParameterTable& table);

/// Heat released in the circuit, I * (OCV - V), integrated exactly over one
/// frozen-parameter step. Joules.
double dissipated_energy(const EcmState& state, double current, double dt,
                         const SocParameterTable& table);

enum class TerminationReason { EndOfProfile, CutoffVoltage, SocDepleted };

std::string_view to_string(TerminationReason reason);

struct SimulationOptions {
  double dt_max = 2.5;
  bool stop_at_cutoff = true;
  bool stop_at_depletion = true;
};

struct SimulationResult {
  CurrentVoltageTrace trace;       // (t, I, V) at every reached profile timestamp
  std::vector<EcmState> states;    // state at each emitted timestamp
  std::vector<double> interval_heat;  // J dissipated over [t_k, t_{k+1})
  TerminationReason reason = TerminationReason::EndOfProfile;
  double termination_time = 0.0;   // exact depletion instant for SocDepleted
  bool soc_clamped = false;
};

SimulationResult simulate(const CurrentVoltageTrace& profile, const CellSpec& spec,
                          const SocParameterTable& table, const OcvPolynomial& poly,
                          const EcmState& initial, const SimulationOptions& options = {});

/// Terminal voltage only, without storing states. Returns the number of
/// timestamps reached before termination; the remainder of `out` is untouched.
std::size_t simulate_voltage(const CurrentVoltageTrace& profile, const CellSpec& spec,
                             const SocParameterTable& table, const OcvPolynomial& poly,
                             const EcmState& initial, const SimulationOptions& options,
                             std::span<double> out);

}  // namespace ecmtk
