#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "ecmtk/csv.hpp"
#include "ecmtk/errors.hpp"
#include "ecmtk/thermal.hpp"

namespace ecmtk {

namespace {

// Integrals of the ZOH current and the ECM heat over [a, b], taken from the
// simulated intervals that overlap it.
struct WindowIntegrals {
  double charge = 0.0;   // C
  double current_sq = 0.0;  // A^2 s
  double heat = 0.0;     // J
};

WindowIntegrals integrate_window(const SimulationResult& ecm, std::size_t& cursor, double a,
                                 double b) {
  WindowIntegrals w;
  const CurrentVoltageTrace& tr = ecm.trace;
  while (cursor + 1 < tr.size() && tr[cursor + 1].t <= a) ++cursor;
  for (std::size_t k = cursor; k + 1 < tr.size() && tr[k].t < b; ++k) {
    const double lo = std::max(a, tr[k].t);
    const double hi = std::min(b, tr[k + 1].t);
    if (hi <= lo) continue;
    const double span = tr[k + 1].t - tr[k].t;
    const double frac = (hi - lo) / span;
    const double i = tr[k].current;
    w.charge += i * (hi - lo);
    w.current_sq += i * i * (hi - lo);
    w.heat += ecm.interval_heat[k] * frac;
  }
  return w;
}

// Index of the last emitted sample at or before t.
std::size_t sample_at(const CurrentVoltageTrace& tr, double t) {
  const auto it = std::upper_bound(tr.begin(), tr.end(), t,
                                   [](double x, const TraceSample& s) { return x < s.t; });
  return it == tr.begin() ? 0 : static_cast<std::size_t>(it - tr.begin()) - 1;
}

void check_geometry(const CellSpec& spec, const CylMesh& mesh) {
  const auto close = [](double a, double b) { return std::abs(a - b) <= 1e-9 * std::abs(b); };
  if (!close(mesh.radius(), spec.radius()) || !close(mesh.height(), spec.height)) {
    throw ConfigurationError("mesh geometry (r=" + csv::format_double(mesh.radius()) +
                             " m, h=" + csv::format_double(mesh.height()) +
                             " m) does not match the cell (r=" + csv::format_double(spec.radius()) +
                             " m, h=" + csv::format_double(spec.height) + " m)");
  }
}

}  // namespace

double CosimResult::rise() const {
  if (trace.empty()) return 0.0;
  return trace.back().t_avg - initial_temperature;
}

double CosimResult::final_spread() const {
  if (trace.empty()) return 0.0;
  return trace.back().t_max - trace.back().t_min;
}

CosimResult cosimulate(const EcmInputs& ecm, const CylMesh& mesh, const MaterialMap& materials,
                       const ThermalBoundary& boundary, const CosimOptions& options) {
  ecm.spec.validate();
  materials.validate();
  boundary.validate();
  if (!(options.dt_thermal > 0.0)) throw ArgumentError("cosimulate: dt_thermal must be positive");
  if (options.snapshot_interval < 0.0) {
    throw ArgumentError("cosimulate: snapshot interval must be non-negative");
  }
  if (options.check_geometry) check_geometry(ecm.spec, mesh);

  const double q = ecm.spec.capacity_coulombs;
  const double q_ref = options.reference_capacity.value_or(q);
  const double active_volume = mesh.zone_volume(Zone::Active);
  // j per ampere of cell current, uniform over the active zone.
  const double j_per_amp = volumetric_current(1.0, q, q_ref, active_volume);
  const double ech_scale = q / q_ref;

  CosimResult result;
  result.ecm = simulate(ecm.profile, ecm.spec, ecm.table, ecm.poly, ecm.initial, ecm.simulation);
  const SimulationResult& sim = result.ecm;

  const std::size_t n = mesh.cell_count();
  std::vector<double> j_unit(n, 0.0);
  std::vector<bool> active(n, false);
  for (std::size_t c = 0; c < n; ++c) {
    active[c] = mesh.zone(c) == Zone::Active;
    if (active[c]) j_unit[c] = j_per_amp;
  }

  PotentialSolver potentials(mesh, materials);
  TransientHeatSolver heat(mesh, materials, boundary);
  // Joule dissipation scales with I^2 and does not depend on the tab
  // potentials, so one unit-current solve covers every step.
  const TabPotentials grounded{0.0, 0.0};
  const std::vector<double> joule_unit =
      potentials.joule_heating(potentials.solve(j_unit, grounded), grounded);

  const double t0 = sim.trace.start_time();
  const double t_end = sim.trace.end_time();
  result.initial_temperature = options.initial_temperature.value_or(boundary.t_ambient);
  ThermalField field = ThermalField::uniform(mesh, result.initial_temperature, t0);

  const auto record = [&](double t, double mean_current, double heat_rate) {
    const std::size_t k = sample_at(sim.trace, t);
    TemperatureSample s;
    s.t = t;
    s.t_avg = field.volume_average(mesh);
    s.t_max = field.max_temperature();
    s.t_min = field.min_temperature();
    s.soc = sim.states[k].soc;
    s.current = mean_current;
    s.voltage = sim.trace[k].voltage;
    s.heat_rate = heat_rate;
    result.trace.push_back(s);
  };
  record(t0, sim.trace[0].current, 0.0);

  std::vector<double> sources(n, 0.0);
  std::vector<double> j_mean(n, 0.0);
  std::size_t cursor = 0;
  double next_snapshot = t0 + options.snapshot_interval;
  const auto steps = static_cast<std::size_t>(std::ceil((t_end - t0) / options.dt_thermal - 1e-9));
  for (std::size_t s = 0; s < steps; ++s) {
    const double a = t0 + static_cast<double>(s) * options.dt_thermal;
    const double b = s + 1 == steps ? t_end : a + options.dt_thermal;
    const double dt = b - a;
    const WindowIntegrals w = integrate_window(sim, cursor, a, b);
    const double mean_current = w.charge / dt;
    const double mean_current_sq = w.current_sq / dt;

    // Overpotential heat of the ECM spread over the active zone, plus the
    // entropic term at the start-of-step temperature.
    const double overpotential_heat = ech_scale * w.heat / dt / active_volume;
    const double j_now = j_per_amp * mean_current;
    double total = 0.0;
    for (std::size_t c = 0; c < n; ++c) {
      sources[c] = joule_unit[c] * mean_current_sq;
      j_mean[c] = active[c] ? j_now : 0.0;
      if (active[c]) {
        const ThermalProps& p = materials.for_zone(Zone::Active);
        sources[c] += overpotential_heat +
                      electrochem_heat(j_now, 0.0, 0.0, field.temperature[c], p.entropic_coeff);
      }
      total += sources[c] * mesh.volume(c);
    }

    const std::size_t k_end = sample_at(sim.trace, b);
    const TabPotentials tabs{sim.trace[k_end].voltage, 0.0};
    const PotentialSolution phi = potentials.solve(j_mean, tabs);

    field = heat.step(field, sources, dt);
    field.phi_plus = phi.phi_plus;
    field.phi_minus = phi.phi_minus;
    record(b, mean_current, total);

    if (options.snapshot_interval > 0.0 && b >= next_snapshot - 1e-9) {
      result.snapshots.push_back(field);
      while (next_snapshot <= b + 1e-9) next_snapshot += options.snapshot_interval;
    }
  }
  result.final_field = field;
  return result;
}

LumpedResult lumped_temperature(const EcmInputs& ecm, const LumpedThermalParams& params) {
  if (!(params.mass > 0.0) || !(params.specific_heat > 0.0)) {
    throw ArgumentError("lumped_temperature: mass and specific heat must be positive");
  }
  if (!(params.h_area >= 0.0)) throw ArgumentError("lumped_temperature: hA must be non-negative");

  LumpedResult result;
  result.ecm = simulate(ecm.profile, ecm.spec, ecm.table, ecm.poly, ecm.initial, ecm.simulation);
  const CurrentVoltageTrace& tr = result.ecm.trace;
  const double mc = params.mass * params.specific_heat;
  double temp = params.initial_temperature.value_or(params.t_ambient);
  result.times.reserve(tr.size());
  result.temperature.reserve(tr.size());
  result.times.push_back(tr.start_time());
  result.temperature.push_back(temp);
  for (std::size_t k = 0; k + 1 < tr.size(); ++k) {
    const double dt = tr[k + 1].t - tr[k].t;
    const double power = result.ecm.interval_heat[k] / dt;
    if (params.h_area > 0.0) {
      const double steady = params.t_ambient + power / params.h_area;
      temp = steady + (temp - steady) * std::exp(-params.h_area * dt / mc);
    } else {
      temp += power * dt / mc;
    }
    result.times.push_back(tr[k + 1].t);
    result.temperature.push_back(temp);
  }
  return result;
}

void write_field_csv(std::ostream& os, const CylMesh& mesh, const ThermalField& field,
                     std::span<const std::string> comments) {
  csv::write_comments(os, comments);
  os << "r_m,z_m,T_K,phi_plus_V,phi_minus_V\n";
  for (std::size_t j = 0; j < mesh.n_z(); ++j) {
    for (std::size_t i = 0; i < mesh.n_r(); ++i) {
      const std::size_t c = mesh.index(i, j);
      const double row[] = {mesh.r_center(i), mesh.z_center(j), field.temperature[c],
                            field.phi_plus[c], field.phi_minus[c]};
      csv::write_row(os, row);
    }
  }
}

void write_field_vtk(std::ostream& os, const CylMesh& mesh, const ThermalField& field,
                     const std::string& title) {
  const auto coords = [&](const char* axis, std::span<const double> values) {
    os << axis << ' ' << values.size() << " double\n";
    for (std::size_t i = 0; i < values.size(); ++i) {
      os << (i ? " " : "") << csv::format_double(values[i]);
    }
    os << '\n';
  };
  const auto scalars = [&](const char* name, const std::vector<double>& values) {
    os << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    for (double v : values) os << csv::format_double(v) << '\n';
  };

  std::string header = title;
  std::replace(header.begin(), header.end(), '\n', ' ');
  os << "# vtk DataFile Version 3.0\n" << header.substr(0, 255) << "\nASCII\n";
  os << "DATASET RECTILINEAR_GRID\n";
  os << "DIMENSIONS " << mesh.n_r() + 1 << ' ' << mesh.n_z() + 1 << " 1\n";
  coords("X_COORDINATES", mesh.r_faces());
  coords("Y_COORDINATES", mesh.z_faces());
  const double zero = 0.0;
  coords("Z_COORDINATES", std::span<const double>(&zero, 1));
  os << "CELL_DATA " << mesh.cell_count() << '\n';
  scalars("temperature_K", field.temperature);
  scalars("phi_plus_V", field.phi_plus);
  scalars("phi_minus_V", field.phi_minus);
}

void write_temperature_trace(std::ostream& os, std::span<const TemperatureSample> trace,
                             std::span<const std::string> comments) {
  csv::write_comments(os, comments);
  os << "time_s,T_avg_K,T_max_K,T_min_K,soc,current_A,voltage_V,heat_W\n";
  for (const auto& s : trace) {
    const double row[] = {s.t, s.t_avg, s.t_max, s.t_min, s.soc, s.current, s.voltage, s.heat_rate};
    csv::write_row(os, row);
  }
}

}  // namespace ecmtk
