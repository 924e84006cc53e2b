// Acceptance runner. `acceptance N` checks criterion N, no argument checks
// all of them. Prints one PASS/FAIL line per criterion.
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ecmtk/ecm.hpp"
#include "ecmtk/errors.hpp"
#include "ecmtk/hppc.hpp"
#include "ecmtk/ocv_fit.hpp"
#include "ecmtk/reference_data.hpp"
#include "ecmtk/table_io.hpp"
#include "ecmtk/thermal.hpp"
#include "support.hpp"

using namespace ecmtk;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

// Plain strtod parse of the shipped CSV, independent of the library reader.
std::vector<std::vector<double>> parse_table_csv(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::strtod(cell.c_str(), nullptr));
    rows.push_back(row);
  }
  return rows;
}

Outcome table_regression() {
  const auto rows = parse_table_csv(fs::path(ECMTK_DATA_DIR) / "lifes2_parameters.csv");
  if (rows.size() != 20) return {false, "expected 20 rows"};
  const SocParameterTable table = reference::lifes2_parameters();
  std::ifstream in(fs::path(ECMTK_DATA_DIR) / "lifes2_parameters.csv");
  const SocParameterTable loaded = load_parameter_table(in);
  std::size_t mismatches = 0;
  for (const auto& r : rows) {
    for (const SocParameterTable* t : {&table, &loaded}) {
      const RcParameters p = interpolate_params(*t, r[0]);
      const double got[5] = {p.r_series, p.r1, p.r2, p.c1, p.c2};
      for (int k = 0; k < 5; ++k) mismatches += got[k] == r[k + 1] ? 0 : 1;
    }
  }
  return {mismatches == 0, std::to_string(mismatches) + " mismatches over 200 values"};
}

Outcome ocv_polynomial() {
  const OcvPolynomial poly = reference::lifes2_ocv();
  const double lo = ocv_eval(poly, 0.0), hi = ocv_eval(poly, 1.0);
  OcvSampleSet set;
  for (int i = 0; i < 20; ++i) {
    OcvSample s;
    s.soc = i / 19.0;
    s.ocv = poly(s.soc);
    set.points.push_back(s);
  }
  const FitReport fit = fit_polynomial(set, 5);
  double worst = 0.0;
  for (std::size_t k = 0; k < 6; ++k) {
    worst = std::max(worst, std::abs(fit.coefficients.coefficients()[k] - poly.coefficients()[k]));
  }
  const bool pass = std::abs(lo - 1.35) <= 1e-12 && std::abs(hi - 1.59) <= 1e-12 && worst <= 1e-9;
  return {pass, fmt("OCV(0)=%.15f OCV(1)=%.15f max coefficient error %.3g", lo, hi, worst)};
}

Outcome discharge_timing() {
  const CellSpec cell = reference::lifes2_aa_cell();
  const HppcProfileSpec spec = reference::half_c_hppc();
  const auto sim = simulate(generate_profile(spec), cell, reference::lifes2_parameters(),
                            reference::lifes2_ocv(), EcmState{});
  // Continuous-time depletion of the square wave: on-time reaches Q/I after
  // floor(n) full periods plus the remaining on-time.
  const double on_needed = cell.capacity_coulombs / spec.amplitude;
  const double on_per_period = spec.duty_cycle * spec.period();
  const double periods = std::floor(on_needed / on_per_period);
  const double analytic = periods * spec.period() + (on_needed - periods * on_per_period);
  const bool depleted = sim.reason == TerminationReason::SocDepleted;
  const double t = depleted ? sim.termination_time : std::numeric_limits<double>::quiet_NaN();
  const bool pass = depleted && std::abs(t - 14400.0) <= spec.sample_interval;
  return {pass, fmt("SOC=0 at t=%.3f s (target 14400 +/- 2.5 s; square-wave on-time gives %.3f s)",
                    t, analytic)};
}

Outcome rc_oracle() {
  const SocParameterTable reference_table = reference::lifes2_parameters();
  double r_lo = 1e300, r_hi = 0, c_lo = 1e300, c_hi = 0;
  for (const auto& row : reference_table.rows()) {
    r_lo = std::min({r_lo, row.r1, row.r2});
    r_hi = std::max({r_hi, row.r1, row.r2});
    c_lo = std::min({c_lo, row.c1, row.c2});
    c_hi = std::max({c_hi, row.c1, row.c2});
  }
  std::mt19937_64 rng(20240);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto logu = [&](double a, double b) { return a * std::pow(b / a, u(rng)); };
  CellSpec cell = reference::lifes2_aa_cell();
  double worst = 0.0;
  for (int n = 0; n < 1000; ++n) {
    const RcParameters p{logu(1e-5, 0.1), logu(r_lo, r_hi), logu(r_lo, r_hi), logu(c_lo, c_hi),
                         logu(c_lo, c_hi)};
    const double current = 3.0 * (2.0 * u(rng) - 1.0);
    const double dt = logu(0.01, 100.0);
    EcmState s;
    s.soc = 0.5;
    s.v1 = 0.2 * (2.0 * u(rng) - 1.0);
    s.v2 = 0.2 * (2.0 * u(rng) - 1.0);
    const EcmState next = step(s, current, dt, cell, fixtures::flat_table(p));
    const double branch[2][3] = {{p.r1, p.c1, s.v1}, {p.r2, p.c2, s.v2}};
    const double got[2] = {next.v1, next.v2};
    for (int b = 0; b < 2; ++b) {
      const double r = branch[b][0], c = branch[b][1], v0 = branch[b][2];
      const double decay = std::exp(-dt / (r * c));
      const double expected = v0 * decay + current * r * (1.0 - decay);
      const double scale = std::max(std::abs(v0), std::abs(current * r));
      worst = std::max(worst, std::abs(got[b] - expected) / scale);
    }
  }
  return {worst <= 1e-12, fmt("max relative deviation %.3g over 1000 draws", worst)};
}

Outcome parameter_recovery() {
  const fs::path dir = fixtures::fresh_dir("acceptance_5");
  fixtures::write_text(dir / "run.ini",
                      "[simulate]\nnoise_v = 0.001\n"
                      "[trace]\npath = simulation.csv\n"
                      "[fit_params]\nbreakpoints = 20\n");
  const std::string common =
      " --quiet --config \"" + (dir / "run.ini").string() + "\" --out \"" + dir.string() + "\"";
  if (fixtures::run_tool("simulate --seed 1 --set trace.path=" + common, dir / "sim.log") != 0) {
    return {false, "simulate failed: " + fixtures::read_file(dir / "sim.log")};
  }
  const int code = fixtures::run_tool("fit-params" + common, dir / "fit.log");
  if (code != 0) return {false, "fit-params exited " + std::to_string(code)};

  std::ifstream params(dir / "params.csv");
  const SocParameterTable fitted = load_parameter_table(params);
  std::ifstream sim_in(dir / "simulation.csv");
  ColumnMap map;
  const auto trace = load_trace(sim_in, map);
  // SOC range covered by the trace, by coulomb counting.
  const double q = reference::lifes2_aa_cell().capacity_coulombs;
  const double soc_min = 1.0 - trace.cumulative_charge().back() / q;

  const SocParameterTable truth = reference::lifes2_parameters();
  const std::string json = fixtures::read_file(dir / "fit_params.json");
  const auto pos = json.find("\"rms_error_v\":");
  const double rms = std::strtod(json.c_str() + pos + 14, nullptr);

  std::ostringstream failures;
  std::size_t checked = 0, failed = 0;
  for (std::size_t b = 0; b < fitted.size(); ++b) {
    const double soc = fitted.breakpoints()[b];
    if (soc < soc_min) continue;
    const RcParameters want = interpolate_params(truth, soc);
    if (want.tau1() <= 2.5 || want.tau2() <= 2.5) continue;
    const RcParameters& got = fitted.row(b);
    for (const auto& [name, g, w] : {std::tuple{"R_s", got.r_series, want.r_series},
                                     std::tuple{"R_1", got.r1, want.r1}}) {
      ++checked;
      if (std::abs(g - w) > 0.1 * w) {
        ++failed;
        char buf[160];
        std::snprintf(buf, sizeof buf, " %s@%.2f=%.3g(true %.3g)", name, soc, g, w);
        failures << buf;
      }
    }
  }
  const bool pass = rms <= 1.5e-3 && failed == 0 && checked > 0;
  return {pass, fmt("rms %.4f mV, ", rms * 1e3) + std::to_string(failed) + "/" +
                    std::to_string(checked) + " R_s/R_1 outside 10%" + failures.str()};
}

Outcome thermal_conservation() {
  const CellSpec cell = reference::lifes2_aa_cell();
  const ThermalProps props;
  const MaterialMap materials;
  ThermalBoundary insulated;
  insulated.outer = insulated.top = insulated.bottom = FaceCondition::Insulated;

  // Uniform source, insulated.
  const CylMesh mesh = CylMesh::uniform(20, 60, cell.radius(), cell.height, 2);
  const double q = 3.0e4, dt = 10.0;
  const std::vector<double> uniform(mesh.cell_count(), q);
  const auto f1 = step_temperature(ThermalField::uniform(mesh, 300.0), mesh, materials, insulated,
                                   uniform, dt);
  const double lumped = q * dt / props.volumetric_heat_capacity();
  double err_lumped = 0.0;
  for (double t : f1.temperature) err_lumped = std::max(err_lumped, std::abs((t - 300.0) / lumped - 1.0));

  // Energy balance with convection and a random source.
  ThermalBoundary cooled;
  cooled.h_conv = 20.0;
  TransientHeatSolver solver(mesh, materials, cooled);
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ThermalField f = ThermalField::uniform(mesh, 310.0);
  std::vector<double> src(mesh.cell_count());
  const auto energy = [&](const ThermalField& g) {
    double e = 0.0;
    for (std::size_t c = 0; c < mesh.cell_count(); ++c) {
      e += props.volumetric_heat_capacity() * mesh.volume(c) * g.temperature[c];
    }
    return e;
  };
  double err_energy = 0.0;
  for (int n = 0; n < 20; ++n) {
    double input = 0.0;
    for (std::size_t c = 0; c < src.size(); ++c) {
      src[c] = 4e4 * u(rng);
      input += src[c] * mesh.volume(c);
    }
    const double e0 = energy(f);
    f = solver.step(f, src, dt);
    const double expected = dt * (input - solver.convective_loss(f.temperature));
    err_energy = std::max(err_energy, std::abs((energy(f) - e0) / expected - 1.0));
  }

  // 1-D Poisson column with the reference pinned at the bottom.
  const double length = 0.05, jv = 1.8e5, sigma = 6.0e7;
  MaterialMap column;
  column.active.sigma_plus = column.active.sigma_minus = sigma;
  const CylMesh line = CylMesh::uniform(1, 50, cell.radius(), length);
  const std::vector<double> j(line.cell_count(), jv);
  const auto sol = solve_potentials(line, column, j, {0.0, 0.0});
  double err_poisson = 0.0, scale = 0.0;
  for (std::size_t k = 0; k < line.n_z(); ++k) {
    const double z = line.z_center(k);
    const double expected = jv * z * (z - 2.0 * length) / (2.0 * sigma);
    scale = std::max(scale, std::abs(expected));
    err_poisson = std::max(err_poisson, std::abs(sol.phi_minus[k] - expected));
  }
  const double rel_poisson = err_poisson / scale;

  const bool pass = err_lumped <= 1e-8 && err_energy <= 1e-8 && rel_poisson <= 1e-8;
  return {pass, fmt("lumped %.3g, energy balance %.3g, Poisson %.3g (relative)", err_lumped,
                    err_energy, rel_poisson)};
}

Outcome thermal_result() {
  const CellSpec cell = reference::lifes2_aa_cell();
  const EcmInputs in{cell, reference::lifes2_parameters(), reference::lifes2_ocv(),
                     generate_profile(reference::half_c_hppc())};
  const CylMesh mesh = CylMesh::uniform(20, 60, cell.radius(), cell.height);
  const auto result = cosimulate(in, mesh, MaterialMap{}, ThermalBoundary{});
  const double rise = result.rise();
  const double spread = result.final_spread();

  // Trend over complete pulse periods: the mean rise per period must not fall
  // back by more than 10 % of the final rise from its running maximum, and
  // must end above where it started. The trailing partial period is left out
  // since its mean covers only part of a pulse.
  const double period = reference::half_c_hppc().period();
  const auto complete = static_cast<std::size_t>(result.trace.back().t / period);
  std::vector<double> sums(complete, 0.0), counts(complete, 0.0);
  for (std::size_t k = 1; k < result.trace.size(); ++k) {
    const auto idx = static_cast<std::size_t>(result.trace[k].t / period);
    if (idx >= complete) continue;
    sums[idx] += result.trace[k].t_avg - result.initial_temperature;
    counts[idx] += 1.0;
  }
  std::vector<double> means;
  for (std::size_t i = 0; i < complete; ++i) {
    if (counts[i] > 0.0) means.push_back(sums[i] / counts[i]);
  }
  double peak = -1e300, drawdown = 0.0;
  for (double m : means) {
    peak = std::max(peak, m);
    drawdown = std::max(drawdown, peak - m);
  }
  const bool trending = means.size() >= 2 && means.back() > means.front() && drawdown <= 0.1 * rise;
  const bool pass = rise >= 3.0 && rise <= 12.0 && spread < 0.5 && trending;
  return {pass, fmt("rise %.3f K, final spread %.4f K, largest period-mean drawdown %.3f K", rise,
                    spread, drawdown)};
}

Outcome determinism() {
  const fs::path root = fixtures::fresh_dir("acceptance_8");
  fixtures::write_text(root / "run.ini",
                      "[profile]\nduration_s = 1500\n"
                      "[simulate]\nnoise_v = 0.001\n"
                      "[trace]\npath = input.csv\n"
                      "[fit_params]\nbreakpoints = 4\ninit = mid\n"
                      "[fit_ocv]\ndegree = 2\n"
                      "[thermal]\nn_r = 8\nn_z = 24\nsnapshot_interval_s = 500\nwrite_vtk = true\n");
  const std::string cfg = " --quiet --seed 11 --config \"" + (root / "run.ini").string() + "\"";
  // Shared measured input for the fitting commands.
  if (fixtures::run_tool("simulate" + cfg + " --set trace.path= --out \"" + (root / "src").string() +
                            "\"",
                        root / "src.log") != 0) {
    return {false, "input simulation failed: " + fixtures::read_file(root / "src.log")};
  }
  fs::copy_file(root / "src" / "simulation.csv", root / "input.csv");

  const std::vector<std::string> commands{"hppc-gen", "fit-ocv", "fit-params", "thermal"};
  std::size_t files = 0;
  for (const auto& cmd : commands) {
    for (int run = 0; run < 2; ++run) {
      const fs::path out = root / (cmd + std::to_string(run));
      if (fixtures::run_tool(cmd + cfg + " --out \"" + out.string() + "\"", root / "log") != 0) {
        return {false, cmd + " failed: " + fixtures::read_file(root / "log")};
      }
    }
    for (const auto& entry : fs::directory_iterator(root / (cmd + "0"))) {
      const fs::path twin = root / (cmd + "1") / entry.path().filename();
      if (!fs::exists(twin) ||
          fixtures::read_file(entry.path()) != fixtures::read_file(twin)) {
        return {false, cmd + ": " + entry.path().filename().string() + " differs"};
      }
      ++files;
    }
  }
  // simulate itself, with noise drawn from the seed.
  for (int run = 0; run < 2; ++run) {
    const fs::path out = root / ("simulate" + std::to_string(run));
    if (fixtures::run_tool("simulate" + cfg + " --set trace.path= --out \"" + out.string() + "\"",
                          root / "log") != 0) {
      return {false, "simulate failed"};
    }
  }
  for (const auto& entry : fs::directory_iterator(root / "simulate0")) {
    if (fixtures::read_file(entry.path()) !=
        fixtures::read_file(root / "simulate1" / entry.path().filename())) {
      return {false, "simulate: " + entry.path().filename().string() + " differs"};
    }
    ++files;
  }
  return {true, std::to_string(files) + " output files byte-identical across reruns"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::function<Outcome()>> criteria{
      table_regression, ocv_polynomial, discharge_timing, rc_oracle,
      parameter_recovery, thermal_conservation, thermal_result, determinism};
  std::vector<int> selected;
  if (argc > 1) {
    const int n = std::atoi(argv[1]);
    if (n < 1 || n > static_cast<int>(criteria.size())) {
      std::cerr << "usage: acceptance [1-8]\n";
      return 2;
    }
    selected.push_back(n);
  } else {
    for (int n = 1; n <= static_cast<int>(criteria.size()); ++n) selected.push_back(n);
  }
  bool all = true;
  for (int n : selected) {
    Outcome o;
    try {
      o = criteria[n - 1]();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::cout << "criterion " << n << ": " << (o.pass ? "PASS" : "FAIL") << "  " << o.detail
              << std::endl;
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
