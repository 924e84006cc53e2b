#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "ecmtk/errors.hpp"
#include "ecmtk/reference_data.hpp"
#include "ecmtk/thermal.hpp"
#include "support.hpp"

using namespace ecmtk;

namespace {

const CellSpec kCell = reference::lifes2_aa_cell();

MaterialMap defaults() { return MaterialMap{}; }

ThermalBoundary insulated() {
  ThermalBoundary b;
  b.outer = b.top = b.bottom = FaceCondition::Insulated;
  return b;
}

double total_energy(const CylMesh& mesh, const ThermalField& f, const ThermalProps& p) {
  double e = 0.0;
  for (std::size_t c = 0; c < mesh.cell_count(); ++c) {
    e += p.volumetric_heat_capacity() * mesh.volume(c) * f.temperature[c];
  }
  return e;
}

EcmInputs half_c_inputs() {
  return EcmInputs{kCell, reference::lifes2_parameters(), reference::lifes2_ocv(),
                   generate_profile(reference::half_c_hppc()), EcmState{}, SimulationOptions{}};
}

}  // namespace

TEST(CylMesh, VolumesAndZones) {
  const CylMesh mesh = CylMesh::uniform(20, 60, kCell.radius(), kCell.height, 2);
  double v = 0.0;
  for (std::size_t c = 0; c < mesh.cell_count(); ++c) v += mesh.volume(c);
  const double cyl = std::numbers::pi * kCell.radius() * kCell.radius() * kCell.height;
  EXPECT_NEAR(v / cyl, 1.0, 1e-12);
  EXPECT_NEAR(mesh.total_volume() / cyl, 1.0, 1e-12);
  const double zones = mesh.zone_volume(Zone::Active) + mesh.zone_volume(Zone::PositiveTab) +
                       mesh.zone_volume(Zone::NegativeTab);
  EXPECT_NEAR(zones / cyl, 1.0, 1e-12);
  EXPECT_EQ(mesh.zone(mesh.index(5, 0)), Zone::NegativeTab);
  EXPECT_EQ(mesh.zone(mesh.index(5, 1)), Zone::NegativeTab);
  EXPECT_EQ(mesh.zone(mesh.index(5, 2)), Zone::Active);
  EXPECT_EQ(mesh.zone(mesh.index(5, 59)), Zone::PositiveTab);
  EXPECT_THROW(CylMesh::uniform(4, 4, 0.01, 0.05, 2), ConfigurationError);
}

TEST(Sources, VolumetricCurrent) {
  EXPECT_DOUBLE_EQ(volumetric_current(2.0, 10.0, 10.0, 4.0), 0.5);
  EXPECT_NEAR(volumetric_current(1.5, kCell.capacity_coulombs, kCell.capacity_coulombs,
                                 kCell.volume()),
              1.799e5, 1e2);
  EXPECT_EQ(volumetric_current(0.0, 1.0, 1.0, 1.0), 0.0);
  EXPECT_THROW(volumetric_current(1.0, 1.0, 0.0, 1.0), ArgumentError);
  EXPECT_THROW(volumetric_current(1.0, 1.0, 1.0, 0.0), ArgumentError);
}

TEST(Sources, ElectrochemicalHeat) {
  EXPECT_NEAR(electrochem_heat(1.8e5, 1.5, 1.35, 300.0, 0.0), 2.7e4, 1e-8);
  EXPECT_EQ(electrochem_heat(1.8e5, 1.5, 1.5, 300.0, 0.0), 0.0);
  EXPECT_GT(electrochem_heat(1.8e5, 1.5, 1.5, 300.0, -1e-4), 0.0);
}

TEST(Potentials, ConstantBoundaryWithoutSourceIsUniform) {
  const CylMesh mesh = CylMesh::uniform(6, 12, 0.007, 0.05);
  const std::vector<double> j(mesh.cell_count(), 0.0);
  const auto sol = solve_potentials(mesh, defaults(), j, {1.25, -0.5});
  for (double v : sol.phi_plus) EXPECT_NEAR(v, 1.25, 1e-12);
  for (double v : sol.phi_minus) EXPECT_NEAR(v, -0.5, 1e-12);
}

TEST(Potentials, MatchesOneDimensionalClosedForm) {
  const double length = 1.0, jv = 3.0, sigma = 2.0;
  MaterialMap m;
  m.active.sigma_plus = sigma;
  m.active.sigma_minus = sigma;
  const CylMesh mesh = CylMesh::uniform(1, 40, 0.1, length);
  const std::vector<double> j(mesh.cell_count(), jv);
  const auto sol = solve_potentials(mesh, m, j, {0.0, 0.0});
  EXPECT_LT(sol.residual_plus, 1e-10);
  EXPECT_LT(sol.residual_minus, 1e-10);
  for (std::size_t k = 0; k < mesh.n_z(); ++k) {
    // phi- is pinned at the bottom, phi+ at the top; both insulated elsewhere.
    const double z = mesh.z_center(k);
    const double from_top = length - z;
    EXPECT_NEAR(sol.phi_minus[k], jv * z * (z - 2 * length) / (2 * sigma), 1e-8);
    EXPECT_NEAR(sol.phi_plus[k], -jv * from_top * (from_top - 2 * length) / (2 * sigma), 1e-8);
  }
}

TEST(Potentials, DoublingConductivityHalvesTheRise) {
  const CylMesh mesh = CylMesh::uniform(5, 20, 0.007, 0.05);
  std::vector<double> j(mesh.cell_count());
  for (std::size_t c = 0; c < j.size(); ++c) j[c] = 1e5 * (1.0 + 0.1 * static_cast<double>(c % 7));
  MaterialMap a, b;
  b.active.sigma_plus *= 2.0;
  b.active.sigma_minus *= 2.0;
  const TabPotentials tabs{1.4, 0.1};
  const auto sa = solve_potentials(mesh, a, j, tabs);
  const auto sb = solve_potentials(mesh, b, j, tabs);
  for (std::size_t c = 0; c < j.size(); ++c) {
    EXPECT_NEAR(sb.phi_plus[c] - 1.4, 0.5 * (sa.phi_plus[c] - 1.4), 1e-12);
    EXPECT_NEAR(sb.phi_minus[c] - 0.1, 0.5 * (sa.phi_minus[c] - 0.1), 1e-12);
  }
}

TEST(Potentials, MissingReferenceIsASetupError) {
  const CylMesh mesh = CylMesh::uniform(3, 6, 0.007, 0.05);
  const std::vector<double> j(mesh.cell_count(), 1.0);
  EXPECT_THROW(solve_potentials(mesh, defaults(), j, {std::nullopt, 0.0}), SetupError);
  EXPECT_THROW(solve_potentials(mesh, defaults(), j, {0.0, std::nullopt}), SetupError);
}

TEST(Potentials, ChargeBalanceOverTheActiveZone) {
  const CylMesh mesh = CylMesh::uniform(20, 60, kCell.radius(), kCell.height);
  const double q = kCell.capacity_coulombs;
  const double jv = volumetric_current(1.5, q, 0.9 * q, mesh.zone_volume(Zone::Active));
  double total = 0.0;
  for (std::size_t c = 0; c < mesh.cell_count(); ++c) {
    if (mesh.zone(c) == Zone::Active) total += jv * mesh.volume(c);
  }
  EXPECT_NEAR(total / (1.5 * q / (0.9 * q)), 1.0, 1e-10);
}

TEST(Potentials, JouleHeatingEqualsBoundaryPowerBalance) {
  // Total dissipation equals the power delivered: sum j (phi+ - phi-) V plus
  // tab terms, checked here against the continuous 1-D value j^2 L^3 / (3 sigma).
  const double length = 1.0, jv = 2.0, sigma = 5.0;
  MaterialMap m;
  m.active.sigma_plus = m.active.sigma_minus = sigma;
  const CylMesh mesh = CylMesh::uniform(1, 400, 0.1, length);
  const std::vector<double> j(mesh.cell_count(), jv);
  PotentialSolver solver(mesh, m);
  const TabPotentials tabs{0.0, 0.0};
  const auto q = solver.joule_heating(solver.solve(j, tabs), tabs);
  double total = 0.0;
  for (std::size_t c = 0; c < q.size(); ++c) total += q[c] * mesh.volume(c);
  const double area = mesh.axial_face_area(0);
  EXPECT_NEAR(total / area, 2.0 * jv * jv * length * length * length / (3.0 * sigma), 1e-4);
}

TEST(Heat, EquilibriumIsPreserved) {
  const CylMesh mesh = CylMesh::uniform(8, 16, kCell.radius(), kCell.height);
  const ThermalField f0 = ThermalField::uniform(mesh, 300.0);
  const std::vector<double> zero(mesh.cell_count(), 0.0);
  for (double dt : {0.1, 10.0, 1e4}) {
    const auto f = step_temperature(f0, mesh, defaults(), insulated(), zero, dt);
    for (double t : f.temperature) EXPECT_NEAR(t, 300.0, 1e-9);
  }
}

TEST(Heat, UniformSourceInsulatedMatchesLumpedRise) {
  const CylMesh mesh = CylMesh::uniform(10, 30, kCell.radius(), kCell.height);
  const ThermalProps p;
  const double q = 2.5e4, dt = 7.0;
  const std::vector<double> src(mesh.cell_count(), q);
  const auto f = step_temperature(ThermalField::uniform(mesh, 295.0), mesh, defaults(),
                                  insulated(), src, dt);
  const double expected = q * dt / p.volumetric_heat_capacity();
  for (double t : f.temperature) EXPECT_NEAR((t - 295.0) / expected, 1.0, 1e-8);
}

TEST(Heat, DiscreteEnergyBalancePerStep) {
  const CylMesh mesh = CylMesh::uniform(12, 36, kCell.radius(), kCell.height, 2);
  ThermalBoundary bnd;
  bnd.h_conv = 25.0;
  bnd.top = FaceCondition::Insulated;
  TransientHeatSolver solver(mesh, defaults(), bnd);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ThermalField f = ThermalField::uniform(mesh, 300.0);
  std::vector<double> src(mesh.cell_count());
  const ThermalProps p;
  for (int n = 0; n < 30; ++n) {
    for (auto& s : src) s = 5e4 * u(rng);
    const double dt = 1.0 + 20.0 * u(rng);
    const double e0 = total_energy(mesh, f, p);
    f = solver.step(f, src, dt);
    double input = 0.0;
    for (std::size_t c = 0; c < src.size(); ++c) input += src[c] * mesh.volume(c);
    const double expected = dt * (input - solver.convective_loss(f.temperature));
    EXPECT_NEAR((total_energy(mesh, f, p) - e0) / expected, 1.0, 1e-8);
    EXPECT_LT(solver.last_residual(), 1e-10);
  }
}

TEST(Heat, MaximumPrincipleWithoutSources) {
  const CylMesh mesh = CylMesh::uniform(10, 20, kCell.radius(), kCell.height);
  ThermalBoundary bnd;
  bnd.t_ambient = 300.0;
  bnd.h_conv = 50.0;
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(290.0, 310.0);
  ThermalField f = ThermalField::uniform(mesh, 300.0);
  for (auto& t : f.temperature) t = u(rng);
  const double lo = std::min(f.min_temperature(), bnd.t_ambient);
  const double hi = std::max(f.max_temperature(), bnd.t_ambient);
  TransientHeatSolver solver(mesh, defaults(), bnd);
  const std::vector<double> zero(mesh.cell_count(), 0.0);
  for (int n = 0; n < 50; ++n) {
    f = solver.step(f, zero, 5.0);
    EXPECT_GE(f.min_temperature(), lo - 1e-9);
    EXPECT_LE(f.max_temperature(), hi + 1e-9);
  }
}

TEST(Heat, LumpedCapacitanceDecay) {
  const CylMesh mesh = CylMesh::uniform(20, 60, kCell.radius(), kCell.height);
  ThermalBoundary bnd;
  const ThermalProps p;
  const double biot = bnd.h_conv * kCell.radius() / p.k_radial;
  ASSERT_LT(biot, 0.1);
  const double tau = p.volumetric_heat_capacity() * kCell.volume() /
                     (bnd.h_conv * kCell.surface_area());
  ThermalField f = ThermalField::uniform(mesh, bnd.t_ambient + 20.0);
  TransientHeatSolver solver(mesh, defaults(), bnd);
  const std::vector<double> zero(mesh.cell_count(), 0.0);
  double prev = f.volume_average(mesh);
  for (int n = 1; n <= 300; ++n) {
    f = solver.step(f, zero, 5.0);
    const double avg = f.volume_average(mesh);
    EXPECT_LE(avg, prev);
    prev = avg;
    if (n % 50 == 0) {
      const double expected = 20.0 * std::exp(-5.0 * n / tau);
      EXPECT_NEAR((avg - bnd.t_ambient) / expected, 1.0, 0.05) << "t=" << 5.0 * n;
    }
  }
}

TEST(Cosimulation, ZeroCurrentKeepsAmbient) {
  EcmInputs in = half_c_inputs();
  HppcProfileSpec spec = reference::half_c_hppc();
  spec.duration = 2000.0;
  const auto profile = generate_profile(spec);
  std::vector<double> t, i;
  for (const auto& s : profile) {
    t.push_back(s.t);
    i.push_back(0.0);
  }
  in.profile = CurrentVoltageTrace::from_current(t, i);
  const CylMesh mesh = CylMesh::uniform(10, 30, kCell.radius(), kCell.height);
  const auto r = cosimulate(in, mesh, defaults(), ThermalBoundary{});
  for (const auto& s : r.trace) {
    EXPECT_NEAR(s.t_max, 295.15, 1e-9);
    EXPECT_NEAR(s.t_min, 295.15, 1e-9);
  }
}

TEST(Cosimulation, GeometryMustMatchTheCell) {
  const CylMesh mesh = CylMesh::uniform(10, 30, 0.01, kCell.height);
  EXPECT_THROW(cosimulate(half_c_inputs(), mesh, defaults(), ThermalBoundary{}),
               ConfigurationError);
}

TEST(Cosimulation, SourceEnergyMatchesCircuitHeat) {
  EcmInputs in = half_c_inputs();
  HppcProfileSpec spec = reference::half_c_hppc();
  spec.duration = 3000.0;
  in.profile = generate_profile(spec);
  const CylMesh mesh = CylMesh::uniform(10, 30, kCell.radius(), kCell.height);
  const auto r = cosimulate(in, mesh, defaults(), insulated());
  double circuit = 0.0;
  for (double e : r.ecm.interval_heat) circuit += e;
  double deposited = 0.0;
  for (std::size_t k = 1; k < r.trace.size(); ++k) {
    deposited += r.trace[k].heat_rate * (r.trace[k].t - r.trace[k - 1].t);
  }
  // Electrode Joule heat adds a few parts in 1e5 on top of the circuit heat.
  EXPECT_GT(deposited, circuit);
  EXPECT_LT(deposited / circuit - 1.0, 1e-4);
  const ThermalProps p;
  const double stored = p.volumetric_heat_capacity() * mesh.total_volume() *
                        (r.final_field.volume_average(mesh) - r.initial_temperature);
  EXPECT_NEAR(stored / deposited, 1.0, 1e-8);
}

TEST(Cosimulation, AgreesWithLumpedModel) {
  const EcmInputs in = half_c_inputs();
  const CylMesh mesh = CylMesh::uniform(20, 60, kCell.radius(), kCell.height);
  const ThermalBoundary bnd;
  const auto dist = cosimulate(in, mesh, defaults(), bnd);
  const ThermalProps p;
  LumpedThermalParams lp;
  lp.mass = p.density * kCell.volume();
  lp.specific_heat = p.specific_heat;
  lp.h_area = bnd.h_conv * kCell.surface_area();
  lp.t_ambient = bnd.t_ambient;
  const auto lumped = lumped_temperature(in, lp);
  const double rise = dist.rise();
  EXPECT_NEAR(dist.trace.back().t_avg, lumped.temperature.back(), 0.05 * rise);
}

TEST(Cosimulation, MeshRefinementChangesTheRiseByUnderOnePercent) {
  const EcmInputs in = half_c_inputs();
  const ThermalBoundary bnd;
  const auto coarse =
      cosimulate(in, CylMesh::uniform(20, 60, kCell.radius(), kCell.height), defaults(), bnd);
  const auto fine =
      cosimulate(in, CylMesh::uniform(40, 120, kCell.radius(), kCell.height, 2), defaults(), bnd);
  EXPECT_LT(std::abs(fine.rise() - coarse.rise()), 0.01 * coarse.rise());
}

TEST(Lumped, AdiabaticAndSteadyState) {
  const RcParameters p{0.05, 0.02, 0.01, 0.01, 0.01};
  CellSpec big = kCell;
  big.capacity_coulombs = 1e12;
  std::vector<double> t, i;
  for (int k = 0; k <= 20000; ++k) {
    t.push_back(1.0 * k);
    i.push_back(2.0);
  }
  EcmInputs in{big, fixtures::flat_table(p), reference::lifes2_ocv(),
               CurrentVoltageTrace::from_current(t, i), EcmState{}, {1.0, false, false}};

  LumpedThermalParams adiabatic{.mass = 0.015, .specific_heat = 1100.0, .h_area = 0.0};
  const auto a = lumped_temperature(in, adiabatic);
  double energy = 0.0;
  for (double e : a.ecm.interval_heat) energy += e;
  EXPECT_NEAR(a.temperature.back() - a.temperature.front(), energy / (0.015 * 1100.0), 1e-9);

  LumpedThermalParams cooled = adiabatic;
  cooled.h_area = 0.05;
  const auto c = lumped_temperature(in, cooled);
  const double power = 4.0 * (p.r_series + p.r1 + p.r2);
  EXPECT_NEAR(c.temperature.back() - cooled.t_ambient, power / cooled.h_area, 1e-6);
  EXPECT_THROW(lumped_temperature(in, LumpedThermalParams{}), ArgumentError);
}

TEST(ThermalIo, ExportFormats) {
  const CylMesh mesh = CylMesh::uniform(3, 5, 0.007, 0.05);
  const ThermalField f = ThermalField::uniform(mesh, 300.0);
  std::ostringstream csv, vtk, trace;
  write_field_csv(csv, mesh, f);
  EXPECT_EQ(csv.str().rfind("r_m,z_m,T_K,phi_plus_V,phi_minus_V\n", 0), 0u);
  const std::string text = csv.str();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 16);
  write_field_vtk(vtk, mesh, f, "title");
  EXPECT_NE(vtk.str().find("DIMENSIONS 4 6 1"), std::string::npos);
  EXPECT_NE(vtk.str().find("CELL_DATA 15"), std::string::npos);
  const std::vector<TemperatureSample> samples{{0.0, 300.0, 301.0, 299.0, 1.0, 0.0, 1.59, 0.0}};
  write_temperature_trace(trace, samples);
  EXPECT_EQ(trace.str().rfind("time_s,T_avg_K,T_max_K,T_min_K", 0), 0u);
}
