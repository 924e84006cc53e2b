#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ecmtk/ecm.hpp"

namespace ecmtk {

enum class Zone : std::uint8_t { Active, PositiveTab, NegativeTab };

/// Structured axisymmetric (r, z) finite-volume grid of a cylinder. Rows at
/// the top are the positive tab, rows at the bottom the negative tab.
class CylMesh {
 public:
  CylMesh(std::vector<double> r_faces, std::vector<double> z_faces, std::size_t tab_layers);

  static CylMesh uniform(std::size_t n_r, std::size_t n_z, double radius, double height,
                         std::size_t tab_layers = 1);

  std::size_t n_r() const { return r_faces_.size() - 1; }
  std::size_t n_z() const { return z_faces_.size() - 1; }
  std::size_t cell_count() const { return n_r() * n_z(); }
  std::size_t index(std::size_t i, std::size_t j) const { return j * n_r() + i; }

  double radius() const { return r_faces_.back(); }
  double height() const { return z_faces_.back(); }
  std::span<const double> r_faces() const { return r_faces_; }
  std::span<const double> z_faces() const { return z_faces_; }
  double r_center(std::size_t i) const { return 0.5 * (r_faces_[i] + r_faces_[i + 1]); }
  double z_center(std::size_t j) const { return 0.5 * (z_faces_[j] + z_faces_[j + 1]); }
  double dr(std::size_t i) const { return r_faces_[i + 1] - r_faces_[i]; }
  double dz(std::size_t j) const { return z_faces_[j + 1] - z_faces_[j]; }

  // Area of the cylindrical face at r_faces[i] spanning row j.
  double radial_face_area(std::size_t i, std::size_t j) const;
  // Area of the annular face at any z_faces[] level spanning column i.
  double axial_face_area(std::size_t i) const;
  double volume(std::size_t cell) const;

  Zone zone(std::size_t cell) const { return zones_[cell]; }
  std::size_t tab_layers() const { return tab_layers_; }
  double total_volume() const;
  double zone_volume(Zone z) const;

 private:
  std::vector<double> r_faces_;
  std::vector<double> z_faces_;
  std::size_t tab_layers_;
  std::vector<Zone> zones_;
};

struct ThermalProps {
  double density = 1800.0;        // kg/m^3
  double specific_heat = 1100.0;  // J/(kg K)
  double k_radial = 3.0;          // W/(m K)
  double k_axial = 30.0;          // W/(m K)
  double sigma_plus = 3.8e7;      // S/m
  double sigma_minus = 6.0e7;     // S/m
  double entropic_coeff = 0.0;    // dU/dT, V/K

  void validate() const;
  double volumetric_heat_capacity() const { return density * specific_heat; }
};

/// Per-zone properties; tabs default to the active-zone values.
struct MaterialMap {
  ThermalProps active;
  std::optional<ThermalProps> positive_tab;
  std::optional<ThermalProps> negative_tab;

  const ThermalProps& for_zone(Zone z) const;
  void validate() const;
};

enum class FaceCondition { Insulated, Convective };

struct ThermalBoundary {
  double h_conv = 10.0;        // W/(m^2 K)
  double t_ambient = 295.15;   // K
  FaceCondition outer = FaceCondition::Convective;
  FaceCondition top = FaceCondition::Convective;
  FaceCondition bottom = FaceCondition::Convective;

  void validate() const;
};

struct ThermalField {
  std::vector<double> temperature;  // K
  std::vector<double> phi_plus;     // V
  std::vector<double> phi_minus;    // V
  double t = 0.0;

  static ThermalField uniform(const CylMesh& mesh, double temperature, double t = 0.0);

  double volume_average(const CylMesh& mesh) const;
  double max_temperature() const;
  double min_temperature() const;
};

/// Volumetric current transfer rate j = I Q / (Q_ref vol), A/m^3.
double volumetric_current(double current, double capacity, double reference_capacity,
                          double volume);

/// Electrochemical heat j (V_ocv - V - T dU/dT), W/m^3.
double electrochem_heat(double j_ech, double v_ocv, double v, double temperature, double du_dt);

/// Dirichlet references: the positive potential is pinned on the top face of
/// the positive tab, the negative potential on the bottom face of the
/// negative tab. A missing reference leaves that system singular.
struct TabPotentials {
  std::optional<double> positive = 0.0;
  std::optional<double> negative = 0.0;
};

struct PotentialSolution {
  std::vector<double> phi_plus;
  std::vector<double> phi_minus;
  double residual_plus = 0.0;   // relative linear-system residual
  double residual_minus = 0.0;
};

/// Solves div(sigma+ grad phi+) = -j and div(sigma- grad phi-) = j. Matrices
/// are factored once; only the right-hand side changes between solves.
class PotentialSolver {
 public:
  PotentialSolver(const CylMesh& mesh, const MaterialMap& materials);
  ~PotentialSolver();
  PotentialSolver(PotentialSolver&&) noexcept;
  PotentialSolver& operator=(PotentialSolver&&) noexcept;

  PotentialSolution solve(std::span<const double> j_ech, const TabPotentials& tabs) const;

  /// sigma+ |grad phi+|^2 + sigma- |grad phi-|^2 per cell, W/m^3, from face
  /// dissipation split between neighbouring cells.
  std::vector<double> joule_heating(const PotentialSolution& solution,
                                    const TabPotentials& tabs) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

PotentialSolution solve_potentials(const CylMesh& mesh, const MaterialMap& materials,
                                   std::span<const double> j_ech, const TabPotentials& tabs);

/// Backward-Euler heat conduction with Robin faces. The factorization is
/// cached per time step size.
class TransientHeatSolver {
 public:
  TransientHeatSolver(const CylMesh& mesh, const MaterialMap& materials,
                      const ThermalBoundary& boundary);
  ~TransientHeatSolver();
  TransientHeatSolver(TransientHeatSolver&&) noexcept;
  TransientHeatSolver& operator=(TransientHeatSolver&&) noexcept;

  // sources in W/m^3 per cell. Potentials are carried over unchanged.
  ThermalField step(const ThermalField& field, std::span<const double> sources, double dt);

  /// Heat leaving through convective faces for the given temperatures, W.
  double convective_loss(std::span<const double> temperature) const;

  double last_residual() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

ThermalField step_temperature(const ThermalField& field, const CylMesh& mesh,
                              const MaterialMap& materials, const ThermalBoundary& boundary,
                              std::span<const double> sources, double dt);

/// Everything the ECM side of a cosimulation needs.
struct EcmInputs {
  CellSpec spec;
  SocParameterTable table;
  OcvPolynomial poly;
  CurrentVoltageTrace profile;
  EcmState initial{};
  SimulationOptions simulation{};
};

struct CosimOptions {
  double dt_thermal = 10.0;
  std::optional<double> reference_capacity;  // Q_ref in coulombs; defaults to Q
  double snapshot_interval = 0.0;            // 0 keeps only the final field
  std::optional<double> initial_temperature; // defaults to ambient
  bool check_geometry = true;
};

struct TemperatureSample {
  double t = 0.0;
  double t_avg = 0.0;
  double t_max = 0.0;
  double t_min = 0.0;
  double soc = 0.0;
  double current = 0.0;  // mean over the thermal step
  double voltage = 0.0;  // terminal voltage at the end of the step
  double heat_rate = 0.0;  // total source power over the step, W
};

struct CosimResult {
  std::vector<TemperatureSample> trace;
  std::vector<ThermalField> snapshots;
  ThermalField final_field;
  SimulationResult ecm;
  double initial_temperature = 0.0;

  double rise() const;  // final volume-average minus initial
  double final_spread() const;
};

CosimResult cosimulate(const EcmInputs& ecm, const CylMesh& mesh, const MaterialMap& materials,
                       const ThermalBoundary& boundary, const CosimOptions& options = {});

struct LumpedThermalParams {
  double mass = 0.0;            // kg
  double specific_heat = 0.0;   // J/(kg K)
  double h_area = 0.0;          // W/K
  double t_ambient = 295.15;    // K
  std::optional<double> initial_temperature;
};

struct LumpedResult {
  std::vector<double> times;
  std::vector<double> temperature;
  SimulationResult ecm;
};

/// m c dT/dt = I (V_ocv - V) - hA (T - T_amb), integrated exactly per ECM
/// interval with the interval's mean heating power.
LumpedResult lumped_temperature(const EcmInputs& ecm, const LumpedThermalParams& params);

// Export formats.
void write_field_csv(std::ostream& os, const CylMesh& mesh, const ThermalField& field,
                     std::span<const std::string> comments = {});
// Legacy VTK rectilinear grid with cell data (x = r, y = z).
void write_field_vtk(std::ostream& os, const CylMesh& mesh, const ThermalField& field,
                     const std::string& title);
void write_temperature_trace(std::ostream& os, std::span<const TemperatureSample> trace,
                             std::span<const std::string> comments = {});

}  // namespace ecmtk
