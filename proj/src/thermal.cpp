#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <string>
#include <tuple>

#include "ecmtk/errors.hpp"
#include "ecmtk/thermal.hpp"

namespace ecmtk {

namespace {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

double relative_residual(const SparseMatrix& a, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& b) {
  const double denom = std::max(b.norm(), 1e-300);
  return (a * x - b).norm() / denom;
}

// Inward-pointing distances of the boundary cell and its inner neighbour
// centres from a boundary face, used by the quadratic Dirichlet closure.
struct Closure {
  double coef_boundary;  // multiplies the face value
  double coef_cell;      // multiplies the boundary cell
  double coef_inner;     // multiplies the inner neighbour
};

// Outward normal derivative at the face, d phi/dn = cb*phi_b + cp*phi_P + ci*phi_I,
// exact for quadratics. With a single cell falls back to a half-cell difference.
Closure dirichlet_closure(double h_cell, std::optional<double> h_inner) {
  if (!h_inner) return {2.0 / h_cell, -2.0 / h_cell, 0.0};
  const double xp = 0.5 * h_cell;
  const double xi = h_cell + 0.5 * *h_inner;
  // Inward derivative weights of the quadratic through (0, xp, xi).
  const double wb = -(xp + xi) / (xp * xi);
  const double wp = xi / (xp * (xi - xp));
  const double wi = -xp / (xi * (xi - xp));
  return {-wb, -wp, -wi};
}

}  // namespace

void ThermalProps::validate() const {
  const double values[] = {density, specific_heat, k_radial, k_axial, sigma_plus, sigma_minus};
  for (double v : values) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw ConfigurationError("thermal properties must be positive and finite");
    }
  }
  if (!std::isfinite(entropic_coeff)) throw ConfigurationError("entropic coefficient not finite");
}

const ThermalProps& MaterialMap::for_zone(Zone z) const {
  if (z == Zone::PositiveTab && positive_tab) return *positive_tab;
  if (z == Zone::NegativeTab && negative_tab) return *negative_tab;
  return active;
}

void MaterialMap::validate() const {
  active.validate();
  if (positive_tab) positive_tab->validate();
  if (negative_tab) negative_tab->validate();
}

void ThermalBoundary::validate() const {
  if (!(h_conv >= 0.0) || !std::isfinite(h_conv)) {
    throw ConfigurationError("convection coefficient must be non-negative");
  }
  if (!(t_ambient > 0.0)) throw ConfigurationError("ambient temperature must be positive (K)");
}

ThermalField ThermalField::uniform(const CylMesh& mesh, double temperature, double t) {
  ThermalField f;
  f.temperature.assign(mesh.cell_count(), temperature);
  f.phi_plus.assign(mesh.cell_count(), 0.0);
  f.phi_minus.assign(mesh.cell_count(), 0.0);
  f.t = t;
  return f;
}

double ThermalField::volume_average(const CylMesh& mesh) const {
  double sum = 0.0;
  double vol = 0.0;
  for (std::size_t c = 0; c < temperature.size(); ++c) {
    sum += temperature[c] * mesh.volume(c);
    vol += mesh.volume(c);
  }
  return sum / vol;
}

double ThermalField::max_temperature() const {
  return *std::max_element(temperature.begin(), temperature.end());
}

double ThermalField::min_temperature() const {
  return *std::min_element(temperature.begin(), temperature.end());
}

double volumetric_current(double current, double capacity, double reference_capacity,
                          double volume) {
  if (!(volume > 0.0)) throw ArgumentError("volumetric_current: volume must be positive");
  if (!(reference_capacity > 0.0)) {
    throw ArgumentError("volumetric_current: reference capacity must be positive");
  }
  return current * capacity / (reference_capacity * volume);
}

double electrochem_heat(double j_ech, double v_ocv, double v, double temperature, double du_dt) {
  return j_ech * (v_ocv - v - temperature * du_dt);
}

// ---------------------------------------------------------------------------
// Electrode potentials

struct PotentialSolver::Impl {
  const CylMesh* mesh = nullptr;
  struct System {
    SparseMatrix matrix;
    Eigen::SparseLU<SparseMatrix> lu;
    // Per boundary-row cell: weight of the face value in the row (moved to rhs)
    // and half-cell conductance for dissipation.
    std::vector<double> face_weight;
    std::vector<double> face_conductance;
    // Interior face conductances for dissipation: (cell a, cell b, G).
    std::vector<std::tuple<std::size_t, std::size_t, double>> faces;
  };
  System plus;
  System minus;

  void build(System& sys, const MaterialMap& materials, bool positive) {
    const CylMesh& m = *mesh;
    const std::size_t n = m.cell_count();
    const auto sigma = [&](std::size_t c) {
      const ThermalProps& p = materials.for_zone(m.zone(c));
      return positive ? p.sigma_plus : p.sigma_minus;
    };

    std::vector<Triplet> trip;
    sys.face_weight.assign(n, 0.0);
    sys.face_conductance.assign(n, 0.0);
    sys.faces.clear();

    const auto couple = [&](std::size_t a, std::size_t b, double area, double half_a,
                            double half_b) {
      const double g = area / (half_a / sigma(a) + half_b / sigma(b));
      trip.emplace_back(a, a, g);
      trip.emplace_back(b, b, g);
      trip.emplace_back(a, b, -g);
      trip.emplace_back(b, a, -g);
      sys.faces.emplace_back(a, b, g);
    };

    for (std::size_t j = 0; j < m.n_z(); ++j) {
      for (std::size_t i = 0; i < m.n_r(); ++i) {
        const std::size_t c = m.index(i, j);
        if (i + 1 < m.n_r()) {
          couple(c, m.index(i + 1, j), m.radial_face_area(i + 1, j), 0.5 * m.dr(i),
                 0.5 * m.dr(i + 1));
        }
        if (j + 1 < m.n_z()) {
          couple(c, m.index(i, j + 1), m.axial_face_area(i), 0.5 * m.dz(j), 0.5 * m.dz(j + 1));
        }
      }
    }

    // Dirichlet row: top face for the positive potential, bottom for the negative.
    const std::size_t jb = positive ? m.n_z() - 1 : 0;
    std::optional<std::size_t> ji;
    if (m.n_z() > 1) ji = positive ? jb - 1 : 1;
    const Closure cl = dirichlet_closure(m.dz(jb), ji ? std::optional(m.dz(*ji)) : std::nullopt);
    for (std::size_t i = 0; i < m.n_r(); ++i) {
      const std::size_t c = m.index(i, jb);
      const double sa = sigma(c) * m.axial_face_area(i);
      // Row holds -outward flux: -sa*(cb*phi_b + cp*phi_P + ci*phi_I).
      trip.emplace_back(c, c, -sa * cl.coef_cell);
      if (ji) trip.emplace_back(c, m.index(i, *ji), -sa * cl.coef_inner);
      sys.face_weight[c] = sa * cl.coef_boundary;
      sys.face_conductance[c] = sa * 2.0 / m.dz(jb);
    }

    sys.matrix.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    sys.matrix.setFromTriplets(trip.begin(), trip.end());
    sys.matrix.makeCompressed();
    sys.lu.analyzePattern(sys.matrix);
    sys.lu.factorize(sys.matrix);
    if (sys.lu.info() != Eigen::Success) {
      throw SetupError("potential system could not be factorized");
    }
  }

  std::vector<double> solve(const System& sys, std::span<const double> j_ech, double sign,
                            double phi_b, double& residual) const {
    const std::size_t n = mesh->cell_count();
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(n));
    for (std::size_t c = 0; c < n; ++c) {
      // -div(sigma grad phi) = sign * j  (sign +1 for phi+, -1 for phi-)
      rhs(static_cast<Eigen::Index>(c)) =
          sign * j_ech[c] * mesh->volume(c) + sys.face_weight[c] * phi_b;
    }
    const Eigen::VectorXd x = sys.lu.solve(rhs);
    residual = relative_residual(sys.matrix, x, rhs);
    if (rhs.norm() == 0.0) residual = (sys.matrix * x).norm();
    if (!(residual < 1e-10)) {
      throw NumericError("potential solve residual " + std::to_string(residual) +
                         " exceeds 1e-10");
    }
    return {x.data(), x.data() + x.size()};
  }

  void add_dissipation(const System& sys, std::span<const double> phi, double phi_b,
                       std::vector<double>& power) const {
    for (const auto& [a, b, g] : sys.faces) {
      const double d = phi[a] - phi[b];
      power[a] += 0.5 * g * d * d;
      power[b] += 0.5 * g * d * d;
    }
    for (std::size_t c = 0; c < power.size(); ++c) {
      if (sys.face_conductance[c] > 0.0) {
        const double d = phi[c] - phi_b;
        power[c] += sys.face_conductance[c] * d * d;
      }
    }
  }
};

PotentialSolver::PotentialSolver(const CylMesh& mesh, const MaterialMap& materials)
    : impl_(std::make_unique<Impl>()) {
  materials.validate();
  impl_->mesh = &mesh;
  impl_->build(impl_->plus, materials, true);
  impl_->build(impl_->minus, materials, false);
}

PotentialSolver::~PotentialSolver() = default;
PotentialSolver::PotentialSolver(PotentialSolver&&) noexcept = default;
PotentialSolver& PotentialSolver::operator=(PotentialSolver&&) noexcept = default;

PotentialSolution PotentialSolver::solve(std::span<const double> j_ech,
                                         const TabPotentials& tabs) const {
  if (j_ech.size() != impl_->mesh->cell_count()) {
    throw ArgumentError("solve_potentials: source size does not match mesh");
  }
  if (!tabs.positive) throw SetupError("positive potential has no reference (tab) value");
  if (!tabs.negative) throw SetupError("negative potential has no reference (tab) value");
  PotentialSolution sol;
  sol.phi_plus = impl_->solve(impl_->plus, j_ech, 1.0, *tabs.positive, sol.residual_plus);
  sol.phi_minus = impl_->solve(impl_->minus, j_ech, -1.0, *tabs.negative, sol.residual_minus);
  return sol;
}

std::vector<double> PotentialSolver::joule_heating(const PotentialSolution& solution,
                                                   const TabPotentials& tabs) const {
  const CylMesh& m = *impl_->mesh;
  std::vector<double> power(m.cell_count(), 0.0);
  impl_->add_dissipation(impl_->plus, solution.phi_plus, tabs.positive.value_or(0.0), power);
  impl_->add_dissipation(impl_->minus, solution.phi_minus, tabs.negative.value_or(0.0), power);
  for (std::size_t c = 0; c < power.size(); ++c) power[c] /= m.volume(c);
  return power;
}

PotentialSolution solve_potentials(const CylMesh& mesh, const MaterialMap& materials,
                                   std::span<const double> j_ech, const TabPotentials& tabs) {
  return PotentialSolver(mesh, materials).solve(j_ech, tabs);
}

// ---------------------------------------------------------------------------
// Heat conduction

struct TransientHeatSolver::Impl {
  const CylMesh* mesh = nullptr;
  ThermalBoundary boundary;
  SparseMatrix conduction;          // conductance Laplacian incl. convective diagonal
  std::vector<double> convective;   // W/K to ambient per cell
  std::vector<double> capacity;     // rho c V per cell, J/K
  double cached_dt = -1.0;
  SparseMatrix system;
  Eigen::SimplicialLDLT<SparseMatrix> ldlt;
  double residual = 0.0;
};

TransientHeatSolver::TransientHeatSolver(const CylMesh& mesh, const MaterialMap& materials,
                                         const ThermalBoundary& boundary)
    : impl_(std::make_unique<Impl>()) {
  materials.validate();
  boundary.validate();
  Impl& s = *impl_;
  s.mesh = &mesh;
  s.boundary = boundary;
  const std::size_t n = mesh.cell_count();
  s.convective.assign(n, 0.0);
  s.capacity.resize(n);

  const auto props = [&](std::size_t c) -> const ThermalProps& {
    return materials.for_zone(mesh.zone(c));
  };
  std::vector<Triplet> trip;
  const auto couple = [&](std::size_t a, std::size_t b, double g) {
    trip.emplace_back(a, a, g);
    trip.emplace_back(b, b, g);
    trip.emplace_back(a, b, -g);
    trip.emplace_back(b, a, -g);
  };
  // Series resistance of the half cell and the film.
  const auto film = [&](double area, double half, double k) {
    if (boundary.h_conv <= 0.0) return 0.0;
    return area / (1.0 / boundary.h_conv + half / k);
  };

  for (std::size_t j = 0; j < mesh.n_z(); ++j) {
    for (std::size_t i = 0; i < mesh.n_r(); ++i) {
      const std::size_t c = mesh.index(i, j);
      const ThermalProps& p = props(c);
      s.capacity[c] = p.volumetric_heat_capacity() * mesh.volume(c);
      if (i + 1 < mesh.n_r()) {
        const std::size_t nb = mesh.index(i + 1, j);
        const double g = mesh.radial_face_area(i + 1, j) /
                         (0.5 * mesh.dr(i) / p.k_radial + 0.5 * mesh.dr(i + 1) / props(nb).k_radial);
        couple(c, nb, g);
      }
      if (j + 1 < mesh.n_z()) {
        const std::size_t nb = mesh.index(i, j + 1);
        const double g = mesh.axial_face_area(i) /
                         (0.5 * mesh.dz(j) / p.k_axial + 0.5 * mesh.dz(j + 1) / props(nb).k_axial);
        couple(c, nb, g);
      }
      if (i + 1 == mesh.n_r() && boundary.outer == FaceCondition::Convective) {
        s.convective[c] += film(mesh.radial_face_area(i + 1, j), 0.5 * mesh.dr(i), p.k_radial);
      }
      if (j + 1 == mesh.n_z() && boundary.top == FaceCondition::Convective) {
        s.convective[c] += film(mesh.axial_face_area(i), 0.5 * mesh.dz(j), p.k_axial);
      }
      if (j == 0 && boundary.bottom == FaceCondition::Convective) {
        s.convective[c] += film(mesh.axial_face_area(i), 0.5 * mesh.dz(j), p.k_axial);
      }
    }
  }
  for (std::size_t c = 0; c < n; ++c) {
    if (s.convective[c] > 0.0) trip.emplace_back(c, c, s.convective[c]);
  }
  s.conduction.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  s.conduction.setFromTriplets(trip.begin(), trip.end());
  s.conduction.makeCompressed();
}

TransientHeatSolver::~TransientHeatSolver() = default;
TransientHeatSolver::TransientHeatSolver(TransientHeatSolver&&) noexcept = default;
TransientHeatSolver& TransientHeatSolver::operator=(TransientHeatSolver&&) noexcept = default;

ThermalField TransientHeatSolver::step(const ThermalField& field, std::span<const double> sources,
                                       double dt) {
  Impl& s = *impl_;
  const std::size_t n = s.mesh->cell_count();
  if (!(dt > 0.0)) throw ArgumentError("step_temperature: dt must be positive");
  if (field.temperature.size() != n || sources.size() != n) {
    throw ArgumentError("step_temperature: field or source size does not match mesh");
  }

  if (dt != s.cached_dt) {
    s.system = s.conduction;
    for (std::size_t c = 0; c < n; ++c) {
      s.system.coeffRef(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(c)) +=
          s.capacity[c] / dt;
    }
    s.ldlt.compute(s.system);
    if (s.ldlt.info() != Eigen::Success) throw NumericError("heat system factorization failed");
    s.cached_dt = dt;
  }

  Eigen::VectorXd rhs(static_cast<Eigen::Index>(n));
  for (std::size_t c = 0; c < n; ++c) {
    rhs(static_cast<Eigen::Index>(c)) = s.capacity[c] / dt * field.temperature[c] +
                                        s.convective[c] * s.boundary.t_ambient +
                                        sources[c] * s.mesh->volume(c);
  }
  const Eigen::VectorXd t_new = s.ldlt.solve(rhs);
  s.residual = relative_residual(s.system, t_new, rhs);
  if (!(s.residual < 1e-10) || !t_new.allFinite()) {
    throw NumericError("heat solve residual " + std::to_string(s.residual) + " exceeds 1e-10");
  }

  ThermalField next = field;
  next.temperature.assign(t_new.data(), t_new.data() + t_new.size());
  next.t = field.t + dt;
  return next;
}

double TransientHeatSolver::convective_loss(std::span<const double> temperature) const {
  double q = 0.0;
  for (std::size_t c = 0; c < temperature.size(); ++c) {
    q += impl_->convective[c] * (temperature[c] - impl_->boundary.t_ambient);
  }
  return q;
}

double TransientHeatSolver::last_residual() const { return impl_->residual; }

ThermalField step_temperature(const ThermalField& field, const CylMesh& mesh,
                              const MaterialMap& materials, const ThermalBoundary& boundary,
                              std::span<const double> sources, double dt) {
  TransientHeatSolver solver(mesh, materials, boundary);
  return solver.step(field, sources, dt);
}

}  // namespace ecmtk
