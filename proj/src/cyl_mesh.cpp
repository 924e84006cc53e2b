#include "ecmtk/thermal.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "ecmtk/errors.hpp"

namespace ecmtk {

namespace {

void check_faces(const std::vector<double>& faces, const char* axis) {
  if (faces.size() < 2) throw ConfigurationError(std::string(axis) + " grid needs at least one cell");
  if (faces.front() != 0.0) throw ConfigurationError(std::string(axis) + " grid must start at 0");
  for (std::size_t i = 1; i < faces.size(); ++i) {
    if (!(faces[i] > faces[i - 1]) || !std::isfinite(faces[i])) {
      throw ConfigurationError(std::string(axis) + " faces must be strictly increasing");
    }
  }
}

std::vector<double> even_faces(std::size_t n, double length) {
  std::vector<double> faces(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    faces[i] = length * static_cast<double>(i) / static_cast<double>(n);
  }
  return faces;
}

}  // namespace

CylMesh::CylMesh(std::vector<double> r_faces, std::vector<double> z_faces, std::size_t tab_layers)
    : r_faces_(std::move(r_faces)), z_faces_(std::move(z_faces)), tab_layers_(tab_layers) {
  check_faces(r_faces_, "radial");
  check_faces(z_faces_, "axial");
  if (2 * tab_layers_ >= n_z()) {
    throw ConfigurationError("tab layers leave no active rows (n_z = " + std::to_string(n_z()) +
                             ")");
  }
  zones_.assign(cell_count(), Zone::Active);
  for (std::size_t j = 0; j < n_z(); ++j) {
    Zone z = Zone::Active;
    if (j < tab_layers_) z = Zone::NegativeTab;
    if (j >= n_z() - tab_layers_) z = Zone::PositiveTab;
    for (std::size_t i = 0; i < n_r(); ++i) zones_[index(i, j)] = z;
  }
}

CylMesh CylMesh::uniform(std::size_t n_r, std::size_t n_z, double radius, double height,
                         std::size_t tab_layers) {
  if (n_r == 0 || n_z == 0) throw ConfigurationError("mesh needs at least one cell per axis");
  if (!(radius > 0.0) || !(height > 0.0)) {
    throw ConfigurationError("mesh radius and height must be positive");
  }
  return CylMesh(even_faces(n_r, radius), even_faces(n_z, height), tab_layers);
}

double CylMesh::radial_face_area(std::size_t i, std::size_t j) const {
  return 2.0 * std::numbers::pi * r_faces_[i] * dz(j);
}

double CylMesh::axial_face_area(std::size_t i) const {
  return std::numbers::pi * (r_faces_[i + 1] * r_faces_[i + 1] - r_faces_[i] * r_faces_[i]);
}

double CylMesh::volume(std::size_t cell) const {
  const std::size_t i = cell % n_r();
  const std::size_t j = cell / n_r();
  return axial_face_area(i) * dz(j);
}

double CylMesh::total_volume() const {
  double v = 0.0;
  for (std::size_t c = 0; c < cell_count(); ++c) v += volume(c);
  return v;
}

double CylMesh::zone_volume(Zone z) const {
  double v = 0.0;
  for (std::size_t c = 0; c < cell_count(); ++c) {
    if (zones_[c] == z) v += volume(c);
  }
  return v;
}

}  // namespace ecmtk
