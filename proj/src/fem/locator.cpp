#include "field_eval.hpp"
#include "mhd/errors.hpp"
#include "mhd/fem/assembly.hpp"

#include <algorithm>
#include <cmath>

namespace mhd {

namespace {

constexpr double kInsideTol = 1e-12;

}  // namespace

PointLocator::PointLocator(const TaylorHoodSpaces& spaces, int bins_per_axis) : spaces_(&spaces) {
  const Mesh& mesh = spaces.mesh();
  lo_ = hi_ = mesh.vertices().front();
  for (const Point& v : mesh.vertices()) {
    lo_ = lo_.cwiseMin(v);
    hi_ = hi_.cwiseMax(v);
  }
  if (bins_per_axis <= 0) {
    bins_per_axis = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(mesh.num_cells()) / 2.0)));
  }
  const Eigen::Vector2d ext = hi_ - lo_;
  // keep bins roughly square
  if (ext.x() >= ext.y()) {
    nx_ = bins_per_axis;
    ny_ = std::max(1, static_cast<int>(std::lround(bins_per_axis * ext.y() / ext.x())));
  } else {
    ny_ = bins_per_axis;
    nx_ = std::max(1, static_cast<int>(std::lround(bins_per_axis * ext.x() / ext.y())));
  }
  bins_.assign(static_cast<std::size_t>(nx_ * ny_), {});
  auto bin_x = [&](double x) {
    return std::clamp(static_cast<int>((x - lo_.x()) / ext.x() * nx_), 0, nx_ - 1);
  };
  auto bin_y = [&](double y) {
    return std::clamp(static_cast<int>((y - lo_.y()) / ext.y() * ny_), 0, ny_ - 1);
  };
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    Eigen::Vector2d clo = mesh.vertices()[mesh.cells()[c][0]];
    Eigen::Vector2d chi = clo;
    for (std::size_t v : mesh.cells()[c]) {
      clo = clo.cwiseMin(mesh.vertices()[v]);
      chi = chi.cwiseMax(mesh.vertices()[v]);
    }
    for (int i = bin_x(clo.x()); i <= bin_x(chi.x()); ++i) {
      for (int j = bin_y(clo.y()); j <= bin_y(chi.y()); ++j) {
        bins_[static_cast<std::size_t>(j * nx_ + i)].push_back(c);
      }
    }
  }
}

bool PointLocator::locate(const Point& x, std::size_t& cell, std::array<double, 3>& bary) const {
  const Eigen::Vector2d ext = hi_ - lo_;
  const double tol = 1e-12 * ext.norm();
  if (x.x() < lo_.x() - tol || x.x() > hi_.x() + tol || x.y() < lo_.y() - tol ||
      x.y() > hi_.y() + tol) {
    return false;
  }
  const int i = std::clamp(static_cast<int>((x.x() - lo_.x()) / ext.x() * nx_), 0, nx_ - 1);
  const int j = std::clamp(static_cast<int>((x.y() - lo_.y()) / ext.y() * ny_), 0, ny_ - 1);
  const Mesh& mesh = spaces_->mesh();
  for (std::size_t c : bins_[static_cast<std::size_t>(j * nx_ + i)]) {
    const fem::CellFrame frame = fem::cell_frame(mesh, c);
    const Point centroid = (frame.x[0] + frame.x[1] + frame.x[2]) / 3.0;
    std::array<double, 3> l;
    for (int k = 0; k < 3; ++k) l[k] = 1.0 / 3.0 + frame.grad_lambda[k].dot(x - centroid);
    if (l[0] >= -kInsideTol && l[1] >= -kInsideTol && l[2] >= -kInsideTol) {
      cell = c;
      bary = l;
      return true;
    }
  }
  return false;
}

bool PointLocator::evaluate(const Field& f, const Point& x, Vec2& value) const {
  if (f.role != Role::velocity) throw InvalidArgument("evaluate: vector field expected");
  std::size_t c = 0;
  std::array<double, 3> bary;
  if (!locate(x, c, bary)) return false;
  const fem::CellFrame frame = fem::cell_frame(spaces_->mesh(), c);
  value = fem::LocalVector(f, *spaces_, c).value(fem::p2_shape(frame, bary));
  return true;
}

bool PointLocator::evaluate(const Field& f, const Point& x, double& value) const {
  if (f.role != Role::scalar) throw InvalidArgument("evaluate: scalar field expected");
  std::size_t c = 0;
  std::array<double, 3> bary;
  if (!locate(x, c, bary)) return false;
  value = fem::LocalScalar(f, *spaces_, c).value(bary);
  return true;
}

}  // namespace mhd
