#pragma once

#include "mhd/fem/quadrature.hpp"
#include "mhd/fem/spaces.hpp"

#include <Eigen/Core>

#include <array>

namespace mhd::fem {

// Cell-local coefficients of a P2 vector field, coeff(comp, k).
struct LocalVector {
  Eigen::Matrix<double, 2, 6> coeff;

  LocalVector(const Field& f, const TaylorHoodSpaces& spaces, std::size_t cell) {
    const auto nodes = spaces.cell_nodes(cell);
    for (int c = 0; c < 2; ++c) {
      for (int k = 0; k < 6; ++k) {
        coeff(c, k) = f.values[static_cast<Eigen::Index>(spaces.velocity_dof(c, nodes[k]))];
      }
    }
  }

  Eigen::Vector2d value(const P2Shape& s) const {
    Eigen::Vector2d v = Eigen::Vector2d::Zero();
    for (int k = 0; k < 6; ++k) v += coeff.col(k) * s.value[k];
    return v;
  }

  // g(i, j) = d u_i / d x_j
  Eigen::Matrix2d gradient(const P2Shape& s) const {
    Eigen::Matrix2d g = Eigen::Matrix2d::Zero();
    for (int k = 0; k < 6; ++k) g += coeff.col(k) * s.grad[k].transpose();
    return g;
  }
};

struct LocalScalar {
  std::array<double, 3> coeff;

  LocalScalar(const Field& f, const TaylorHoodSpaces& spaces, std::size_t cell) {
    const Cell& v = spaces.mesh().cells()[cell];
    for (int i = 0; i < 3; ++i) coeff[i] = f.values[static_cast<Eigen::Index>(v[i])];
  }

  double value(const std::array<double, 3>& bary) const {
    return coeff[0] * bary[0] + coeff[1] * bary[1] + coeff[2] * bary[2];
  }

  Eigen::Vector2d gradient(const CellFrame& frame) const {
    return coeff[0] * frame.grad_lambda[0] + coeff[1] * frame.grad_lambda[1] +
           coeff[2] * frame.grad_lambda[2];
  }
};

}  // namespace mhd::fem
