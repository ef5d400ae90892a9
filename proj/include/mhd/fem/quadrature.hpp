#pragma once

#include "mhd/mesh.hpp"

#include <Eigen/Core>

#include <array>
#include <cstddef>
#include <vector>

namespace mhd::fem {

/// Triangle rule in barycentric coordinates; weights sum to one so that
/// the integral over a cell is area * sum(w_q f(x_q)).
struct TriangleRule {
  std::vector<std::array<double, 3>> points;
  std::vector<double> weights;
  int degree = 0;
};

/// Gauss-Legendre rule on [0,1]; weights sum to one.
struct LineRule {
  std::vector<double> points;
  std::vector<double> weights;
  int degree = 0;
};

/// 7-point rule, exact through degree 5. Used for bilinear forms.
const TriangleRule& triangle_rule_degree5();
/// 12-point rule, exact through degree 6. Used for trilinear terms and loads.
const TriangleRule& triangle_rule_degree6();
/// n-point Gauss-Legendre on [0,1] (n in 1..5).
const LineRule& gauss_legendre(int n);

/// Affine geometry of one triangle: vertices, area, gradients of the
/// barycentric coordinates.
struct CellFrame {
  std::array<Point, 3> x;
  double area = 0.0;
  std::array<Eigen::Vector2d, 3> grad_lambda;

  Point map(const std::array<double, 3>& bary) const {
    return bary[0] * x[0] + bary[1] * x[1] + bary[2] * x[2];
  }
};

CellFrame cell_frame(const Mesh& mesh, std::size_t cell);

/// P2 shape functions at a barycentric point, local order
/// (v0, v1, v2, m01, m12, m20).
struct P2Shape {
  std::array<double, 6> value;
  std::array<Eigen::Vector2d, 6> grad;
};

P2Shape p2_shape(const CellFrame& frame, const std::array<double, 3>& bary);

/// P1 values are the barycentric coordinates; gradients are frame.grad_lambda.

}  // namespace mhd::fem
