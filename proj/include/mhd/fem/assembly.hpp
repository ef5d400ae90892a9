#pragma once

#include "mhd/fem/spaces.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <array>
#include <vector>

namespace mhd {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// L2 Gram matrix. Velocity role gives the block-diagonal P2 vector mass.
SparseMatrix assemble_mass(const TaylorHoodSpaces& spaces, Role role);

/// Gradient Gram matrix (grad u, grad v). Kernel = constant fields.
SparseMatrix assemble_stiffness(const TaylorHoodSpaces& spaces, Role role);

/// Rectangular matrix D (scalar dofs x velocity dofs) with
/// D(i, j) = (q_i, div phi_j), so q^T D u = (q, div u).
SparseMatrix assemble_divergence(const TaylorHoodSpaces& spaces);

/// Load vector (f(., t), phi_i) over velocity basis functions.
Eigen::VectorXd assemble_load(const TaylorHoodSpaces& spaces, const VectorFunction& f, double t);

/// Integrals of the scalar basis functions, (1, q_i). Its dot with a P1
/// coefficient vector is the domain integral of that field.
Eigen::VectorXd scalar_basis_integrals(const TaylorHoodSpaces& spaces);

/// r_i = b*(a, b, phi_i) with b*(u,v,w) = 1/2 (u.grad v, w) - 1/2 (u.grad w, v).
Eigen::VectorXd skew_convection_vector(const Field& a, const Field& b,
                                       const TaylorHoodSpaces& spaces);

/// b*(a, b, c) evaluated directly by quadrature.
double trilinear_scalar(const Field& a, const Field& b, const Field& c,
                        const TaylorHoodSpaces& spaces);

/// C(i, j) = b*(w, phi_j, phi_i): the linearized skew convection operator
/// acting on the second slot. Skew-symmetric by construction.
SparseMatrix assemble_skew_convection_matrix(const Field& w, const TaylorHoodSpaces& spaces);

/// Nodal interpolants (P2 vertices + edge midpoints, or P1 vertices).
Field interpolate(const VectorFunction& expr, double t, const TaylorHoodSpaces& spaces);
Field interpolate(const ScalarFunction& expr, double t, const TaylorHoodSpaces& spaces);

/// sqrt(f^T M f), sqrt(f^T K f), f^T M g; computed by cell quadrature.
double l2_norm(const Field& f, const TaylorHoodSpaces& spaces);
double h1_seminorm(const Field& f, const TaylorHoodSpaces& spaces);
double l2_inner(const Field& f, const Field& g, const TaylorHoodSpaces& spaces);

/// Domain integral of a scalar field.
double integrate(const Field& f, const TaylorHoodSpaces& spaces);

/// Boundary energy flux
///   oint ( -1/2|u|^2 u - s/2 |B|^2 u + nu (grad u)^T u - p u
///          + s (B.u) B + s gamma (grad B)^T B - s lambda B ) . n
/// over every tagged facet, 4-point Gauss per edge. (grad u)^T u . n is
/// read as sum_i u_i (d u_i / d n).
double boundary_functional_bs(const Field& u, const Field& B, const Field& p, const Field& lambda,
                              double nu, double gamma, double s, const TaylorHoodSpaces& spaces);

/// Point evaluation of a field in an arbitrary (x, y); uses a bucket grid
/// over cell bounding boxes.
class PointLocator {
 public:
  explicit PointLocator(const TaylorHoodSpaces& spaces, int bins_per_axis = 0);

  /// Containing cell and barycentric coordinates, or false when the point is
  /// outside the mesh (holes included).
  bool locate(const Point& x, std::size_t& cell, std::array<double, 3>& bary) const;

  bool evaluate(const Field& f, const Point& x, Vec2& value) const;
  bool evaluate(const Field& f, const Point& x, double& value) const;

 private:
  const TaylorHoodSpaces* spaces_;
  Eigen::Vector2d lo_, hi_;
  int nx_ = 1, ny_ = 1;
  std::vector<std::vector<std::size_t>> bins_;
};

}  // namespace mhd
