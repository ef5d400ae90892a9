#include "field_eval.hpp"
#include "mhd/errors.hpp"
#include "mhd/fem/assembly.hpp"

namespace mhd {

double boundary_functional_bs(const Field& u, const Field& B, const Field& p, const Field& lambda,
                              double nu, double gamma, double s, const TaylorHoodSpaces& spaces) {
  if (u.role != Role::velocity || B.role != Role::velocity || p.role != Role::scalar ||
      lambda.role != Role::scalar) {
    throw InvalidArgument("boundary functional: expected (vector, vector, scalar, scalar)");
  }
  const Mesh& mesh = spaces.mesh();
  const auto& line = fem::gauss_legendre(4);
  double sum = 0.0;
  for (std::size_t f = 0; f < mesh.facets().size(); ++f) {
    const std::size_t c = mesh.facet_cell(f);
    const int e = mesh.facet_local_edge(f);
    const int a = e;
    const int b = (e + 1) % 3;
    const fem::CellFrame frame = fem::cell_frame(mesh, c);
    const Eigen::Vector2d d = frame.x[b] - frame.x[a];
    const double len = d.norm();
    const Eigen::Vector2d n(d.y() / len, -d.x() / len);
    const fem::LocalVector lu(u, spaces, c);
    const fem::LocalVector lB(B, spaces, c);
    const fem::LocalScalar lp(p, spaces, c);
    const fem::LocalScalar ll(lambda, spaces, c);
    for (std::size_t q = 0; q < line.points.size(); ++q) {
      std::array<double, 3> bary{0.0, 0.0, 0.0};
      bary[a] = 1.0 - line.points[q];
      bary[b] = line.points[q];
      const fem::P2Shape sh = fem::p2_shape(frame, bary);
      const Eigen::Vector2d uv = lu.value(sh);
      const Eigen::Vector2d Bv = lB.value(sh);
      const double un = uv.dot(n);
      const double Bn = Bv.dot(n);
      const double integrand = -0.5 * uv.squaredNorm() * un - 0.5 * s * Bv.squaredNorm() * un +
                               nu * uv.dot(lu.gradient(sh) * n) - lp.value(bary) * un +
                               s * Bv.dot(uv) * Bn + s * gamma * Bv.dot(lB.gradient(sh) * n) -
                               s * ll.value(bary) * Bn;
      sum += line.weights[q] * len * integrand;
    }
  }
  return sum;
}

}  // namespace mhd
