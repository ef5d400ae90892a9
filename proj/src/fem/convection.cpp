#include "field_eval.hpp"
#include "mhd/errors.hpp"
#include "mhd/fem/assembly.hpp"

#include <vector>

namespace mhd {

namespace {

void require_velocity(const Field& f, const TaylorHoodSpaces& spaces) {
  if (f.role != Role::velocity ||
      static_cast<std::size_t>(f.values.size()) != spaces.num_velocity_dofs()) {
    throw InvalidArgument("trilinear form expects P2 vector fields");
  }
}

}  // namespace

Eigen::VectorXd skew_convection_vector(const Field& a, const Field& b,
                                       const TaylorHoodSpaces& spaces) {
  require_velocity(a, spaces);
  require_velocity(b, spaces);
  const Mesh& mesh = spaces.mesh();
  const auto& rule = fem::triangle_rule_degree6();
  Eigen::VectorXd r = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(spaces.num_velocity_dofs()));
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const fem::CellFrame frame = fem::cell_frame(mesh, c);
    const fem::LocalVector la(a, spaces, c);
    const fem::LocalVector lb(b, spaces, c);
    const auto nodes = spaces.cell_nodes(c);
    Eigen::Matrix<double, 2, 6> local = Eigen::Matrix<double, 2, 6>::Zero();
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const fem::P2Shape s = fem::p2_shape(frame, rule.points[q]);
      const double w = 0.5 * rule.weights[q] * frame.area;
      const Eigen::Vector2d av = la.value(s);
      const Eigen::Vector2d bv = lb.value(s);
      const Eigen::Vector2d adb = lb.gradient(s) * av;
      for (int k = 0; k < 6; ++k) {
        const double adphi = av.dot(s.grad[k]);
        local.col(k) += w * (adb * s.value[k] - adphi * bv);
      }
    }
    for (int comp = 0; comp < 2; ++comp) {
      for (int k = 0; k < 6; ++k) {
        r[static_cast<Eigen::Index>(spaces.velocity_dof(comp, nodes[k]))] += local(comp, k);
      }
    }
  }
  return r;
}

double trilinear_scalar(const Field& a, const Field& b, const Field& c,
                        const TaylorHoodSpaces& spaces) {
  require_velocity(a, spaces);
  require_velocity(b, spaces);
  require_velocity(c, spaces);
  const Mesh& mesh = spaces.mesh();
  const auto& rule = fem::triangle_rule_degree6();
  double sum = 0.0;
  for (std::size_t cell = 0; cell < mesh.num_cells(); ++cell) {
    const fem::CellFrame frame = fem::cell_frame(mesh, cell);
    const fem::LocalVector la(a, spaces, cell);
    const fem::LocalVector lb(b, spaces, cell);
    const fem::LocalVector lc(c, spaces, cell);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const fem::P2Shape s = fem::p2_shape(frame, rule.points[q]);
      const Eigen::Vector2d av = la.value(s);
      const double term = (lb.gradient(s) * av).dot(lc.value(s)) -
                          (lc.gradient(s) * av).dot(lb.value(s));
      sum += 0.5 * rule.weights[q] * frame.area * term;
    }
  }
  return sum;
}

SparseMatrix assemble_skew_convection_matrix(const Field& w, const TaylorHoodSpaces& spaces) {
  require_velocity(w, spaces);
  const Mesh& mesh = spaces.mesh();
  const auto& rule = fem::triangle_rule_degree6();
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(mesh.num_cells() * 72);
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const fem::CellFrame frame = fem::cell_frame(mesh, c);
    const fem::LocalVector lw(w, spaces, c);
    const auto nodes = spaces.cell_nodes(c);
    Eigen::Matrix<double, 6, 6> local = Eigen::Matrix<double, 6, 6>::Zero();
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const fem::P2Shape s = fem::p2_shape(frame, rule.points[q]);
      const double wq = 0.5 * rule.weights[q] * frame.area;
      const Eigen::Vector2d wv = lw.value(s);
      std::array<double, 6> wd;
      for (int k = 0; k < 6; ++k) wd[k] = wv.dot(s.grad[k]);
      for (int i = 0; i < 6; ++i) {
        for (int j = 0; j < 6; ++j) local(i, j) += wq * (wd[j] * s.value[i] - wd[i] * s.value[j]);
      }
    }
    for (int comp = 0; comp < 2; ++comp) {
      for (int i = 0; i < 6; ++i) {
        for (int j = 0; j < 6; ++j) {
          t.emplace_back(static_cast<int>(spaces.velocity_dof(comp, nodes[i])),
                         static_cast<int>(spaces.velocity_dof(comp, nodes[j])), local(i, j));
        }
      }
    }
  }
  SparseMatrix m(static_cast<Eigen::Index>(spaces.num_velocity_dofs()),
                 static_cast<Eigen::Index>(spaces.num_velocity_dofs()));
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

}  // namespace mhd
