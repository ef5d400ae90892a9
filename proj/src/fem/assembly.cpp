#include "mhd/fem/assembly.hpp"

#include "field_eval.hpp"
#include "mhd/errors.hpp"
#include "mhd/fem/quadrature.hpp"

#include <cmath>
#include <vector>

namespace mhd {

using fem::CellFrame;
using fem::P2Shape;
using Triplets = std::vector<Eigen::Triplet<double>>;

namespace {

using Local6 = Eigen::Matrix<double, 6, 6>;
using Local3 = Eigen::Matrix3d;

Local6 p2_local_mass(const CellFrame& frame) {
  Local6 m = Local6::Zero();
  const auto& rule = fem::triangle_rule_degree5();
  for (std::size_t q = 0; q < rule.points.size(); ++q) {
    const P2Shape s = fem::p2_shape(frame, rule.points[q]);
    const double w = rule.weights[q] * frame.area;
    for (int i = 0; i < 6; ++i) {
      for (int j = 0; j < 6; ++j) m(i, j) += w * s.value[i] * s.value[j];
    }
  }
  return m;
}

Local6 p2_local_stiffness(const CellFrame& frame) {
  Local6 k = Local6::Zero();
  const auto& rule = fem::triangle_rule_degree5();
  for (std::size_t q = 0; q < rule.points.size(); ++q) {
    const P2Shape s = fem::p2_shape(frame, rule.points[q]);
    const double w = rule.weights[q] * frame.area;
    for (int i = 0; i < 6; ++i) {
      for (int j = 0; j < 6; ++j) k(i, j) += w * s.grad[i].dot(s.grad[j]);
    }
  }
  return k;
}

Local3 p1_local_mass(const CellFrame& frame) {
  Local3 m;
  m << 2, 1, 1, 1, 2, 1, 1, 1, 2;
  return m * (frame.area / 12.0);
}

Local3 p1_local_stiffness(const CellFrame& frame) {
  Local3 k;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) k(i, j) = frame.area * frame.grad_lambda[i].dot(frame.grad_lambda[j]);
  }
  return k;
}

SparseMatrix from_triplets(std::size_t rows, std::size_t cols, const Triplets& t) {
  SparseMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

template <class LocalFn>
SparseMatrix assemble_bilinear(const TaylorHoodSpaces& spaces, Role role, LocalFn p2_local,
                               Local3 (*p1_local)(const CellFrame&)) {
  const Mesh& mesh = spaces.mesh();
  Triplets t;
  const std::size_t n = spaces.num_dofs(role);
  if (role == Role::velocity) {
    t.reserve(mesh.num_cells() * 72);
    for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
      const Local6 local = p2_local(fem::cell_frame(mesh, c));
      const auto nodes = spaces.cell_nodes(c);
      for (int comp = 0; comp < 2; ++comp) {
        for (int i = 0; i < 6; ++i) {
          for (int j = 0; j < 6; ++j) {
            t.emplace_back(static_cast<int>(spaces.velocity_dof(comp, nodes[i])),
                           static_cast<int>(spaces.velocity_dof(comp, nodes[j])), local(i, j));
          }
        }
      }
    }
  } else {
    t.reserve(mesh.num_cells() * 9);
    for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
      const Local3 local = p1_local(fem::cell_frame(mesh, c));
      const Cell& v = mesh.cells()[c];
      for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
          t.emplace_back(static_cast<int>(v[i]), static_cast<int>(v[j]), local(i, j));
        }
      }
    }
  }
  return from_triplets(n, n, t);
}

}  // namespace

SparseMatrix assemble_mass(const TaylorHoodSpaces& spaces, Role role) {
  return assemble_bilinear(spaces, role, p2_local_mass, p1_local_mass);
}

SparseMatrix assemble_stiffness(const TaylorHoodSpaces& spaces, Role role) {
  return assemble_bilinear(spaces, role, p2_local_stiffness, p1_local_stiffness);
}

SparseMatrix assemble_divergence(const TaylorHoodSpaces& spaces) {
  const Mesh& mesh = spaces.mesh();
  const auto& rule = fem::triangle_rule_degree5();
  Triplets t;
  t.reserve(mesh.num_cells() * 36);
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const CellFrame frame = fem::cell_frame(mesh, c);
    const auto nodes = spaces.cell_nodes(c);
    const Cell& v = mesh.cells()[c];
    Eigen::Matrix<double, 3, 12> local = Eigen::Matrix<double, 3, 12>::Zero();
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const P2Shape s = fem::p2_shape(frame, rule.points[q]);
      const double w = rule.weights[q] * frame.area;
      for (int i = 0; i < 3; ++i) {
        const double qi = rule.points[q][i];
        for (int j = 0; j < 6; ++j) {
          local(i, j) += w * qi * s.grad[j].x();
          local(i, 6 + j) += w * qi * s.grad[j].y();
        }
      }
    }
    for (int i = 0; i < 3; ++i) {
      for (int comp = 0; comp < 2; ++comp) {
        for (int j = 0; j < 6; ++j) {
          t.emplace_back(static_cast<int>(v[i]),
                         static_cast<int>(spaces.velocity_dof(comp, nodes[j])),
                         local(i, 6 * comp + j));
        }
      }
    }
  }
  return from_triplets(spaces.num_scalar_dofs(), spaces.num_velocity_dofs(), t);
}

Eigen::VectorXd assemble_load(const TaylorHoodSpaces& spaces, const VectorFunction& f, double t) {
  const Mesh& mesh = spaces.mesh();
  const auto& rule = fem::triangle_rule_degree6();
  Eigen::VectorXd r = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(spaces.num_velocity_dofs()));
  if (!f) return r;
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const CellFrame frame = fem::cell_frame(mesh, c);
    const auto nodes = spaces.cell_nodes(c);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const P2Shape s = fem::p2_shape(frame, rule.points[q]);
      const Point x = frame.map(rule.points[q]);
      const Vec2 fx = f(x.x(), x.y(), t);
      const double w = rule.weights[q] * frame.area;
      for (int k = 0; k < 6; ++k) {
        r[static_cast<Eigen::Index>(spaces.velocity_dof(0, nodes[k]))] += w * fx.x() * s.value[k];
        r[static_cast<Eigen::Index>(spaces.velocity_dof(1, nodes[k]))] += w * fx.y() * s.value[k];
      }
    }
  }
  return r;
}

Eigen::VectorXd scalar_basis_integrals(const TaylorHoodSpaces& spaces) {
  const Mesh& mesh = spaces.mesh();
  Eigen::VectorXd e = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(spaces.num_scalar_dofs()));
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const double third = mesh.signed_area(c) / 3.0;
    for (std::size_t v : mesh.cells()[c]) e[static_cast<Eigen::Index>(v)] += third;
  }
  return e;
}

Field interpolate(const VectorFunction& expr, double t, const TaylorHoodSpaces& spaces) {
  Field f = Field::zeros(spaces, Role::velocity);
  if (!expr) return f;
  for (std::size_t n = 0; n < spaces.num_p2_nodes(); ++n) {
    const Point& x = spaces.node_point(n);
    const Vec2 v = expr(x.x(), x.y(), t);
    f.values[static_cast<Eigen::Index>(spaces.velocity_dof(0, n))] = v.x();
    f.values[static_cast<Eigen::Index>(spaces.velocity_dof(1, n))] = v.y();
  }
  return f;
}

Field interpolate(const ScalarFunction& expr, double t, const TaylorHoodSpaces& spaces) {
  Field f = Field::zeros(spaces, Role::scalar);
  if (!expr) return f;
  const auto& verts = spaces.mesh().vertices();
  for (std::size_t v = 0; v < verts.size(); ++v) {
    f.values[static_cast<Eigen::Index>(v)] = expr(verts[v].x(), verts[v].y(), t);
  }
  return f;
}

namespace {

void require_same_role(const Field& f, const Field& g) {
  if (f.role != g.role) throw InvalidArgument("fields live in different spaces");
}

void require_size(const Field& f, const TaylorHoodSpaces& spaces) {
  if (static_cast<std::size_t>(f.values.size()) != spaces.num_dofs(f.role)) {
    throw InvalidArgument("field length does not match its dof map");
  }
}

}  // namespace

double l2_inner(const Field& f, const Field& g, const TaylorHoodSpaces& spaces) {
  require_same_role(f, g);
  require_size(f, spaces);
  require_size(g, spaces);
  const Mesh& mesh = spaces.mesh();
  const auto& rule = fem::triangle_rule_degree5();
  double sum = 0.0;
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const CellFrame frame = fem::cell_frame(mesh, c);
    if (f.role == Role::velocity) {
      const fem::LocalVector lf(f, spaces, c);
      const fem::LocalVector lg(g, spaces, c);
      for (std::size_t q = 0; q < rule.points.size(); ++q) {
        const P2Shape s = fem::p2_shape(frame, rule.points[q]);
        sum += rule.weights[q] * frame.area * lf.value(s).dot(lg.value(s));
      }
    } else {
      const fem::LocalScalar lf(f, spaces, c);
      const fem::LocalScalar lg(g, spaces, c);
      for (std::size_t q = 0; q < rule.points.size(); ++q) {
        sum += rule.weights[q] * frame.area * lf.value(rule.points[q]) * lg.value(rule.points[q]);
      }
    }
  }
  return sum;
}

double l2_norm(const Field& f, const TaylorHoodSpaces& spaces) {
  return std::sqrt(std::max(0.0, l2_inner(f, f, spaces)));
}

double h1_seminorm(const Field& f, const TaylorHoodSpaces& spaces) {
  require_size(f, spaces);
  const Mesh& mesh = spaces.mesh();
  const auto& rule = fem::triangle_rule_degree5();
  double sum = 0.0;
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const CellFrame frame = fem::cell_frame(mesh, c);
    if (f.role == Role::velocity) {
      const fem::LocalVector lf(f, spaces, c);
      for (std::size_t q = 0; q < rule.points.size(); ++q) {
        const P2Shape s = fem::p2_shape(frame, rule.points[q]);
        sum += rule.weights[q] * frame.area * lf.gradient(s).squaredNorm();
      }
    } else {
      const fem::LocalScalar lf(f, spaces, c);
      sum += frame.area * lf.gradient(frame).squaredNorm();
    }
  }
  return std::sqrt(sum);
}

double integrate(const Field& f, const TaylorHoodSpaces& spaces) {
  if (f.role != Role::scalar) throw InvalidArgument("integrate: scalar field expected");
  require_size(f, spaces);
  return scalar_basis_integrals(spaces).dot(f.values);
}

}  // namespace mhd
