#include "mhd/fem/dirichlet.hpp"

#include "mhd/errors.hpp"

#include <algorithm>
#include <string>

namespace mhd {

namespace {

void check_tags(const TaylorHoodSpaces& spaces, const std::vector<int>& tags) {
  const auto mesh_tags = spaces.mesh().boundary_tags();
  for (int tag : tags) {
    if (std::find(mesh_tags.begin(), mesh_tags.end(), tag) == mesh_tags.end()) {
      throw ConfigError("boundary tag " + std::to_string(tag) + " does not occur in the mesh");
    }
  }
}

}  // namespace

DirichletValues boundary_values(const TaylorHoodSpaces& spaces, const BoundaryData& data, double t) {
  std::vector<int> tags;
  for (const auto& [tag, fn] : data) {
    if (!fn) throw ConfigError("boundary tag " + std::to_string(tag) + " has no function");
    tags.push_back(tag);
  }
  check_tags(spaces, tags);
  std::vector<std::pair<std::size_t, double>> entries;
  const auto& nodes = spaces.boundary_nodes();
  for (const auto& [tag, fn] : data) {
    auto it = nodes.find(tag);
    if (it == nodes.end()) continue;
    for (std::size_t node : it->second) {
      const Point& x = spaces.node_point(node);
      const Vec2 g = fn(x.x(), x.y(), t);
      entries.emplace_back(spaces.velocity_dof(0, node), g.x());
      entries.emplace_back(spaces.velocity_dof(1, node), g.y());
    }
  }
  std::sort(entries.begin(), entries.end());
  DirichletValues bc;
  bc.dofs.reserve(entries.size());
  bc.values.resize(static_cast<Eigen::Index>(entries.size()));
  for (std::size_t i = 0; i < entries.size(); ++i) {
    bc.dofs.push_back(entries[i].first);
    bc.values[static_cast<Eigen::Index>(i)] = entries[i].second;
  }
  return bc;
}

DirichletValues homogeneous_values(const TaylorHoodSpaces& spaces, const std::vector<int>& tags) {
  check_tags(spaces, tags);
  DirichletValues bc;
  bc.dofs = spaces.boundary_dofs(tags);
  bc.values = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(bc.dofs.size()));
  return bc;
}

void eliminate_dofs(LinearSystem& system, const DirichletValues& bc) {
  const Eigen::Index n = system.matrix.rows();
  if (system.matrix.cols() != n || system.rhs.size() != n) {
    throw InvalidArgument("eliminate_dofs: square system with matching rhs expected");
  }
  if (static_cast<Eigen::Index>(bc.dofs.size()) != bc.values.size()) {
    throw InvalidArgument("eliminate_dofs: dofs and values differ in length");
  }
  std::vector<char> fixed(static_cast<std::size_t>(n), 0);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
  for (std::size_t i = 0; i < bc.dofs.size(); ++i) {
    const auto d = static_cast<Eigen::Index>(bc.dofs[i]);
    if (d >= n) throw InvalidArgument("eliminate_dofs: dof out of range");
    fixed[static_cast<std::size_t>(d)] = 1;
    g[d] = bc.values[static_cast<Eigen::Index>(i)];
  }
  SparseMatrix& A = system.matrix;
  for (Eigen::Index col = 0; col < A.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(A, col); it; ++it) {
      const bool frow = fixed[static_cast<std::size_t>(it.row())] != 0;
      const bool fcol = fixed[static_cast<std::size_t>(it.col())] != 0;
      if (fcol && !frow) system.rhs[it.row()] -= it.value() * g[it.col()];
      if (frow || fcol) it.valueRef() = 0.0;
    }
  }
  A.prune([](Eigen::Index, Eigen::Index, double v) { return v != 0.0; });
  for (std::size_t d : bc.dofs) {
    const auto i = static_cast<Eigen::Index>(d);
    A.coeffRef(i, i) = 1.0;
    system.rhs[i] = g[i];
  }
  A.makeCompressed();
}

void apply_dirichlet(LinearSystem& system, const TaylorHoodSpaces& spaces,
                     const BoundaryData& data, double t) {
  eliminate_dofs(system, boundary_values(spaces, data, t));
}

}  // namespace mhd
