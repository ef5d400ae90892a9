#pragma once

#include "mhd/mesh.hpp"

#include <Eigen/Core>

#include <array>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <vector>

namespace mhd {

/// Velocity-like fields (u, B) live in P2^2; scalar-like fields (p, lambda) in P1.
enum class Role { velocity, scalar };

using Vec2 = Eigen::Vector2d;
using VectorFunction = std::function<Vec2(double x, double y, double t)>;
using ScalarFunction = std::function<double(double x, double y, double t)>;

/// Taylor-Hood P2-P1 dof maps over a mesh.
///
/// P2 nodes are numbered vertices first, then edge midpoints in the mesh's
/// lexicographic edge order. Velocity dofs are blocked by component:
/// dof(c, node) = c * num_p2_nodes() + node. Scalar dofs are the vertices.
class TaylorHoodSpaces {
 public:
  explicit TaylorHoodSpaces(std::shared_ptr<const Mesh> mesh);

  const Mesh& mesh() const noexcept { return *mesh_; }
  std::shared_ptr<const Mesh> mesh_ptr() const noexcept { return mesh_; }

  std::size_t num_p2_nodes() const noexcept { return num_p2_nodes_; }
  std::size_t num_velocity_dofs() const noexcept { return 2 * num_p2_nodes_; }
  std::size_t num_scalar_dofs() const noexcept { return mesh_->num_vertices(); }
  std::size_t num_dofs(Role role) const noexcept {
    return role == Role::velocity ? num_velocity_dofs() : num_scalar_dofs();
  }

  std::size_t velocity_dof(int component, std::size_t node) const noexcept {
    return static_cast<std::size_t>(component) * num_p2_nodes_ + node;
  }

  /// Global P2 node indices of a cell in local order (v0, v1, v2, m01, m12, m20).
  std::array<std::size_t, 6> cell_nodes(std::size_t cell) const;
  const Point& node_point(std::size_t node) const { return node_points_[node]; }

  /// Boundary P2 nodes grouped by tag. A vertex shared by facets of
  /// different tags belongs to the smallest tag.
  const std::map<int, std::vector<std::size_t>>& boundary_nodes() const noexcept {
    return boundary_nodes_;
  }
  /// Constrained velocity dofs (both components) per tag.
  const std::map<int, std::vector<std::size_t>>& boundary_dof_index() const noexcept {
    return boundary_dofs_;
  }
  /// Sorted union of velocity boundary dofs over the given tags.
  std::vector<std::size_t> boundary_dofs(const std::vector<int>& tags) const;

 private:
  std::shared_ptr<const Mesh> mesh_;
  std::size_t num_p2_nodes_ = 0;
  std::vector<Point> node_points_;
  std::map<int, std::vector<std::size_t>> boundary_nodes_;
  std::map<int, std::vector<std::size_t>> boundary_dofs_;
};

std::shared_ptr<const TaylorHoodSpaces> build_taylor_hood(std::shared_ptr<const Mesh> mesh);
std::shared_ptr<const TaylorHoodSpaces> build_taylor_hood(Mesh mesh);

/// Coefficient vector tagged with the space it lives in.
struct Field {
  Role role = Role::velocity;
  Eigen::VectorXd values;

  static Field zeros(const TaylorHoodSpaces& spaces, Role role) {
    return Field{role, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(spaces.num_dofs(role)))};
  }
};

}  // namespace mhd
