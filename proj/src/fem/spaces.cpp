#include "mhd/fem/spaces.hpp"

#include <algorithm>
#include <set>

namespace mhd {

TaylorHoodSpaces::TaylorHoodSpaces(std::shared_ptr<const Mesh> mesh) : mesh_(std::move(mesh)) {
  const std::size_t nv = mesh_->num_vertices();
  num_p2_nodes_ = nv + mesh_->num_edges();

  node_points_ = mesh_->vertices();
  node_points_.reserve(num_p2_nodes_);
  for (const auto& e : mesh_->edges()) {
    node_points_.push_back(0.5 * (mesh_->vertices()[e[0]] + mesh_->vertices()[e[1]]));
  }

  // Vertex ownership goes to the smallest incident tag.
  std::map<std::size_t, int> owner;
  std::map<int, std::set<std::size_t>> nodes;
  for (const auto& f : mesh_->facets()) {
    for (std::size_t v : f.vertices) {
      auto [it, inserted] = owner.emplace(v, f.tag);
      if (!inserted) it->second = std::min(it->second, f.tag);
    }
    nodes[f.tag].insert(nv + mesh_->edge_index(f.vertices[0], f.vertices[1]));
  }
  for (const auto& [v, tag] : owner) nodes[tag].insert(v);

  for (const auto& [tag, set] : nodes) {
    boundary_nodes_[tag] = {set.begin(), set.end()};
    auto& dofs = boundary_dofs_[tag];
    for (int c = 0; c < 2; ++c) {
      for (std::size_t n : set) dofs.push_back(velocity_dof(c, n));
    }
    std::sort(dofs.begin(), dofs.end());
  }
}

std::array<std::size_t, 6> TaylorHoodSpaces::cell_nodes(std::size_t cell) const {
  const Cell& t = mesh_->cells()[cell];
  const auto& e = mesh_->cell_edges(cell);
  const std::size_t nv = mesh_->num_vertices();
  return {t[0], t[1], t[2], nv + e[0], nv + e[1], nv + e[2]};
}

std::vector<std::size_t> TaylorHoodSpaces::boundary_dofs(const std::vector<int>& tags) const {
  std::vector<std::size_t> out;
  for (int tag : tags) {
    auto it = boundary_dofs_.find(tag);
    if (it != boundary_dofs_.end()) out.insert(out.end(), it->second.begin(), it->second.end());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::shared_ptr<const TaylorHoodSpaces> build_taylor_hood(std::shared_ptr<const Mesh> mesh) {
  return std::make_shared<const TaylorHoodSpaces>(std::move(mesh));
}

std::shared_ptr<const TaylorHoodSpaces> build_taylor_hood(Mesh mesh) {
  return build_taylor_hood(std::make_shared<const Mesh>(std::move(mesh)));
}

}  // namespace mhd
