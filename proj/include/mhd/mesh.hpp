#pragma once

#include <Eigen/Core>

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace mhd {

using Point = Eigen::Vector2d;
using Cell = std::array<std::size_t, 3>;
using EdgeKey = std::array<std::size_t, 2>;  // sorted vertex pair

/// Conventional boundary tags. Any nonnegative integer is a valid tag; these
/// are the ones the built-in problems use.
namespace tags {
inline constexpr int wall = 1;
inline constexpr int inflow = 2;
inline constexpr int outflow = 3;
inline constexpr int cylinder = 4;
}  // namespace tags

struct BoundaryFacet {
  std::array<std::size_t, 2> vertices;
  int tag = tags::wall;
};

/// Side tags for generate_rectangle.
struct RectangleTags {
  int left = tags::wall;
  int right = tags::wall;
  int bottom = tags::wall;
  int top = tags::wall;
};

/// Conforming triangulation of a 2D domain with tagged boundary edges.
///
/// The constructor validates every invariant (positive orientation, manifold
/// edges, tagged boundary, closed boundary loops) and derives the edge
/// topology used by the P2 dof map. A Mesh is immutable afterwards.
class Mesh {
 public:
  Mesh(std::vector<Point> vertices, std::vector<Cell> cells,
       std::vector<BoundaryFacet> facets, double grid_spacing = 0.0);

  const std::vector<Point>& vertices() const noexcept { return vertices_; }
  const std::vector<Cell>& cells() const noexcept { return cells_; }
  const std::vector<BoundaryFacet>& facets() const noexcept { return facets_; }

  std::size_t num_vertices() const noexcept { return vertices_.size(); }
  std::size_t num_cells() const noexcept { return cells_.size(); }
  std::size_t num_edges() const noexcept { return edges_.size(); }

  /// Sorted (lexicographic) list of unique edges.
  const std::vector<EdgeKey>& edges() const noexcept { return edges_; }
  /// Edge indices of cell c in local order (v0v1, v1v2, v2v0).
  const std::array<std::size_t, 3>& cell_edges(std::size_t c) const { return cell_edges_[c]; }
  /// Index of the edge joining a and b. Throws if absent.
  std::size_t edge_index(std::size_t a, std::size_t b) const;

  /// Owning cell of boundary facet f and the local edge (0..2) it occupies.
  std::size_t facet_cell(std::size_t f) const { return facet_cells_[f].first; }
  int facet_local_edge(std::size_t f) const { return facet_cells_[f].second; }

  double signed_area(std::size_t c) const;
  double area() const;

  /// Longest edge over all cells.
  double mesh_size() const noexcept { return mesh_size_; }
  /// Reported grid spacing (1/n for structured meshes); mesh_size() if unset.
  double grid_spacing() const noexcept { return grid_spacing_; }

  /// Distinct facet tags in ascending order.
  std::vector<int> boundary_tags() const;
  std::map<int, std::size_t> facet_tag_counts() const;

  friend bool operator==(const Mesh& a, const Mesh& b);

 private:
  void validate_and_build();

  std::vector<Point> vertices_;
  std::vector<Cell> cells_;
  std::vector<BoundaryFacet> facets_;
  std::vector<EdgeKey> edges_;
  std::vector<std::array<std::size_t, 3>> cell_edges_;
  std::vector<std::pair<std::size_t, int>> facet_cells_;
  double mesh_size_ = 0.0;
  double grid_spacing_ = 0.0;
};

/// Uniform n x n grid over [0,1]^2, every square split along its
/// bottom-left to top-right diagonal. All boundary edges carry tags::wall.
Mesh generate_unit_square(int n);

/// Structured nx x ny triangulation of [0,length] x [0,height].
Mesh generate_rectangle(double length, double height, int nx, int ny,
                        const RectangleTags& side_tags = {});

/// Reads the line-oriented "mhdmesh 1" format.
Mesh read_mesh_ascii(const std::filesystem::path& path);
Mesh parse_mesh_ascii(const std::string& text);

void write_mesh_ascii(const Mesh& mesh, const std::filesystem::path& path);
std::string format_mesh_ascii(const Mesh& mesh);

}  // namespace mhd
