#include "mhd/mesh.hpp"

#include "mhd/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <utility>

namespace mhd {

namespace {

EdgeKey make_key(std::size_t a, std::size_t b) {
  return a < b ? EdgeKey{a, b} : EdgeKey{b, a};
}

}  // namespace

Mesh::Mesh(std::vector<Point> vertices, std::vector<Cell> cells,
           std::vector<BoundaryFacet> facets, double grid_spacing)
    : vertices_(std::move(vertices)),
      cells_(std::move(cells)),
      facets_(std::move(facets)),
      grid_spacing_(grid_spacing) {
  validate_and_build();
  if (grid_spacing_ <= 0.0) grid_spacing_ = mesh_size_;
}

void Mesh::validate_and_build() {
  if (cells_.empty()) throw MeshInvalidError("mesh has no cells");
  const std::size_t nv = vertices_.size();

  for (std::size_t c = 0; c < cells_.size(); ++c) {
    for (std::size_t v : cells_[c]) {
      if (v >= nv) {
        throw MeshInvalidError("cell " + std::to_string(c) + " references vertex " +
                               std::to_string(v) + " out of range");
      }
    }
    if (!(signed_area(c) > 0.0)) {
      throw MeshInvalidError("cell " + std::to_string(c) +
                             " has nonpositive signed area (clockwise or degenerate)");
    }
  }

  // Edge -> incident (cell, local edge) list.
  std::map<EdgeKey, std::vector<std::pair<std::size_t, int>>> incidence;
  for (std::size_t c = 0; c < cells_.size(); ++c) {
    const Cell& t = cells_[c];
    for (int e = 0; e < 3; ++e) {
      incidence[make_key(t[e], t[(e + 1) % 3])].emplace_back(c, e);
    }
  }

  edges_.clear();
  edges_.reserve(incidence.size());
  std::map<EdgeKey, std::size_t> edge_ids;
  for (const auto& [key, users] : incidence) {
    if (users.size() > 2) {
      throw MeshInvalidError("edge (" + std::to_string(key[0]) + "," + std::to_string(key[1]) +
                             ") shared by more than two cells");
    }
    edge_ids.emplace(key, edges_.size());
    edges_.push_back(key);
  }

  cell_edges_.assign(cells_.size(), {});
  for (std::size_t c = 0; c < cells_.size(); ++c) {
    const Cell& t = cells_[c];
    for (int e = 0; e < 3; ++e) cell_edges_[c][e] = edge_ids.at(make_key(t[e], t[(e + 1) % 3]));
  }

  // Boundary edges must coincide one-to-one with facets.
  std::set<EdgeKey> seen;
  facet_cells_.clear();
  facet_cells_.reserve(facets_.size());
  for (std::size_t f = 0; f < facets_.size(); ++f) {
    const auto& fv = facets_[f].vertices;
    if (fv[0] >= nv || fv[1] >= nv) {
      throw MeshInvalidError("facet " + std::to_string(f) + " references vertex out of range");
    }
    const EdgeKey key = make_key(fv[0], fv[1]);
    auto it = incidence.find(key);
    if (it == incidence.end()) {
      throw MeshInvalidError("facet " + std::to_string(f) + " is not an edge of the mesh");
    }
    if (it->second.size() != 1) {
      throw MeshInvalidError("facet " + std::to_string(f) + " lies on an interior edge");
    }
    if (!seen.insert(key).second) {
      throw MeshInvalidError("boundary edge tagged twice (facet " + std::to_string(f) + ")");
    }
    facet_cells_.push_back(it->second.front());
  }

  std::vector<int> degree(nv, 0);
  for (const auto& [key, users] : incidence) {
    if (users.size() == 1) {
      if (!seen.count(key)) {
        throw MeshInvalidError("untagged boundary edge (" + std::to_string(key[0]) + "," +
                               std::to_string(key[1]) + ")");
      }
      ++degree[key[0]];
      ++degree[key[1]];
    }
  }
  for (std::size_t v = 0; v < nv; ++v) {
    if (degree[v] % 2 != 0) {
      throw MeshInvalidError("boundary is not closed at vertex " + std::to_string(v));
    }
  }

  mesh_size_ = 0.0;
  for (const Cell& t : cells_) {
    for (int e = 0; e < 3; ++e) {
      mesh_size_ = std::max(mesh_size_, (vertices_[t[e]] - vertices_[t[(e + 1) % 3]]).norm());
    }
  }
}

std::size_t Mesh::edge_index(std::size_t a, std::size_t b) const {
  const EdgeKey key = make_key(a, b);
  auto it = std::lower_bound(edges_.begin(), edges_.end(), key);
  if (it == edges_.end() || *it != key) throw InvalidArgument("no such edge");
  return static_cast<std::size_t>(it - edges_.begin());
}

double Mesh::signed_area(std::size_t c) const {
  const Cell& t = cells_[c];
  const Point& a = vertices_[t[0]];
  const Point& b = vertices_[t[1]];
  const Point& d = vertices_[t[2]];
  return 0.5 * ((b.x() - a.x()) * (d.y() - a.y()) - (d.x() - a.x()) * (b.y() - a.y()));
}

double Mesh::area() const {
  double sum = 0.0;
  for (std::size_t c = 0; c < cells_.size(); ++c) sum += signed_area(c);
  return sum;
}

std::vector<int> Mesh::boundary_tags() const {
  std::set<int> t;
  for (const auto& f : facets_) t.insert(f.tag);
  return {t.begin(), t.end()};
}

std::map<int, std::size_t> Mesh::facet_tag_counts() const {
  std::map<int, std::size_t> counts;
  for (const auto& f : facets_) ++counts[f.tag];
  return counts;
}

bool operator==(const Mesh& a, const Mesh& b) {
  if (a.vertices_.size() != b.vertices_.size() || a.cells_ != b.cells_ ||
      a.facets_.size() != b.facets_.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.vertices_.size(); ++i) {
    if (a.vertices_[i] != b.vertices_[i]) return false;
  }
  for (std::size_t i = 0; i < a.facets_.size(); ++i) {
    if (a.facets_[i].vertices != b.facets_[i].vertices || a.facets_[i].tag != b.facets_[i].tag) {
      return false;
    }
  }
  return true;
}

Mesh generate_rectangle(double length, double height, int nx, int ny,
                        const RectangleTags& side_tags) {
  if (!(length > 0.0) || !(height > 0.0)) {
    throw InvalidArgument("rectangle dimensions must be positive");
  }
  if (nx < 1 || ny < 1) throw InvalidArgument("rectangle subdivisions must be >= 1");

  const auto id = [nx](int i, int j) { return static_cast<std::size_t>(j * (nx + 1) + i); };

  std::vector<Point> vertices;
  vertices.reserve(static_cast<std::size_t>((nx + 1) * (ny + 1)));
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      vertices.emplace_back(length * i / nx, height * j / ny);
    }
  }

  std::vector<Cell> cells;
  cells.reserve(static_cast<std::size_t>(2 * nx * ny));
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      cells.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      cells.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  }

  std::vector<BoundaryFacet> facets;
  for (int i = 0; i < nx; ++i) facets.push_back({{id(i, 0), id(i + 1, 0)}, side_tags.bottom});
  for (int j = 0; j < ny; ++j) facets.push_back({{id(nx, j), id(nx, j + 1)}, side_tags.right});
  for (int i = nx; i > 0; --i) facets.push_back({{id(i, ny), id(i - 1, ny)}, side_tags.top});
  for (int j = ny; j > 0; --j) facets.push_back({{id(0, j), id(0, j - 1)}, side_tags.left});

  const double spacing = std::max(length / nx, height / ny);
  return Mesh(std::move(vertices), std::move(cells), std::move(facets), spacing);
}

Mesh generate_unit_square(int n) {
  if (n < 1) throw InvalidArgument("generate_unit_square: n must be >= 1");
  return generate_rectangle(1.0, 1.0, n, n);
}

// ---------------------------------------------------------------------------
// ASCII format

namespace {

class LineReader {
 public:
  explicit LineReader(const std::string& text) : in_(text) {}

  // Next non-empty line with comments stripped; false at end of input.
  bool next(std::istringstream& out) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      out.clear();
      out.str(line);
      return true;
    }
    return false;
  }

  std::size_t line() const { return line_no_; }

 private:
  std::istringstream in_;
  std::size_t line_no_ = 0;
};

void expect_end(std::istringstream& ss, std::size_t line) {
  std::string extra;
  if (ss >> extra) throw MeshFormatError(line, "unexpected token '" + extra + "'");
}

std::size_t read_section_header(LineReader& reader, const std::string& keyword) {
  std::istringstream ss;
  if (!reader.next(ss)) throw MeshFormatError(reader.line(), "missing '" + keyword + "' section");
  std::string word;
  long long count = -1;
  if (!(ss >> word) || word != keyword || !(ss >> count) || count < 0) {
    throw MeshFormatError(reader.line(), "expected '" + keyword + " <count>'");
  }
  expect_end(ss, reader.line());
  return static_cast<std::size_t>(count);
}

}  // namespace

Mesh parse_mesh_ascii(const std::string& text) {
  LineReader reader(text);
  std::istringstream ss;

  if (!reader.next(ss)) throw MeshFormatError(reader.line(), "empty mesh file");
  std::string magic;
  int version = 0;
  if (!(ss >> magic >> version) || magic != "mhdmesh" || version != 1) {
    throw MeshFormatError(reader.line(), "expected header 'mhdmesh 1'");
  }
  expect_end(ss, reader.line());

  const std::size_t nv = read_section_header(reader, "vertices");
  std::vector<Point> vertices(nv);
  for (auto& p : vertices) {
    if (!reader.next(ss)) throw MeshFormatError(reader.line(), "truncated vertex list");
    double x = 0.0, y = 0.0;
    if (!(ss >> x >> y)) throw MeshFormatError(reader.line(), "expected 'x y'");
    expect_end(ss, reader.line());
    p = Point(x, y);
  }

  const auto read_index = [&](std::istringstream& s, std::size_t& out) {
    long long v = -1;
    if (!(s >> v) || v < 0) return false;
    out = static_cast<std::size_t>(v);
    return true;
  };

  const std::size_t nc = read_section_header(reader, "cells");
  std::vector<Cell> cells(nc);
  for (auto& c : cells) {
    if (!reader.next(ss)) throw MeshFormatError(reader.line(), "truncated cell list");
    if (!read_index(ss, c[0]) || !read_index(ss, c[1]) || !read_index(ss, c[2])) {
      throw MeshFormatError(reader.line(), "expected 'i j k' with nonnegative indices");
    }
    expect_end(ss, reader.line());
  }

  const std::size_t nf = read_section_header(reader, "facets");
  std::vector<BoundaryFacet> facets(nf);
  for (auto& f : facets) {
    if (!reader.next(ss)) throw MeshFormatError(reader.line(), "truncated facet list");
    if (!read_index(ss, f.vertices[0]) || !read_index(ss, f.vertices[1]) || !(ss >> f.tag)) {
      throw MeshFormatError(reader.line(), "expected 'i j tag'");
    }
    expect_end(ss, reader.line());
  }

  if (reader.next(ss)) throw MeshFormatError(reader.line(), "trailing content after facets");

  return Mesh(std::move(vertices), std::move(cells), std::move(facets));
}

Mesh read_mesh_ascii(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open mesh file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_mesh_ascii(buffer.str());
}

std::string format_mesh_ascii(const Mesh& mesh) {
  std::ostringstream out;
  out.precision(17);
  out << "mhdmesh 1\n";
  out << "vertices " << mesh.num_vertices() << '\n';
  for (const Point& p : mesh.vertices()) out << p.x() << ' ' << p.y() << '\n';
  out << "cells " << mesh.num_cells() << '\n';
  for (const Cell& c : mesh.cells()) out << c[0] << ' ' << c[1] << ' ' << c[2] << '\n';
  out << "facets " << mesh.facets().size() << '\n';
  for (const auto& f : mesh.facets()) {
    out << f.vertices[0] << ' ' << f.vertices[1] << ' ' << f.tag << '\n';
  }
  return out.str();
}

void write_mesh_ascii(const Mesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write mesh file " + path.string());
  out << format_mesh_ascii(mesh);
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace mhd
