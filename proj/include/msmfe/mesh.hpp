#pragma once

#include <algorithm>
#include <array>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include "msmfe/types.hpp"

namespace msmfe {

enum class FacetMarker { Interior, Dirichlet, Neumann };

/// Affine reference map F_E(rhat) = offset + jacobian * rhat of a simplex.
template <int dim>
struct AffineMap {
  Point<dim> offset;
  Tensor<dim> jacobian;          // columns r_{i+1} - r_1
  double det = 0.0;              // J_E = |det(DF_E)| = d! |E|
  Tensor<dim> inverse_transpose; // DF_E^{-T}

  Point<dim> map(const Point<dim>& ref) const { return offset + jacobian * ref; }
  Point<dim> pull_back(const Point<dim>& x) const {
    return inverse_transpose.transpose() * (x - offset);
  }
  double volume() const {
    double fact = (dim == 2) ? 2.0 : 6.0;
    return det / fact;
  }
};

/// Cells and facets incident to one mesh vertex, in ascending global order.
struct VertexStar {
  int vertex = -1;
  std::vector<int> cells;
  std::vector<int> facets;
};

/// Simplicial mesh on the unit square/cube (or imported geometry).
///
/// Facets store sorted global vertex indices and a globally fixed unit
/// normal, chosen as the outward normal of the first (lowest-index)
/// adjacent cell. Cell vertex orderings have positive Jacobian determinant.
template <int dim>
struct SimplicialMesh {
  static_assert(dim == 2 || dim == 3);
  static constexpr int n_cell_vertices = dim + 1;
  static constexpr int n_facet_vertices = dim;

  std::vector<Point<dim>> vertices;
  std::vector<std::array<int, dim + 1>> cells;
  std::vector<std::array<int, dim>> facets;   // sorted vertex indices
  std::vector<Point<dim>> facet_normals;      // outward w.r.t. facet_cells[f][0]
  std::vector<FacetMarker> facet_markers;
  std::vector<std::array<int, 2>> facet_cells;    // second entry -1 on boundary
  std::vector<std::array<int, dim + 1>> cell_facets;  // facet opposite local vertex a
  std::vector<std::vector<int>> vertex_cells;
  std::vector<std::vector<int>> vertex_facets;

  int n_vertices() const { return static_cast<int>(vertices.size()); }
  int n_cells() const { return static_cast<int>(cells.size()); }
  int n_facets() const { return static_cast<int>(facets.size()); }

  bool is_boundary(int facet) const { return facet_cells[facet][1] < 0; }

  /// Builds facet lists, adjacency, normals and markers from `vertices`/`cells`.
  /// All boundary facets are marked Dirichlet.
  void finalize() {
    std::map<std::array<int, dim>, int> facet_ids;
    facets.clear();
    facet_cells.clear();
    cell_facets.assign(cells.size(), {});
    for (int c = 0; c < n_cells(); ++c) {
      if (signed_det(c) <= 0.0)
        throw DegenerateGeometry("cell " + std::to_string(c) +
                                 " has non-positive Jacobian determinant");
      for (int a = 0; a <= dim; ++a) {
        std::array<int, dim> key;
        int k = 0;
        for (int b = 0; b <= dim; ++b)
          if (b != a) key[k++] = cells[c][b];
        std::sort(key.begin(), key.end());
        auto [it, inserted] = facet_ids.try_emplace(key, n_facets());
        if (inserted) {
          facets.push_back(key);
          facet_cells.push_back({c, -1});
        } else {
          auto& fc = facet_cells[it->second];
          if (fc[1] >= 0)
            throw ParseError("facet shared by more than two cells");
          fc[1] = c;
        }
        cell_facets[c][a] = it->second;
      }
    }
    facet_normals.resize(n_facets());
    facet_markers.assign(n_facets(), FacetMarker::Interior);
    for (int f = 0; f < n_facets(); ++f) {
      int c = facet_cells[f][0];
      int a = local_opposite_vertex(c, f);
      facet_normals[f] = outward_normal(c, a);
      if (is_boundary(f)) facet_markers[f] = FacetMarker::Dirichlet;
    }
    vertex_cells.assign(vertices.size(), {});
    vertex_facets.assign(vertices.size(), {});
    for (int c = 0; c < n_cells(); ++c)
      for (int v : cells[c]) vertex_cells[v].push_back(c);
    for (int f = 0; f < n_facets(); ++f)
      for (int v : facets[f]) vertex_facets[v].push_back(f);
    for (auto& l : vertex_cells) std::sort(l.begin(), l.end());
    for (auto& l : vertex_facets) std::sort(l.begin(), l.end());
  }

  double signed_det(int cell) const {
    Tensor<dim> J;
    for (int i = 0; i < dim; ++i)
      J.col(i) = vertices[cells[cell][i + 1]] - vertices[cells[cell][0]];
    return J.determinant();
  }

  /// Local index (within cell) of the vertex opposite facet f.
  int local_opposite_vertex(int cell, int facet) const {
    for (int a = 0; a <= dim; ++a) {
      bool in_facet = false;
      for (int v : facets[facet])
        if (v == cells[cell][a]) in_facet = true;
      if (!in_facet) return a;
    }
    throw InvalidArgument("facet does not belong to cell");
  }

  /// Outward unit normal of the facet of `cell` opposite local vertex a.
  Point<dim> outward_normal(int cell, int a) const {
    // grad of barycentric coordinate of a points from the opposite facet to a
    auto grads = barycentric_gradients(cell);
    Point<dim> n = -grads[a];
    return n / n.norm();
  }

  std::array<Point<dim>, dim + 1> barycentric_gradients(int cell) const {
    Tensor<dim> J;
    for (int i = 0; i < dim; ++i)
      J.col(i) = vertices[cells[cell][i + 1]] - vertices[cells[cell][0]];
    Tensor<dim> Jit = J.inverse().transpose();
    std::array<Point<dim>, dim + 1> g;
    g[0] = Point<dim>::Zero();
    for (int i = 0; i < dim; ++i) {
      g[i + 1] = Jit.col(i);
      g[0] -= Jit.col(i);
    }
    return g;
  }

  Point<dim> cell_centroid(int cell) const {
    Point<dim> c = Point<dim>::Zero();
    for (int v : cells[cell]) c += vertices[v];
    return c / (dim + 1);
  }

  Point<dim> facet_centroid(int facet) const {
    Point<dim> c = Point<dim>::Zero();
    for (int v : facets[facet]) c += vertices[v];
    return c / dim;
  }

  double facet_measure(int facet) const {
    if constexpr (dim == 2) {
      return (vertices[facets[facet][1]] - vertices[facets[facet][0]]).norm();
    } else {
      Point<3> e1 = vertices[facets[facet][1]] - vertices[facets[facet][0]];
      Point<3> e2 = vertices[facets[facet][2]] - vertices[facets[facet][0]];
      return 0.5 * e1.cross(e2).norm();
    }
  }
};

template <int dim>
AffineMap<dim> affine_map(const SimplicialMesh<dim>& mesh, int cell) {
  if (cell < 0 || cell >= mesh.n_cells()) throw InvalidArgument("affine_map: bad cell index");
  AffineMap<dim> m;
  m.offset = mesh.vertices[mesh.cells[cell][0]];
  for (int i = 0; i < dim; ++i)
    m.jacobian.col(i) = mesh.vertices[mesh.cells[cell][i + 1]] - m.offset;
  double sd = m.jacobian.determinant();
  if (std::abs(sd) < 1e-300)
    throw DegenerateGeometry("affine_map: degenerate cell " + std::to_string(cell));
  m.det = std::abs(sd);
  m.inverse_transpose = m.jacobian.inverse().transpose();
  return m;
}

template <int dim>
VertexStar vertex_star(const SimplicialMesh<dim>& mesh, int vertex) {
  if (vertex < 0 || vertex >= mesh.n_vertices())
    throw InvalidArgument("vertex_star: bad vertex index");
  VertexStar s;
  s.vertex = vertex;
  s.cells = mesh.vertex_cells[vertex];
  s.facets = mesh.vertex_facets[vertex];
  return s;
}

/// Structured triangulation of the unit square (one fixed positive-slope
/// diagonal per square) or unit cube (Kuhn split into 6 tetrahedra), n
/// cells per side, h = 1/n. All boundary facets are marked Dirichlet.
template <int dim>
SimplicialMesh<dim> generate_structured(int n) {
  if (n < 1) throw InvalidArgument("generate_structured: n must be >= 1");
  SimplicialMesh<dim> mesh;
  const double h = 1.0 / n;
  if constexpr (dim == 2) {
    auto vid = [n](int i, int j) { return j * (n + 1) + i; };
    for (int j = 0; j <= n; ++j)
      for (int i = 0; i <= n; ++i) mesh.vertices.push_back(Point<2>(i * h, j * h));
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        int v00 = vid(i, j), v10 = vid(i + 1, j);
        int v01 = vid(i, j + 1), v11 = vid(i + 1, j + 1);
        mesh.cells.push_back({v00, v10, v11});
        mesh.cells.push_back({v00, v11, v01});
      }
  } else {
    auto vid = [n](int i, int j, int k) { return (k * (n + 1) + j) * (n + 1) + i; };
    for (int k = 0; k <= n; ++k)
      for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i)
          mesh.vertices.push_back(Point<3>(i * h, j * h, k * h));
    const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                             {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    for (int k = 0; k < n; ++k)
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
          for (auto& p : perms) {
            std::array<int, 3> idx = {i, j, k};
            std::array<int, 4> tet;
            tet[0] = vid(idx[0], idx[1], idx[2]);
            for (int s = 0; s < 3; ++s) {
              idx[p[s]] += 1;
              tet[s + 1] = vid(idx[0], idx[1], idx[2]);
            }
            mesh.cells.push_back(tet);
          }
    // fix orientation where the permutation is odd
    for (auto& cell : mesh.cells) {
      Tensor<3> J;
      for (int i = 0; i < 3; ++i)
        J.col(i) = mesh.vertices[cell[i + 1]] - mesh.vertices[cell[0]];
      if (J.determinant() < 0) std::swap(cell[2], cell[3]);
    }
  }
  mesh.finalize();
  return mesh;
}

/// ASCII mesh import.  Format:
///   line 1: dim nv nc
///   nv lines: vertex coordinates
///   nc lines: cell vertex indices (0-based)
///   optional: "boundary v0 v1 [v2] <D|N>"
/// With fix_orientation, inverted cells are reordered; otherwise they fail
/// validation.
template <int dim>
SimplicialMesh<dim> import_ascii(const std::string& path, bool fix_orientation = false) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open mesh file: " + path);
  SimplicialMesh<dim> mesh;
  std::string line;
  int lineno = 0;
  auto next_line = [&](std::istringstream& iss) {
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty() || line[0] == '#') continue;
      iss.clear();
      iss.str(line);
      return true;
    }
    return false;
  };
  auto fail = [&](const std::string& msg) -> ParseError {
    return ParseError(path + ":" + std::to_string(lineno) + ": " + msg);
  };

  std::istringstream iss;
  if (!next_line(iss)) throw fail("missing header line");
  int file_dim = 0, nv = 0, nc = 0;
  if (!(iss >> file_dim >> nv >> nc)) throw fail("malformed header");
  if (file_dim != dim) throw fail("dimension mismatch");
  if (nv < dim + 1 || nc < 1) throw fail("bad vertex/cell counts");

  for (int v = 0; v < nv; ++v) {
    if (!next_line(iss)) throw fail("missing vertex line");
    Point<dim> p;
    for (int i = 0; i < dim; ++i)
      if (!(iss >> p(i))) throw fail("malformed vertex coordinates");
    mesh.vertices.push_back(p);
  }
  std::map<std::array<int, dim + 1>, int> seen;
  for (int c = 0; c < nc; ++c) {
    if (!next_line(iss)) throw fail("missing cell line");
    std::array<int, dim + 1> cell;
    for (int i = 0; i <= dim; ++i) {
      if (!(iss >> cell[i])) throw fail("malformed cell line");
      if (cell[i] < 0 || cell[i] >= nv) throw fail("cell vertex index out of range");
    }
    auto key = cell;
    std::sort(key.begin(), key.end());
    if (!seen.try_emplace(key, c).second) throw fail("repeated cell");
    Tensor<dim> J;
    for (int i = 0; i < dim; ++i)
      J.col(i) = mesh.vertices[cell[i + 1]] - mesh.vertices[cell[0]];
    if (J.determinant() <= 0) {
      if (!fix_orientation) throw fail("inverted cell (negative Jacobian)");
      std::swap(cell[dim - 1], cell[dim]);
    }
    mesh.cells.push_back(cell);
  }
  // boundary marker lines
  std::vector<std::pair<std::array<int, dim>, FacetMarker>> marks;
  while (next_line(iss)) {
    std::string kw;
    iss >> kw;
    if (kw != "boundary") throw fail("unexpected trailing line");
    std::array<int, dim> fv;
    for (int i = 0; i < dim; ++i)
      if (!(iss >> fv[i])) throw fail("malformed boundary line");
    std::string tag;
    if (!(iss >> tag) || (tag != "D" && tag != "N")) throw fail("boundary tag must be D or N");
    std::sort(fv.begin(), fv.end());
    marks.emplace_back(fv, tag == "D" ? FacetMarker::Dirichlet : FacetMarker::Neumann);
  }
  mesh.finalize();
  for (auto& [fv, marker] : marks) {
    auto it = std::find(mesh.facets.begin(), mesh.facets.end(), fv);
    if (it == mesh.facets.end())
      throw ParseError(path + ": boundary marker references unknown facet");
    int f = static_cast<int>(it - mesh.facets.begin());
    if (!mesh.is_boundary(f))
      throw ParseError(path + ": boundary marker on interior facet");
    mesh.facet_markers[f] = marker;
  }
  return mesh;
}

}  // namespace msmfe
