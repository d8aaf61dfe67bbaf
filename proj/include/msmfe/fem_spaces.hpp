#pragma once

#include <array>
#include <vector>

#include "msmfe/mesh.hpp"
#include "msmfe/operators.hpp"
#include "msmfe/quadrature.hpp"

namespace msmfe {

enum class Method { Msmfe0, Msmfe1, Msmfe1Scaled, SaddleOracle };

inline const char* method_name(Method m) {
  switch (m) {
    case Method::Msmfe0: return "msmfe0";
    case Method::Msmfe1: return "msmfe1";
    case Method::Msmfe1Scaled: return "msmfe1-scaled";
    case Method::SaddleOracle: return "saddle-oracle";
  }
  return "?";
}

enum class RotationVariant { P0PerCell, P1PerVertex };

inline RotationVariant rotation_variant(Method m) {
  return (m == Method::Msmfe0 || m == Method::SaddleOracle) ? RotationVariant::P0PerCell
                                                            : RotationVariant::P1PerVertex;
}

/// Global numbering of (BDM1)^d stress degrees of freedom.
///
/// One DOF per (facet, facet-vertex, row): the value of (sigma n_f)_row at
/// that vertex, with n_f the globally fixed facet normal. Both cells sharing
/// a facet reference the same DOF, so normal traces are continuous by
/// construction. DOFs on Neumann facets are flagged essential.
template <int dim>
struct StressDofMap {
  int n_facets = 0;
  int n_dofs = 0;
  std::vector<char> essential;    // per dof
  std::vector<double> essential_value;

  static constexpr int dofs_per_facet = dim * dim;

  int dof(int facet, int slot, int row) const { return (facet * dim + slot) * dim + row; }

  int facet_of(int d) const { return d / (dim * dim); }
  int slot_of(int d) const { return (d / dim) % dim; }
  int row_of(int d) const { return d % dim; }

  /// Position of global vertex v within facet f's sorted vertex list.
  template <class Mesh>
  static int slot_in_facet(const Mesh& mesh, int facet, int v) {
    for (int s = 0; s < dim; ++s)
      if (mesh.facets[facet][s] == v) return s;
    throw InvalidArgument("vertex not on facet");
  }
};

/// Layout of the reduced rotation unknown p = Xi^{-1}(gamma).
struct RotationLayout {
  RotationVariant variant = RotationVariant::P0PerCell;
  int n_dofs = 0;
};

template <int dim>
struct DofMaps {
  StressDofMap<dim> stress;
  int n_displacement = 0;  // dim per cell
  RotationLayout rotation;
};

template <int dim>
DofMaps<dim> build_dof_maps(const SimplicialMesh<dim>& mesh, Method method) {
  DofMaps<dim> maps;
  maps.stress.n_facets = mesh.n_facets();
  maps.stress.n_dofs = dim * dim * mesh.n_facets();
  maps.stress.essential.assign(maps.stress.n_dofs, 0);
  maps.stress.essential_value.assign(maps.stress.n_dofs, 0.0);
  for (int f = 0; f < mesh.n_facets(); ++f)
    if (mesh.facet_markers[f] == FacetMarker::Neumann)
      for (int s = 0; s < dim; ++s)
        for (int r = 0; r < dim; ++r) maps.stress.essential[maps.stress.dof(f, s, r)] = 1;
  maps.n_displacement = dim * mesh.n_cells();
  maps.rotation.variant = rotation_variant(method);
  const int rd = rotation_components(dim);
  maps.rotation.n_dofs = rd * (maps.rotation.variant == RotationVariant::P0PerCell
                                   ? mesh.n_cells()
                                   : mesh.n_vertices());
  return maps;
}

/// Reconstruct the d x d tensor chi with chi n_j = v_j from its normal
/// components w.r.t. d linearly independent facet normals.
template <int dim>
Tensor<dim> vertex_tensor(const Tensor<dim>& normals_rows, const Tensor<dim>& values_cols) {
  Eigen::FullPivLU<Tensor<dim>> lu(normals_rows);
  if (!lu.isInvertible())
    throw DegenerateGeometry("vertex_tensor: facet normals are linearly dependent");
  // chi N^T = V  =>  chi^T = N^{-1} V^T
  return lu.solve(values_cols.transpose()).transpose();
}

/// Per-cell vector BDM1 basis in physical coordinates.
///
/// The basis function for DOF (facet f, vertex a, row r) is the matrix field
/// with row r equal to z_{f,a}(x) = lambda_a(x) c_{f,a} and the other rows
/// zero, where c_{f,a} solves n_{f'} . c = delta_{f f'} over the d facets
/// f' of the cell containing a (global facet normals, so shared DOFs agree
/// across cells). div z_{f,a} = grad(lambda_a) . c_{f,a} is constant.
template <int dim>
struct CellStressBasis {
  int cell = -1;
  AffineMap<dim> map;
  double volume = 0.0;
  std::array<Point<dim>, dim + 1> bary_grad;
  // per local vertex a: the d facets of the cell containing a
  std::array<std::array<int, dim>, dim + 1> facet_id;     // global facet index
  std::array<std::array<int, dim>, dim + 1> facet_slot;   // slot of vertex a on that facet
  std::array<std::array<Point<dim>, dim>, dim + 1> coeff; // c_{f,a}
  std::array<std::array<double, dim>, dim + 1> div;       // grad(lambda_a) . c_{f,a}

  CellStressBasis() = default;

  CellStressBasis(const SimplicialMesh<dim>& mesh, int c) : cell(c) {
    map = affine_map(mesh, c);
    volume = map.volume();
    bary_grad = mesh.barycentric_gradients(c);
    for (int a = 0; a <= dim; ++a) {
      Tensor<dim> N;  // rows: global normals of the facets containing vertex a
      int j = 0;
      for (int b = 0; b <= dim; ++b) {
        if (b == a) continue;
        int f = mesh.cell_facets[c][b];
        facet_id[a][j] = f;
        facet_slot[a][j] =
            StressDofMap<dim>::template slot_in_facet(mesh, f, mesh.cells[c][a]);
        N.row(j) = mesh.facet_normals[f].transpose();
        ++j;
      }
      Eigen::FullPivLU<Tensor<dim>> lu(N);
      if (!lu.isInvertible())
        throw DegenerateGeometry("stress basis: dependent facet normals at cell " +
                                 std::to_string(c));
      Tensor<dim> C = lu.solve(Tensor<dim>::Identity());  // columns c_j
      for (int k = 0; k < dim; ++k) {
        coeff[a][k] = C.col(k);
        div[a][k] = bary_grad[a].dot(C.col(k));
      }
    }
  }

  /// Value of the discrete stress at cell vertex a given global coefficients.
  Tensor<dim> stress_at_vertex(const StressDofMap<dim>& dofs, const VectorX& sigma,
                               int a) const {
    Tensor<dim> t = Tensor<dim>::Zero();
    for (int j = 0; j < dim; ++j)
      for (int r = 0; r < dim; ++r)
        t.row(r) += sigma(dofs.dof(facet_id[a][j], facet_slot[a][j], r)) *
                    coeff[a][j].transpose();
    return t;
  }

  /// Discrete stress at an arbitrary reference point (P1 interpolation of
  /// the vertex tensors).
  Tensor<dim> stress_at(const StressDofMap<dim>& dofs, const VectorX& sigma,
                        const Point<dim>& ref) const {
    auto lambda = barycentric<dim>(ref);
    Tensor<dim> t = Tensor<dim>::Zero();
    for (int a = 0; a <= dim; ++a)
      if (std::abs(lambda(a)) > 0.0) t += lambda(a) * stress_at_vertex(dofs, sigma, a);
    return t;
  }

  /// Constant per-cell divergence (one row per displacement component).
  Point<dim> stress_divergence(const StressDofMap<dim>& dofs, const VectorX& sigma) const {
    Point<dim> d = Point<dim>::Zero();
    for (int a = 0; a <= dim; ++a)
      for (int j = 0; j < dim; ++j)
        for (int r = 0; r < dim; ++r)
          d(r) += sigma(dofs.dof(facet_id[a][j], facet_slot[a][j], r)) * div[a][j];
    return d;
  }
};

template <int dim>
std::vector<CellStressBasis<dim>> build_basis_cache(const SimplicialMesh<dim>& mesh) {
  std::vector<CellStressBasis<dim>> cache;
  cache.reserve(mesh.n_cells());
  for (int c = 0; c < mesh.n_cells(); ++c) cache.emplace_back(mesh, c);
  return cache;
}

/// One stress basis function on the reference element, and its row-wise
/// Piola image on a physical cell.
template <int dim>
struct StressBasisValue {
  Tensor<dim> value;      // d x d tensor at the evaluation point
  Point<dim> divergence;  // constant divergence (row vector per component)
  int vertex = -1;        // associated reference vertex
  int row = -1;
};

/// Evaluate all reference stress basis functions mapped through the row-wise
/// Piola transform tau^T = (1/J) DF tauhat^T at a reference point.
template <int dim>
std::vector<StressBasisValue<dim>> eval_stress_basis(const AffineMap<dim>& map,
                                                     const Point<dim>& ref_point) {
  // reference basis from a one-cell mesh of the reference simplex
  static const auto ref = [] {
    SimplicialMesh<dim> m;
    m.vertices.push_back(Point<dim>::Zero());
    for (int i = 0; i < dim; ++i) m.vertices.push_back(Point<dim>::Unit(i));
    std::array<int, dim + 1> cell;
    for (int i = 0; i <= dim; ++i) cell[i] = i;
    m.cells.push_back(cell);
    m.finalize();
    return CellStressBasis<dim>(m, 0);
  }();

  auto lambda = barycentric<dim>(ref_point);
  std::vector<StressBasisValue<dim>> out;
  for (int a = 0; a <= dim; ++a)
    for (int j = 0; j < dim; ++j)
      for (int r = 0; r < dim; ++r) {
        StressBasisValue<dim> b;
        b.vertex = a;
        b.row = r;
        Point<dim> zhat = lambda(a) * ref.coeff[a][j];
        Point<dim> z = (1.0 / map.det) * map.jacobian * zhat;
        b.value = Tensor<dim>::Zero();
        b.value.row(r) = z.transpose();
        b.divergence = Point<dim>::Zero();
        b.divergence(r) = ref.div[a][j] / map.det;
        out.push_back(b);
      }
  return out;
}

}  // namespace msmfe
