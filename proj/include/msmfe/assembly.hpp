#pragma once

#include <Eigen/SparseCore>
#include <optional>
#include <vector>

#include "msmfe/fem_spaces.hpp"
#include "msmfe/problems.hpp"
#include "msmfe/quadrature.hpp"

namespace msmfe {

using SpMat = Eigen::SparseMatrix<double>;

/// Piecewise-constant material, sampled at cell centroids.
template <int dim>
struct MaterialField {
  std::vector<IsotropicMaterial<dim>> cell;

  static MaterialField sample(const SimplicialMesh<dim>& mesh,
                              const ElasticityProblem<dim>& prob) {
    MaterialField mf;
    mf.cell.reserve(mesh.n_cells());
    for (int c = 0; c < mesh.n_cells(); ++c)
      mf.cell.push_back(prob.material(mesh.cell_centroid(c)));
    return mf;
  }
};

/// Stress mass matrix under the vertex quadrature rule: block diagonal with
/// one block per mesh vertex, coupling only the stress DOFs living there.
/// Each block stores the full (free + essential) coupling plus the explicit
/// inverse of its free-DOF restriction.
template <int dim>
struct VertexBlockMatrix {
  struct Block {
    std::vector<int> dofs;      // global stress DOFs at this vertex (sorted)
    std::vector<int> free_pos;  // positions within `dofs` of the free ones
    MatrixX full;               // coupling over all dofs at the vertex
    MatrixX inv;                // inverse of the free-free submatrix
  };

  int n_dofs = 0;
  std::vector<Block> blocks;              // one per mesh vertex
  std::vector<int> dof_vertex, dof_local; // global dof -> (vertex, index in dofs)

  /// y = A x over all DOFs (used for essential-value corrections and tests).
  VectorX multiply_full(const VectorX& x) const {
    VectorX y = VectorX::Zero(n_dofs);
    for (const auto& b : blocks) {
      const int m = static_cast<int>(b.dofs.size());
      VectorX xl(m);
      for (int i = 0; i < m; ++i) xl(i) = x(b.dofs[i]);
      VectorX yl = b.full * xl;
      for (int i = 0; i < m; ++i) y(b.dofs[i]) += yl(i);
    }
    return y;
  }

  /// y = A_ff^{-1} x restricted to free DOFs; essential entries of y are 0.
  void apply_inverse(const VectorX& x, VectorX& y) const {
    y.setZero(n_dofs);
    for (const auto& b : blocks) {
      const int m = static_cast<int>(b.free_pos.size());
      if (m == 0) continue;
      VectorX xl(m);
      for (int i = 0; i < m; ++i) xl(i) = x(b.dofs[b.free_pos[i]]);
      VectorX yl = b.inv * xl;
      for (int i = 0; i < m; ++i) y(b.dofs[b.free_pos[i]]) = yl(i);
    }
  }
};

/// Assemble the vertex-quadrature stress mass matrix (A sigma, tau)_Q.
/// The quadrature localizes the coupling to shared vertices, which is what
/// makes the per-vertex stress elimination possible.
template <int dim>
VertexBlockMatrix<dim> assemble_stress_mass(const SimplicialMesh<dim>& mesh,
                                            const std::vector<CellStressBasis<dim>>& cache,
                                            const StressDofMap<dim>& dofs,
                                            const MaterialField<dim>& material) {
  VertexBlockMatrix<dim> A;
  A.n_dofs = dofs.n_dofs;
  A.blocks.resize(mesh.n_vertices());
  A.dof_vertex.assign(dofs.n_dofs, -1);
  A.dof_local.assign(dofs.n_dofs, -1);

  for (int v = 0; v < mesh.n_vertices(); ++v) {
    auto& b = A.blocks[v];
    for (int f : mesh.vertex_facets[v]) {
      int s = StressDofMap<dim>::template slot_in_facet(mesh, f, v);
      for (int r = 0; r < dim; ++r) b.dofs.push_back(dofs.dof(f, s, r));
    }
    std::sort(b.dofs.begin(), b.dofs.end());
    const int m = static_cast<int>(b.dofs.size());
    b.full = MatrixX::Zero(m, m);
    for (int i = 0; i < m; ++i) {
      A.dof_vertex[b.dofs[i]] = v;
      A.dof_local[b.dofs[i]] = i;
    }
  }

  const double s = dim + 1;
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const auto& basis = cache[c];
    const auto& mat = material.cell[c];
    const double w = basis.volume / s;
    for (int a = 0; a <= dim; ++a) {
      const int v = mesh.cells[c][a];
      auto& b = A.blocks[v];
      // pairs of stress basis functions with a vertex value at v
      for (int j = 0; j < dim; ++j)
        for (int r = 0; r < dim; ++r) {
          const int dj = dofs.dof(basis.facet_id[a][j], basis.facet_slot[a][j], r);
          Tensor<dim> phi_j = Tensor<dim>::Zero();
          phi_j.row(r) = basis.coeff[a][j].transpose();
          Tensor<dim> Aphi = mat.apply(phi_j);
          for (int k = 0; k < dim; ++k) {
            const Point<dim>& ck = basis.coeff[a][k];
            for (int q = 0; q < dim; ++q) {
              const int dk = dofs.dof(basis.facet_id[a][k], basis.facet_slot[a][k], q);
              // (A phi_j) : phi_k with phi_k = e_q ck^T
              b.full(A.dof_local[dk], A.dof_local[dj]) += w * Aphi.row(q).dot(ck);
            }
          }
        }
    }
  }

  for (int v = 0; v < mesh.n_vertices(); ++v) {
    auto& b = A.blocks[v];
    const int m = static_cast<int>(b.dofs.size());
    for (int i = 0; i < m; ++i)
      if (!dofs.essential[b.dofs[i]]) b.free_pos.push_back(i);
    const int mf = static_cast<int>(b.free_pos.size());
    if (mf == 0) continue;
    MatrixX F(mf, mf);
    for (int i = 0; i < mf; ++i)
      for (int j = 0; j < mf; ++j) F(i, j) = b.full(b.free_pos[i], b.free_pos[j]);
    Eigen::LLT<MatrixX> llt(F);
    if (llt.info() == Eigen::Success) {
      b.inv = llt.solve(MatrixX::Identity(mf, mf));
    } else {
      Eigen::LDLT<MatrixX> ldlt(F);
      if (ldlt.info() != Eigen::Success || ldlt.vectorD().minCoeff() <= 0.0)
        throw SolverError("stress mass block at vertex " + std::to_string(v) +
                          " is not positive definite");
      b.inv = ldlt.solve(MatrixX::Identity(mf, mf));
    }
  }
  return A;
}

/// Divergence coupling B_u with rows = displacement DOFs (dim per cell),
/// columns = stress DOFs: (div tau, v).
template <int dim>
SpMat assemble_divergence(const SimplicialMesh<dim>& mesh,
                          const std::vector<CellStressBasis<dim>>& cache,
                          const StressDofMap<dim>& dofs) {
  std::vector<Eigen::Triplet<double>> trip;
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const auto& basis = cache[c];
    for (int a = 0; a <= dim; ++a)
      for (int j = 0; j < dim; ++j)
        for (int r = 0; r < dim; ++r)
          trip.emplace_back(c * dim + r,
                            dofs.dof(basis.facet_id[a][j], basis.facet_slot[a][j], r),
                            basis.volume * basis.div[a][j]);
  }
  SpMat B(dim * mesh.n_cells(), dofs.n_dofs);
  B.setFromTriplets(trip.begin(), trip.end());
  return B;
}

enum class RotationCoupling {
  Exact,                  // P0 rotations, exact integration
  VertexQuadrature,       // P1 rotations, vertex rule: (as tau, q)_Q
  ScaledVertexQuadrature  // P1 rotations, vertex rule: (as(A tau), q)_Q
};

inline RotationCoupling rotation_coupling(Method m) {
  switch (m) {
    case Method::Msmfe1: return RotationCoupling::VertexQuadrature;
    case Method::Msmfe1Scaled: return RotationCoupling::ScaledVertexQuadrature;
    default: return RotationCoupling::Exact;
  }
}

/// Rotation coupling B_g with rows = rotation DOFs, columns = stress DOFs.
/// In the vertex-quadrature modes a rotation DOF at vertex v couples only
/// the stress DOFs at v, so this block is also vertex-local.
template <int dim>
SpMat assemble_rotation_coupling(const SimplicialMesh<dim>& mesh,
                                 const std::vector<CellStressBasis<dim>>& cache,
                                 const StressDofMap<dim>& dofs,
                                 const MaterialField<dim>& material,
                                 const RotationLayout& layout, RotationCoupling mode) {
  const int rd = rotation_components(dim);
  if ((mode == RotationCoupling::Exact) != (layout.variant == RotationVariant::P0PerCell))
    throw InvalidArgument("rotation coupling mode does not match rotation layout");
  std::vector<Eigen::Triplet<double>> trip;
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const auto& basis = cache[c];
    for (int a = 0; a <= dim; ++a) {
      const int v = mesh.cells[c][a];
      for (int j = 0; j < dim; ++j)
        for (int r = 0; r < dim; ++r) {
          const int col = dofs.dof(basis.facet_id[a][j], basis.facet_slot[a][j], r);
          Tensor<dim> phi = Tensor<dim>::Zero();
          phi.row(r) = basis.coeff[a][j].transpose();
          if (mode == RotationCoupling::Exact) {
            RotVec<dim> as = asym<dim>(phi);
            const double w = basis.volume / (dim + 1);  // integral of lambda_a
            for (int m = 0; m < rd; ++m)
              if (as(m) != 0.0) trip.emplace_back(c * rd + m, col, w * as(m));
          } else {
            Tensor<dim> t =
                (mode == RotationCoupling::ScaledVertexQuadrature) ? material.cell[c].apply(phi)
                                                                   : phi;
            RotVec<dim> as = asym<dim>(t);
            const double w = basis.volume / (dim + 1);  // vertex rule weight
            for (int m = 0; m < rd; ++m)
              if (as(m) != 0.0) trip.emplace_back(v * rd + m, col, w * as(m));
          }
        }
    }
  }
  SpMat B(layout.n_dofs, dofs.n_dofs);
  B.setFromTriplets(trip.begin(), trip.end());
  return B;
}

/// Integrate a callback over a facet with a Gauss rule of given degree.
/// The callback receives the physical point and the barycentric coordinates
/// w.r.t. the facet's sorted vertex list.
template <int dim, class F>
void integrate_facet(const SimplicialMesh<dim>& mesh, int facet, int degree, F&& fn) {
  static_assert(dim == 2 || dim == 3);
  const auto rule = gauss_rule<dim - 1>(degree);
  const auto& verts = mesh.facets[facet];
  const Point<dim>& p0 = mesh.vertices[verts[0]];
  const double ref_measure = (dim == 2) ? 1.0 : 0.5;
  const double scale = mesh.facet_measure(facet) / ref_measure;
  for (int q = 0; q < rule.size(); ++q) {
    Point<dim> x = p0;
    for (int i = 0; i < dim - 1; ++i)
      x += rule.points[q](i) * (mesh.vertices[verts[i + 1]] - p0);
    auto lambda = barycentric<dim - 1>(rule.points[q]);
    fn(x, lambda, rule.weights[q] * scale);
  }
}

/// Right-hand sides of the saddle system (before stress elimination), with
/// essential (Neumann traction) values folded in symmetrically.
template <int dim>
struct SystemRhs {
  VectorX b_sigma;  // boundary term <g, tau n>_Gamma_D minus essential correction
  VectorX b_u;      // (f, v) minus essential correction
  VectorX b_g;      // zero minus essential correction
  VectorX x_ess;    // essential stress values (zero on free DOFs)
};

template <int dim>
SystemRhs<dim> assemble_rhs(const SimplicialMesh<dim>& mesh,
                            const std::vector<CellStressBasis<dim>>& cache,
                            StressDofMap<dim>& dofs, const VertexBlockMatrix<dim>& Amass,
                            const SpMat& Bu, const SpMat& Bg,
                            const ElasticityProblem<dim>& prob) {
  SystemRhs<dim> rhs;
  rhs.b_sigma = VectorX::Zero(dofs.n_dofs);
  rhs.b_u = VectorX::Zero(Bu.rows());
  rhs.b_g = VectorX::Zero(Bg.rows());
  rhs.x_ess = VectorX::Zero(dofs.n_dofs);

  // Dirichlet boundary term: b_sigma(f, a, r) = int_f g_r lambda_a
  for (int f = 0; f < mesh.n_facets(); ++f) {
    if (mesh.facet_markers[f] != FacetMarker::Dirichlet) continue;
    integrate_facet<dim>(mesh, f, 5, [&](const Point<dim>& x, const auto& lambda, double w) {
      Point<dim> g = prob.dirichlet(x);
      for (int s = 0; s < dim; ++s)
        for (int r = 0; r < dim; ++r) rhs.b_sigma(dofs.dof(f, s, r)) += w * lambda(s) * g(r);
    });
  }

  // body force: b_u(c, r) = int_E f_r
  const auto cell_rule = gauss_rule<dim>(5);
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const auto& map = cache[c].map;
    for (int q = 0; q < cell_rule.size(); ++q) {
      Point<dim> x = map.map(cell_rule.points[q]);
      Point<dim> fval = prob.body_force(x);
      const double w = cell_rule.weights[q] * map.det;
      for (int r = 0; r < dim; ++r) rhs.b_u(c * dim + r) += w * fval(r);
    }
  }

  // essential (traction) values on Neumann facets: (sigma n_f)_r at vertices
  bool any_ess = false;
  for (int f = 0; f < mesh.n_facets(); ++f) {
    if (mesh.facet_markers[f] != FacetMarker::Neumann) continue;
    if (!prob.traction) throw ConfigError("Neumann facet present but no traction given");
    any_ess = true;
    for (int s = 0; s < dim; ++s) {
      Point<dim> t = prob.traction(mesh.vertices[mesh.facets[f][s]]);
      for (int r = 0; r < dim; ++r) {
        const int d = dofs.dof(f, s, r);
        dofs.essential_value[d] = t(r);
        rhs.x_ess(d) = t(r);
      }
    }
  }

  if (any_ess) {
    rhs.b_sigma -= Amass.multiply_full(rhs.x_ess);
    rhs.b_u -= Bu * rhs.x_ess;
    rhs.b_g -= Bg * rhs.x_ess;
    for (int d = 0; d < dofs.n_dofs; ++d)
      if (dofs.essential[d]) rhs.b_sigma(d) = 0.0;
  }
  return rhs;
}

}  // namespace msmfe
