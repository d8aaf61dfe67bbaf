#pragma once

#include <Eigen/SparseLU>
#include <map>

#include "msmfe/assembly.hpp"
#include "msmfe/solver.hpp"

namespace msmfe {

/// Cell-centered SPD system obtained by eliminating the stress (and, for the
/// P1-rotation methods, the rotation) unknowns vertex by vertex. The operator
/// is applied matrix-free through the sparse couplings and the per-vertex
/// inverse mass blocks.
template <int dim>
struct CondensedSystem {
  const VertexBlockMatrix<dim>* Ainv = nullptr;
  const SpMat* Bu = nullptr;
  const SpMat* Bg = nullptr;
  bool rotation_eliminated = false;
  std::vector<MatrixX> Cinv;  // per vertex, only when rotation_eliminated
  VectorX rhs;                // condensed right-hand side ((u) or (u, g))
  int n_u = 0, n_g = 0;

  int size() const { return rotation_eliminated ? n_u : n_u + n_g; }

  /// q = C^{-1} w applied blockwise (rotation Schur complement per vertex).
  void apply_cinv(const VectorX& w, VectorX& q) const {
    const int rd = rotation_components(dim);
    q.resize(w.size());
    for (size_t v = 0; v < Cinv.size(); ++v)
      q.segment(v * rd, rd) = Cinv[v] * w.segment(v * rd, rd);
  }

  void apply(const VectorX& x, VectorX& y) const {
    VectorX t, s;
    if (!rotation_eliminated) {
      t = Bu->transpose() * x.head(n_u) + Bg->transpose() * x.tail(n_g);
      Ainv->apply_inverse(t, s);
      y.resize(n_u + n_g);
      y.head(n_u) = (*Bu) * s;
      y.tail(n_g) = (*Bg) * s;
    } else {
      t = Bu->transpose() * x;
      Ainv->apply_inverse(t, s);
      VectorX w = (*Bg) * s, q;
      apply_cinv(w, q);
      VectorX t2 = t - Bg->transpose() * q, s2;
      Ainv->apply_inverse(t2, s2);
      y = (*Bu) * s2;
    }
  }

  /// Jacobi diagonal, computed exactly from the vertex-local structure.
  VectorX jacobi_diagonal() const {
    VectorX diag = VectorX::Zero(size());
    const int rd = rotation_components(dim);
    using SpMatR = Eigen::SparseMatrix<double, Eigen::RowMajor>;
    const SpMatR BuR(*Bu);
    const SpMatR BgR(*Bg);
    auto row_diag = [&](const SpMatR& B, int row) {
      // group the row's nonzeros by vertex, then sum local Schur quadratic forms
      std::map<int, std::vector<std::pair<int, double>>> by_vertex;  // vertex -> (dof, val)
      for (SpMatR::InnerIterator it(B, row); it; ++it) {
        const int d = static_cast<int>(it.index());
        const int v = Ainv->dof_vertex[d];
        by_vertex[v].emplace_back(d, it.value());
      }
      double val = 0.0;
      for (auto& [v, entries] : by_vertex) {
        const auto& blk = Ainv->blocks[v];
        const int mf = static_cast<int>(blk.free_pos.size());
        if (mf == 0) continue;
        VectorX a = VectorX::Zero(mf);
        for (auto& [d, coef] : entries) {
          const int loc = Ainv->dof_local[d];
          for (int i = 0; i < mf; ++i)
            if (blk.free_pos[i] == loc) {
              a(i) = coef;
              break;
            }
        }
        VectorX t = blk.inv * a;
        val += a.dot(t);
        if (rotation_eliminated) {
          // w = Bg_v (restricted to this vertex's free dofs) * t
          VectorX w = VectorX::Zero(rd);
          for (int i = 0; i < mf; ++i) {
            const int d = blk.dofs[blk.free_pos[i]];
            for (typename SpMat::InnerIterator jt(*Bg, d); jt; ++jt) {
              const int grow = static_cast<int>(jt.index());
              if (grow / rd == v) w(grow % rd) += jt.value() * t(i);
            }
          }
          val -= w.dot(Cinv[v] * w);
        }
      }
      return val;
    };
    for (int i = 0; i < n_u; ++i) diag(i) = row_diag(BuR, i);
    if (!rotation_eliminated)
      for (int i = 0; i < n_g; ++i) diag(n_u + i) = row_diag(BgR, i);
    return diag;
  }

  /// Explicit dense matrix (small problems / tests only).
  MatrixX dense_matrix(int max_size = 20000) const {
    if (size() > max_size) throw InvalidArgument("dense_matrix: system too large");
    MatrixX M(size(), size());
    VectorX e = VectorX::Zero(size()), col;
    for (int j = 0; j < size(); ++j) {
      e(j) = 1.0;
      apply(e, col);
      M.col(j) = col;
      e(j) = 0.0;
    }
    return M;
  }
};

/// Build the condensed system. For the P0-rotation method the condensed
/// unknown is (u, p) jointly; for the P1-rotation methods the per-vertex
/// rotation Schur blocks C_v = Bg_v A_v^{-1} Bg_v^T are inverted as well,
/// leaving a displacement-only system.
template <int dim>
CondensedSystem<dim> condense(const SimplicialMesh<dim>& mesh, Method method,
                              const VertexBlockMatrix<dim>& Amass, const SpMat& Bu,
                              const SpMat& Bg, const SystemRhs<dim>& rhs) {
  CondensedSystem<dim> sys;
  sys.Ainv = &Amass;
  sys.Bu = &Bu;
  sys.Bg = &Bg;
  sys.n_u = static_cast<int>(Bu.rows());
  sys.n_g = static_cast<int>(Bg.rows());
  sys.rotation_eliminated =
      (method == Method::Msmfe1 || method == Method::Msmfe1Scaled);

  VectorX s;
  Amass.apply_inverse(rhs.b_sigma, s);
  if (!sys.rotation_eliminated) {
    sys.rhs.resize(sys.n_u + sys.n_g);
    sys.rhs.head(sys.n_u) = Bu * s - rhs.b_u;
    sys.rhs.tail(sys.n_g) = Bg * s - rhs.b_g;
    return sys;
  }

  const int rd = rotation_components(dim);
  if (sys.n_g != rd * mesh.n_vertices())
    throw InvalidArgument("condense: rotation layout is not one DOF set per vertex");
  sys.Cinv.resize(mesh.n_vertices());
  for (int v = 0; v < mesh.n_vertices(); ++v) {
    const auto& blk = Amass.blocks[v];
    const int mf = static_cast<int>(blk.free_pos.size());
    MatrixX Bgv = MatrixX::Zero(rd, mf);  // rotation rows of v against its free stress dofs
    for (int i = 0; i < mf; ++i) {
      const int d = blk.dofs[blk.free_pos[i]];
      for (typename SpMat::InnerIterator jt(Bg, d); jt; ++jt) {
        const int row = static_cast<int>(jt.index());
        if (row / rd != v)
          throw SolverError("condense: rotation coupling is not vertex-local");
        Bgv(row % rd, i) = jt.value();
      }
    }
    MatrixX C = Bgv * blk.inv * Bgv.transpose();
    Eigen::LDLT<MatrixX> ldlt(C);
    if (ldlt.info() != Eigen::Success || ldlt.vectorD().minCoeff() <= 0.0)
      throw SolverError("condense: rotation Schur block at vertex " + std::to_string(v) +
                        " is not positive definite");
    sys.Cinv[v] = ldlt.solve(MatrixX::Identity(rd, rd));
  }

  VectorX w = Bg * s - rhs.b_g, q;
  sys.apply_cinv(w, q);
  VectorX t2 = Bg.transpose() * q, s2;
  Amass.apply_inverse(t2, s2);
  sys.rhs = Bu * s - rhs.b_u - Bu * s2;
  return sys;
}

template <int dim>
struct Solution {
  VectorX sigma;  // stress coefficients (essential values included)
  VectorX u;      // cell displacements
  VectorX rot;    // rotation coefficients (per cell or per vertex)
  SolveReport report;
};

/// Back-substitute stress (and rotation, if eliminated) from the condensed
/// solution.
template <int dim>
Solution<dim> recover_fields(const CondensedSystem<dim>& sys, const SystemRhs<dim>& rhs,
                             const VectorX& x) {
  Solution<dim> sol;
  sol.u = x.head(sys.n_u);
  if (!sys.rotation_eliminated) {
    sol.rot = x.tail(sys.n_g);
  } else {
    VectorX t = rhs.b_sigma - sys.Bu->transpose() * sol.u, s;
    sys.Ainv->apply_inverse(t, s);
    VectorX w = (*sys.Bg) * s - rhs.b_g;
    sys.apply_cinv(w, sol.rot);
  }
  VectorX t = rhs.b_sigma - sys.Bu->transpose() * sol.u - sys.Bg->transpose() * sol.rot;
  sys.Ainv->apply_inverse(t, sol.sigma);
  sol.sigma += rhs.x_ess;
  return sol;
}

/// Reference solver: assemble the full saddle-point system over the free
/// stress DOFs and solve it with a sparse direct factorization. Intended for
/// cross-checking the condensed path on small problems.
template <int dim>
Solution<dim> solve_saddle_direct(const VertexBlockMatrix<dim>& Amass,
                                  const StressDofMap<dim>& dofs, const SpMat& Bu,
                                  const SpMat& Bg, const SystemRhs<dim>& rhs,
                                  int max_dofs = 50000) {
  std::vector<int> free_id(dofs.n_dofs, -1);
  int nf = 0;
  for (int d = 0; d < dofs.n_dofs; ++d)
    if (!dofs.essential[d]) free_id[d] = nf++;
  const int nu = static_cast<int>(Bu.rows()), ng = static_cast<int>(Bg.rows());
  const int n = nf + nu + ng;
  if (n > max_dofs)
    throw InvalidArgument("solve_saddle_direct: system too large (" + std::to_string(n) + ")");

  std::vector<Eigen::Triplet<double>> trip;
  for (const auto& blk : Amass.blocks)
    for (size_t i = 0; i < blk.free_pos.size(); ++i)
      for (size_t j = 0; j < blk.free_pos.size(); ++j)
        trip.emplace_back(free_id[blk.dofs[blk.free_pos[i]]],
                          free_id[blk.dofs[blk.free_pos[j]]],
                          blk.full(blk.free_pos[i], blk.free_pos[j]));
  for (int col = 0; col < Bu.outerSize(); ++col)
    for (SpMat::InnerIterator it(Bu, col); it; ++it)
      if (free_id[col] >= 0) {
        trip.emplace_back(nf + it.row(), free_id[col], it.value());
        trip.emplace_back(free_id[col], nf + it.row(), it.value());
      }
  for (int col = 0; col < Bg.outerSize(); ++col)
    for (SpMat::InnerIterator it(Bg, col); it; ++it)
      if (free_id[col] >= 0) {
        trip.emplace_back(nf + nu + it.row(), free_id[col], it.value());
        trip.emplace_back(free_id[col], nf + nu + it.row(), it.value());
      }
  SpMat K(n, n);
  K.setFromTriplets(trip.begin(), trip.end());

  VectorX b(n);
  for (int d = 0; d < dofs.n_dofs; ++d)
    if (free_id[d] >= 0) b(free_id[d]) = rhs.b_sigma(d);
  b.segment(nf, nu) = rhs.b_u;
  b.segment(nf + nu, ng) = rhs.b_g;

  Eigen::SparseLU<SpMat> lu(K);
  if (lu.info() != Eigen::Success)
    throw SolverError("solve_saddle_direct: factorization failed");
  VectorX x = lu.solve(b);

  Solution<dim> sol;
  sol.sigma = rhs.x_ess;
  for (int d = 0; d < dofs.n_dofs; ++d)
    if (free_id[d] >= 0) sol.sigma(d) = x(free_id[d]);
  sol.u = x.segment(nf, nu);
  sol.rot = x.segment(nf + nu, ng);
  sol.report.converged = true;
  return sol;
}

}  // namespace msmfe
