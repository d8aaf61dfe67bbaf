#pragma once

#include <functional>
#include <vector>

#include "msmfe/types.hpp"

namespace msmfe {

struct SolveReport {
  int iterations = 0;
  double residual = 0.0;     // final preconditioned residual norm
  double rel_residual = 0.0; // relative to the initial one
  bool converged = false;
};

/// Preconditioned conjugate gradients for an SPD operator given as a
/// matrix-vector callback. `precond_diag` holds the (positive) diagonal of a
/// Jacobi preconditioner; pass an empty vector for no preconditioning.
/// Throws SolverError if the operator or preconditioner turns out indefinite.
inline SolveReport cg_spd(const std::function<void(const VectorX&, VectorX&)>& apply,
                          const VectorX& rhs, VectorX& x, const VectorX& precond_diag,
                          double tol = 1e-10, int max_iter = -1) {
  const int n = static_cast<int>(rhs.size());
  if (x.size() != n) x = VectorX::Zero(n);
  if (max_iter < 0) max_iter = 10 * n + 100;

  const bool jacobi = precond_diag.size() > 0;
  if (jacobi) {
    if (precond_diag.size() != n) throw SolverError("cg_spd: preconditioner size mismatch");
    if (precond_diag.minCoeff() <= 0.0)
      throw SolverError("cg_spd: preconditioner diagonal is not positive");
  }

  VectorX r = rhs, Ax(n);
  if (x.norm() > 0.0) {
    apply(x, Ax);
    r -= Ax;
  }
  VectorX z = jacobi ? (r.array() / precond_diag.array()).matrix() : r;
  VectorX p = z, Ap(n);
  double rz = r.dot(z);
  const double rz0 = rz;
  SolveReport rep;
  rep.residual = std::sqrt(std::max(rz, 0.0));
  if (rz0 <= 0.0 || rep.residual <= tol * std::sqrt(std::max(rz0, 1e-300))) {
    rep.converged = true;
    rep.rel_residual = 0.0;
    return rep;
  }

  for (int it = 0; it < max_iter; ++it) {
    apply(p, Ap);
    const double pAp = p.dot(Ap);
    if (pAp <= 0.0) throw SolverError("cg_spd: operator is not positive definite");
    const double alpha = rz / pAp;
    x += alpha * p;
    r -= alpha * Ap;
    z = jacobi ? (r.array() / precond_diag.array()).matrix() : r;
    const double rz_new = r.dot(z);
    rep.iterations = it + 1;
    rep.residual = std::sqrt(std::max(rz_new, 0.0));
    rep.rel_residual = rep.residual / std::sqrt(rz0);
    if (rep.rel_residual <= tol) {
      rep.converged = true;
      return rep;
    }
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  throw SolverError("cg_spd: no convergence in " + std::to_string(max_iter) + " iterations");
}

/// Dense Cholesky solve; throws SolverError if the matrix is not SPD.
inline VectorX dense_spd_solve(const MatrixX& A, const VectorX& b) {
  Eigen::LLT<MatrixX> llt(A);
  if (llt.info() != Eigen::Success) throw SolverError("dense_spd_solve: matrix is not SPD");
  return llt.solve(b);
}

}  // namespace msmfe
