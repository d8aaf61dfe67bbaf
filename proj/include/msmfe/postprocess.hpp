#pragma once

#include <cmath>
#include <vector>

#include "msmfe/reduction.hpp"

namespace msmfe {

/// Relative L2 errors for one mesh level.
struct ErrorRecord {
  double h = 0.0;
  double e_sigma = 0.0;   // stress
  double e_div = 0.0;     // stress divergence
  double e_u = 0.0;       // cell displacement vs pointwise exact
  double e_proj_u = 0.0;  // cell displacement vs cell average of exact (superconvergence)
  double e_rot = 0.0;     // rotation (p, or the scaled variant)
};

/// Rotation value of the discrete solution at a reference point of a cell.
template <int dim>
RotVec<dim> rotation_at(const SimplicialMesh<dim>& mesh, const RotationLayout& layout,
                        const VectorX& rot, int cell, const Point<dim>& ref) {
  const int rd = rotation_components(dim);
  if (layout.variant == RotationVariant::P0PerCell)
    return rot.segment(cell * rd, rd);
  auto lambda = barycentric<dim>(ref);
  RotVec<dim> p = RotVec<dim>::Zero();
  for (int a = 0; a <= dim; ++a)
    p += lambda(a) * rot.segment(mesh.cells[cell][a] * rd, rd).eval();
  return p;
}

/// Compute all error columns for a solved instance. Norms are relative to
/// the corresponding exact norms; if an exact norm vanishes the absolute
/// error is reported instead.
template <int dim>
ErrorRecord compute_errors(const SimplicialMesh<dim>& mesh,
                           const std::vector<CellStressBasis<dim>>& cache,
                           const StressDofMap<dim>& dofs, const RotationLayout& layout,
                           const Solution<dim>& sol, const ElasticityProblem<dim>& prob,
                           bool scaled_rotation) {
  if (!prob.has_exact)
    throw ConfigError("compute_errors: problem has no exact solution");
  const auto rule = gauss_rule<dim>(5);
  const auto& p_ref = scaled_rotation ? prob.p_scaled_exact : prob.p_exact;

  double es = 0, ns = 0, ed = 0, nd = 0, eu = 0, nu = 0, ep = 0, np = 0, epr = 0;
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const auto& basis = cache[c];
    const Point<dim> uh = sol.u.segment(c * dim, dim);
    const Point<dim> divh = basis.stress_divergence(dofs, sol.sigma);
    Point<dim> ubar = Point<dim>::Zero();
    for (int q = 0; q < rule.size(); ++q) {
      const double w = rule.weights[q] * basis.map.det;
      const Point<dim> x = basis.map.map(rule.points[q]);
      const Tensor<dim> sx = prob.sigma_exact(x);
      const Tensor<dim> sh = basis.stress_at(dofs, sol.sigma, rule.points[q]);
      es += w * (sh - sx).squaredNorm();
      ns += w * sx.squaredNorm();
      const Point<dim> fx = prob.body_force(x);
      ed += w * (divh - fx).squaredNorm();
      nd += w * fx.squaredNorm();
      const Point<dim> ux = prob.u_exact(x);
      eu += w * (uh - ux).squaredNorm();
      nu += w * ux.squaredNorm();
      ubar += (w / basis.volume) * ux;
      const RotVec<dim> px = p_ref(x);
      const RotVec<dim> ph = rotation_at<dim>(mesh, layout, sol.rot, c, rule.points[q]);
      ep += w * (ph - px).squaredNorm();
      np += w * px.squaredNorm();
    }
    epr += basis.volume * (uh - ubar).squaredNorm();
  }

  auto rel = [](double e2, double n2) {
    return n2 > 1e-28 ? std::sqrt(e2 / n2) : std::sqrt(e2);
  };
  ErrorRecord rec;
  rec.e_sigma = rel(es, ns);
  rec.e_div = rel(ed, nd);
  rec.e_u = rel(eu, nu);
  rec.e_proj_u = rel(epr, nu);
  rec.e_rot = rel(ep, np);
  return rec;
}

/// log2-style rate between consecutive refinement levels.
inline double convergence_rate(double e_coarse, double e_fine, double h_coarse, double h_fine) {
  if (e_coarse <= 0.0 || e_fine <= 0.0 || h_coarse <= h_fine) return 0.0;
  return std::log(e_coarse / e_fine) / std::log(h_coarse / h_fine);
}

}  // namespace msmfe
