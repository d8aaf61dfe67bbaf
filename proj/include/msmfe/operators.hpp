#pragma once

#include "msmfe/types.hpp"

namespace msmfe {

/// as(tau): the asymmetry of a matrix, packed into its independent entries.
/// 2D: tau_12 - tau_21.  3D: (tau_32 - tau_23, tau_13 - tau_31, tau_21 - tau_12),
/// the unique choice satisfying tau : Xi(p) = as(tau) . p for the Xi below.
template <int dim>
RotVec<dim> asym(const Tensor<dim>& tau) {
  if constexpr (dim == 2) {
    RotVec<2> r;
    r(0) = tau(0, 1) - tau(1, 0);
    return r;
  } else {
    RotVec<3> r;
    r(0) = tau(2, 1) - tau(1, 2);
    r(1) = tau(0, 2) - tau(2, 0);
    r(2) = tau(1, 0) - tau(0, 1);
    return r;
  }
}

/// Xi(p): embed the reduced rotation vector as a skew-symmetric matrix.
template <int dim>
Tensor<dim> xi(const RotVec<dim>& p) {
  Tensor<dim> m = Tensor<dim>::Zero();
  if constexpr (dim == 2) {
    m(0, 1) = p(0);
    m(1, 0) = -p(0);
  } else {
    m(0, 1) = -p(2);
    m(0, 2) = p(1);
    m(1, 0) = p(2);
    m(1, 2) = -p(0);
    m(2, 0) = -p(1);
    m(2, 1) = p(0);
  }
  return m;
}

/// Xi^{-1}: inverse of xi; requires a skew-symmetric input.
template <int dim>
RotVec<dim> xi_inv(const Tensor<dim>& skew, double tol = 1e-12) {
  if ((skew + skew.transpose()).cwiseAbs().maxCoeff() > tol * (1.0 + skew.cwiseAbs().maxCoeff()))
    throw InvalidArgument("xi_inv: input matrix is not skew-symmetric");
  if constexpr (dim == 2) {
    RotVec<2> p;
    p(0) = skew(0, 1);
    return p;
  } else {
    RotVec<3> p;
    p(0) = skew(2, 1);
    p(1) = skew(0, 2);
    p(2) = skew(1, 0);
    return p;
  }
}

/// Skew(tau) = (tau - tau^T)/2.
template <int dim>
Tensor<dim> skew_part(const Tensor<dim>& tau) {
  return 0.5 * (tau - tau.transpose());
}

/// Isotropic compliance operator pair (A, A^{-1}) from Lame coefficients.
///   A tau      = (1/(2 mu)) (tau - lambda/(2 mu + d lambda) tr(tau) I)
///   A^{-1} tau = 2 mu tau + lambda tr(tau) I
/// Both act on all of M (not only symmetric matrices).
template <int dim>
struct IsotropicMaterial {
  double lambda = 0.0;
  double mu = 1.0;

  IsotropicMaterial() = default;
  IsotropicMaterial(double lambda_, double mu_) : lambda(lambda_), mu(mu_) {
    if (!(mu > 0.0) || !(lambda > -2.0 * mu / dim))
      throw InvalidArgument("IsotropicMaterial: need mu > 0 and lambda > -2 mu / d");
  }

  Tensor<dim> apply(const Tensor<dim>& tau) const {
    const double c = lambda / (2.0 * mu + dim * lambda);
    return (tau - c * tau.trace() * Tensor<dim>::Identity()) / (2.0 * mu);
  }

  Tensor<dim> apply_inv(const Tensor<dim>& tau) const {
    return 2.0 * mu * tau + lambda * tau.trace() * Tensor<dim>::Identity();
  }

  /// Stress from an (unsymmetrized) displacement gradient: A^{-1} eps(grad).
  Tensor<dim> stress_from_grad(const Tensor<dim>& grad_u) const {
    Tensor<dim> eps = 0.5 * (grad_u + grad_u.transpose());
    return apply_inv(eps);
  }
};

}  // namespace msmfe
