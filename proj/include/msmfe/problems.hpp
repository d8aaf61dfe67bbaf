#pragma once

#include <cmath>
#include <functional>
#include <random>
#include <string>

#include "msmfe/fem_spaces.hpp"
#include "msmfe/mesh.hpp"
#include "msmfe/operators.hpp"

namespace msmfe {

/// Problem data: material, body force, boundary data and (when available)
/// exact solution closures for error computation.
template <int dim>
struct ElasticityProblem {
  std::string name;
  bool has_exact = false;

  std::function<IsotropicMaterial<dim>(const Point<dim>&)> material;
  std::function<Point<dim>(const Point<dim>&)> body_force;     // f = div sigma
  std::function<Point<dim>(const Point<dim>&)> dirichlet;      // g on Gamma_D
  std::function<Point<dim>(const Point<dim>&)> u_exact;
  std::function<Tensor<dim>(const Point<dim>&)> grad_u_exact;
  std::function<Tensor<dim>(const Point<dim>&)> sigma_exact;
  std::function<RotVec<dim>(const Point<dim>&)> p_exact;        // Xi^{-1}(Skew(grad u))
  std::function<RotVec<dim>(const Point<dim>&)> p_scaled_exact; // Xi^{-1}(A^{-1} Skew(grad u))

  /// Classification of a boundary facet by its centroid; default: Dirichlet.
  std::function<FacetMarker(const Point<dim>&)> boundary_marker;
  /// Prescribed traction sigma n (w.r.t. outward normal) on Neumann facets.
  std::function<Point<dim>(const Point<dim>&)> traction;

  /// Accepts points where the stress closure is smooth (used by the
  /// finite-difference consistency check); default: everywhere.
  std::function<bool(const Point<dim>&)> smooth_at;

  FacetMarker classify(const Point<dim>& facet_centroid) const {
    return boundary_marker ? boundary_marker(facet_centroid) : FacetMarker::Dirichlet;
  }
};

/// Set mesh facet markers from the problem's boundary classification.
template <int dim>
void apply_boundary_conditions(SimplicialMesh<dim>& mesh, const ElasticityProblem<dim>& prob) {
  for (int f = 0; f < mesh.n_facets(); ++f)
    if (mesh.is_boundary(f)) mesh.facet_markers[f] = prob.classify(mesh.facet_centroid(f));
}

/// Central finite-difference divergence of a stress closure (row-wise).
template <int dim>
Point<dim> fd_divergence(const std::function<Tensor<dim>(const Point<dim>&)>& sigma,
                         const Point<dim>& x, double step = 1e-5) {
  Point<dim> d = Point<dim>::Zero();
  for (int j = 0; j < dim; ++j) {
    Point<dim> xp = x, xm = x;
    xp(j) += step;
    xm(j) -= step;
    Tensor<dim> diff = (sigma(xp) - sigma(xm)) / (2.0 * step);
    d += diff.col(j);
  }
  return d;
}

/// Cross-validate the hand-derived body force against a finite-difference
/// divergence of the stress closure at random interior points. Guards
/// against derivation slips in the manufactured solutions.
template <int dim>
void validate_problem(const ElasticityProblem<dim>& prob, unsigned seed = 12345,
                      int n_points = 20, double tol = 1e-6) {
  if (!prob.has_exact) return;
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> unif(0.05, 0.95);
  int checked = 0;
  while (checked < n_points) {
    Point<dim> x;
    for (int i = 0; i < dim; ++i) x(i) = unif(rng);
    if (prob.smooth_at && !prob.smooth_at(x)) continue;
    Point<dim> fd = fd_divergence<dim>(prob.sigma_exact, x);
    double scale = 1.0 + prob.body_force(x).norm();
    if ((fd - prob.body_force(x)).norm() > tol * scale)
      throw ConfigError(prob.name + ": body force inconsistent with stress divergence at (" +
                        std::to_string(x(0)) + ", " + std::to_string(x(1)) + ")");
    ++checked;
  }
}

namespace detail {

/// f = div sigma for constant Lame coefficients:
///   f_i = mu * tr(H_i) + (mu + lambda) * sum_j H_j(j, i)
template <int dim>
Point<dim> body_force_from_hessians(const std::array<Tensor<dim>, dim>& H, double lambda,
                                    double mu) {
  Point<dim> f;
  for (int i = 0; i < dim; ++i) {
    double lap = H[i].trace();
    double graddiv = 0.0;
    for (int j = 0; j < dim; ++j) graddiv += H[j](j, i);
    f(i) = mu * lap + (mu + lambda) * graddiv;
  }
  return f;
}

template <int dim>
RotVec<dim> reduced_rotation(const Tensor<dim>& grad_u) {
  return xi_inv<dim>(skew_part<dim>(grad_u));
}

}  // namespace detail

/// Example 1: smooth 2D solution on the unit square, homogeneous Dirichlet,
/// lambda = 123, mu = 79.3.
inline ElasticityProblem<2> example1() {
  const double lambda = 123.0, mu = 79.3;
  const double pi = M_PI;
  ElasticityProblem<2> prob;
  prob.name = "example1";
  prob.has_exact = true;
  prob.material = [=](const Point<2>&) { return IsotropicMaterial<2>(lambda, mu); };
  prob.u_exact = [=](const Point<2>& x) {
    return Point<2>(std::cos(pi * x(0)) * std::sin(2 * pi * x(1)),
                    std::cos(pi * x(1)) * std::sin(pi * x(0)));
  };
  prob.grad_u_exact = [=](const Point<2>& x) {
    Tensor<2> g;
    g(0, 0) = -pi * std::sin(pi * x(0)) * std::sin(2 * pi * x(1));
    g(0, 1) = 2 * pi * std::cos(pi * x(0)) * std::cos(2 * pi * x(1));
    g(1, 0) = pi * std::cos(pi * x(0)) * std::cos(pi * x(1));
    g(1, 1) = -pi * std::sin(pi * x(0)) * std::sin(pi * x(1));
    return g;
  };
  prob.sigma_exact = [=](const Point<2>& x) {
    return IsotropicMaterial<2>(lambda, mu).stress_from_grad(prob.grad_u_exact(x));
  };
  prob.body_force = [=](const Point<2>& x) {
    std::array<Tensor<2>, 2> H;
    const double sx = std::sin(pi * x(0)), cx = std::cos(pi * x(0));
    const double sy = std::sin(pi * x(1)), cy = std::cos(pi * x(1));
    const double s2y = std::sin(2 * pi * x(1)), c2y = std::cos(2 * pi * x(1));
    H[0](0, 0) = -pi * pi * cx * s2y;
    H[0](0, 1) = H[0](1, 0) = -2 * pi * pi * sx * c2y;
    H[0](1, 1) = -4 * pi * pi * cx * s2y;
    H[1](0, 0) = -pi * pi * sx * cy;
    H[1](0, 1) = H[1](1, 0) = -pi * pi * cx * sy;
    H[1](1, 1) = -pi * pi * sx * cy;
    return detail::body_force_from_hessians<2>(H, lambda, mu);
  };
  prob.dirichlet = [=](const auto& x) { return prob.u_exact(x); };
  prob.p_exact = [=](const Point<2>& x) {
    return detail::reduced_rotation<2>(prob.grad_u_exact(x));
  };
  prob.p_scaled_exact = [=](const Point<2>& x) { return 2.0 * mu * prob.p_exact(x); };
  return prob;
}

/// Example 2: smooth 3D solution on the unit cube, homogeneous Dirichlet,
/// lambda = mu = 100.
inline ElasticityProblem<3> example2() {
  const double lambda = 100.0, mu = 100.0;
  const double alpha = std::cos(M_PI / 12.0), beta = std::sin(M_PI / 12.0);
  ElasticityProblem<3> prob;
  prob.name = "example2";
  prob.has_exact = true;
  prob.material = [=](const Point<3>&) { return IsotropicMaterial<3>(lambda, mu); };
  auto h2 = [=](const Point<3>& x) { return (1 - alpha) * (x(1) - 0.5) + beta * (x(2) - 0.5); };
  auto h3 = [=](const Point<3>& x) { return (1 - alpha) * (x(2) - 0.5) - beta * (x(1) - 0.5); };
  prob.u_exact = [=](const Point<3>& x) {
    double g = std::exp(x(0)) - 1.0;
    return Point<3>(0.0, -g * h2(x), -g * h3(x));
  };
  prob.grad_u_exact = [=](const Point<3>& x) {
    double g = std::exp(x(0)) - 1.0, e = std::exp(x(0));
    Tensor<3> gr = Tensor<3>::Zero();
    gr(1, 0) = -e * h2(x);
    gr(1, 1) = -g * (1 - alpha);
    gr(1, 2) = -g * beta;
    gr(2, 0) = -e * h3(x);
    gr(2, 1) = g * beta;
    gr(2, 2) = -g * (1 - alpha);
    return gr;
  };
  prob.sigma_exact = [=](const Point<3>& x) {
    return IsotropicMaterial<3>(lambda, mu).stress_from_grad(prob.grad_u_exact(x));
  };
  prob.body_force = [=](const Point<3>& x) {
    double e = std::exp(x(0));
    std::array<Tensor<3>, 3> H;
    H[0] = Tensor<3>::Zero();
    H[1] = Tensor<3>::Zero();
    H[2] = Tensor<3>::Zero();
    H[1](0, 0) = -e * h2(x);
    H[1](0, 1) = H[1](1, 0) = -e * (1 - alpha);
    H[1](0, 2) = H[1](2, 0) = -e * beta;
    H[2](0, 0) = -e * h3(x);
    H[2](0, 1) = H[2](1, 0) = e * beta;
    H[2](0, 2) = H[2](2, 0) = -e * (1 - alpha);
    return detail::body_force_from_hessians<3>(H, lambda, mu);
  };
  prob.dirichlet = [=](const auto& x) { return prob.u_exact(x); };
  prob.p_exact = [=](const Point<3>& x) {
    return detail::reduced_rotation<3>(prob.grad_u_exact(x));
  };
  prob.p_scaled_exact = [=](const Point<3>& x) { return 2.0 * mu * prob.p_exact(x); };
  return prob;
}

/// Example 3: 2D heterogeneous problem; lambda = mu jump by a factor kappa
/// in the center block of a 3x3 partition. The exact stress is continuous
/// and kappa-independent; the rotation p jumps while the scaled rotation
/// p_tilde = Xi^{-1}(A^{-1} gamma) stays continuous.
inline ElasticityProblem<2> example3(double kappa = 1e6) {
  if (!(kappa > 0.0)) throw InvalidArgument("example3: kappa must be positive");
  const double pi = M_PI;
  auto scale = [=](const Point<2>& x) {
    bool center = std::min(x(0), x(1)) > 1.0 / 3.0 && std::max(x(0), x(1)) < 2.0 / 3.0;
    return center ? kappa : 1.0;
  };
  // components of w = sin(3 pi x) sin(3 pi y) (1, 1); u = w / scale
  auto W = [=](const Point<2>& x) { return std::sin(3 * pi * x(0)) * std::sin(3 * pi * x(1)); };
  auto Wx = [=](const Point<2>& x) {
    return 3 * pi * std::cos(3 * pi * x(0)) * std::sin(3 * pi * x(1));
  };
  auto Wy = [=](const Point<2>& x) {
    return 3 * pi * std::sin(3 * pi * x(0)) * std::cos(3 * pi * x(1));
  };
  ElasticityProblem<2> prob;
  prob.name = "example3";
  prob.has_exact = true;
  prob.material = [=](const Point<2>& x) {
    double s = scale(x);
    return IsotropicMaterial<2>(s, s);
  };
  prob.u_exact = [=](const Point<2>& x) {
    const double w = W(x) / scale(x);
    return Point<2>(w, w);
  };
  prob.grad_u_exact = [=](const Point<2>& x) {
    Tensor<2> g;
    g(0, 0) = Wx(x);
    g(0, 1) = Wy(x);
    g(1, 0) = Wx(x);
    g(1, 1) = Wy(x);
    g /= scale(x);
    return g;
  };
  // sigma = 2 eps(w) + tr(eps(w)) I, independent of the region
  prob.sigma_exact = [=](const Point<2>& x) {
    Tensor<2> s;
    double wx = Wx(x), wy = Wy(x);
    s(0, 0) = 2 * wx + (wx + wy);
    s(1, 1) = 2 * wy + (wx + wy);
    s(0, 1) = s(1, 0) = wx + wy;
    return s;
  };
  prob.body_force = [=](const Point<2>& x) {
    std::array<Tensor<2>, 2> H;
    double Wxx = -9 * pi * pi * W(x);
    double Wxy = 9 * pi * pi * std::cos(3 * pi * x(0)) * std::cos(3 * pi * x(1));
    H[0](0, 0) = Wxx;
    H[0](0, 1) = H[0](1, 0) = Wxy;
    H[0](1, 1) = Wxx;
    H[1] = H[0];
    return detail::body_force_from_hessians<2>(H, 1.0, 1.0);
  };
  prob.dirichlet = [=](const auto& x) { return prob.u_exact(x); };
  prob.p_exact = [=](const Point<2>& x) {
    RotVec<2> p;
    p(0) = 0.5 * (Wy(x) - Wx(x)) / scale(x);
    return p;
  };
  prob.p_scaled_exact = [=](const Point<2>& x) {
    RotVec<2> p;
    p(0) = Wy(x) - Wx(x);  // 2 mu * p with mu = scale
    return p;
  };
  prob.smooth_at = [](const Point<2>& x) {
    for (double c : {1.0 / 3.0, 2.0 / 3.0})
      for (int i = 0; i < 2; ++i)
        if (std::abs(x(i) - c) < 1e-3) return false;
    return true;
  };
  return prob;
}

/// Example 4: locking study. Clamped bottom, traction-free sides, unit
/// shear traction on the top edge (tangential direction +x). E = 1e5,
/// Poisson ratio nu in (0, 0.5). No exact solution.
inline ElasticityProblem<2> example4(double nu) {
  if (!(nu > 0.0 && nu < 0.5)) throw InvalidArgument("example4: need 0 < nu < 0.5");
  const double E = 1e5;
  const double lambda = E * nu / ((1 + nu) * (1 - 2 * nu));
  const double mu = E / (2 * (1 + nu));
  ElasticityProblem<2> prob;
  prob.name = "example4";
  prob.has_exact = false;
  prob.material = [=](const Point<2>&) { return IsotropicMaterial<2>(lambda, mu); };
  prob.body_force = [](const Point<2>&) { return Point<2>::Zero(); };
  prob.dirichlet = [](const Point<2>&) { return Point<2>::Zero(); };
  prob.boundary_marker = [](const Point<2>& c) {
    return c(1) < 1e-12 ? FacetMarker::Dirichlet : FacetMarker::Neumann;
  };
  prob.traction = [](const Point<2>& x) {
    if (x(1) > 1.0 - 1e-12) return Point<2>(1.0, 0.0);  // (sn).n = 0, (sn).t = 1
    return Point<2>::Zero().eval();
  };
  return prob;
}

/// Isotropic compliance pair for a given Lame pair (spec'd convenience).
template <int dim>
IsotropicMaterial<dim> isotropic_compliance(double lambda, double mu) {
  return IsotropicMaterial<dim>(lambda, mu);
}

}  // namespace msmfe
