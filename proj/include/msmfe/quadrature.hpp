#pragma once

#include <vector>

#include "msmfe/types.hpp"

namespace msmfe {

/// Quadrature rule on the reference simplex (or reference segment for dim=1).
template <int dim>
struct QuadratureRule {
  std::vector<Point<dim>> points;
  std::vector<double> weights;
  int exactness_degree = 0;

  int size() const { return static_cast<int>(points.size()); }
};

namespace detail {

/// Gauss-Legendre nodes/weights on [0,1], 1..5 points (degree up to 9).
inline void gauss_legendre_01(int m, std::vector<double>& x, std::vector<double>& w) {
  switch (m) {
    case 1:
      x = {0.5};
      w = {1.0};
      break;
    case 2: {
      double a = 0.5 / std::sqrt(3.0);
      x = {0.5 - a, 0.5 + a};
      w = {0.5, 0.5};
      break;
    }
    case 3: {
      double a = 0.5 * std::sqrt(0.6);
      x = {0.5 - a, 0.5, 0.5 + a};
      w = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
      break;
    }
    case 4: {
      double a = 0.5 * 0.3399810435848563, b = 0.5 * 0.8611363115940526;
      double wa = 0.5 * 0.6521451548625461, wb = 0.5 * 0.3478548451374538;
      x = {0.5 - b, 0.5 - a, 0.5 + a, 0.5 + b};
      w = {wb, wa, wa, wb};
      break;
    }
    case 5: {
      double a = 0.5 * 0.5384693101056831, b = 0.5 * 0.9061798459386640;
      double w0 = 0.5 * 0.5688888888888889;
      double wa = 0.5 * 0.4786286704993665, wb = 0.5 * 0.2369268850561891;
      x = {0.5 - b, 0.5 - a, 0.5, 0.5 + a, 0.5 + b};
      w = {wb, wa, w0, wa, wb};
      break;
    }
    default:
      throw InvalidArgument("gauss_legendre_01: unsupported point count");
  }
}

inline int points_for_degree(int degree) { return (degree + 2) / 2; }  // 2m-1 >= degree

}  // namespace detail

/// Vertex quadrature rule: nodes at the reference simplex vertices,
/// equal weights |Ehat|/s (s = dim+1); exact for linears.
template <int dim>
QuadratureRule<dim> vertex_rule() {
  static_assert(dim == 2 || dim == 3);
  QuadratureRule<dim> rule;
  const double vol = (dim == 2) ? 0.5 : 1.0 / 6.0;
  rule.points.push_back(Point<dim>::Zero());
  for (int i = 0; i < dim; ++i) rule.points.push_back(Point<dim>::Unit(i));
  rule.weights.assign(dim + 1, vol / (dim + 1));
  rule.exactness_degree = 1;
  return rule;
}

/// Gauss rule on the reference simplex exact for polynomials up to `degree`
/// (collapsed-coordinate product of 1D Gauss-Legendre rules). Degrees up
/// to 6 are supported.
template <int dim>
QuadratureRule<dim> gauss_rule(int degree) {
  if (degree < 0 || degree > 6)
    throw InvalidArgument("gauss_rule: degree must be in [0, 6]");
  QuadratureRule<dim> rule;
  rule.exactness_degree = degree;
  if constexpr (dim == 1) {
    std::vector<double> x, w;
    detail::gauss_legendre_01(detail::points_for_degree(degree), x, w);
    rule.weights = w;
    for (double xi : x) rule.points.push_back(Point<1>::Constant(xi));
  } else if constexpr (dim == 2) {
    std::vector<double> xu, wu, xv, wv;
    detail::gauss_legendre_01(detail::points_for_degree(degree + 1), xu, wu);
    detail::gauss_legendre_01(detail::points_for_degree(degree), xv, wv);
    for (size_t i = 0; i < xu.size(); ++i)
      for (size_t j = 0; j < xv.size(); ++j) {
        rule.points.push_back(Point<2>(xu[i], xv[j] * (1.0 - xu[i])));
        rule.weights.push_back(wu[i] * wv[j] * (1.0 - xu[i]));
      }
  } else {
    std::vector<double> xu, wu, xv, wv, xw, ww;
    detail::gauss_legendre_01(detail::points_for_degree(degree + 2), xu, wu);
    detail::gauss_legendre_01(detail::points_for_degree(degree + 1), xv, wv);
    detail::gauss_legendre_01(detail::points_for_degree(degree), xw, ww);
    for (size_t i = 0; i < xu.size(); ++i)
      for (size_t j = 0; j < xv.size(); ++j)
        for (size_t k = 0; k < xw.size(); ++k) {
          double u = xu[i], v = xv[j] * (1.0 - xu[i]);
          double w = xw[k] * (1.0 - xu[i]) * (1.0 - xv[j]);
          rule.points.push_back(Point<3>(u, v, w));
          rule.weights.push_back(wu[i] * wv[j] * ww[k] * (1.0 - xu[i]) * (1.0 - xu[i]) *
                                 (1.0 - xv[j]));
        }
  }
  return rule;
}

/// Barycentric coordinates of a reference-simplex point.
template <int dim>
Eigen::Matrix<double, dim + 1, 1> barycentric(const Point<dim>& ref) {
  Eigen::Matrix<double, dim + 1, 1> lambda;
  lambda(0) = 1.0 - ref.sum();
  for (int i = 0; i < dim; ++i) lambda(i + 1) = ref(i);
  return lambda;
}

}  // namespace msmfe
