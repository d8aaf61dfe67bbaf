#include "catch_amalgamated.hpp"

#include "msmfe/problems.hpp"

using namespace msmfe;

TEST_CASE("body forces are consistent with the stress closures") {
  REQUIRE_NOTHROW(validate_problem(example1()));
  REQUIRE_NOTHROW(validate_problem(example2()));
  REQUIRE_NOTHROW(validate_problem(example3()));
  REQUIRE_NOTHROW(validate_problem(example3(10.0)));
}

TEST_CASE("finite-difference divergence oracle at a fixed point") {
  auto p1 = example1();
  Point<2> x(0.37, 0.81);
  Point<2> fd = fd_divergence<2>(p1.sigma_exact, x, 1e-5);
  REQUIRE((fd - p1.body_force(x)).norm() < 1e-6 * (1.0 + p1.body_force(x).norm()));

  auto p2 = example2();
  Point<3> y(0.2, 0.6, 0.45);
  Point<3> fd3 = fd_divergence<3>(p2.sigma_exact, y, 1e-5);
  REQUIRE((fd3 - p2.body_force(y)).norm() < 1e-6 * (1.0 + p2.body_force(y).norm()));
}

TEST_CASE("gradient closures match finite differences of the solutions") {
  auto check2 = [](const ElasticityProblem<2>& p, const Point<2>& x) {
    const double h = 1e-6;
    for (int j = 0; j < 2; ++j) {
      Point<2> xp = x, xm = x;
      xp(j) += h;
      xm(j) -= h;
      Point<2> col = (p.u_exact(xp) - p.u_exact(xm)) / (2 * h);
      REQUIRE((p.grad_u_exact(x).col(j) - col).norm() < 1e-7);
    }
  };
  check2(example1(), Point<2>(0.3, 0.6));
  check2(example3(), Point<2>(0.1, 0.8));
  check2(example3(), Point<2>(0.5, 0.5));  // inside the stiff block

  auto p2 = example2();
  Point<3> x(0.4, 0.25, 0.7);
  const double h = 1e-6;
  for (int j = 0; j < 3; ++j) {
    Point<3> xp = x, xm = x;
    xp(j) += h;
    xm(j) -= h;
    Point<3> col = (p2.u_exact(xp) - p2.u_exact(xm)) / (2 * h);
    REQUIRE((p2.grad_u_exact(x).col(j) - col).norm() < 1e-6);
  }
}

TEST_CASE("rotation closures match the skew gradient") {
  auto p = example1();
  Point<2> x(0.42, 0.17);
  auto expect = xi_inv<2>(skew_part<2>(p.grad_u_exact(x)));
  REQUIRE((p.p_exact(x) - expect).norm() < 1e-13);
  REQUIRE((p.p_scaled_exact(x) - 2.0 * 79.3 * expect).norm() < 1e-10);
}

TEST_CASE("example 3 interface behavior") {
  auto p = example3();
  const double eps = 1e-9;
  Point<2> in(1.0 / 3.0 + eps, 0.5), out(1.0 / 3.0 - eps, 0.5);
  // stress and scaled rotation continuous, plain rotation and material jump
  REQUIRE((p.sigma_exact(in) - p.sigma_exact(out)).norm() < 1e-6);
  REQUIRE((p.p_scaled_exact(in) - p.p_scaled_exact(out)).norm() < 1e-6);
  REQUIRE(p.material(in).mu == Catch::Approx(1e6));
  REQUIRE(p.material(out).mu == Catch::Approx(1.0));
  REQUIRE(std::abs(p.p_exact(out)(0)) > 1e5 * std::abs(p.p_exact(in)(0)));
  // displacement itself is continuous (w vanishes on the interface lines)
  REQUIRE((p.u_exact(in) - p.u_exact(out)).norm() < 1e-6);
  // smoothness filter rejects near-interface points, accepts interior ones
  REQUIRE_FALSE(p.smooth_at(Point<2>(1.0 / 3.0 + 1e-5, 0.2)));
  REQUIRE(p.smooth_at(Point<2>(0.2, 0.2)));
}

TEST_CASE("manufactured solutions vanish on the dirichlet data where expected") {
  auto p3 = example3();
  for (double t : {0.0, 0.25, 0.75, 1.0}) {
    REQUIRE(p3.u_exact(Point<2>(t, 0.0)).norm() < 1e-14);
    REQUIRE(p3.u_exact(Point<2>(1.0, t)).norm() < 1e-14);
  }
  // example 1 is nonzero on parts of the boundary; dirichlet data follows u
  auto p1 = example1();
  Point<2> x(0.0, 0.3);
  REQUIRE((p1.dirichlet(x) - p1.u_exact(x)).norm() < 1e-14);
  REQUIRE(p1.u_exact(x).norm() > 0.1);
}

TEST_CASE("example 4 setup") {
  auto p = example4(0.3);
  REQUIRE_FALSE(p.has_exact);
  // lambda, mu from E, nu
  const double E = 1e5, nu = 0.3;
  REQUIRE(p.material(Point<2>(0.5, 0.5)).mu == Catch::Approx(E / (2 * (1 + nu))));
  REQUIRE(p.material(Point<2>(0.5, 0.5)).lambda ==
          Catch::Approx(E * nu / ((1 + nu) * (1 - 2 * nu))));
  REQUIRE(p.classify(Point<2>(0.5, 0.0)) == FacetMarker::Dirichlet);
  REQUIRE(p.classify(Point<2>(0.0, 0.5)) == FacetMarker::Neumann);
  REQUIRE(p.classify(Point<2>(0.5, 1.0)) == FacetMarker::Neumann);
  REQUIRE((p.traction(Point<2>(0.4, 1.0)) - Point<2>(1.0, 0.0)).norm() < 1e-14);
  REQUIRE(p.traction(Point<2>(0.0, 0.4)).norm() < 1e-14);
  REQUIRE_THROWS_AS(example4(0.5), InvalidArgument);
  REQUIRE_THROWS_AS(example4(-0.1), InvalidArgument);
}

TEST_CASE("validate_problem catches an inconsistent body force") {
  auto p = example1();
  auto good = p.body_force;
  p.body_force = [good](const Point<2>& x) { return Point<2>(good(x) * 1.01); };
  REQUIRE_THROWS_AS(validate_problem(p), ConfigError);
}
