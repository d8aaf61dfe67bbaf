#include "catch_amalgamated.hpp"

#include <random>

#include "msmfe/operators.hpp"

using namespace msmfe;

namespace {
std::mt19937 rng(20240815);
template <int dim>
Tensor<dim> random_tensor() {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Tensor<dim> t;
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) t(i, j) = u(rng);
  return t;
}
}  // namespace

TEST_CASE("asym of a 2D matrix") {
  Tensor<2> t;
  t << 1, 5, 2, 4;
  REQUIRE(asym<2>(t)(0) == Catch::Approx(3.0));
}

TEST_CASE("xi and xi_inv are inverse, asym(xi(p)) = 2p") {
  RotVec<3> p;
  p << 0.3, -1.2, 2.5;
  Tensor<3> m = xi<3>(p);
  REQUIRE((m + m.transpose()).norm() == Catch::Approx(0.0).margin(1e-15));
  REQUIRE((xi_inv<3>(m) - p).norm() == Catch::Approx(0.0).margin(1e-15));
  REQUIRE((asym<3>(m) - 2.0 * p).norm() == Catch::Approx(0.0).margin(1e-15));

  RotVec<2> q;
  q << -0.7;
  REQUIRE((xi_inv<2>(xi<2>(q)) - q).norm() == Catch::Approx(0.0).margin(1e-15));
  REQUIRE(asym<2>(xi<2>(q))(0) == Catch::Approx(-1.4));
}

TEST_CASE("duality: tau : xi(p) equals asym(tau) . p") {
  for (int rep = 0; rep < 10; ++rep) {
    Tensor<3> t = random_tensor<3>();
    RotVec<3> p;
    p << 0.4, -0.9, 1.1;
    double lhs = (t.array() * xi<3>(p).array()).sum();
    REQUIRE(lhs == Catch::Approx(asym<3>(t).dot(p)).margin(1e-13));

    Tensor<2> t2 = random_tensor<2>();
    RotVec<2> p2;
    p2 << 0.8;
    double lhs2 = (t2.array() * xi<2>(p2).array()).sum();
    REQUIRE(lhs2 == Catch::Approx(asym<2>(t2).dot(p2)).margin(1e-13));
  }
}

TEST_CASE("xi_inv rejects non-skew input") {
  Tensor<2> t;
  t << 1, 2, 3, 4;
  REQUIRE_THROWS_AS(xi_inv<2>(t), InvalidArgument);
}

TEST_CASE("isotropic compliance round trip") {
  IsotropicMaterial<2> m2(123.0, 79.3);
  IsotropicMaterial<3> m3(100.0, 100.0);
  for (int rep = 0; rep < 10; ++rep) {
    Tensor<2> t2 = random_tensor<2>();
    REQUIRE((m2.apply_inv(m2.apply(t2)) - t2).norm() == Catch::Approx(0.0).margin(1e-12));
    Tensor<3> t3 = random_tensor<3>();
    REQUIRE((m3.apply(m3.apply_inv(t3)) - t3).norm() == Catch::Approx(0.0).margin(1e-12));
  }
}

TEST_CASE("compliance of the identity") {
  // A I = I / (2 mu + d lambda)
  IsotropicMaterial<2> m(2.0, 3.0);
  Tensor<2> r = m.apply(Tensor<2>::Identity());
  REQUIRE((r - Tensor<2>::Identity() / (2 * 3.0 + 2 * 2.0)).norm() ==
          Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("material parameter validation") {
  REQUIRE_THROWS_AS(IsotropicMaterial<2>(1.0, 0.0), InvalidArgument);
  REQUIRE_THROWS_AS(IsotropicMaterial<2>(-2.0, 1.0), InvalidArgument);  // lambda <= -2mu/d
  REQUIRE_NOTHROW(IsotropicMaterial<2>(-0.9, 1.0));
  REQUIRE_THROWS_AS(IsotropicMaterial<3>(-0.7, 1.0), InvalidArgument);
}

TEST_CASE("stress from displacement gradient symmetrizes") {
  IsotropicMaterial<2> m(1.0, 1.0);
  Tensor<2> g = random_tensor<2>();
  Tensor<2> s = m.stress_from_grad(g);
  REQUIRE((s - s.transpose()).norm() == Catch::Approx(0.0).margin(1e-14));
}
