#include "catch_amalgamated.hpp"

#include <numeric>
#include <random>
#include <sstream>

#include "msmfe/convergence.hpp"

using namespace msmfe;

TEST_CASE("convergence rate helper") {
  REQUIRE(convergence_rate(0.4, 0.1, 0.5, 0.25) == Catch::Approx(2.0));
  REQUIRE(convergence_rate(0.3, 0.3, 0.5, 0.25) == Catch::Approx(0.0));
  // Table-style check: errors 3.42E-02 -> 1.70E-02 over one halving gives ~1.01
  REQUIRE(convergence_rate(3.42e-2, 1.70e-2, 1.0 / 32, 1.0 / 64) ==
          Catch::Approx(1.01).margin(0.005));
}

TEST_CASE("projected-displacement error vanishes for exact cell averages") {
  auto prob = example1();
  auto mesh = generate_structured<2>(3);
  apply_boundary_conditions(mesh, prob);
  auto cache = build_basis_cache(mesh);
  auto maps = build_dof_maps(mesh, Method::Msmfe0);

  Solution<2> sol;
  sol.sigma = VectorX::Zero(maps.stress.n_dofs);
  sol.rot = VectorX::Zero(maps.rotation.n_dofs);
  sol.u = VectorX::Zero(maps.n_displacement);
  auto rule = gauss_rule<2>(5);
  for (int c = 0; c < mesh.n_cells(); ++c) {
    Point<2> avg = Point<2>::Zero();
    for (int q = 0; q < rule.size(); ++q)
      avg += rule.weights[q] * cache[c].map.det / cache[c].volume *
             prob.u_exact(cache[c].map.map(rule.points[q]));
    sol.u.segment(2 * c, 2) = avg;
  }
  auto rec = compute_errors(mesh, cache, maps.stress, maps.rotation, sol, prob, false);
  REQUIRE(rec.e_proj_u < 1e-13);
  REQUIRE(rec.e_u > 1e-2);  // pointwise error does not vanish
}

TEST_CASE("errors are invariant under mesh relabeling") {
  auto prob = example1();
  auto base = generate_structured<2>(2);

  // relabel vertices and shuffle cell order
  std::mt19937 rng(7);
  std::vector<int> perm(base.n_vertices());
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  SimplicialMesh<2> shuf;
  shuf.vertices.resize(base.n_vertices());
  for (int v = 0; v < base.n_vertices(); ++v) shuf.vertices[perm[v]] = base.vertices[v];
  std::vector<int> cell_order(base.n_cells());
  std::iota(cell_order.begin(), cell_order.end(), 0);
  std::shuffle(cell_order.begin(), cell_order.end(), rng);
  for (int c : cell_order) {
    std::array<int, 3> cell;
    for (int i = 0; i < 3; ++i) cell[i] = perm[base.cells[c][i]];
    shuf.cells.push_back(cell);
  }
  shuf.finalize();

  auto errs = [&](SimplicialMesh<2> mesh) {
    auto inst = solve_instance<2>(std::move(mesh), Method::Msmfe0, prob, 1e-13);
    return compute_errors(inst.mesh, inst.cache, inst.maps.stress, inst.maps.rotation,
                          inst.sol, prob, false);
  };
  auto a = errs(base), b = errs(shuf);
  REQUIRE(a.e_sigma == Catch::Approx(b.e_sigma).epsilon(1e-10));
  REQUIRE(a.e_div == Catch::Approx(b.e_div).epsilon(1e-10));
  REQUIRE(a.e_u == Catch::Approx(b.e_u).epsilon(1e-10));
  REQUIRE(a.e_proj_u == Catch::Approx(b.e_proj_u).epsilon(1e-9));
  REQUIRE(a.e_rot == Catch::Approx(b.e_rot).epsilon(1e-10));
}

TEST_CASE("csv writer layout") {
  ConvergenceResult res;
  res.levels = {2, 4};
  ErrorRecord a, b;
  a.h = 0.5;
  a.e_sigma = 0.4;
  a.e_div = 0.2;
  a.e_u = 0.1;
  a.e_proj_u = 0.04;
  a.e_rot = 0.3;
  b.h = 0.25;
  b.e_sigma = 0.2;
  b.e_div = 0.1;
  b.e_u = 0.05;
  b.e_proj_u = 0.01;
  b.e_rot = 0.15;
  res.errors = {a, b};
  std::ostringstream os;
  write_convergence_csv(res, os);
  REQUIRE(os.str() ==
          "h,e_sigma,r_sigma,e_div,r_div,e_u,r_u,e_proj_u,r_proj_u,e_p,r_p\n"
          "1/2,4.000E-01,,2.000E-01,,1.000E-01,,4.000E-02,,3.000E-01,\n"
          "1/4,2.000E-01,1.00,1.000E-01,1.00,5.000E-02,1.00,1.000E-02,2.00,1.500E-01,1.00\n");
}

TEST_CASE("small smooth study shows first-order stress and superconvergent projection") {
  auto res = run_convergence<2>(Method::Msmfe0, 1, {4, 8, 16});
  REQUIRE(res.errors.size() == 3);
  double r_sigma = convergence_rate(res.errors[1].e_sigma, res.errors[2].e_sigma,
                                    res.errors[1].h, res.errors[2].h);
  double r_proj = convergence_rate(res.errors[1].e_proj_u, res.errors[2].e_proj_u,
                                   res.errors[1].h, res.errors[2].h);
  REQUIRE(r_sigma > 0.8);
  REQUIRE(r_proj > 1.6);
}

TEST_CASE("config validation") {
  REQUIRE_THROWS_AS(run_convergence<2>(Method::Msmfe0, 3, {2}), ConfigError);   // n % 3
  REQUIRE_THROWS_AS(run_convergence<2>(Method::Msmfe0, 2, {2}), ConfigError);   // 3D example
  REQUIRE_THROWS_AS(run_convergence<3>(Method::Msmfe0, 1, {2}), ConfigError);   // 2D example
  REQUIRE_THROWS_AS(run_convergence<2>(Method::Msmfe0, 4, {2}), ConfigError);   // no exact
  REQUIRE_THROWS_AS(run_convergence<2>(Method::Msmfe0, 1, {0}), ConfigError);   // bad level
  REQUIRE_NOTHROW(run_convergence<2>(Method::Msmfe0, 1, {3, 6}));  // non-multiples fine
}

TEST_CASE("compute_errors refuses problems without exact solutions") {
  auto prob = example4(0.3);
  auto inst = solve_instance<2>(generate_structured<2>(2), Method::Msmfe0, prob, 1e-11);
  REQUIRE_THROWS_AS(compute_errors(inst.mesh, inst.cache, inst.maps.stress,
                                   inst.maps.rotation, inst.sol, prob, false),
                    ConfigError);
}

TEST_CASE("locking run produces profiles and change metrics") {
  auto res = run_locking(Method::Msmfe0, 8, {0.4, 0.49}, 1e-11);
  REQUIRE(res.x.size() == 8);
  REQUIRE(res.magnitude.size() == 2);
  REQUIRE(res.profile_change.size() == 1);
  REQUIRE(res.profile_change[0] < 0.2);
  std::ostringstream os;
  write_locking_csv(res, os);
  REQUIRE(os.str().rfind("x,nu=0.4,nu=0.49\n", 0) == 0);
}
