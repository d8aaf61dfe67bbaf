#pragma once

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "msmfe/postprocess.hpp"

#include <json.hpp>

namespace msmfe {

/// One fully solved discrete instance.
template <int dim>
struct Instance {
  SimplicialMesh<dim> mesh;
  std::vector<CellStressBasis<dim>> cache;
  DofMaps<dim> maps;
  SystemRhs<dim> rhs;
  Solution<dim> sol;
};

inline unsigned fd_check_seed() {
  if (const char* s = std::getenv("MSMFE_SEED"))
    return static_cast<unsigned>(std::strtoul(s, nullptr, 10));
  return 12345u;
}

/// Assemble, reduce and solve one problem instance on a given mesh.
template <int dim>
Instance<dim> solve_instance(SimplicialMesh<dim> mesh, Method method,
                             const ElasticityProblem<dim>& prob, double tol = 1e-10) {
  Instance<dim> inst;
  inst.mesh = std::move(mesh);
  apply_boundary_conditions(inst.mesh, prob);
  inst.cache = build_basis_cache(inst.mesh);
  inst.maps = build_dof_maps(inst.mesh, method);
  auto material = MaterialField<dim>::sample(inst.mesh, prob);
  auto Amass = assemble_stress_mass(inst.mesh, inst.cache, inst.maps.stress, material);
  auto Bu = assemble_divergence(inst.mesh, inst.cache, inst.maps.stress);
  auto Bg = assemble_rotation_coupling(inst.mesh, inst.cache, inst.maps.stress, material,
                                       inst.maps.rotation, rotation_coupling(method));
  inst.rhs = assemble_rhs(inst.mesh, inst.cache, inst.maps.stress, Amass, Bu, Bg, prob);

  if (method == Method::SaddleOracle) {
    inst.sol = solve_saddle_direct(Amass, inst.maps.stress, Bu, Bg, inst.rhs);
    return inst;
  }

  auto sys = condense(inst.mesh, method, Amass, Bu, Bg, inst.rhs);
  VectorX diag = sys.jacobi_diagonal();
  VectorX x = VectorX::Zero(sys.size());
  auto report = cg_spd([&](const VectorX& in, VectorX& out) { sys.apply(in, out); }, sys.rhs,
                       x, diag, tol);
  inst.sol = recover_fields(sys, inst.rhs, x);
  inst.sol.report = report;
  return inst;
}

template <int dim>
ElasticityProblem<dim> example_problem(int example, double param) {
  if constexpr (dim == 2) {
    if (example == 1) return example1();
    if (example == 3) return example3(param > 0 ? param : 1e6);
    if (example == 4) return example4(param > 0 ? param : 0.3);
    throw ConfigError("example " + std::to_string(example) + " is not a 2D problem");
  } else {
    if (example == 2) return example2();
    throw ConfigError("example " + std::to_string(example) + " is not a 3D problem");
  }
}

struct ConvergenceResult {
  std::vector<int> levels;
  std::vector<ErrorRecord> errors;
  std::vector<int> iterations;
  std::vector<int> n_cells;
};

inline std::string format_sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3E", v);
  return buf;
}

inline std::string format_rate(double r) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", r);
  return buf;
}

inline void write_convergence_csv(const ConvergenceResult& res, std::ostream& os) {
  os << "h,e_sigma,r_sigma,e_div,r_div,e_u,r_u,e_proj_u,r_proj_u,e_p,r_p\n";
  for (size_t i = 0; i < res.errors.size(); ++i) {
    const auto& e = res.errors[i];
    auto rate = [&](double cur, double prev) {
      if (i == 0) return std::string();
      return format_rate(
          convergence_rate(prev, cur, res.errors[i - 1].h, e.h));
    };
    os << "1/" << res.levels[i];
    const ErrorRecord& p = res.errors[i > 0 ? i - 1 : 0];
    os << ',' << format_sci(e.e_sigma) << ',' << rate(e.e_sigma, p.e_sigma);
    os << ',' << format_sci(e.e_div) << ',' << rate(e.e_div, p.e_div);
    os << ',' << format_sci(e.e_u) << ',' << rate(e.e_u, p.e_u);
    os << ',' << format_sci(e.e_proj_u) << ',' << rate(e.e_proj_u, p.e_proj_u);
    os << ',' << format_sci(e.e_rot) << ',' << rate(e.e_rot, p.e_rot);
    os << '\n';
  }
}

inline void write_convergence_markdown(const ConvergenceResult& res, std::ostream& os) {
  os << "| h | stress | rate | div | rate | u | rate | proj u | rate | rotation | rate |\n";
  os << "|---|--------|------|-----|------|---|------|--------|------|----------|------|\n";
  for (size_t i = 0; i < res.errors.size(); ++i) {
    const auto& e = res.errors[i];
    const auto& p = res.errors[i > 0 ? i - 1 : 0];
    auto rate = [&](double cur, double prev) {
      return i == 0 ? std::string("-")
                    : format_rate(convergence_rate(prev, cur, p.h, e.h));
    };
    os << "| 1/" << res.levels[i] << " | " << format_sci(e.e_sigma) << " | "
       << rate(e.e_sigma, p.e_sigma) << " | " << format_sci(e.e_div) << " | "
       << rate(e.e_div, p.e_div) << " | " << format_sci(e.e_u) << " | " << rate(e.e_u, p.e_u)
       << " | " << format_sci(e.e_proj_u) << " | " << rate(e.e_proj_u, p.e_proj_u) << " | "
       << format_sci(e.e_rot) << " | " << rate(e.e_rot, p.e_rot) << " |\n";
  }
}

/// Run a refinement study for one of the manufactured examples.
template <int dim>
ConvergenceResult run_convergence(Method method, int example, const std::vector<int>& levels,
                                  double param = 0.0, double tol = 1e-10) {
  auto prob = example_problem<dim>(example, param);
  if (!prob.has_exact) throw ConfigError("run_convergence: example has no exact solution");
  validate_problem(prob, fd_check_seed());
  ConvergenceResult res;
  for (int n : levels) {
    if (n < 1) throw ConfigError("run_convergence: mesh level must be positive");
    if (example == 3 && n % 3 != 0)
      throw ConfigError("example 3 needs the mesh size divisible by 3 so cell "
                        "boundaries align with the coefficient jump");
    Instance<dim> inst;
    try {
      inst = solve_instance<dim>(generate_structured<dim>(n), method, prob, tol);
    } catch (const SolverError& e) {
      throw SolverError("level n=" + std::to_string(n) + ": " + e.what());
    }
    auto rec = compute_errors(inst.mesh, inst.cache, inst.maps.stress, inst.maps.rotation,
                              inst.sol, prob, method == Method::Msmfe1Scaled);
    rec.h = 1.0 / n;
    res.levels.push_back(n);
    res.errors.push_back(rec);
    res.iterations.push_back(inst.sol.report.iterations);
    res.n_cells.push_back(inst.mesh.n_cells());
  }
  return res;
}

struct LockingResult {
  std::vector<double> nu;                       // Poisson ratios
  std::vector<double> x;                        // top-edge sample abscissae
  std::vector<std::vector<double>> magnitude;   // per nu, |u_h| at those samples
  std::vector<double> profile_change;           // max relative change vs previous nu
  std::vector<int> iterations;
};

/// Locking study: solve the sheared-top problem for a list of Poisson
/// ratios and record the displacement magnitude in the cells touching the
/// top edge. A locking-free method keeps the profile O(1) as nu -> 1/2.
inline LockingResult run_locking(Method method, int n, const std::vector<double>& nu_list,
                                 double tol = 1e-10) {
  LockingResult res;
  res.nu = nu_list;
  for (size_t k = 0; k < nu_list.size(); ++k) {
    auto prob = example4(nu_list[k]);
    auto inst = solve_instance<2>(generate_structured<2>(n), method, prob, tol);
    std::vector<std::pair<double, double>> samples;  // (x, |u|)
    for (int f = 0; f < inst.mesh.n_facets(); ++f) {
      if (!inst.mesh.is_boundary(f)) continue;
      Point<2> c = inst.mesh.facet_centroid(f);
      if (c(1) < 1.0 - 1e-12) continue;
      int cell = inst.mesh.facet_cells[f][0];
      samples.emplace_back(c(0), inst.sol.u.segment(cell * 2, 2).norm());
    }
    std::sort(samples.begin(), samples.end());
    if (k == 0)
      for (auto& s : samples) res.x.push_back(s.first);
    std::vector<double> mags;
    for (auto& s : samples) mags.push_back(s.second);
    if (k > 0) {
      const auto& prev = res.magnitude.back();
      double diff = 0.0, ref = 0.0;
      for (size_t i = 0; i < mags.size(); ++i) {
        diff = std::max(diff, std::abs(mags[i] - prev[i]));
        ref = std::max(ref, std::abs(prev[i]));
      }
      res.profile_change.push_back(ref > 0 ? diff / ref : diff);
    }
    res.magnitude.push_back(std::move(mags));
    res.iterations.push_back(inst.sol.report.iterations);
  }
  return res;
}

inline void write_locking_csv(const LockingResult& res, std::ostream& os) {
  os << "x";
  for (double nu : res.nu) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "nu=%g", nu);
    os << ',' << buf;
  }
  os << '\n';
  for (size_t i = 0; i < res.x.size(); ++i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", res.x[i]);
    os << buf;
    for (const auto& col : res.magnitude) os << ',' << format_sci(col[i]);
    os << '\n';
  }
}

inline void write_locking_markdown(const LockingResult& res, std::ostream& os) {
  os << "| x |";
  for (double nu : res.nu) os << " nu=" << nu << " |";
  os << "\n|---|";
  for (size_t k = 0; k < res.nu.size(); ++k) os << "---|";
  os << '\n';
  for (size_t i = 0; i < res.x.size(); ++i) {
    os << "| " << res.x[i] << " |";
    for (const auto& col : res.magnitude) os << ' ' << format_sci(col[i]) << " |";
    os << '\n';
  }
  os << '\n';
  for (size_t k = 0; k + 1 < res.nu.size(); ++k)
    os << "max relative profile change nu=" << res.nu[k] << " -> nu=" << res.nu[k + 1] << ": "
       << format_sci(res.profile_change[k]) << '\n';
}

inline nlohmann::json convergence_manifest(Method method, int dim, int example,
                                           const ConvergenceResult& res, double tol) {
  nlohmann::json j;
  j["method"] = method_name(method);
  j["dim"] = dim;
  j["example"] = example;
  j["tolerance"] = tol;
  j["levels"] = res.levels;
  j["cells"] = res.n_cells;
  j["cg_iterations"] = res.iterations;
  std::vector<nlohmann::json> rows;
  for (const auto& e : res.errors)
    rows.push_back({{"h", e.h},
                    {"e_sigma", e.e_sigma},
                    {"e_div", e.e_div},
                    {"e_u", e.e_u},
                    {"e_proj_u", e.e_proj_u},
                    {"e_p", e.e_rot}});
  j["errors"] = rows;
  return j;
}

}  // namespace msmfe
