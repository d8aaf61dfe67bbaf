#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "msmfe/convergence.hpp"

namespace {

msmfe::Method parse_method(const std::string& s) {
  if (s == "msmfe0") return msmfe::Method::Msmfe0;
  if (s == "msmfe1") return msmfe::Method::Msmfe1;
  if (s == "msmfe1-scaled") return msmfe::Method::Msmfe1Scaled;
  if (s == "saddle-oracle") return msmfe::Method::SaddleOracle;
  throw msmfe::ConfigError("unknown method '" + s + "'");
}

std::ostream& open_out(std::ofstream& file, const std::string& path) {
  if (path.empty()) return std::cout;
  file.open(path);
  if (!file) throw msmfe::ConfigError("cannot open output file '" + path + "'");
  return file;
}

template <int dim>
int run_convergence_cmd(msmfe::Method method, int example, const std::vector<int>& levels,
                        double tol, const std::string& out, const std::string& format,
                        const std::string& mesh_file) {
  msmfe::ConvergenceResult res;
  if (mesh_file.empty()) {
    res = msmfe::run_convergence<dim>(method, example, levels, 0.0, tol);
  } else {
    auto prob = msmfe::example_problem<dim>(example, 0.0);
    msmfe::validate_problem(prob, msmfe::fd_check_seed());
    auto mesh = msmfe::import_ascii<dim>(mesh_file);
    auto inst = msmfe::solve_instance<dim>(std::move(mesh), method, prob, tol);
    auto rec = msmfe::compute_errors(inst.mesh, inst.cache, inst.maps.stress,
                                     inst.maps.rotation, inst.sol, prob,
                                     method == msmfe::Method::Msmfe1Scaled);
    double hmax = 0.0;
    for (int c = 0; c < inst.mesh.n_cells(); ++c)
      for (int f : inst.mesh.cell_facets[c])
        hmax = std::max(hmax, inst.mesh.facet_measure(f));
    rec.h = hmax;
    res.levels.push_back(0);
    res.errors.push_back(rec);
    res.iterations.push_back(inst.sol.report.iterations);
    res.n_cells.push_back(inst.mesh.n_cells());
  }
  std::ofstream file;
  std::ostream& os = open_out(file, out);
  if (format == "json")
    os << msmfe::convergence_manifest(method, dim, example, res, tol).dump(2) << '\n';
  else if (format == "markdown")
    msmfe::write_convergence_markdown(res, os);
  else
    msmfe::write_convergence_csv(res, os);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multipoint-stress mixed finite element solver for linear elasticity"};
  std::string method_str = "msmfe0";
  int dim = 2;
  int example = 1;
  std::vector<int> levels;
  std::vector<double> nu_list;
  double tol = 1e-10;
  int threads = 1;
  std::string out, format = "csv", mesh_file;

  app.add_option("--method", method_str, "msmfe0 | msmfe1 | msmfe1-scaled | saddle-oracle")
      ->check(CLI::IsMember({"msmfe0", "msmfe1", "msmfe1-scaled", "saddle-oracle"}));
  app.add_option("--dim", dim, "spatial dimension (2 or 3)")->check(CLI::IsMember({2, 3}));
  app.add_option("--example", example, "example problem (1-4)")->check(CLI::Range(1, 4));
  app.add_option("--levels", levels, "mesh sizes n (h = 1/n), one per refinement level")
      ->delimiter(',');
  app.add_option("--nu-list", nu_list, "Poisson ratios for the locking study (example 4)")
      ->delimiter(',');
  app.add_option("--tol", tol, "CG relative tolerance");
  app.add_option("--threads", threads, "thread count (execution is sequential)");
  app.add_option("--out", out, "output file (default: stdout)");
  app.add_option("--format", format, "csv | markdown | json")
      ->check(CLI::IsMember({"csv", "markdown", "json"}));
  app.add_option("--mesh-file", mesh_file, "solve on an imported ASCII mesh instead");
  CLI11_PARSE(app, argc, argv);

  try {
    if (threads != 1)
      std::cerr << "note: --threads " << threads << " requested; running sequentially\n";
    msmfe::Method method = parse_method(method_str);

    if (example == 4) {
      if (dim != 2) throw msmfe::ConfigError("example 4 is two-dimensional");
      if (nu_list.empty()) nu_list = {0.3, 0.49, 0.499, 0.4999};
      int n = levels.empty() ? 32 : levels.front();
      auto res = msmfe::run_locking(method, n, nu_list, tol);
      std::ofstream file;
      std::ostream& os = open_out(file, out);
      if (format == "json") {
        nlohmann::json j;
        j["method"] = msmfe::method_name(method);
        j["example"] = 4;
        j["n"] = n;
        j["nu"] = res.nu;
        j["x"] = res.x;
        j["magnitude"] = res.magnitude;
        j["cg_iterations"] = res.iterations;
        j["profile_change"] = res.profile_change;
        os << j.dump(2) << '\n';
      } else if (format == "markdown") {
        msmfe::write_locking_markdown(res, os);
      } else {
        msmfe::write_locking_csv(res, os);
      }
      return 0;
    }

    if (levels.empty() && mesh_file.empty())
      throw msmfe::ConfigError("--levels is required (or --mesh-file for a single run)");
    if (dim == 2)
      return run_convergence_cmd<2>(method, example, levels, tol, out, format, mesh_file);
    return run_convergence_cmd<3>(method, example, levels, tol, out, format, mesh_file);
  } catch (const msmfe::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const msmfe::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const msmfe::InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
