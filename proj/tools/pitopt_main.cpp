// Batch front end: optimize / gradcheck / benchmark / simulate subcommands
// driving the library, with CSV/PGM/JSON artifact writers.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "pitopt/driver.hpp"
#include "pitopt/field_io.hpp"
#include "pitopt/propagators.hpp"
#include "pitopt/run_config.hpp"

namespace {

using namespace pitopt;

RunSetup setup_from(const std::string& config_path) {
  if (config_path.empty()) return RunSetup{};  // paper defaults
  return load_run_config(config_path);
}

void apply_overrides(RunSetup& setup, const std::string& mode, int workers,
                     const std::string& out_dir) {
  if (!mode.empty()) setup.config.mode = parse_run_mode(mode);
  if (workers > 0) setup.config.workers = workers;
  if (!out_dir.empty()) setup.output_dir = out_dir;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + dir + "': " + ec.message());
}

int cmd_optimize(const RunSetup& setup, bool vtk) {
  ensure_dir(setup.output_dir);
  const RunReport report = optimize(setup.config);
  const auto path = [&](const char* name) { return setup.output_dir + "/" + name; };

  write_density_csv(path("density.csv"), report.final_chi_phys, setup.config.nx, setup.config.ny);
  write_density_csv(path("chi.csv"), report.final_chi, setup.config.nx, setup.config.ny);
  write_pgm(path("density.pgm"), report.final_chi_phys, setup.config.nx, setup.config.ny);
  write_history_csv(path("history.csv"), report);
  write_metadata_json(path("metadata.json"), resolved_config_json(setup.config, setup.output_dir),
                      report);
  if (vtk) {
    write_vtk(path("density.vtk"), report.final_chi_phys, setup.config.nx, setup.config.ny,
              setup.config.side / setup.config.nx);
  }
  std::cout << "mode " << to_string(setup.config.mode) << ", " << report.history.size()
            << " iterations, final true objective " << format_double(report.final_true_objective)
            << "\nartifacts written to " << setup.output_dir << "\n";
  return 0;
}

int cmd_gradcheck(RunSetup setup, int nx, int ny, int nt, unsigned long long seed) {
  if (nx > 0) setup.config.nx = nx;
  if (ny > 0) setup.config.ny = ny;
  if (nt > 0) {
    setup.config.n_fine = nt;
    setup.config.n_coarse = 1;
  }
  if (nx > 0 || ny > 0) {
    // Mesh override: snap the span endpoints to the nearest nodes.
    DirichletSpan& span = setup.config.dirichlet;
    if (!span.empty()) {
      const double h = setup.config.side / setup.config.nx;
      span.x0 = std::round(span.x0 / h) * h;
      span.x1 = std::round(span.x1 / h) * h;
    }
  }
  const double tolerance = 1e-4;
  const GradCheckResult result = gradient_check(setup.config, seed);
  std::cout << "gradcheck: max relative component error = " << format_double(result.max_rel_error)
            << " (tolerance " << format_double(tolerance) << ", seed " << seed << ")\n";
  if (result.max_rel_error > tolerance) {
    std::cout << "gradcheck: FAIL\n";
    return 3;
  }
  std::cout << "gradcheck: PASS\n";
  return 0;
}

int cmd_benchmark(const RunSetup& setup, const std::string& design_path,
                  std::vector<int> n_tau_list, std::vector<int> k_list) {
  ensure_dir(setup.output_dir);
  if (n_tau_list.empty()) n_tau_list = {5, 10, 20, 30};
  if (k_list.empty()) k_list = {1, 2, 3, 4, 5, 6, 7, 8};

  Eigen::ArrayXd chi;
  if (!design_path.empty()) {
    chi = read_density_csv(design_path);
    if (chi.size() != static_cast<Index>(setup.config.nx) * setup.config.ny) {
      throw ConfigError("design file size does not match the configured mesh");
    }
  } else {
    // No fixed design supplied: generate one with a sequential optimization
    // and store it next to the results.
    OptimizationConfig seq = setup.config;
    seq.mode = RunMode::sequential;
    const RunReport report = optimize(seq);
    chi = report.final_chi;
    write_density_csv(setup.output_dir + "/benchmark_design_chi.csv", chi, setup.config.nx,
                      setup.config.ny);
  }

  const BenchmarkTable table = preliminary_benchmark(setup.config, chi, n_tau_list, k_list);
  write_benchmark_csv(setup.output_dir + "/benchmark.csv", table);
  std::cout << "n_tau  k    err_obj        err_sens       speedup\n";
  for (const auto& cell : table.cells) {
    std::printf("%-6d %-4d %-14.6e %-14.6e %.3f\n", cell.n_tau, cell.k, cell.err_obj,
                cell.err_sens, cell.speedup);
  }
  std::cout << "benchmark table written to " << setup.output_dir << "/benchmark.csv\n";
  return 0;
}

int cmd_simulate(const RunSetup& setup, const std::string& design_path) {
  ensure_dir(setup.output_dir);
  const OptimizationConfig& cfg = setup.config;
  const Mesh mesh = build_mesh(cfg.nx, cfg.ny, cfg.side, cfg.dirichlet);
  const TimeGrid grid = TimeGrid::create(cfg.t_final, cfg.n_fine, cfg.n_coarse);
  const FilterOperator filter = build_filter(mesh, cfg.filter_radius);
  const HeatLoad load(mesh, cfg.load);

  Eigen::ArrayXd chi;
  if (!design_path.empty()) {
    chi = read_density_csv(design_path);
    if (chi.size() != mesh.n_elements()) {
      throw ConfigError("design file size does not match the configured mesh");
    }
  } else {
    chi = Eigen::ArrayXd::Constant(mesh.n_elements(),
                                   initial_uniform_chi(cfg.projection, cfg.a_max));
  }
  const DesignField design = make_design(chi, filter, cfg.projection);
  const MaterialFields mat = simp(design.chi_phys, cfg.material);
  const SystemMatrices sys = assemble_system(mesh, mat.capacity, mat.conductivity);
  const PrimalContext pctx = make_primal_context(
      sys, grid, load, ObjectiveParams{cfg.power, ObjectiveMode::standard}, mesh.n_elements());

  Trajectory traj;
  const std::vector<PrimalState> states = sequential_primal(pctx, traj);

  // Cumulative objective at every step plus two probe temperatures.
  const Index center =
      mesh.node_to_free[static_cast<size_t>(mesh.node_index(cfg.nx / 2, cfg.ny / 2))];
  std::ofstream out(setup.output_dir + "/trajectory_summary.csv");
  if (!out) throw ConfigError("cannot open trajectory_summary.csv");
  out << "step,time,temp_center,temp_max\n";
  for (int n = 0; n <= grid.n_fine; ++n) {
    const auto col = traj.column(n);
    out << n << ',' << format_double(grid.t(n)) << ','
        << format_double(center >= 0 ? col[center] : 0.0) << ','
        << format_double(col.size() > 0 ? col.maxCoeff() : 0.0) << '\n';
  }
  std::cout << "theta = " << format_double(states.back().theta) << "\nsummary written to "
            << setup.output_dir << "/trajectory_summary.csv\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parallel-in-time topology optimization for transient heat conduction"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::string mode;
  std::string design_path;
  int workers = 0;
  unsigned long long seed = 1;
  bool vtk = false;
  int nx = 0, ny = 0, nt = 0;
  std::vector<int> n_tau_list;
  std::vector<int> k_list;

  auto* opt = app.add_subcommand("optimize", "Run a full optimization and write artifacts");
  opt->add_option("--config", config_path, "JSON config file");
  opt->add_option("--out", out_dir, "output directory");
  opt->add_option("--mode", mode, "sequential|oneshot|plt");
  opt->add_option("--workers", workers, "worker threads (default N_tau)");
  opt->add_flag("--vtk", vtk, "also write a legacy ASCII VTK file");

  auto* grad = app.add_subcommand("gradcheck", "Adjoint gradient vs central finite differences");
  grad->add_option("--config", config_path, "JSON config file");
  grad->add_option("--nx", nx, "mesh override");
  grad->add_option("--ny", ny, "mesh override");
  grad->add_option("--nt", nt, "time step override");
  grad->add_option("--seed", seed, "random design seed");

  auto* bench = app.add_subcommand("benchmark", "Accuracy/speedup table on a fixed design");
  bench->add_option("--config", config_path, "JSON config file");
  bench->add_option("--out", out_dir, "output directory");
  bench->add_option("--design", design_path, "raw chi CSV of the fixed design");
  bench->add_option("--n-tau", n_tau_list, "coarse point counts (default 5 10 20 30)");
  bench->add_option("--k", k_list, "Parareal iteration counts (default 1..8)");
  bench->add_option("--workers", workers, "ignored; benchmark uses N_tau workers");

  auto* sim = app.add_subcommand("simulate", "Single sequential solve, dump trajectory summary");
  sim->add_option("--config", config_path, "JSON config file");
  sim->add_option("--out", out_dir, "output directory");
  sim->add_option("--design", design_path, "raw chi CSV (default: uniform initial design)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    RunSetup setup = setup_from(config_path);
    apply_overrides(setup, mode, workers, out_dir);
    if (*opt) return cmd_optimize(setup, vtk);
    if (*grad) return cmd_gradcheck(setup, nx, ny, nt, seed);
    if (*bench) return cmd_benchmark(setup, design_path, n_tau_list, k_list);
    if (*sim) return cmd_simulate(setup, design_path);
  } catch (const pitopt::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const pitopt::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
