// Acceptance suite: one pass/fail line per criterion. Criteria can be
// selected by number on the command line; the default runs all of them.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "pitopt/design.hpp"
#include "pitopt/driver.hpp"
#include "pitopt/field_io.hpp"
#include "pitopt/parareal.hpp"
#include "pitopt/propagators.hpp"

using namespace pitopt;
using Clock = std::chrono::steady_clock;

namespace {

double elapsed_s(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double rel_err(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double scale = b.norm();
  return (a - b).norm() / (scale > 0 ? scale : 1.0);
}

double rel_err(double a, double b) {
  const double scale = std::abs(b);
  return std::abs(a - b) / (scale > 0 ? scale : 1.0);
}

Eigen::ArrayXd random_design(Index n, unsigned seed, double lo, double hi) {
  std::mt19937_64 rng(seed);
  Eigen::ArrayXd out(n);
  for (Index i = 0; i < n; ++i) {
    out[i] = lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Desk-scale configurations pinned for the acceptance runs.

OptimizationConfig desk_config() {
  OptimizationConfig cfg;
  cfg.nx = 50;
  cfg.ny = 50;
  cfg.dirichlet = {0.44, 0.56};  // nearest node-aligned span around L/10
  cfg.n_fine = 120;
  cfg.n_coarse = 8;
  cfg.filter_radius = 0.05;  // 2.5 h >= 2 h
  cfg.power = 20;
  cfg.a_max = 0.3;
  cfg.i_max = 150;
  cfg.true_objective_policy = TrueObjectivePolicy::every_iteration;
  return cfg;
}

// Criterion 4/5/6 runs, computed once and shared.
struct DeskRuns {
  RunReport sequential;
  RunReport oneshot4;
  RunReport oneshot8;
  RunReport plt4;
  RunReport plt24;
};

const DeskRuns& desk_runs() {
  static const DeskRuns runs = [] {
    DeskRuns r;
    OptimizationConfig cfg = desk_config();
    cfg.mode = RunMode::sequential;
    std::fprintf(stderr, "  [desk] sequential reference...\n");
    r.sequential = optimize(cfg);
    cfg.mode = RunMode::oneshot;
    cfg.n_coarse = 4;
    std::fprintf(stderr, "  [desk] one-shot N_tau = 4...\n");
    r.oneshot4 = optimize(cfg);
    cfg.n_coarse = 8;
    std::fprintf(stderr, "  [desk] one-shot N_tau = 8...\n");
    r.oneshot8 = optimize(cfg);
    cfg.mode = RunMode::plt;
    cfg.n_coarse = 4;
    std::fprintf(stderr, "  [desk] local-in-time N_tau = 4...\n");
    r.plt4 = optimize(cfg);
    cfg.n_coarse = 24;
    std::fprintf(stderr, "  [desk] local-in-time N_tau = 24...\n");
    r.plt24 = optimize(cfg);
    return r;
  }();
  return runs;
}

std::optional<BenchmarkTable> benchmark_cache;

// ---------------------------------------------------------------------------

bool criterion_1(std::string& detail) {
  const auto t0 = Clock::now();
  const Mesh mesh = build_mesh(20, 20, 1.0, {0.45, 0.55});
  const TimeGrid grid = TimeGrid::create(1.0, 48, 6);
  const HeatLoad load(mesh, ramped_cosine_load);
  const FilterOperator filter = build_filter(mesh, 0.1);
  const ProjectionParams projection{};
  const DesignField design =
      make_design(random_design(mesh.n_elements(), 42, 0.2, 0.8), filter, projection);
  const MaterialFields mat = simp(design.chi_phys, MaterialModel{});
  const SystemMatrices sys = assemble_system(mesh, mat.capacity, mat.conductivity);
  const ObjectiveParams objective{20, ObjectiveMode::standard};
  const PrimalContext pctx = make_primal_context(sys, grid, load, objective, mesh.n_elements());

  Trajectory seq_traj;
  const auto seq_primal = sequential_primal(pctx, seq_traj);
  const AdjointContext seq_actx =
      make_adjoint_context(sys, grid, seq_traj, mesh, objective, seq_primal.back().theta,
                           mat.d_capacity, mat.d_conductivity);
  const auto seq_adjoint = sequential_adjoint(seq_actx);

  WorkerPool pool(6);
  Trajectory par_traj;
  par_traj.reset(mesh.n_free(), grid.n_fine);
  PararealConfig pc;
  pc.n_chunks = 6;
  pc.iterations = 6;
  pc.record_intermediates = true;
  const FinePropagator<PrimalState> fine_p = [&](int chunk, const PrimalState& s, bool record) {
    return fine_primal(pctx, chunk, s, record ? &par_traj : nullptr);
  };
  const CoarsePropagator<PrimalState> coarse_p = [&](int chunk, const PrimalState& s) {
    return coarse_primal(pctx, chunk, s);
  };
  const PrimalState zero_p{Eigen::VectorXd::Zero(mesh.n_free()), 0.0};
  const auto primal_sol = run_parareal(fine_p, coarse_p, zero_p, pc, pool);
  for (int j = 0; j <= 6; ++j) {
    par_traj.store(grid.fine_of_coarse(j), primal_sol.states[static_cast<size_t>(j)].temperature,
                   j == 0 ? Provenance::initial : Provenance::corrected_coarse);
  }

  const AdjointContext par_actx =
      make_adjoint_context(sys, grid, par_traj, mesh, objective,
                           primal_sol.states.back().theta, mat.d_capacity, mat.d_conductivity);
  PararealConfig ac = pc;
  ac.direction = TimeDirection::reverse;
  ac.record_intermediates = false;
  const FinePropagator<AdjointState> fine_a = [&](int chunk, const AdjointState& s, bool) {
    return fine_adjoint(par_actx, chunk, s);
  };
  const CoarsePropagator<AdjointState> coarse_a = [&](int chunk, const AdjointState& s) {
    return coarse_adjoint(par_actx, chunk, s);
  };
  const AdjointState zero_a{Eigen::VectorXd::Zero(mesh.n_free()),
                            Eigen::ArrayXd::Zero(mesh.n_elements())};
  const auto adjoint_sol = run_parareal(fine_a, coarse_a, zero_a, ac, pool);

  double worst = 0.0;
  for (int j = 0; j <= 6; ++j) {
    const auto ju = static_cast<size_t>(j);
    worst = std::max(worst, rel_err(primal_sol.states[ju].temperature,
                                    seq_primal[ju].temperature));
    worst = std::max(worst, rel_err(primal_sol.states[ju].theta, seq_primal[ju].theta));
    worst = std::max(worst, rel_err(adjoint_sol.states[ju].lambda, seq_adjoint[ju].lambda));
    worst = std::max(worst, rel_err(Eigen::VectorXd(adjoint_sol.states[ju].sensitivity.matrix()),
                                    Eigen::VectorXd(seq_adjoint[ju].sensitivity.matrix())));
  }
  const double dt = elapsed_s(t0);
  std::ostringstream ss;
  ss << "max relative deviation " << worst << " (tol 1e-10), " << dt << " s (limit 10)";
  detail = ss.str();
  return worst <= 1e-10 && dt < 10.0;
}

bool criterion_2(std::string& detail) {
  const auto t0 = Clock::now();
  OptimizationConfig cfg;
  cfg.nx = 8;
  cfg.ny = 8;
  cfg.dirichlet = {0.375, 0.625};
  cfg.n_fine = 16;
  cfg.n_coarse = 1;
  cfg.filter_radius = 0.3;
  double worst = 0.0;
  for (int power : {4, 20}) {
    cfg.power = power;
    for (unsigned seed : {1u, 2u, 3u}) {
      const GradCheckResult result = gradient_check(cfg, seed);
      worst = std::max(worst, result.max_rel_error);
    }
  }
  const double dt = elapsed_s(t0);
  std::ostringstream ss;
  ss << "max relative error " << worst << " over p in {4,20} x 3 seeds (tol 1e-4), " << dt
     << " s (limit 30)";
  detail = ss.str();
  return worst <= 1e-4 && dt < 30.0;
}

bool criterion_3(std::string& detail) {
  const auto t0 = Clock::now();
  OptimizationConfig cfg;
  cfg.nx = 40;
  cfg.ny = 40;
  cfg.dirichlet = {0.45, 0.55};
  cfg.n_fine = 120;
  cfg.n_coarse = 5;
  cfg.filter_radius = 0.0625;  // 2.5 h
  cfg.power = 20;
  cfg.a_max = 0.3;
  cfg.i_max = 30;
  cfg.mode = RunMode::sequential;
  std::fprintf(stderr, "  [bench] short sequential optimization for the fixed design...\n");
  const RunReport seq = optimize(cfg);

  std::fprintf(stderr, "  [bench] error/speedup sweep...\n");
  const BenchmarkTable table =
      preliminary_benchmark(cfg, seq.final_chi, {5, 10}, {1, 2, 3, 4, 5});
  benchmark_cache = table;

  int sens_dominates = 0;
  double err_obj_first = 0.0;
  for (const auto& cell : table.cells) {
    if (cell.err_sens >= cell.err_obj) ++sens_dominates;
    if (cell.n_tau == 5 && cell.k == 1) err_obj_first = cell.err_obj;
  }
  const double frac = static_cast<double>(sens_dominates) / static_cast<double>(table.cells.size());
  const double dt = elapsed_s(t0);
  std::ostringstream ss;
  ss << "err_sens >= err_obj in " << sens_dominates << "/" << table.cells.size()
     << " cells (need >= 70%), err_obj(N_tau=5, k=1) = " << err_obj_first << " (need > 1e-6), "
     << dt << " s";
  detail = ss.str();
  return frac >= 0.7 && err_obj_first > 1e-6;
}

bool criterion_4(std::string& detail) {
  const auto t0 = Clock::now();
  const DeskRuns& runs = desk_runs();
  const double ref = runs.sequential.final_true_objective;
  const double dev4 = rel_err(runs.oneshot4.final_true_objective, ref);
  const double dev8 = rel_err(runs.oneshot8.final_true_objective, ref);

  bool volume_ok = true;
  double worst_volume = 0.0;
  for (const RunReport* report : {&runs.sequential, &runs.oneshot4, &runs.oneshot8}) {
    for (const auto& rec : report->history) {
      worst_volume = std::max(worst_volume, rec.volume);
      if (rec.volume > 0.3 + 1e-6) volume_ok = false;
    }
  }
  const double dt = elapsed_s(t0);
  std::ostringstream ss;
  ss << "final true objective deviation " << dev4 << " (N_tau=4) and " << dev8
     << " (N_tau=8) vs sequential (tol 5%), max volume " << worst_volume
     << " (bound 0.3+1e-6), " << dt << " s";
  detail = ss.str();
  return dev4 <= 0.05 && dev8 <= 0.05 && volume_ok;
}

bool criterion_5(std::string& detail) {
  const DeskRuns& runs = desk_runs();
  int lagging = 0, total = 0;
  for (const RunReport* os : {&runs.oneshot4, &runs.oneshot8}) {
    for (int iter = 5; iter <= 40; ++iter) {
      const auto& seq_rec = runs.sequential.history[static_cast<size_t>(iter) - 1];
      const auto& os_rec = os->history[static_cast<size_t>(iter) - 1];
      if (!seq_rec.theta_true || !os_rec.theta_true) continue;
      ++total;
      if (*os_rec.theta_true >= *seq_rec.theta_true) ++lagging;
    }
  }
  std::ostringstream ss;
  ss << "one-shot true objective >= sequential at " << lagging << "/" << total
     << " early iterations (need majority)";
  detail = ss.str();
  return 2 * lagging > total;
}

bool criterion_6(std::string& detail) {
  const DeskRuns& runs = desk_runs();
  const auto last50_std = [](const RunReport& report) {
    std::vector<double> tail;
    const size_t n = report.history.size();
    for (size_t i = n >= 50 ? n - 50 : 0; i < n; ++i) {
      if (report.history[i].theta_true) tail.push_back(*report.history[i].theta_true);
    }
    double mean = 0;
    for (double v : tail) mean += v;
    mean /= static_cast<double>(tail.size());
    double var = 0;
    for (double v : tail) var += (v - mean) * (v - mean);
    return std::sqrt(var / static_cast<double>(tail.size()));
  };
  const double sd4 = last50_std(runs.plt4);
  const double sd24 = last50_std(runs.plt24);
  const double dev4 = rel_err(runs.plt4.final_true_objective,
                              runs.sequential.final_true_objective);
  std::ostringstream ss;
  ss << "tail objective std " << sd24 << " (N_tau=24) vs " << sd4
     << " (N_tau=4, need >= 2x), N_tau=4 final deviation " << dev4 << " (tol 5%)";
  detail = ss.str();
  return sd24 >= 2.0 * sd4 && dev4 <= 0.05;
}

bool criterion_7(std::string& detail) {
  OptimizationConfig cfg;
  cfg.nx = 20;
  cfg.ny = 20;
  cfg.dirichlet = {0.45, 0.55};
  cfg.n_fine = 48;
  cfg.n_coarse = 6;
  cfg.filter_radius = 0.1;
  cfg.power = 20;
  cfg.i_max = 10;
  cfg.record_design_history = true;
  cfg.mode = RunMode::plt;
  const RunReport plt = optimize(cfg);
  cfg.mode = RunMode::oneshot;
  const RunReport zero =
      optimize_scheme(cfg, SolverScheme{true, CoarseMode::zero, ObjectiveMode::modified});

  if (plt.design_history.size() != zero.design_history.size()) {
    detail = "design history sizes differ";
    return false;
  }
  for (size_t i = 0; i < plt.design_history.size(); ++i) {
    if ((plt.design_history[i] - zero.design_history[i]).abs().maxCoeff() != 0.0) {
      detail = "design iterates diverge at iteration " + std::to_string(i + 1);
      return false;
    }
  }
  detail = "10 design iterates identical (exact equality)";
  return true;
}

bool criterion_8(std::string& detail) {
  // Reporting-only: speedup tables exist; on wide machines a soft warning is
  // printed if one-shot Parareal fails to beat the sequential reference.
  if (!benchmark_cache) {
    OptimizationConfig cfg;
    cfg.nx = 20;
    cfg.ny = 20;
    cfg.dirichlet = {0.45, 0.55};
    cfg.n_fine = 48;
    cfg.filter_radius = 0.1;
    const Mesh mesh = build_mesh(cfg.nx, cfg.ny, cfg.side, cfg.dirichlet);
    benchmark_cache =
        preliminary_benchmark(cfg, Eigen::ArrayXd::Constant(mesh.n_elements(), 0.4), {4}, {1, 2});
  }
  bool has_speedup = !benchmark_cache->cells.empty();
  for (const auto& cell : benchmark_cache->cells) {
    if (!(cell.speedup > 0.0)) has_speedup = false;
  }

  std::ostringstream ss;
  ss << "speedup table emitted (" << benchmark_cache->cells.size() << " cells)";
  const unsigned cores = std::thread::hardware_concurrency();
  if (cores >= 8) {
    const DeskRuns& runs = desk_runs();
    const double speedup = runs.sequential.total_seconds / runs.oneshot8.total_seconds;
    ss << ", one-shot speedup " << speedup << " on " << cores << " cores";
    if (speedup <= 1.0) {
      ss << " [warning: no speedup with >= 8 workers]";
    }
  } else {
    ss << ", hardware check skipped (" << cores << " core(s) available)";
  }
  detail = ss.str();
  return has_speedup;  // soft criterion: never gates on the speedup value
}

bool criterion_9(std::string& detail) {
  const auto t0 = Clock::now();
  bool ok = true;
  std::ostringstream ss;

  {  // filter row-stochasticity
    const Mesh mesh = build_mesh(40, 40, 1.0, {0.45, 0.55});
    const FilterOperator filter = build_filter(mesh, 2.5 / 40.0);
    const Eigen::VectorXd sums = filter.matrix() * Eigen::VectorXd::Ones(mesh.n_elements());
    const double dev = (sums.array() - 1.0).abs().maxCoeff();
    if (dev > 1e-12) {
      ok = false;
      ss << "row sums off by " << dev << "; ";
    }
  }
  {  // projection anchors
    const ProjectionParams p{32.0, 0.5};
    if (project_value(0.0, p) != 0.0 || project_value(1.0, p) != 1.0 ||
        project_value(0.5, p) != 0.5) {
      ok = false;
      ss << "projection anchors not exact; ";
    }
  }
  {  // SIMP endpoints
    Eigen::ArrayXd x(2);
    x << 0.0, 1.0;
    const MaterialFields f = simp(x, MaterialModel{});
    if (f.conductivity[0] != 0.03 || f.conductivity[1] != 3.0 || f.capacity[0] != 0.5 ||
        f.capacity[1] != 1.0) {
      ok = false;
      ss << "SIMP endpoints off; ";
    }
  }
  {  // exact symmetry
    const Mesh mesh = build_mesh(12, 12, 1.0, {0.5, 0.5});
    const Eigen::ArrayXd chi = random_design(mesh.n_elements(), 5, 0.1, 0.9);
    const MaterialFields f = simp(chi, MaterialModel{});
    const SystemMatrices sys = assemble_system(mesh, f.capacity, f.conductivity);
    const Eigen::MatrixXd c = Eigen::MatrixXd(sys.capacity());
    const Eigen::MatrixXd k = Eigen::MatrixXd(sys.conductivity());
    if ((c - c.transpose()).cwiseAbs().maxCoeff() != 0.0 ||
        (k - k.transpose()).cwiseAbs().maxCoeff() != 0.0) {
      ok = false;
      ss << "assembled matrices not exactly symmetric; ";
    }
  }
  {  // determinism: byte-identical reruns
    OptimizationConfig cfg;
    cfg.nx = 8;
    cfg.ny = 8;
    cfg.dirichlet = {0.375, 0.625};
    cfg.n_fine = 12;
    cfg.n_coarse = 4;
    cfg.filter_radius = 0.3;
    cfg.power = 4;
    cfg.i_max = 2;
    cfg.mode = RunMode::oneshot;
    const RunReport a = optimize(cfg);
    const RunReport b = optimize(cfg);
    std::string csv_a, csv_b;
    for (Index e = 0; e < a.final_chi_phys.size(); ++e) {
      csv_a += format_double(a.final_chi_phys[e]) + ",";
      csv_b += format_double(b.final_chi_phys[e]) + ",";
    }
    if (csv_a != csv_b) {
      ok = false;
      ss << "reruns are not byte-identical; ";
    }
  }
  const double dt = elapsed_s(t0);
  ss << "unit invariants " << (ok ? "hold" : "violated") << ", " << dt << " s (limit 5)";
  detail = ss.str();
  return ok && dt < 5.0;
}

struct Criterion {
  int id;
  const char* name;
  bool (*run)(std::string&);
};

const Criterion criteria[] = {
    {1, "parareal exactness", criterion_1},
    {2, "adjoint correctness", criterion_2},
    {3, "preliminary error structure", criterion_3},
    {4, "one-shot optimization quality", criterion_4},
    {5, "early-lag behavior", criterion_5},
    {6, "local-in-time instability trend", criterion_6},
    {7, "zero-coarse equivalence", criterion_7},
    {8, "speedup reporting", criterion_8},
    {9, "unit invariants", criterion_9},
};

}  // namespace

int main(int argc, char** argv) {
  std::set<int> requested;
  for (int i = 1; i < argc; ++i) requested.insert(std::atoi(argv[i]));

  int failures = 0;
  for (const Criterion& c : criteria) {
    if (!requested.empty() && requested.count(c.id) == 0) continue;
    std::string detail;
    bool pass = false;
    try {
      pass = c.run(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    std::printf("criterion %d (%s): %s — %s\n", c.id, c.name, pass ? "PASS" : "FAIL",
                detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
  }
  return failures;
}
