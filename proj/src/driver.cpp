#include "pitopt/driver.hpp"

#include <chrono>
#include <cmath>
#include <memory>
#include <random>
#include <sstream>
#include <utility>

#include "pitopt/propagators.hpp"

namespace pitopt {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Immutable per-run problem pieces shared by every iteration.
struct Problem {
  Mesh mesh;
  TimeGrid grid;
  FilterOperator filter;
  HeatLoad load;

  Problem(const OptimizationConfig& cfg)
      : mesh(build_mesh(cfg.nx, cfg.ny, cfg.side, cfg.dirichlet)),
        grid(TimeGrid::create(cfg.t_final, cfg.n_fine, cfg.n_coarse)),
        filter(build_filter(mesh, cfg.filter_radius)),
        load(mesh, cfg.load) {}
};

void validate(const OptimizationConfig& cfg) {
  if (cfg.i_max < 1) throw ConfigError("optimize: i_max must be >= 1");
  if (!(cfg.a_max > 0.0 && cfg.a_max < 1.0)) throw ConfigError("optimize: a_max must lie in (0,1)");
  if (cfg.power < 2 || cfg.power % 2 != 0) throw ConfigError("optimize: p must be even and >= 2");
  if (cfg.workers < 0) throw ConfigError("optimize: workers must be >= 0");
}

// Sequential primal solve of the standard objective on the given design and
// system; used for true-objective evaluations.
double sequential_theta(const Problem& prob, const SystemMatrices& sys,
                        const ObjectiveParams& objective, Trajectory& scratch) {
  ObjectiveParams standard = objective;
  standard.mode = ObjectiveMode::standard;
  const PrimalContext ctx =
      make_primal_context(sys, prob.grid, prob.load, standard, prob.mesh.n_elements());
  return sequential_primal(ctx, scratch).back().theta;
}

}  // namespace

SolverScheme scheme_for(RunMode mode) {
  switch (mode) {
    case RunMode::sequential:
      return {false, CoarseMode::normal, ObjectiveMode::standard};
    case RunMode::oneshot:
      return {true, CoarseMode::normal, ObjectiveMode::standard};
    case RunMode::plt:
    default:
      return {true, CoarseMode::zero, ObjectiveMode::modified};
  }
}

double initial_uniform_chi(const ProjectionParams& projection, double a_max) {
  double lo = 0.0;
  double hi = 1.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (project_value(mid, projection) < a_max) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

RunReport optimize(const OptimizationConfig& config) {
  return optimize_scheme(config, scheme_for(config.mode));
}

RunReport optimize_scheme(const OptimizationConfig& config, const SolverScheme& scheme) {
  validate(config);
  const Problem prob(config);
  const Mesh& mesh = prob.mesh;
  const TimeGrid& grid = prob.grid;
  const Index ne = mesh.n_elements();
  const Index n_free = mesh.n_free();

  const int workers = scheme.use_parareal
                          ? (config.workers > 0 ? config.workers : config.n_coarse)
                          : 1;
  WorkerPool pool(workers);

  RunReport report;
  report.mode = config.mode;
  report.n_coarse = config.n_coarse;
  report.workers = workers;
  report.notes.push_back("filter: cone weights, truncated-neighborhood row renormalization");
  report.notes.push_back(
      "mma: constant-sharpness handling via move limit and clamped asymptotes; "
      "dual multiplier bisected against the nonlinear volume constraint");

  ObjectiveParams objective{config.power, scheme.objective_mode};
  DesignField design =
      make_design(Eigen::ArrayXd::Constant(ne, initial_uniform_chi(config.projection, config.a_max)),
                  prob.filter, config.projection);
  MmaOptimizer mma(ne, config.mma);

  Trajectory trajectory;
  trajectory.reset(n_free, grid.n_fine);

  const PrimalState zero_primal{Eigen::VectorXd::Zero(n_free), 0.0};
  const AdjointState zero_adjoint{Eigen::VectorXd::Zero(n_free), Eigen::ArrayXd::Zero(ne)};
  std::vector<PrimalState> prev_primal;
  std::vector<AdjointState> prev_adjoint;

  const auto oracle = [&](const Eigen::ArrayXd& candidate) {
    return volume_value(project(prob.filter.apply(candidate), config.projection), mesh) -
           config.a_max;
  };

  bool clamp_noted = false;

  for (int iter = 1; iter <= config.i_max; ++iter) {
    IterationRecord rec;
    rec.iteration = iter;

    const bool parareal_iter = scheme.use_parareal && iter >= 2;

    // --- primal phase (assembly and factorizations included) ---
    auto t_start = Clock::now();
    const MaterialFields mat = simp(design.chi_phys, config.material);
    const auto sys = std::make_unique<SystemMatrices>(
        assemble_system(mesh, mat.capacity, mat.conductivity));
    sys->factorization(grid.dt);
    if (parareal_iter) sys->factorization(grid.dtau);

    const PrimalContext pctx = make_primal_context(*sys, grid, prob.load, objective, ne);

    std::vector<PrimalState> primal_states;
    double coarse_seconds = 0.0;
    if (!parareal_iter) {
      pool.run(1, [&](int) { primal_states = sequential_primal(pctx, trajectory); });
    } else {
      PararealConfig pc;
      pc.n_chunks = grid.n_coarse;
      pc.iterations = 1;
      pc.direction = TimeDirection::forward;
      pc.record_intermediates = true;
      pc.coarse_mode = scheme.coarse_mode;
      pc.guess_mode = GuessMode::warm_restart;
      const FinePropagator<PrimalState> fine = [&](int chunk, const PrimalState& s, bool record) {
        return fine_primal(pctx, chunk, s, record ? &trajectory : nullptr);
      };
      const CoarsePropagator<PrimalState> coarse = [&](int chunk, const PrimalState& s) {
        return coarse_primal(pctx, chunk, s);
      };
      auto sol = run_parareal(fine, coarse, zero_primal, pc, pool, &prev_primal);
      for (int j = 0; j <= grid.n_coarse; ++j) {
        trajectory.store(grid.fine_of_coarse(j), sol.states[static_cast<size_t>(j)].temperature,
                         j == 0 ? Provenance::initial : Provenance::corrected_coarse);
      }
      coarse_seconds += sol.coarse_seconds();
      primal_states = std::move(sol.states);
    }
    const double theta_raw = primal_states.back().theta;
    rec.primal_seconds = seconds_since(t_start) - coarse_seconds;

    // --- adjoint phase ---
    t_start = Clock::now();
    AdjointContext actx = make_adjoint_context(*sys, grid, trajectory, mesh, objective, theta_raw,
                                               mat.d_capacity, mat.d_conductivity);
    std::vector<AdjointState> adjoint_states;
    double adjoint_coarse_seconds = 0.0;
    if (!parareal_iter) {
      pool.run(1, [&](int) { adjoint_states = sequential_adjoint(actx); });
    } else {
      PararealConfig ac;
      ac.n_chunks = grid.n_coarse;
      ac.iterations = 1;
      ac.direction = TimeDirection::reverse;
      ac.record_intermediates = false;
      ac.coarse_mode = scheme.coarse_mode;
      ac.guess_mode = GuessMode::warm_restart;
      const FinePropagator<AdjointState> fine = [&](int chunk, const AdjointState& s, bool) {
        return fine_adjoint(actx, chunk, s);
      };
      const CoarsePropagator<AdjointState> coarse = [&](int chunk, const AdjointState& s) {
        return coarse_adjoint(actx, chunk, s);
      };
      auto sol = run_parareal(fine, coarse, zero_adjoint, ac, pool, &prev_adjoint);
      adjoint_coarse_seconds = sol.coarse_seconds();
      adjoint_states = std::move(sol.states);
    }
    const Eigen::ArrayXd grad_raw = adjoint_states.front().sensitivity;
    rec.adjoint_seconds = seconds_since(t_start) - adjoint_coarse_seconds;
    rec.coarse_seconds = coarse_seconds + adjoint_coarse_seconds;

    // --- objective conversion and design update ---
    t_start = Clock::now();
    double theta_report;
    Eigen::ArrayXd grad_phys;
    if (scheme.objective_mode == ObjectiveMode::modified) {
      ConvertedObjective conv = convert_modified(theta_raw, grad_raw, config.power);
      theta_report = conv.theta;
      grad_phys = std::move(conv.grad);
      rec.modified_clamped = conv.clamped;
      if (conv.clamped && !clamp_noted) {
        std::ostringstream msg;
        msg << "modified objective clamped to zero at iteration " << iter;
        report.notes.push_back(msg.str());
        clamp_noted = true;
      }
    } else {
      theta_report = theta_raw;
      grad_phys = grad_raw;
    }
    rec.theta_estimate = theta_report;

    const Eigen::ArrayXd grad_chi =
        chain_rule_backward(grad_phys, design, prob.filter, config.projection);
    const VolumeFraction vol = volume_fraction(design, prob.filter, config.projection, mesh);
    const double mma_setup_seconds = seconds_since(t_start);

    // True objective of the design this iteration evaluated; never counted
    // towards the solver wall time.
    if (config.true_objective_policy == TrueObjectivePolicy::every_iteration) {
      if (!scheme.use_parareal) {
        rec.theta_true = theta_report;
      } else {
        double theta_true = 0.0;
        pool.run(1, [&](int) { theta_true = sequential_theta(prob, *sys, objective, trajectory); });
        rec.theta_true = theta_true;
      }
    }

    t_start = Clock::now();
    const Eigen::ArrayXd chi_new = mma.update(design.chi, theta_report, grad_chi,
                                              vol.value - config.a_max, vol.grad_chi, oracle);
    design = make_design(chi_new, prob.filter, config.projection);
    rec.mma_seconds = mma_setup_seconds + seconds_since(t_start);
    rec.volume = volume_value(design.chi_phys, mesh);

    if (config.record_design_history) report.design_history.push_back(design.chi);

    prev_primal = std::move(primal_states);
    prev_adjoint = std::move(adjoint_states);

    report.total_seconds +=
        rec.primal_seconds + rec.adjoint_seconds + rec.coarse_seconds + rec.mma_seconds;
    report.history.push_back(std::move(rec));
  }

  // Final design and its true objective (one sequential sweep, excluded from
  // the solver wall time).
  {
    const MaterialFields mat = simp(design.chi_phys, config.material);
    const auto sys = std::make_unique<SystemMatrices>(
        assemble_system(mesh, mat.capacity, mat.conductivity));
    double theta_true = 0.0;
    pool.run(1, [&](int) {
      theta_true = sequential_theta(prob, *sys, ObjectiveParams{config.power, ObjectiveMode::standard},
                                    trajectory);
    });
    report.final_true_objective = theta_true;
  }
  report.final_chi = design.chi;
  report.final_chi_phys = design.chi_phys;
  return report;
}

double true_objective(const DesignField& design, const OptimizationConfig& config) {
  const Problem prob(config);
  const MaterialFields mat = simp(design.chi_phys, config.material);
  const SystemMatrices sys =
      assemble_system(prob.mesh, mat.capacity, mat.conductivity);
  Trajectory scratch;
  return sequential_theta(prob, sys, ObjectiveParams{config.power, ObjectiveMode::standard},
                          scratch);
}

GradCheckResult gradient_check(const OptimizationConfig& config, unsigned long long seed,
                               double fd_step, double source_scale) {
  const Problem prob(config);
  const Mesh& mesh = prob.mesh;
  const Index ne = mesh.n_elements();
  const ObjectiveParams objective{config.power, ObjectiveMode::standard};

  // Deterministic uniforms in [0.05, 0.95]; the projection chain is smooth
  // there in every direction the finite differences probe.
  std::mt19937_64 rng(seed);
  Eigen::ArrayXd chi(ne);
  for (Index e = 0; e < ne; ++e) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    chi[e] = 0.05 + 0.9 * u;
  }

  const auto theta_of = [&](const Eigen::ArrayXd& raw) {
    const DesignField d = make_design(raw, prob.filter, config.projection);
    const MaterialFields m = simp(d.chi_phys, config.material);
    const SystemMatrices sys = assemble_system(mesh, m.capacity, m.conductivity);
    const PrimalContext pctx = make_primal_context(sys, prob.grid, prob.load, objective, ne);
    Trajectory scratch;
    return sequential_primal(pctx, scratch).back().theta;
  };

  GradCheckResult result;

  Eigen::ArrayXd grad_adj;
  {
    const DesignField d = make_design(chi, prob.filter, config.projection);
    const MaterialFields m = simp(d.chi_phys, config.material);
    const SystemMatrices sys = assemble_system(mesh, m.capacity, m.conductivity);
    const PrimalContext pctx = make_primal_context(sys, prob.grid, prob.load, objective, ne);
    Trajectory traj;
    const double theta = sequential_primal(pctx, traj).back().theta;
    AdjointContext actx = make_adjoint_context(sys, prob.grid, traj, mesh, objective, theta,
                                               m.d_capacity, m.d_conductivity);
    actx.source_scale = source_scale;
    const Eigen::ArrayXd g1 = sequential_adjoint(actx).front().sensitivity;
    grad_adj = chain_rule_backward(g1, d, prob.filter, config.projection);
  }

  Eigen::ArrayXd grad_fd(ne);
  for (Index e = 0; e < ne; ++e) {
    Eigen::ArrayXd probe = chi;
    probe[e] = chi[e] + fd_step;
    const double up = theta_of(probe);
    probe[e] = chi[e] - fd_step;
    const double down = theta_of(probe);
    grad_fd[e] = (up - down) / (2.0 * fd_step);
  }

  result.adjoint_norm = grad_adj.abs().maxCoeff();
  result.fd_norm = grad_fd.abs().maxCoeff();
  if (result.fd_norm == 0.0) {
    result.max_rel_error = result.adjoint_norm == 0.0 ? 0.0 : 1.0;
  } else {
    result.max_rel_error = (grad_adj - grad_fd).abs().maxCoeff() / result.fd_norm;
  }
  return result;
}

BenchmarkTable preliminary_benchmark(const OptimizationConfig& config,
                                     const Eigen::ArrayXd& chi_fixed,
                                     const std::vector<int>& n_tau_list,
                                     const std::vector<int>& k_list) {
  validate(config);
  OptimizationConfig cfg = config;

  BenchmarkTable table;

  // Sequential reference on the fixed design, solved and timed inside a
  // one-worker pool. A single-chunk grid makes the sweeps plain fine sweeps.
  cfg.n_coarse = 1;
  const Problem ref(cfg);
  const DesignField design = make_design(chi_fixed, ref.filter, cfg.projection);
  const MaterialFields mat = simp(design.chi_phys, cfg.material);
  const ObjectiveParams objective{cfg.power, ObjectiveMode::standard};

  double theta_seq = 0.0;
  Eigen::ArrayXd grad_seq;
  double t_sequential = 0.0;
  {
    const SystemMatrices sys = assemble_system(ref.mesh, mat.capacity, mat.conductivity);
    sys.factorization(ref.grid.dt);
    const PrimalContext pctx =
        make_primal_context(sys, ref.grid, ref.load, objective, ref.mesh.n_elements());
    Trajectory traj;
    WorkerPool single(1);
    std::vector<PrimalState> primal_states;
    std::vector<AdjointState> adjoint_states;
    const auto t0 = Clock::now();
    single.run(1, [&](int) { primal_states = sequential_primal(pctx, traj); });
    theta_seq = primal_states.back().theta;
    AdjointContext actx = make_adjoint_context(sys, ref.grid, traj, ref.mesh, objective, theta_seq,
                                               mat.d_capacity, mat.d_conductivity);
    single.run(1, [&](int) { adjoint_states = sequential_adjoint(actx); });
    t_sequential = seconds_since(t0);
    grad_seq = chain_rule_backward(adjoint_states.front().sensitivity, design, ref.filter,
                                   cfg.projection);
  }
  table.theta_sequential = theta_seq;
  const double grad_seq_norm = std::sqrt(grad_seq.square().sum());

  for (int n_tau : n_tau_list) {
    cfg.n_coarse = n_tau;
    const TimeGrid grid = TimeGrid::create(cfg.t_final, cfg.n_fine, n_tau);  // validates divisor
    const Problem prob(cfg);
    const SystemMatrices sys = assemble_system(prob.mesh, mat.capacity, mat.conductivity);
    sys.factorization(grid.dt);
    sys.factorization(grid.dtau);
    const PrimalContext pctx =
        make_primal_context(sys, grid, prob.load, objective, prob.mesh.n_elements());
    Trajectory traj;
    traj.reset(prob.mesh.n_free(), grid.n_fine);
    WorkerPool pool(n_tau);
    const PrimalState zero_primal{Eigen::VectorXd::Zero(prob.mesh.n_free()), 0.0};
    const AdjointState zero_adjoint{Eigen::VectorXd::Zero(prob.mesh.n_free()),
                                    Eigen::ArrayXd::Zero(prob.mesh.n_elements())};

    for (int k : k_list) {
      BenchmarkCell cell;
      cell.n_tau = n_tau;
      cell.k = k;
      cell.sequential_seconds = t_sequential;

      const auto t0 = Clock::now();
      PararealConfig pc;
      pc.n_chunks = n_tau;
      pc.iterations = k;
      pc.direction = TimeDirection::forward;
      pc.record_intermediates = true;
      const FinePropagator<PrimalState> fine = [&](int chunk, const PrimalState& s, bool record) {
        return fine_primal(pctx, chunk, s, record ? &traj : nullptr);
      };
      const CoarsePropagator<PrimalState> coarse = [&](int chunk, const PrimalState& s) {
        return coarse_primal(pctx, chunk, s);
      };
      auto primal_sol = run_parareal(fine, coarse, zero_primal, pc, pool);
      for (int j = 0; j <= n_tau; ++j) {
        traj.store(grid.fine_of_coarse(j), primal_sol.states[static_cast<size_t>(j)].temperature,
                   j == 0 ? Provenance::initial : Provenance::corrected_coarse);
      }
      const double theta_par = primal_sol.states.back().theta;

      AdjointContext actx = make_adjoint_context(sys, grid, traj, prob.mesh, objective, theta_par,
                                                 mat.d_capacity, mat.d_conductivity);
      PararealConfig ac = pc;
      ac.direction = TimeDirection::reverse;
      ac.record_intermediates = false;
      const FinePropagator<AdjointState> fine_a = [&](int chunk, const AdjointState& s, bool) {
        return fine_adjoint(actx, chunk, s);
      };
      const CoarsePropagator<AdjointState> coarse_a = [&](int chunk, const AdjointState& s) {
        return coarse_adjoint(actx, chunk, s);
      };
      auto adjoint_sol = run_parareal(fine_a, coarse_a, zero_adjoint, ac, pool);
      cell.parareal_seconds = seconds_since(t0);

      const Eigen::ArrayXd grad_par = chain_rule_backward(
          adjoint_sol.states.front().sensitivity, design, prob.filter, cfg.projection);

      cell.err_obj = std::abs(theta_par - theta_seq) / std::abs(theta_seq);
      cell.err_sens = std::sqrt((grad_par - grad_seq).square().sum()) / grad_seq_norm;
      cell.speedup = cell.sequential_seconds / cell.parareal_seconds;
      table.cells.push_back(cell);
    }
  }
  return table;
}

}  // namespace pitopt
