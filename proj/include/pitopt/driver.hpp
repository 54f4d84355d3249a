#pragma once

#include <Eigen/Core>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pitopt/assembly.hpp"
#include "pitopt/design.hpp"
#include "pitopt/mesh.hpp"
#include "pitopt/mma.hpp"
#include "pitopt/parareal.hpp"
#include "pitopt/states.hpp"

namespace pitopt {

enum class RunMode { sequential, oneshot, plt };
enum class TrueObjectivePolicy { final_only, every_iteration };

struct OptimizationConfig {
  int nx = 100;
  int ny = 100;
  double side = 1.0;
  DirichletSpan dirichlet{0.45, 0.55};

  double t_final = 1.0;
  int n_fine = 480;    // N_t
  int n_coarse = 16;   // N_tau

  MaterialModel material{};
  ProjectionParams projection{};
  double filter_radius = 0.03;
  int power = 20;

  double a_max = 0.3;
  int i_max = 300;
  RunMode mode = RunMode::oneshot;
  int workers = 0;  // 0 -> n_coarse
  TrueObjectivePolicy true_objective_policy = TrueObjectivePolicy::final_only;

  std::function<double(double)> load = ramped_cosine_load;
  MmaConfig mma{};

  bool record_design_history = false;  // keep chi after every update (tests)
};

/// How one optimization iteration obtains states: sequential sweeps or one
/// warm-restarted Parareal iteration, with which coarse propagator and which
/// cumulative objective. The run modes are fixed combinations of these.
struct SolverScheme {
  bool use_parareal = false;
  CoarseMode coarse_mode = CoarseMode::normal;
  ObjectiveMode objective_mode = ObjectiveMode::standard;
};

SolverScheme scheme_for(RunMode mode);

struct IterationRecord {
  int iteration = 0;
  double theta_estimate = 0.0;
  std::optional<double> theta_true;
  double volume = 0.0;  // volume fraction of the updated design
  double primal_seconds = 0.0;
  double adjoint_seconds = 0.0;
  double coarse_seconds = 0.0;
  double mma_seconds = 0.0;
  bool modified_clamped = false;
};

struct RunReport {
  RunMode mode = RunMode::sequential;
  int n_coarse = 0;
  int workers = 0;
  std::vector<IterationRecord> history;
  Eigen::ArrayXd final_chi;
  Eigen::ArrayXd final_chi_phys;
  double final_true_objective = 0.0;
  double total_seconds = 0.0;  // solver phases only; true-objective sweeps excluded
  std::vector<Eigen::ArrayXd> design_history;
  std::vector<std::string> notes;
};

/// Runs the optimization loop of the configured mode. Iteration 1 always
/// solves both problems sequentially; later iterations of the Parareal-based
/// modes apply one warm-restarted Parareal iteration per problem (modified
/// Parareal forward for the primal, vanilla reversed for the adjoint).
RunReport optimize(const OptimizationConfig& config);

/// Same loop with the scheme chosen explicitly (the mode enum only selects
/// bookkeeping defaults); lets tests combine e.g. the one-shot path with a
/// zero coarse propagator.
RunReport optimize_scheme(const OptimizationConfig& config, const SolverScheme& scheme);

/// Full sequential primal sweep on the given design; returns theta_{N_t}.
double true_objective(const DesignField& design, const OptimizationConfig& config);

/// Uniform raw design value whose projected density equals a_max, found by
/// bisecting the projection (the filter maps uniform fields to themselves).
double initial_uniform_chi(const ProjectionParams& projection, double a_max);

struct GradCheckResult {
  double max_rel_error = 0.0;  // max |g_adj - g_fd| / max|g_fd|
  double adjoint_norm = 0.0;
  double fd_norm = 0.0;
};

/// Compares the adjoint gradient of the full chain (filter, projection, SIMP,
/// transient solve, objective) against central finite differences on a random
/// design drawn from the given seed. `source_scale` perturbs the adjoint
/// source and exists so tests can confirm the check catches a broken adjoint.
GradCheckResult gradient_check(const OptimizationConfig& config, unsigned long long seed,
                               double fd_step = 1e-5, double source_scale = 1.0);

struct BenchmarkCell {
  int n_tau = 0;
  int k = 0;
  double err_obj = 0.0;
  double err_sens = 0.0;
  double parareal_seconds = 0.0;
  double sequential_seconds = 0.0;
  double speedup = 0.0;
};

struct BenchmarkTable {
  std::vector<BenchmarkCell> cells;
  double theta_sequential = 0.0;
};

/// Accuracy/speedup sweep on a fixed design: for every (N_tau, k) the primal
/// is solved with modified Parareal and the adjoint with reversed vanilla
/// Parareal, both from coarse-sweep guesses, and compared against the
/// sequential reference solved inside a one-worker pool.
BenchmarkTable preliminary_benchmark(const OptimizationConfig& config,
                                     const Eigen::ArrayXd& chi_fixed,
                                     const std::vector<int>& n_tau_list,
                                     const std::vector<int>& k_list);

}  // namespace pitopt
