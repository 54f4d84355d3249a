#include "pitopt/propagators.hpp"

#include <cmath>

namespace pitopt {

namespace {

// Per-element lambda^T (dC_e dT + dK_e T_n) with the element matrices applied
// locally; constrained corners contribute zero.
Eigen::ArrayXd element_sensitivity(const AdjointContext& ctx, const Eigen::VectorXd& lambda,
                                   const Eigen::VectorXd& t_now, const Eigen::VectorXd& t_prev,
                                   double step) {
  const Mesh& mesh = *ctx.mesh;
  Eigen::ArrayXd out(ctx.n_elements);
  Eigen::Vector4d le, tn, tp;
  for (Index e = 0; e < ctx.n_elements; ++e) {
    for (int a = 0; a < 4; ++a) {
      const Index f = mesh.element_free_dofs(e, a);
      le[a] = f >= 0 ? lambda[f] : 0.0;
      tn[a] = f >= 0 ? t_now[f] : 0.0;
      tp[a] = f >= 0 ? t_prev[f] : 0.0;
    }
    const Eigen::Vector4d rate = (tn - tp) / step;
    out[e] = ctx.d_capacity[e] * le.dot(ctx.reference.capacity * rate) +
             ctx.d_conductivity[e] * le.dot(ctx.reference.conduction * tn);
  }
  return out;
}

double accumulate_objective(const PrimalContext& ctx, double theta_prev,
                            const Eigen::VectorXd& temperature, bool coarse) {
  double theta;
  if (ctx.objective.mode == ObjectiveMode::standard) {
    const double r = lp_norm(temperature, ctx.objective.power) *
                     (coarse ? ctx.coarse_weight : ctx.fine_weight);
    theta = p_accumulate(theta_prev, r, ctx.objective.power);
  } else {
    theta = theta_prev + lp_pow_weighted(temperature, ctx.objective.power,
                                         coarse ? ctx.coarse_pow : ctx.fine_pow);
  }
  if (!std::isfinite(theta)) {
    throw NumericalError("primal propagator produced a non-finite cumulative objective");
  }
  return theta;
}

}  // namespace

PrimalContext make_primal_context(const SystemMatrices& system, const TimeGrid& grid,
                                  const HeatLoad& load, const ObjectiveParams& objective,
                                  Index n_elements) {
  if (objective.power < 2 || objective.power % 2 != 0) {
    throw ConfigError("objective power must be even and >= 2");
  }
  PrimalContext ctx;
  ctx.system = &system;
  ctx.grid = &grid;
  ctx.load = &load;
  ctx.objective = objective;
  ctx.n_elements = n_elements;
  ctx.load_values.resize(static_cast<size_t>(grid.n_fine) + 1);
  for (int n = 0; n <= grid.n_fine; ++n) {
    ctx.load_values[static_cast<size_t>(n)] = load.value(grid.t(n));
  }
  ctx.fine_pow = 1.0 / (static_cast<double>(grid.n_fine) * static_cast<double>(n_elements));
  ctx.coarse_pow = 1.0 / (static_cast<double>(grid.n_coarse) * static_cast<double>(n_elements));
  ctx.fine_weight = std::pow(ctx.fine_pow, 1.0 / objective.power);
  ctx.coarse_weight = std::pow(ctx.coarse_pow, 1.0 / objective.power);
  return ctx;
}

PrimalState primal_step(const PrimalContext& ctx, const PrimalState& state, int fine_index) {
  const Eigen::VectorXd load =
      ctx.load_values[static_cast<size_t>(fine_index)] * ctx.load->unit_nodal();
  PrimalState next;
  next.temperature = backward_euler_step(*ctx.system, state.temperature, load, ctx.grid->dt);
  next.theta = accumulate_objective(ctx, state.theta, next.temperature, /*coarse=*/false);
  return next;
}

PrimalState fine_primal(const PrimalContext& ctx, int chunk, PrimalState state,
                        Trajectory* record) {
  const int m = ctx.grid->coarsening;
  for (int s = 1; s <= m; ++s) {
    const int n = chunk * m + s;
    state = primal_step(ctx, state, n);
    if (record != nullptr && s < m) {
      record->store(n, state.temperature, Provenance::fine_intermediate);
    }
  }
  return state;
}

PrimalState coarse_primal(const PrimalContext& ctx, int chunk, const PrimalState& state) {
  const int target = (chunk + 1) * ctx.grid->coarsening;
  const Eigen::VectorXd load =
      ctx.load_values[static_cast<size_t>(target)] * ctx.load->unit_nodal();
  PrimalState next;
  next.temperature = backward_euler_step(*ctx.system, state.temperature, load, ctx.grid->dtau);
  next.theta = accumulate_objective(ctx, state.theta, next.temperature, /*coarse=*/true);
  return next;
}

std::vector<PrimalState> sequential_primal(const PrimalContext& ctx, Trajectory& trajectory) {
  const TimeGrid& grid = *ctx.grid;
  const Index n_free = ctx.load->unit_nodal().size();
  trajectory.reset(n_free, grid.n_fine);

  std::vector<PrimalState> coarse_states;
  coarse_states.reserve(static_cast<size_t>(grid.n_coarse) + 1);

  PrimalState state{Eigen::VectorXd::Zero(n_free), 0.0};
  coarse_states.push_back(state);
  for (int n = 1; n <= grid.n_fine; ++n) {
    state = primal_step(ctx, state, n);
    trajectory.store(n, state.temperature, Provenance::sequential);
    if (n % grid.coarsening == 0) coarse_states.push_back(state);
  }
  return coarse_states;
}

AdjointContext make_adjoint_context(const SystemMatrices& system, const TimeGrid& grid,
                                    const Trajectory& trajectory, const Mesh& mesh,
                                    const ObjectiveParams& objective, double theta_total,
                                    const Eigen::ArrayXd& d_capacity,
                                    const Eigen::ArrayXd& d_conductivity) {
  AdjointContext ctx;
  ctx.system = &system;
  ctx.grid = &grid;
  ctx.trajectory = &trajectory;
  ctx.mesh = &mesh;
  ctx.objective = objective;
  ctx.theta_total = theta_total;
  ctx.n_elements = mesh.n_elements();
  ctx.reference = reference_element(mesh.h, mesh.depth);
  ctx.d_capacity = d_capacity;
  ctx.d_conductivity = d_conductivity;
  return ctx;
}

Eigen::VectorXd adjoint_source(const AdjointContext& ctx, const Eigen::VectorXd& temperature) {
  const int p = ctx.objective.power;
  const double ne = static_cast<double>(ctx.n_elements);
  Eigen::VectorXd source;
  if (ctx.objective.mode == ObjectiveMode::standard) {
    if (ctx.theta_total <= 0.0) {
      if (temperature.cwiseAbs().maxCoeff() > 0.0) {
        throw NumericalError(
            "adjoint_source: non-positive total objective with a nonzero temperature field");
      }
      return Eigen::VectorXd::Zero(temperature.size());
    }
    // Theta^(1-p) T^(p-1) == (T/Theta)^(p-1), which keeps the powers tame.
    source = (temperature.array() / ctx.theta_total).pow(p - 1).matrix() / ne;
  } else {
    source = static_cast<double>(p) / ne * temperature.array().pow(p - 1).matrix();
  }
  if (!source.allFinite()) {
    throw NumericalError("adjoint_source: non-finite source term");
  }
  return ctx.source_scale * source;
}

AdjointState adjoint_step(const AdjointContext& ctx, const AdjointState& state, int fine_index) {
  const Trajectory& traj = *ctx.trajectory;
  if (fine_index < 1 || fine_index > traj.n_fine()) {
    throw NumericalError("adjoint_step: trajectory entry out of range");
  }
  const Eigen::VectorXd source = adjoint_source(ctx, traj.column(fine_index));
  AdjointState next;
  next.lambda = adjoint_euler_step(*ctx.system, state.lambda, source, ctx.grid->dt);
  next.sensitivity =
      state.sensitivity -
      element_sensitivity(ctx, next.lambda, traj.column(fine_index), traj.column(fine_index - 1),
                          ctx.grid->dt) /
          static_cast<double>(ctx.grid->n_fine);
  return next;
}

AdjointState fine_adjoint(const AdjointContext& ctx, int chunk, AdjointState state) {
  const int m = ctx.grid->coarsening;
  for (int n = chunk * m; n > (chunk - 1) * m; --n) {
    state = adjoint_step(ctx, state, n);
  }
  return state;
}

AdjointState coarse_adjoint(const AdjointContext& ctx, int chunk, const AdjointState& state) {
  const Trajectory& traj = *ctx.trajectory;
  const int m = ctx.grid->coarsening;
  const int hi = chunk * m;
  const int lo = (chunk - 1) * m;
  const Eigen::VectorXd source = adjoint_source(ctx, traj.column(hi));
  AdjointState next;
  next.lambda = adjoint_euler_step(*ctx.system, state.lambda, source, ctx.grid->dtau);
  next.sensitivity =
      state.sensitivity -
      element_sensitivity(ctx, next.lambda, traj.column(hi), traj.column(lo), ctx.grid->dtau) /
          static_cast<double>(ctx.grid->n_coarse);
  return next;
}

std::vector<AdjointState> sequential_adjoint(const AdjointContext& ctx) {
  const TimeGrid& grid = *ctx.grid;
  const Index n_free = ctx.system->capacity().rows();
  std::vector<AdjointState> states(static_cast<size_t>(grid.n_coarse) + 1);
  AdjointState state{Eigen::VectorXd::Zero(n_free), Eigen::ArrayXd::Zero(ctx.n_elements)};
  states[static_cast<size_t>(grid.n_coarse)] = state;
  for (int chunk = grid.n_coarse; chunk >= 1; --chunk) {
    state = fine_adjoint(ctx, chunk, std::move(state));
    states[static_cast<size_t>(chunk - 1)] = state;
  }
  return states;
}

ConvertedObjective convert_modified(double theta_mod, const Eigen::ArrayXd& grad_mod, int p) {
  ConvertedObjective out;
  double tm = theta_mod;
  if (tm < 0.0) {
    tm = 0.0;
    out.clamped = true;
  }
  out.theta = std::pow(tm, 1.0 / p);
  if (out.theta > 0.0) {
    out.grad = grad_mod * (std::pow(out.theta, 1.0 - p) / p);
  } else {
    out.grad = Eigen::ArrayXd::Zero(grad_mod.size());
  }
  return out;
}

}  // namespace pitopt
