#pragma once

#include <Eigen/Core>
#include <vector>

#include "pitopt/assembly.hpp"
#include "pitopt/mesh.hpp"
#include "pitopt/states.hpp"

namespace pitopt {

/// Shared read-only data for the forward propagators. All fields refer to
/// objects owned by the caller; propagators are pure given this context and
/// may run concurrently on disjoint states.
struct PrimalContext {
  const SystemMatrices* system = nullptr;
  const TimeGrid* grid = nullptr;
  const HeatLoad* load = nullptr;
  ObjectiveParams objective;
  Index n_elements = 0;

  std::vector<double> load_values;  // q(t_n) for n = 0..N_t
  double fine_weight = 0.0;         // (N_t * Ne)^(-1/p)
  double coarse_weight = 0.0;       // (N_tau * Ne)^(-1/p)
  double fine_pow = 0.0;            // 1 / (N_t * Ne)
  double coarse_pow = 0.0;          // 1 / (N_tau * Ne)
};

PrimalContext make_primal_context(const SystemMatrices& system, const TimeGrid& grid,
                                  const HeatLoad& load, const ObjectiveParams& objective,
                                  Index n_elements);

/// One backward Euler step targeting t_n plus the objective accumulation.
PrimalState primal_step(const PrimalContext& ctx, const PrimalState& state, int fine_index);

/// M primal steps across coarse chunk [tau_chunk, tau_chunk+1]. When `record`
/// is given, the M-1 intermediate temperatures are stored into it.
PrimalState fine_primal(const PrimalContext& ctx, int chunk, PrimalState state,
                        Trajectory* record);

/// Single step of size dtau across the chunk, objective normalized by N_tau.
PrimalState coarse_primal(const PrimalContext& ctx, int chunk, const PrimalState& state);

/// Full sequential sweep; fills the trajectory at every fine point and
/// returns the states at the coarse points (element 0 is the zero initial
/// condition). Chaining fine_primal over all chunks reproduces this bit for
/// bit.
std::vector<PrimalState> sequential_primal(const PrimalContext& ctx, Trajectory& trajectory);

/// Shared read-only data for the reverse (adjoint) propagators.
struct AdjointContext {
  const SystemMatrices* system = nullptr;
  const TimeGrid* grid = nullptr;
  const Trajectory* trajectory = nullptr;
  const Mesh* mesh = nullptr;
  ObjectiveParams objective;
  double theta_total = 0.0;  // converged objective feeding the source term
  Index n_elements = 0;

  ElementMatrices reference;         // unit element matrices
  Eigen::ArrayXd d_capacity;         // dC_e/dchi_phys scale per element
  Eigen::ArrayXd d_conductivity;     // dK_e/dchi_phys scale per element
  double source_scale = 1.0;         // test hook; leave at 1
};

AdjointContext make_adjoint_context(const SystemMatrices& system, const TimeGrid& grid,
                                    const Trajectory& trajectory, const Mesh& mesh,
                                    const ObjectiveParams& objective, double theta_total,
                                    const Eigen::ArrayXd& d_capacity,
                                    const Eigen::ArrayXd& d_conductivity);

/// Right-hand side of the adjoint solve at a stored temperature:
/// standard mode (Theta^(1-p)/Ne) T^(p-1), modified mode (p/Ne) T^(p-1).
Eigen::VectorXd adjoint_source(const AdjointContext& ctx, const Eigen::VectorXd& temperature);

/// One reverse step: from the state at fine index n+1 to index n. The
/// sensitivity update applies the element derivative matrices locally,
/// never assembling a global derivative operator.
AdjointState adjoint_step(const AdjointContext& ctx, const AdjointState& state, int fine_index);

/// M reverse steps across chunk [tau_chunk-1, tau_chunk], chunk in [1, N_tau].
AdjointState fine_adjoint(const AdjointContext& ctx, int chunk, AdjointState state);

/// Single reverse step of size dtau; reads the trajectory only at the coarse
/// points M*chunk and M*(chunk-1), sensitivity normalized by N_tau.
AdjointState coarse_adjoint(const AdjointContext& ctx, int chunk, const AdjointState& state);

/// Full reverse sweep; returns states at the coarse anchors (element N_tau is
/// the zero terminal condition, element 0 carries the total gradient g_1).
std::vector<AdjointState> sequential_adjoint(const AdjointContext& ctx);

/// Recovers the power-mean objective and its gradient from the modified
/// (p-th power) pair. A negative modified objective is clamped to zero and
/// flagged.
struct ConvertedObjective {
  double theta = 0.0;
  Eigen::ArrayXd grad;
  bool clamped = false;
};

ConvertedObjective convert_modified(double theta_mod, const Eigen::ArrayXd& grad_mod, int p);

}  // namespace pitopt
