#pragma once

#include <algorithm>
#include <chrono>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "pitopt/errors.hpp"
#include "pitopt/worker_pool.hpp"

namespace pitopt {

enum class TimeDirection { forward, reverse };
enum class CoarseMode { normal, zero };
enum class GuessMode { coarse_sweep, warm_restart };

struct PararealConfig {
  int n_chunks = 1;    // N_tau
  int iterations = 1;  // applied correction sweeps, k_max
  TimeDirection direction = TimeDirection::forward;
  bool record_intermediates = false;
  CoarseMode coarse_mode = CoarseMode::normal;
  GuessMode guess_mode = GuessMode::coarse_sweep;
};

struct PararealIterationDiag {
  double correction_norm = 0.0;  // max state change over the sweep
  double fine_seconds = 0.0;
  double coarse_seconds = 0.0;
};

template <class State>
struct PararealSolution {
  std::vector<State> states;  // n_chunks + 1 coarse-point states
  std::vector<PararealIterationDiag> iterations;

  double fine_seconds() const {
    double s = 0;
    for (const auto& d : iterations) s += d.fine_seconds;
    return s;
  }
  double coarse_seconds() const {
    double s = 0;
    for (const auto& d : iterations) s += d.coarse_seconds;
    return s;
  }
};

/// Fine propagator: advances one chunk; `record` asks it to publish its
/// intermediate fields (the modified-Parareal behaviour). Forward chunks
/// map state index i -> i+1 for i in [0, n_chunks); reverse chunks map
/// i -> i-1 for i in [1, n_chunks].
template <class State>
using FinePropagator = std::function<State(int chunk, const State&, bool record)>;

template <class State>
using CoarsePropagator = std::function<State(int chunk, const State&)>;

/// Parareal over an abstract state. The fine evaluations of one iteration run
/// concurrently on the pool (one chunk per task, statically assigned); the
/// coarse sweep and correction combination run sequentially on the caller's
/// thread, so repeated runs are bitwise reproducible. The anchored end (the
/// initial state forward, the terminal state reverse) is pinned to `anchor`
/// every iteration. In zero coarse mode the update degenerates to
/// states[next] = F(states_prev[current]), the local-in-time rule.
template <class State>
PararealSolution<State> run_parareal(const FinePropagator<State>& fine,
                                     const CoarsePropagator<State>& coarse,
                                     const State& anchor, const PararealConfig& config,
                                     WorkerPool& pool,
                                     const std::vector<State>* warm_start = nullptr) {
  using Clock = std::chrono::steady_clock;
  const int n = config.n_chunks;
  if (n < 1) throw ConfigError("run_parareal: n_chunks must be >= 1");
  if (config.iterations < 0) throw ConfigError("run_parareal: iterations must be >= 0");
  const bool fwd = config.direction == TimeDirection::forward;
  const int anchor_index = fwd ? 0 : n;

  auto apply_coarse = [&](int chunk, const State& s) -> State {
    if (config.coarse_mode == CoarseMode::zero) return zero_like(anchor);
    return coarse(chunk, s);
  };

  PararealSolution<State> sol;
  sol.states.assign(static_cast<size_t>(n) + 1, zero_like(anchor));

  if (config.guess_mode == GuessMode::warm_restart) {
    if (warm_start == nullptr || static_cast<int>(warm_start->size()) != n + 1) {
      throw ConfigError("run_parareal: warm restart requires a previous solution with " +
                        std::to_string(n + 1) + " states");
    }
    sol.states = *warm_start;
    sol.states[static_cast<size_t>(anchor_index)] = anchor;
  } else {
    sol.states[static_cast<size_t>(anchor_index)] = anchor;
    if (fwd) {
      for (int i = 0; i < n; ++i) {
        sol.states[static_cast<size_t>(i) + 1] = apply_coarse(i, sol.states[static_cast<size_t>(i)]);
      }
    } else {
      for (int i = n; i >= 1; --i) {
        sol.states[static_cast<size_t>(i) - 1] = apply_coarse(i, sol.states[static_cast<size_t>(i)]);
      }
    }
  }

  std::vector<State> fine_results(static_cast<size_t>(n), zero_like(anchor));
  std::vector<State> next(static_cast<size_t>(n) + 1, zero_like(anchor));

  for (int k = 0; k < config.iterations; ++k) {
    PararealIterationDiag diag;

    const auto t0 = Clock::now();
    pool.run(n, [&](int j) {
      // Forward: task j propagates states[j] across chunk j. Reverse: task j
      // propagates states[j+1] across chunk j+1.
      const int chunk = fwd ? j : j + 1;
      const int input = fwd ? j : j + 1;
      fine_results[static_cast<size_t>(j)] =
          fine(chunk, sol.states[static_cast<size_t>(input)], config.record_intermediates);
    });
    const auto t1 = Clock::now();
    diag.fine_seconds = std::chrono::duration<double>(t1 - t0).count();

    next[static_cast<size_t>(anchor_index)] = anchor;
    if (fwd) {
      for (int i = 0; i < n; ++i) {
        if (config.coarse_mode == CoarseMode::zero) {
          next[static_cast<size_t>(i) + 1] = fine_results[static_cast<size_t>(i)];
        } else {
          next[static_cast<size_t>(i) + 1] = coarse(i, next[static_cast<size_t>(i)]) +
                                             fine_results[static_cast<size_t>(i)] -
                                             coarse(i, sol.states[static_cast<size_t>(i)]);
        }
      }
    } else {
      for (int i = n; i >= 1; --i) {
        if (config.coarse_mode == CoarseMode::zero) {
          next[static_cast<size_t>(i) - 1] = fine_results[static_cast<size_t>(i) - 1];
        } else {
          next[static_cast<size_t>(i) - 1] = coarse(i, next[static_cast<size_t>(i)]) +
                                             fine_results[static_cast<size_t>(i) - 1] -
                                             coarse(i, sol.states[static_cast<size_t>(i)]);
        }
      }
    }
    const auto t2 = Clock::now();
    diag.coarse_seconds = std::chrono::duration<double>(t2 - t1).count();

    double norm = 0.0;
    for (int i = 0; i <= n; ++i) {
      if (i == anchor_index) continue;
      norm = std::max(norm, state_norm(next[static_cast<size_t>(i)] - sol.states[static_cast<size_t>(i)]));
    }
    diag.correction_norm = norm;

    sol.states.swap(next);
    sol.iterations.push_back(diag);
  }
  return sol;
}

}  // namespace pitopt
