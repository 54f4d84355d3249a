#include <doctest.h>

#include <cmath>

#include "pitopt/design.hpp"
#include "pitopt/parareal.hpp"
#include "pitopt/propagators.hpp"

namespace pitopt {

// Minimal state for engine-level tests: one scalar.
struct ScalarState {
  double v = 0.0;
};
inline ScalarState zero_like(const ScalarState&) { return {0.0}; }
inline ScalarState operator+(ScalarState a, ScalarState b) { return {a.v + b.v}; }
inline ScalarState operator-(ScalarState a, ScalarState b) { return {a.v - b.v}; }
inline double state_norm(const ScalarState& s) { return std::abs(s.v); }

}  // namespace pitopt

using namespace pitopt;

namespace {

// Implicit Euler for u' = -u: one step shrinks by 1/(1 + dt).
FinePropagator<ScalarState> decay_fine(int substeps, double dtau) {
  return [=](int, const ScalarState& s, bool) {
    double v = s.v;
    for (int i = 0; i < substeps; ++i) v /= 1.0 + dtau / substeps;
    return ScalarState{v};
  };
}

CoarsePropagator<ScalarState> decay_coarse(double dtau) {
  return [=](int, const ScalarState& s) { return ScalarState{s.v / (1.0 + dtau)}; };
}

std::vector<double> sequential_reference(int n_chunks, int substeps, double dtau, double u0) {
  std::vector<double> out(static_cast<size_t>(n_chunks) + 1);
  out[0] = u0;
  const auto fine = decay_fine(substeps, dtau);
  for (int i = 0; i < n_chunks; ++i) {
    out[static_cast<size_t>(i) + 1] = fine(i, ScalarState{out[static_cast<size_t>(i)]}, false).v;
  }
  return out;
}

}  // namespace

TEST_SUITE("parareal") {

TEST_CASE("coarse-sweep guess follows the scalar decay recurrence") {
  WorkerPool pool(2);
  PararealConfig cfg;
  cfg.n_chunks = 4;
  cfg.iterations = 0;
  const double dtau = 0.5;
  const auto sol = run_parareal<ScalarState>(decay_fine(3, dtau), decay_coarse(dtau),
                                             ScalarState{1.0}, cfg, pool);
  for (int n = 0; n <= 4; ++n) {
    CHECK(sol.states[static_cast<size_t>(n)].v ==
          doctest::Approx(std::pow(1.0 + dtau, -n)).epsilon(1e-15));
  }
  SUBCASE("zero coarse mode zeroes everything but the anchor") {
    cfg.coarse_mode = CoarseMode::zero;
    const auto z = run_parareal<ScalarState>(decay_fine(3, dtau), decay_coarse(dtau),
                                             ScalarState{1.0}, cfg, pool);
    CHECK(z.states[0].v == 1.0);
    for (int n = 1; n <= 4; ++n) CHECK(z.states[static_cast<size_t>(n)].v == 0.0);
  }
  SUBCASE("single chunk applies the coarse propagator once") {
    cfg.n_chunks = 1;
    const auto one = run_parareal<ScalarState>(decay_fine(3, dtau), decay_coarse(dtau),
                                               ScalarState{1.0}, cfg, pool);
    CHECK(one.states[1].v == doctest::Approx(1.0 / (1.0 + dtau)).epsilon(1e-15));
  }
}

TEST_CASE("identical propagators converge in one iteration") {
  WorkerPool pool(3);
  PararealConfig cfg;
  cfg.n_chunks = 5;
  cfg.iterations = 1;
  const double dtau = 0.3;
  const auto fine = decay_fine(1, dtau);
  const CoarsePropagator<ScalarState> coarse = [&](int chunk, const ScalarState& s) {
    return fine(chunk, s, false);
  };
  const auto sol = run_parareal<ScalarState>(fine, coarse, ScalarState{2.0}, cfg, pool);
  const auto ref = sequential_reference(5, 1, dtau, 2.0);
  for (int n = 0; n <= 5; ++n) {
    CHECK(sol.states[static_cast<size_t>(n)].v ==
          doctest::Approx(ref[static_cast<size_t>(n)]).epsilon(1e-14));
  }
}

TEST_CASE("k iterations reproduce the first k chunks exactly; k = N recovers the sweep") {
  WorkerPool pool(4);
  const double dtau = 0.4;
  const auto ref = sequential_reference(6, 4, dtau, 1.0);
  for (int k : {2, 6}) {
    PararealConfig cfg;
    cfg.n_chunks = 6;
    cfg.iterations = k;
    const auto sol = run_parareal<ScalarState>(decay_fine(4, dtau), decay_coarse(dtau),
                                               ScalarState{1.0}, cfg, pool);
    for (int n = 0; n <= (k == 6 ? 6 : k); ++n) {
      CHECK(std::abs(sol.states[static_cast<size_t>(n)].v - ref[static_cast<size_t>(n)]) <=
            1e-12 * std::abs(ref[static_cast<size_t>(n)]));
    }
  }
}

TEST_CASE("reversed direction converges to the reverse sweep") {
  WorkerPool pool(4);
  const double dtau = 0.4;
  PararealConfig cfg;
  cfg.n_chunks = 5;
  cfg.iterations = 5;
  cfg.direction = TimeDirection::reverse;
  // Reverse chunks map index i to i-1.
  const auto sol = run_parareal<ScalarState>(decay_fine(3, dtau), decay_coarse(dtau),
                                             ScalarState{1.0}, cfg, pool);
  double expected = 1.0;
  CHECK(sol.states[5].v == 1.0);
  const auto fine = decay_fine(3, dtau);
  std::vector<double> ref(6);
  ref[5] = 1.0;
  for (int i = 5; i >= 1; --i) ref[static_cast<size_t>(i) - 1] = fine(i, ScalarState{ref[static_cast<size_t>(i)]}, false).v;
  for (int n = 0; n <= 5; ++n) {
    CHECK(std::abs(sol.states[static_cast<size_t>(n)].v - ref[static_cast<size_t>(n)]) <=
          1e-12 * std::abs(ref[static_cast<size_t>(n)]));
  }
  (void)expected;
}

TEST_CASE("anchored end never moves") {
  WorkerPool pool(2);
  PararealConfig cfg;
  cfg.n_chunks = 4;
  cfg.iterations = 3;
  cfg.guess_mode = GuessMode::warm_restart;
  std::vector<ScalarState> junk(5, ScalarState{9.0});  // wrong anchor on purpose
  const auto sol = run_parareal<ScalarState>(decay_fine(2, 0.5), decay_coarse(0.5),
                                             ScalarState{1.0}, cfg, pool, &junk);
  CHECK(sol.states[0].v == 1.0);
}

TEST_CASE("warm restart rejects mismatched shapes") {
  WorkerPool pool(2);
  PararealConfig cfg;
  cfg.n_chunks = 4;
  cfg.iterations = 1;
  cfg.guess_mode = GuessMode::warm_restart;
  std::vector<ScalarState> wrong(3, ScalarState{0.0});
  CHECK_THROWS_AS(run_parareal<ScalarState>(decay_fine(2, 0.5), decay_coarse(0.5),
                                            ScalarState{1.0}, cfg, pool, &wrong),
                  ConfigError);
  CHECK_THROWS_AS(run_parareal<ScalarState>(decay_fine(2, 0.5), decay_coarse(0.5),
                                            ScalarState{1.0}, cfg, pool, nullptr),
                  ConfigError);
}

TEST_CASE("the exact solution is a fixed point under warm restart") {
  WorkerPool pool(4);
  const double dtau = 0.4;
  const auto ref = sequential_reference(6, 4, dtau, 1.0);
  std::vector<ScalarState> guess(7);
  for (int n = 0; n <= 6; ++n) guess[static_cast<size_t>(n)] = ScalarState{ref[static_cast<size_t>(n)]};
  PararealConfig cfg;
  cfg.n_chunks = 6;
  cfg.iterations = 1;
  cfg.guess_mode = GuessMode::warm_restart;
  const auto sol = run_parareal<ScalarState>(decay_fine(4, dtau), decay_coarse(dtau),
                                             ScalarState{1.0}, cfg, pool, &guess);
  for (int n = 0; n <= 6; ++n) {
    CHECK(std::abs(sol.states[static_cast<size_t>(n)].v - ref[static_cast<size_t>(n)]) <=
          1e-10 * std::abs(ref[static_cast<size_t>(n)]));
  }
}

TEST_CASE("zero coarse mode with warm restart is the local-in-time update rule") {
  WorkerPool pool(3);
  const double dtau = 0.25;
  std::vector<ScalarState> prev = {{1.0}, {0.9}, {0.7}, {0.5}, {0.4}};
  PararealConfig cfg;
  cfg.n_chunks = 4;
  cfg.iterations = 1;
  cfg.coarse_mode = CoarseMode::zero;
  cfg.guess_mode = GuessMode::warm_restart;
  const auto fine = decay_fine(3, dtau);
  const auto sol = run_parareal<ScalarState>(fine, decay_coarse(dtau), ScalarState{1.0}, cfg,
                                             pool, &prev);
  CHECK(sol.states[0].v == 1.0);
  for (int n = 0; n < 4; ++n) {
    // Direct rule: u_new[n+1] = F(u_prev[n]), bit for bit.
    CHECK(sol.states[static_cast<size_t>(n) + 1].v ==
          fine(n, prev[static_cast<size_t>(n)], false).v);
  }
}

TEST_CASE("runs are deterministic across repeated threaded executions") {
  PararealConfig cfg;
  cfg.n_chunks = 8;
  cfg.iterations = 3;
  std::vector<double> first;
  for (int rep = 0; rep < 2; ++rep) {
    WorkerPool pool(8);
    const auto sol = run_parareal<ScalarState>(decay_fine(5, 0.2), decay_coarse(0.2),
                                               ScalarState{1.0}, cfg, pool);
    if (rep == 0) {
      for (const auto& s : sol.states) first.push_back(s.v);
    } else {
      for (size_t i = 0; i < sol.states.size(); ++i) CHECK(sol.states[i].v == first[i]);
    }
  }
}

TEST_CASE("one iteration leaves coarse points closer than intermediates") {
  // Transient-conduction case: N_tau = 10, one iteration from a coarse-sweep
  // guess. Corrected coarse points beat the uncorrected intermediate fields.
  const Mesh mesh = build_mesh(10, 10, 1.0, {0.4, 0.6});
  const TimeGrid grid = TimeGrid::create(1.0, 40, 10);
  const HeatLoad load(mesh, ramped_cosine_load);
  const Eigen::ArrayXd chi = Eigen::ArrayXd::Constant(mesh.n_elements(), 0.4);
  const MaterialFields mat = simp(chi, MaterialModel{});
  const SystemMatrices sys = assemble_system(mesh, mat.capacity, mat.conductivity);
  const ObjectiveParams objective{20, ObjectiveMode::standard};
  const PrimalContext ctx = make_primal_context(sys, grid, load, objective, mesh.n_elements());

  Trajectory seq;
  sequential_primal(ctx, seq);

  Trajectory par;
  par.reset(mesh.n_free(), grid.n_fine);
  WorkerPool pool(4);
  PararealConfig cfg;
  cfg.n_chunks = 10;
  cfg.iterations = 1;
  cfg.record_intermediates = true;
  const FinePropagator<PrimalState> fine = [&](int chunk, const PrimalState& s, bool record) {
    return fine_primal(ctx, chunk, s, record ? &par : nullptr);
  };
  const CoarsePropagator<PrimalState> coarse = [&](int chunk, const PrimalState& s) {
    return coarse_primal(ctx, chunk, s);
  };
  const PrimalState anchor{Eigen::VectorXd::Zero(mesh.n_free()), 0.0};
  const auto sol = run_parareal(fine, coarse, anchor, cfg, pool);
  for (int j = 0; j <= 10; ++j) {
    par.store(grid.fine_of_coarse(j), sol.states[static_cast<size_t>(j)].temperature,
              j == 0 ? Provenance::initial : Provenance::corrected_coarse);
  }

  double coarse_err = 0.0, mid_err = 0.0;
  int coarse_count = 0, mid_count = 0;
  for (int n = 1; n <= grid.n_fine; ++n) {
    const double err = (Eigen::VectorXd(par.column(n)) - Eigen::VectorXd(seq.column(n))).norm() /
                       Eigen::VectorXd(seq.column(n)).norm();
    if (n % grid.coarsening == 0) {
      coarse_err += err;
      ++coarse_count;
    } else {
      mid_err += err;
      ++mid_count;
    }
  }
  CHECK(coarse_err / coarse_count < mid_err / mid_count);
}

}  // TEST_SUITE
