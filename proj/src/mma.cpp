#include "pitopt/mma.hpp"

#include <cmath>
#include <sstream>

namespace pitopt {

MmaOptimizer::MmaOptimizer(Eigen::Index n_variables, MmaConfig config)
    : config_(config), n_(n_variables) {
  xold1_ = Eigen::ArrayXd::Zero(n_);
  xold2_ = Eigen::ArrayXd::Zero(n_);
  low_ = Eigen::ArrayXd::Constant(n_, config_.lower_bound);
  upp_ = Eigen::ArrayXd::Constant(n_, config_.upper_bound);
}

Eigen::ArrayXd MmaOptimizer::update(const Eigen::ArrayXd& x, double /*f0*/,
                                    const Eigen::ArrayXd& df0, double f1,
                                    const Eigen::ArrayXd& df1, const ConstraintOracle& oracle) {
  if (x.size() != n_ || df0.size() != n_ || df1.size() != n_) {
    throw NumericalError("mma_update: gradient sizes do not match the design size");
  }
  if (!df0.isFinite().all() || !df1.isFinite().all() || !std::isfinite(f1)) {
    throw NumericalError("mma_update: non-finite gradient or constraint input");
  }

  const double range = config_.upper_bound - config_.lower_bound;
  ++iteration_;

  // Asymptote adaptation: expand where the iterates move monotonically,
  // contract where the sign of the move oscillates.
  if (iteration_ <= 2) {
    low_ = x - config_.asymptote_init * range;
    upp_ = x + config_.asymptote_init * range;
  } else {
    const Eigen::ArrayXd osc = (x - xold1_) * (xold1_ - xold2_);
    Eigen::ArrayXd gamma(n_);
    for (Eigen::Index i = 0; i < n_; ++i) {
      gamma[i] = osc[i] > 0 ? config_.expand : (osc[i] < 0 ? config_.contract : 1.0);
    }
    low_ = x - gamma * (xold1_ - low_);
    upp_ = x + gamma * (upp_ - xold1_);
    low_ = low_.max(x - config_.asymptote_max * range).min(x - config_.asymptote_min * range);
    upp_ = upp_.max(x + config_.asymptote_min * range).min(x + config_.asymptote_max * range);
  }

  const double albefa = 0.1;
  const Eigen::ArrayXd alpha = (low_ + albefa * (x - low_))
                                   .max(x - config_.move_limit * range)
                                   .max(config_.lower_bound);
  const Eigen::ArrayXd beta = (upp_ - albefa * (upp_ - x))
                                  .min(x + config_.move_limit * range)
                                  .min(config_.upper_bound);

  const Eigen::ArrayXd ux = upp_ - x;
  const Eigen::ArrayXd xl = x - low_;
  const Eigen::ArrayXd ux2 = ux.square();
  const Eigen::ArrayXd xl2 = xl.square();

  const Eigen::ArrayXd df0_pos = df0.max(0.0);
  const Eigen::ArrayXd df0_neg = (-df0).max(0.0);
  const Eigen::ArrayXd df1_pos = df1.max(0.0);
  const Eigen::ArrayXd df1_neg = (-df1).max(0.0);

  const double raa = config_.raa / range;
  const Eigen::ArrayXd p0 = ux2 * (1.001 * df0_pos + 0.001 * df0_neg + raa);
  const Eigen::ArrayXd q0 = xl2 * (0.001 * df0_pos + 1.001 * df0_neg + raa);
  const Eigen::ArrayXd p1 = ux2 * (1.001 * df1_pos + 0.001 * df1_neg + raa);
  const Eigen::ArrayXd q1 = xl2 * (0.001 * df1_pos + 1.001 * df1_neg + raa);

  // Constant term so that the subproblem constraint equals f1 at x.
  const double b = (p1 / ux + q1 / xl).sum() - f1;

  auto primal_of_mu = [&](double mu) -> Eigen::ArrayXd {
    const Eigen::ArrayXd p = (p0 + mu * p1).sqrt();
    const Eigen::ArrayXd q = (q0 + mu * q1).sqrt();
    return ((low_ * p + upp_ * q) / (p + q)).max(alpha).min(beta);
  };

  auto constraint_of = [&](const Eigen::ArrayXd& y) -> double {
    if (oracle) return oracle(y);
    return (p1 / (upp_ - y) + q1 / (y - low_)).sum() - b;
  };

  const double tol = config_.feasibility_tol;
  Eigen::ArrayXd candidate = primal_of_mu(0.0);
  if (constraint_of(candidate) > tol) {
    double mu_lo = 0.0;
    double mu_hi = 1.0;
    Eigen::ArrayXd y_hi = primal_of_mu(mu_hi);
    int guard = 0;
    while (constraint_of(y_hi) > tol) {
      mu_lo = mu_hi;
      mu_hi *= 2.0;
      if (++guard > 60) {
        std::ostringstream msg;
        msg << "mma_update: dual bisection failed to bracket the multiplier "
            << "(constraint still violated at mu = " << mu_hi
            << ", f1 = " << f1 << ")";
        throw NumericalError(msg.str());
      }
      y_hi = primal_of_mu(mu_hi);
    }
    for (int it = 0; it < config_.bisection_iterations; ++it) {
      const double mu_mid = 0.5 * (mu_lo + mu_hi);
      if (constraint_of(primal_of_mu(mu_mid)) > tol) {
        mu_lo = mu_mid;
      } else {
        mu_hi = mu_mid;
      }
    }
    // The upper end of the bracket is the feasible side.
    candidate = primal_of_mu(mu_hi);
  }

  xold2_ = xold1_;
  xold1_ = x;
  return candidate;
}

}  // namespace pitopt
