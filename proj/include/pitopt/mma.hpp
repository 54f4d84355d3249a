#pragma once

#include <Eigen/Core>
#include <functional>

#include "pitopt/errors.hpp"

namespace pitopt {

/// Method of Moving Asymptotes for one objective, one inequality constraint
/// and box bounds [lower_bound, upper_bound]^n. The convex separable
/// subproblem is solved through its dual with bisection on the single
/// multiplier. The combination of a hard move limit and clamped asymptote
/// distances keeps the updates usable at large constant projection sharpness
/// without a continuation scheme.
struct MmaConfig {
  double asymptote_init = 0.5;
  double expand = 1.2;
  double contract = 0.7;
  double move_limit = 0.2;
  double asymptote_min = 0.01;  // times the box range
  double asymptote_max = 10.0;  // times the box range
  double raa = 1e-5;
  double lower_bound = 0.0;
  double upper_bound = 1.0;
  int bisection_iterations = 128;
  double feasibility_tol = 1e-12;  // constraint residuals below this count as satisfied
};

/// Optional oracle evaluated inside the dual bisection: given a candidate
/// design it returns the true constraint value (f1 <= 0 convention). When
/// present, the multiplier is bisected until the oracle is satisfied instead
/// of the subproblem's rational approximation, which pins the nonlinear
/// constraint at every accepted iterate.
using ConstraintOracle = std::function<double(const Eigen::ArrayXd&)>;

class MmaOptimizer {
 public:
  explicit MmaOptimizer(Eigen::Index n_variables, MmaConfig config = {});

  Eigen::ArrayXd update(const Eigen::ArrayXd& x, double f0, const Eigen::ArrayXd& df0,
                        double f1, const Eigen::ArrayXd& df1,
                        const ConstraintOracle& oracle = nullptr);

  int iteration() const { return iteration_; }
  const Eigen::ArrayXd& lower_asymptote() const { return low_; }
  const Eigen::ArrayXd& upper_asymptote() const { return upp_; }

 private:
  MmaConfig config_;
  Eigen::Index n_;
  int iteration_ = 0;
  Eigen::ArrayXd xold1_;
  Eigen::ArrayXd xold2_;
  Eigen::ArrayXd low_;
  Eigen::ArrayXd upp_;
};

}  // namespace pitopt
