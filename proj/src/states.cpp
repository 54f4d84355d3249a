#include "pitopt/states.hpp"

#include <algorithm>

namespace pitopt {

void Trajectory::reset(Index n_free, int n_fine) {
  if (temperatures_.rows() != n_free || temperatures_.cols() != n_fine + 1) {
    temperatures_.resize(n_free, n_fine + 1);
  }
  temperatures_.setZero();
  provenance_.assign(static_cast<size_t>(n_fine) + 1, Provenance::initial);
}

double lp_norm(const Eigen::VectorXd& v, int p) {
  if (v.size() == 0) return 0.0;
  const double m = v.cwiseAbs().maxCoeff();
  if (m == 0.0) return 0.0;
  const double s = (v.array().abs() / m).pow(p).sum();
  return m * std::pow(s, 1.0 / p);
}

double lp_pow_weighted(const Eigen::VectorXd& v, int p, double weight) {
  if (v.size() == 0) return 0.0;
  const double m = v.cwiseAbs().maxCoeff();
  if (m == 0.0) return 0.0;
  const double s = (v.array().abs() / m).pow(p).sum();
  return std::pow(m, p) * s * weight;
}

double p_accumulate(double prev, double r, int p) {
  const double a = std::abs(prev);
  const double b = std::abs(r);
  const double m = std::max(a, b);
  if (m == 0.0) return 0.0;
  return m * std::pow(std::pow(a / m, p) + std::pow(b / m, p), 1.0 / p);
}

}  // namespace pitopt
