#pragma once

#include <Eigen/Core>
#include <cmath>
#include <vector>

#include "pitopt/errors.hpp"
#include "pitopt/mesh.hpp"

namespace pitopt {

/// Whether the cumulative objective is the power mean Theta itself or its
/// p-th power (the separable form used by the local-in-time scheme).
enum class ObjectiveMode { standard, modified };

struct ObjectiveParams {
  int power = 20;  // even, >= 2
  ObjectiveMode mode = ObjectiveMode::standard;
};

/// Temperature plus cumulative objective at a coarse time point.
struct PrimalState {
  Eigen::VectorXd temperature;
  double theta = 0.0;
};

/// Adjoint temperature plus cumulative per-element sensitivities.
struct AdjointState {
  Eigen::VectorXd lambda;
  Eigen::ArrayXd sensitivity;
};

inline PrimalState zero_like(const PrimalState& s) {
  return {Eigen::VectorXd::Zero(s.temperature.size()), 0.0};
}

inline PrimalState operator+(const PrimalState& a, const PrimalState& b) {
  return {a.temperature + b.temperature, a.theta + b.theta};
}

inline PrimalState operator-(const PrimalState& a, const PrimalState& b) {
  return {a.temperature - b.temperature, a.theta - b.theta};
}

inline double state_norm(const PrimalState& s) {
  return std::sqrt(s.temperature.squaredNorm() + s.theta * s.theta);
}

inline AdjointState zero_like(const AdjointState& s) {
  return {Eigen::VectorXd::Zero(s.lambda.size()), Eigen::ArrayXd::Zero(s.sensitivity.size())};
}

inline AdjointState operator+(const AdjointState& a, const AdjointState& b) {
  return {a.lambda + b.lambda, a.sensitivity + b.sensitivity};
}

inline AdjointState operator-(const AdjointState& a, const AdjointState& b) {
  return {a.lambda - b.lambda, a.sensitivity - b.sensitivity};
}

inline double state_norm(const AdjointState& s) {
  return std::sqrt(s.lambda.squaredNorm() + s.sensitivity.matrix().squaredNorm());
}

/// Origin of a stored trajectory column.
enum class Provenance : unsigned char {
  initial,            // the t = 0 condition
  sequential,         // written by a sequential sweep
  fine_intermediate,  // intermediate point of the last fine sweep
  corrected_coarse,   // coarse point after the Parareal correction
};

/// Dense storage of the temperature at every fine time point, one column per
/// point. The adjoint sweep reads all of it, so nothing is checkpointed.
class Trajectory {
 public:
  void reset(Index n_free, int n_fine);

  int n_fine() const { return static_cast<int>(temperatures_.cols()) - 1; }
  Eigen::MatrixXd::ConstColXpr column(int n) const { return temperatures_.col(n); }
  Provenance provenance(int n) const { return provenance_[static_cast<size_t>(n)]; }

  void store(int n, const Eigen::VectorXd& temperature, Provenance origin) {
    temperatures_.col(n) = temperature;
    provenance_[static_cast<size_t>(n)] = origin;
  }

 private:
  Eigen::MatrixXd temperatures_;  // n_free x (n_fine + 1)
  std::vector<Provenance> provenance_;
};

/// p-norm of a vector with max-scaling so that intermediate powers cannot
/// overflow at large p.
double lp_norm(const Eigen::VectorXd& v, int p);

/// ||v||_p^p * weight, evaluated as m^p * sum((|v|/m)^p) * weight.
double lp_pow_weighted(const Eigen::VectorXd& v, int p, double weight);

/// (|prev|^p + r^p)^(1/p) without forming either power at full scale. Even p
/// makes the accumulation insensitive to the sign of prev.
double p_accumulate(double prev, double r, int p);

}  // namespace pitopt
