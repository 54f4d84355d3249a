#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "pitopt/mesh.hpp"

namespace pitopt {

using SpdSolver = Eigen::SimplicialLDLT<SparseMatrix>;

/// Element matrices for a unit-coefficient square bilinear element of edge h,
/// integrated with 2x2 Gauss quadrature and scaled by the out-of-plane depth.
struct ElementMatrices {
  Eigen::Matrix4d capacity;    // integral of N_a N_b
  Eigen::Matrix4d conduction;  // integral of grad(N_a) . grad(N_b)
};

ElementMatrices reference_element(double h, double depth);

/// Reduced (free-DOF) capacity and conductivity matrices together with a
/// cache of sparse SPD factorizations of (C/step + K), one per step size.
/// The matrices are immutable; the cache is guarded so propagators running
/// on worker threads may request factorizations concurrently.
class SystemMatrices {
 public:
  SystemMatrices(SparseMatrix capacity, SparseMatrix conductivity);

  const SparseMatrix& capacity() const { return capacity_; }
  const SparseMatrix& conductivity() const { return conductivity_; }

  const SpdSolver& factorization(double step) const;
  int factorization_count() const;

  SystemMatrices(SystemMatrices&&) = default;
  SystemMatrices& operator=(SystemMatrices&&) = default;

 private:
  SparseMatrix capacity_;
  SparseMatrix conductivity_;
  mutable std::map<double, std::unique_ptr<SpdSolver>> cache_;
  mutable std::unique_ptr<std::mutex> mutex_;
  mutable int factorization_count_ = 0;
};

/// Assembles the reduced system from per-element capacity and conductivity
/// values. Dirichlet DOFs are eliminated; their value is identically zero,
/// so no right-hand-side correction is required.
SystemMatrices assemble_system(const Mesh& mesh,
                               const Eigen::ArrayXd& element_capacity,
                               const Eigen::ArrayXd& element_conductivity);

/// One implicit Euler step on the free DOFs:
///   (C/step + K) T = q + (C/step) T_prev
Eigen::VectorXd backward_euler_step(const SystemMatrices& sys,
                                    const Eigen::VectorXd& t_prev,
                                    const Eigen::VectorXd& load,
                                    double step);

/// Adjoint step; C and K are symmetric so the operator coincides with the
/// primal one and the same cached factorization is reused:
///   (C/step + K) lambda = source + (C/step) lambda_next
Eigen::VectorXd adjoint_euler_step(const SystemMatrices& sys,
                                   const Eigen::VectorXd& lambda_next,
                                   const Eigen::VectorXd& source,
                                   double step);

/// Spatially uniform, time-varying volumetric heat load. The consistent
/// nodal vector for a unit element value is assembled once; nodal(t) scales
/// it by the load value at time t.
class HeatLoad {
 public:
  HeatLoad(const Mesh& mesh, std::function<double(double)> value_of_time);

  double value(double t) const { return value_of_time_(t); }
  const Eigen::VectorXd& unit_nodal() const { return unit_nodal_; }
  Eigen::VectorXd nodal(double t) const { return value_of_time_(t) * unit_nodal_; }

 private:
  std::function<double(double)> value_of_time_;
  Eigen::VectorXd unit_nodal_;
};

/// Heat load of the square-domain test case: a ramp-down envelope times an
/// oscillation, q(t) = 0.5 (1 - t) (1 + cos(50 t)).
double ramped_cosine_load(double t);

}  // namespace pitopt
