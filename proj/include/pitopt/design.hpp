#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <cmath>
#include <vector>

#include "pitopt/mesh.hpp"

namespace pitopt {

/// Threshold projection parameters: sharpness beta and threshold eta.
struct ProjectionParams {
  double beta = 32.0;
  double eta = 0.5;
};

inline double project_value(double x, const ProjectionParams& p) {
  const double denom = std::tanh(p.beta * p.eta) + std::tanh(p.beta * (1.0 - p.eta));
  return (std::tanh(p.beta * (x - p.eta)) + std::tanh(p.beta * p.eta)) / denom;
}

inline double project_derivative_value(double x, const ProjectionParams& p) {
  const double denom = std::tanh(p.beta * p.eta) + std::tanh(p.beta * (1.0 - p.eta));
  const double th = std::tanh(p.beta * (x - p.eta));
  return p.beta * (1.0 - th * th) / denom;
}

/// Smoothed Heaviside projection, elementwise; maps [0,1] onto [0,1] with
/// P(0) = 0 and P(1) = 1, strictly increasing.
template <class Derived>
Eigen::Array<typename Derived::Scalar, Eigen::Dynamic, 1> project(
    const Eigen::ArrayBase<Derived>& chi_fil, const ProjectionParams& p) {
  using Scalar = typename Derived::Scalar;
  const Scalar beta = static_cast<Scalar>(p.beta);
  const Scalar eta = static_cast<Scalar>(p.eta);
  const Scalar denom = std::tanh(beta * eta) + std::tanh(beta * (1 - eta));
  return ((beta * (chi_fil.derived() - eta)).tanh() + std::tanh(beta * eta)) / denom;
}

/// Analytic derivative of the projection, elementwise; strictly positive.
template <class Derived>
Eigen::Array<typename Derived::Scalar, Eigen::Dynamic, 1> project_derivative(
    const Eigen::ArrayBase<Derived>& chi_fil, const ProjectionParams& p) {
  using Scalar = typename Derived::Scalar;
  const Scalar beta = static_cast<Scalar>(p.beta);
  const Scalar eta = static_cast<Scalar>(p.eta);
  const Scalar denom = std::tanh(beta * eta) + std::tanh(beta * (1 - eta));
  auto th = (beta * (chi_fil.derived() - eta)).tanh();
  return beta * (1 - th.square()) / denom;
}

/// Linear density filter with conically decaying weights over element
/// centroids, rows renormalized over the truncated neighborhood. apply()
/// evaluates the stencil with mirror-paired accumulation so that a design
/// symmetric about the vertical centerline filters to a bitwise symmetric
/// result.
class FilterOperator {
 public:
  FilterOperator() = default;

  const SparseMatrix& matrix() const { return matrix_; }
  double radius() const { return radius_; }

  Eigen::ArrayXd apply(const Eigen::ArrayXd& x) const;
  Eigen::ArrayXd apply_transpose(const Eigen::ArrayXd& x) const;

 private:
  friend FilterOperator build_filter(const Mesh& mesh, double radius);

  struct Offset {
    int dx;  // >= 0; dx > 0 stands for the +-dx pair
    int dy;
    double weight;
  };

  SparseMatrix matrix_;
  double radius_ = 0.0;
  int nx_ = 0;
  int ny_ = 0;
  std::vector<Offset> stencil_;
  Eigen::ArrayXd row_weight_;
};

FilterOperator build_filter(const Mesh& mesh, double radius);

/// SIMP material interpolation constants: conductor (k0, c0), insulator
/// (k_min, c_min) and penalty powers.
struct MaterialModel {
  double k0 = 3.0;
  double k_min = 0.03;
  double c0 = 1.0;
  double c_min = 0.5;
  double p_k = 3.0;
  double p_c = 2.0;
};

struct MaterialFields {
  Eigen::ArrayXd capacity;
  Eigen::ArrayXd conductivity;
  Eigen::ArrayXd d_capacity;      // dc/dchi_phys
  Eigen::ArrayXd d_conductivity;  // dk/dchi_phys
};

MaterialFields simp(const Eigen::ArrayXd& chi_phys, const MaterialModel& model);

/// Raw, filtered and projected densities.
struct DesignField {
  Eigen::ArrayXd chi;
  Eigen::ArrayXd chi_fil;
  Eigen::ArrayXd chi_phys;
};

DesignField make_design(Eigen::ArrayXd chi, const FilterOperator& filter,
                        const ProjectionParams& projection);

/// Pulls a sensitivity with respect to chi_phys back to the raw design:
/// H^T (P'(chi_fil) .* grad_phys).
Eigen::ArrayXd chain_rule_backward(const Eigen::ArrayXd& grad_phys,
                                   const DesignField& design,
                                   const FilterOperator& filter,
                                   const ProjectionParams& projection);

double volume_value(const Eigen::ArrayXd& chi_phys, const Mesh& mesh);

struct VolumeFraction {
  double value;
  Eigen::ArrayXd grad_chi;
};

VolumeFraction volume_fraction(const DesignField& design, const FilterOperator& filter,
                               const ProjectionParams& projection, const Mesh& mesh);

}  // namespace pitopt
