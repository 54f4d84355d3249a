#include "pitopt/design.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace pitopt {

FilterOperator build_filter(const Mesh& mesh, double radius) {
  if (radius < 0) throw ConfigError("build_filter: radius must be non-negative");

  FilterOperator filter;
  filter.radius_ = radius;
  filter.nx_ = mesh.nx;
  filter.ny_ = mesh.ny;

  // Cone weights from integer centroid offsets; strict inclusion d < radius.
  const int reach = radius > 0 ? static_cast<int>(std::ceil(radius / mesh.h)) : 0;
  for (int dy = -reach; dy <= reach; ++dy) {
    for (int dx = 0; dx <= reach; ++dx) {
      const double dist = mesh.h * std::sqrt(double(dx) * dx + double(dy) * dy);
      if (dist < radius) filter.stencil_.push_back({dx, dy, radius - dist});
    }
  }
  if (filter.stencil_.empty()) filter.stencil_.push_back({0, 0, 1.0});

  const int nx = mesh.nx;
  const int ny = mesh.ny;
  const Index ne = mesh.n_elements();

  filter.row_weight_ = Eigen::ArrayXd::Zero(ne);
  for (int ey = 0; ey < ny; ++ey) {
    for (int ex = 0; ex < nx; ++ex) {
      const Index e = mesh.element_index(ex, ey);
      double w = 0.0;
      for (const auto& o : filter.stencil_) {
        const int jy = ey + o.dy;
        if (jy < 0 || jy >= ny) continue;
        if (o.dx == 0) {
          w += o.weight;
        } else {
          int present = 0;
          if (ex - o.dx >= 0) ++present;
          if (ex + o.dx < nx) ++present;
          w += o.weight * present;
        }
      }
      filter.row_weight_[e] = w;
    }
  }

  std::vector<Eigen::Triplet<double>> entries;
  for (int ey = 0; ey < ny; ++ey) {
    for (int ex = 0; ex < nx; ++ex) {
      const Index e = mesh.element_index(ex, ey);
      for (const auto& o : filter.stencil_) {
        const int jy = ey + o.dy;
        if (jy < 0 || jy >= ny) continue;
        const double v = o.weight / filter.row_weight_[e];
        if (ex - o.dx >= 0) entries.emplace_back(e, mesh.element_index(ex - o.dx, jy), v);
        if (o.dx > 0 && ex + o.dx < nx) entries.emplace_back(e, mesh.element_index(ex + o.dx, jy), v);
      }
    }
  }
  filter.matrix_ = SparseMatrix(ne, ne);
  filter.matrix_.setFromTriplets(entries.begin(), entries.end());
  filter.matrix_.makeCompressed();
  return filter;
}

Eigen::ArrayXd FilterOperator::apply(const Eigen::ArrayXd& x) const {
  const Index ne = static_cast<Index>(nx_) * ny_;
  if (x.size() != ne) throw NumericalError("FilterOperator::apply: size mismatch");
  Eigen::ArrayXd out(ne);
  for (int ey = 0; ey < ny_; ++ey) {
    for (int ex = 0; ex < nx_; ++ex) {
      const Index e = static_cast<Index>(ey) * nx_ + ex;
      double acc = 0.0;
      for (const auto& o : stencil_) {
        const int jy = ey + o.dy;
        if (jy < 0 || jy >= ny_) continue;
        const Index row = static_cast<Index>(jy) * nx_;
        if (o.dx == 0) {
          acc += o.weight * x[row + ex];
        } else {
          const bool left = ex - o.dx >= 0;
          const bool right = ex + o.dx < nx_;
          if (left && right) {
            acc += o.weight * (x[row + ex - o.dx] + x[row + ex + o.dx]);
          } else if (left) {
            acc += o.weight * x[row + ex - o.dx];
          } else if (right) {
            acc += o.weight * x[row + ex + o.dx];
          }
        }
      }
      out[e] = acc / row_weight_[e];
    }
  }
  return out;
}

Eigen::ArrayXd FilterOperator::apply_transpose(const Eigen::ArrayXd& x) const {
  return (matrix_.transpose() * x.matrix()).array();
}

MaterialFields simp(const Eigen::ArrayXd& chi_phys, const MaterialModel& model) {
  MaterialFields f;
  f.capacity = model.c_min + (model.c0 - model.c_min) * chi_phys.pow(model.p_c);
  f.conductivity = model.k_min + (model.k0 - model.k_min) * chi_phys.pow(model.p_k);
  f.d_capacity = model.p_c * (model.c0 - model.c_min) * chi_phys.pow(model.p_c - 1.0);
  f.d_conductivity = model.p_k * (model.k0 - model.k_min) * chi_phys.pow(model.p_k - 1.0);
  return f;
}

DesignField make_design(Eigen::ArrayXd chi, const FilterOperator& filter,
                        const ProjectionParams& projection) {
  DesignField d;
  d.chi = std::move(chi);
  d.chi_fil = filter.apply(d.chi);
  d.chi_phys = project(d.chi_fil, projection);
  return d;
}

Eigen::ArrayXd chain_rule_backward(const Eigen::ArrayXd& grad_phys,
                                   const DesignField& design,
                                   const FilterOperator& filter,
                                   const ProjectionParams& projection) {
  const Eigen::ArrayXd scaled = project_derivative(design.chi_fil, projection) * grad_phys;
  return filter.apply_transpose(scaled);
}

double volume_value(const Eigen::ArrayXd& chi_phys, const Mesh& mesh) {
  return chi_phys.sum() * mesh.h * mesh.h / mesh.area;
}

VolumeFraction volume_fraction(const DesignField& design, const FilterOperator& filter,
                               const ProjectionParams& projection, const Mesh& mesh) {
  VolumeFraction v;
  v.value = volume_value(design.chi_phys, mesh);
  const Eigen::ArrayXd uniform =
      Eigen::ArrayXd::Constant(design.chi_phys.size(), mesh.h * mesh.h / mesh.area);
  v.grad_chi = chain_rule_backward(uniform, design, filter, projection);
  return v;
}

}  // namespace pitopt
