#include "pitopt/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

namespace pitopt {

namespace {

struct Entry {
  Index row;
  Index col;
  double value;
};

// Deterministic sparse assembly: duplicates are summed in emission order
// (stable sort by column then row), so symmetric entry pairs accumulate the
// same addends in the same order and the result is entrywise symmetric.
SparseMatrix build_sparse(Index rows, Index cols, std::vector<Entry>& entries) {
  std::stable_sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    return a.col != b.col ? a.col < b.col : a.row < b.row;
  });
  SparseMatrix m(rows, cols);
  std::vector<Index> per_col(static_cast<size_t>(cols), 0);
  {
    size_t i = 0;
    while (i < entries.size()) {
      size_t j = i + 1;
      while (j < entries.size() && entries[j].col == entries[i].col && entries[j].row == entries[i].row) ++j;
      ++per_col[static_cast<size_t>(entries[i].col)];
      i = j;
    }
  }
  Eigen::Map<Eigen::Matrix<Index, Eigen::Dynamic, 1>> sizes(per_col.data(), cols);
  m.reserve(sizes);
  size_t i = 0;
  while (i < entries.size()) {
    double sum = entries[i].value;
    size_t j = i + 1;
    while (j < entries.size() && entries[j].col == entries[i].col && entries[j].row == entries[i].row) {
      sum += entries[j].value;
      ++j;
    }
    m.insert(entries[i].row, entries[i].col) = sum;
    i = j;
  }
  m.makeCompressed();
  return m;
}

}  // namespace

ElementMatrices reference_element(double h, double depth) {
  ElementMatrices out;
  out.capacity.setZero();
  out.conduction.setZero();

  const double g = 1.0 / std::sqrt(3.0);
  const double gauss[2] = {-g, g};
  const double jac = h / 2.0;       // mapping [-1,1] -> [0,h] per direction
  const double det = jac * jac;

  for (double xi : gauss) {
    for (double eta : gauss) {
      const Eigen::Vector4d shape{0.25 * (1 - xi) * (1 - eta), 0.25 * (1 + xi) * (1 - eta),
                                  0.25 * (1 + xi) * (1 + eta), 0.25 * (1 - xi) * (1 + eta)};
      const Eigen::Vector4d dxi{-0.25 * (1 - eta), 0.25 * (1 - eta), 0.25 * (1 + eta), -0.25 * (1 + eta)};
      const Eigen::Vector4d deta{-0.25 * (1 - xi), -0.25 * (1 + xi), 0.25 * (1 + xi), 0.25 * (1 - xi)};
      const Eigen::Vector4d dx = dxi / jac;
      const Eigen::Vector4d dy = deta / jac;
      out.capacity += det * (shape * shape.transpose());
      out.conduction += det * (dx * dx.transpose() + dy * dy.transpose());
    }
  }
  out.capacity *= depth;
  out.conduction *= depth;
  return out;
}

SystemMatrices::SystemMatrices(SparseMatrix capacity, SparseMatrix conductivity)
    : capacity_(std::move(capacity)),
      conductivity_(std::move(conductivity)),
      mutex_(std::make_unique<std::mutex>()) {}

const SpdSolver& SystemMatrices::factorization(double step) const {
  std::lock_guard<std::mutex> lock(*mutex_);
  auto it = cache_.find(step);
  if (it != cache_.end()) return *it->second;

  auto solver = std::make_unique<SpdSolver>();
  SparseMatrix op = capacity_ / step + conductivity_;
  solver->compute(op);
  if (solver->info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "factorization of (C/step + K) failed for step = " << step;
    throw NumericalError(msg.str());
  }
  ++factorization_count_;
  return *cache_.emplace(step, std::move(solver)).first->second;
}

int SystemMatrices::factorization_count() const {
  std::lock_guard<std::mutex> lock(*mutex_);
  return factorization_count_;
}

SystemMatrices assemble_system(const Mesh& mesh,
                               const Eigen::ArrayXd& element_capacity,
                               const Eigen::ArrayXd& element_conductivity) {
  const Index ne = mesh.n_elements();
  if (element_capacity.size() != ne || element_conductivity.size() != ne) {
    throw NumericalError("assemble_system: material arrays must have one value per element");
  }
  for (Index e = 0; e < ne; ++e) {
    if (!(element_capacity[e] > 0) || !(element_conductivity[e] > 0)) {
      std::ostringstream msg;
      msg << "assemble_system: non-positive material value at element " << e
          << " (c = " << element_capacity[e] << ", k = " << element_conductivity[e] << ")";
      throw NumericalError(msg.str());
    }
  }

  const ElementMatrices ref = reference_element(mesh.h, mesh.depth);
  const Index n_free = mesh.n_free();

  std::vector<Entry> c_entries;
  std::vector<Entry> k_entries;
  c_entries.reserve(static_cast<size_t>(ne) * 16);
  k_entries.reserve(static_cast<size_t>(ne) * 16);

  for (Index e = 0; e < ne; ++e) {
    for (int a = 0; a < 4; ++a) {
      const Index fa = mesh.element_free_dofs(e, a);
      if (fa < 0) continue;
      for (int b = 0; b < 4; ++b) {
        const Index fb = mesh.element_free_dofs(e, b);
        if (fb < 0) continue;
        c_entries.push_back({fa, fb, element_capacity[e] * ref.capacity(a, b)});
        k_entries.push_back({fa, fb, element_conductivity[e] * ref.conduction(a, b)});
      }
    }
  }

  return SystemMatrices(build_sparse(n_free, n_free, c_entries),
                        build_sparse(n_free, n_free, k_entries));
}

Eigen::VectorXd backward_euler_step(const SystemMatrices& sys,
                                    const Eigen::VectorXd& t_prev,
                                    const Eigen::VectorXd& load,
                                    double step) {
  const SpdSolver& solver = sys.factorization(step);
  const Eigen::VectorXd rhs = load + (sys.capacity() * t_prev) / step;
  Eigen::VectorXd out = solver.solve(rhs);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("backward_euler_step: sparse solve failed");
  }
  return out;
}

Eigen::VectorXd adjoint_euler_step(const SystemMatrices& sys,
                                   const Eigen::VectorXd& lambda_next,
                                   const Eigen::VectorXd& source,
                                   double step) {
  return backward_euler_step(sys, lambda_next, source, step);
}

HeatLoad::HeatLoad(const Mesh& mesh, std::function<double(double)> value_of_time)
    : value_of_time_(std::move(value_of_time)) {
  unit_nodal_ = Eigen::VectorXd::Zero(mesh.n_free());
  const double corner = mesh.h * mesh.h * mesh.depth / 4.0;
  for (Index e = 0; e < mesh.n_elements(); ++e) {
    for (int a = 0; a < 4; ++a) {
      const Index fa = mesh.element_free_dofs(e, a);
      if (fa >= 0) unit_nodal_[fa] += corner;
    }
  }
}

double ramped_cosine_load(double t) { return 0.5 * (1.0 - t) * (1.0 + std::cos(50.0 * t)); }

}  // namespace pitopt
