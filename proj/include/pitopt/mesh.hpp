#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <array>
#include <vector>

#include "pitopt/errors.hpp"

namespace pitopt {

using Index = Eigen::Index;
using SparseMatrix = Eigen::SparseMatrix<double>;

/// Interval [x0, x1] on the bottom edge (y = 0) holding the fixed-temperature
/// nodes. x0 > x1 encodes an empty interval (pure Neumann problem).
struct DirichletSpan {
  double x0 = 0.0;
  double x1 = -1.0;

  static DirichletSpan none() { return {}; }
  bool empty() const { return x0 > x1; }
};

/// Structured mesh of square bilinear elements on an nx*h by ny*h rectangle.
/// Node numbering is row-major from the bottom-left corner; element e=(ex,ey)
/// has its corner nodes listed counterclockwise starting at (ex, ey).
struct Mesh {
  int nx = 0;
  int ny = 0;
  double side = 1.0;   // length of the x extent (L)
  double h = 0.0;      // element edge, side / nx
  double depth = 1.0;  // out-of-plane depth
  double area = 1.0;   // in-plane domain area

  std::vector<Index> dirichlet_nodes;
  std::vector<Index> free_nodes;
  std::vector<Index> node_to_free;  // -1 for constrained nodes

  // Per element: free-DOF index of each corner node, -1 when constrained.
  Eigen::Matrix<Index, Eigen::Dynamic, 4> element_free_dofs;

  Index n_elements() const { return static_cast<Index>(nx) * ny; }
  Index n_nodes() const { return static_cast<Index>(nx + 1) * (ny + 1); }
  Index n_free() const { return static_cast<Index>(free_nodes.size()); }

  Index node_index(int ix, int iy) const {
    return static_cast<Index>(iy) * (nx + 1) + ix;
  }
  Index element_index(int ex, int ey) const {
    return static_cast<Index>(ey) * nx + ex;
  }

  std::array<Index, 4> element_nodes(Index e) const {
    const int ex = static_cast<int>(e % nx);
    const int ey = static_cast<int>(e / nx);
    const Index n0 = node_index(ex, ey);
    return {n0, n0 + 1, n0 + nx + 2, n0 + nx + 1};
  }

  Eigen::Vector2d element_centroid(Index e) const {
    const int ex = static_cast<int>(e % nx);
    const int ey = static_cast<int>(e / nx);
    return {(ex + 0.5) * h, (ey + 0.5) * h};
  }
};

/// Builds the structured mesh and classifies nodes into Dirichlet/free sets.
/// The span endpoints must coincide with node coordinates; otherwise a
/// ConfigError naming the nearest aligned spans is thrown.
Mesh build_mesh(int nx, int ny, double side, const DirichletSpan& span);

/// Fine/coarse time axes. The coarse points are tau_n = t_{M*n} where
/// M = n_fine / n_coarse is the coarsening factor.
struct TimeGrid {
  double t_final = 1.0;
  int n_fine = 1;      // N_t
  int n_coarse = 1;    // N_tau
  int coarsening = 1;  // M
  double dt = 1.0;
  double dtau = 1.0;

  static TimeGrid create(double t_final, int n_fine, int n_coarse);

  double t(int n) const { return n * dt; }
  double tau(int n) const { return n * dtau; }
  int fine_of_coarse(int n) const { return n * coarsening; }
};

}  // namespace pitopt
