#include "pitopt/mesh.hpp"

#include <cmath>
#include <sstream>

namespace pitopt {

namespace {

// Maps a span endpoint to its node index, or reports the two nearest
// endpoints that would align with the mesh.
int aligned_node(double x, double h, int nx, const char* which) {
  const double u = x / h;
  const double r = std::round(u);
  if (std::abs(u - r) > 1e-9 * std::max(1.0, std::abs(u))) {
    const double lo = std::floor(u) * h;
    const double hi = std::ceil(u) * h;
    std::ostringstream msg;
    msg << "dirichlet span endpoint " << which << " = " << x
        << " does not coincide with a node coordinate (h = " << h
        << "); nearest aligned endpoints are " << lo << " and " << hi;
    throw ConfigError(msg.str());
  }
  const int i = static_cast<int>(r);
  if (i < 0 || i > nx) {
    std::ostringstream msg;
    msg << "dirichlet span endpoint " << which << " = " << x
        << " lies outside the bottom edge [0, " << nx * h << "]";
    throw ConfigError(msg.str());
  }
  return i;
}

}  // namespace

Mesh build_mesh(int nx, int ny, double side, const DirichletSpan& span) {
  if (nx < 1 || ny < 1) throw ConfigError("build_mesh: nx and ny must be >= 1");
  if (side <= 0) throw ConfigError("build_mesh: side length must be positive");

  Mesh mesh;
  mesh.nx = nx;
  mesh.ny = ny;
  mesh.side = side;
  mesh.h = side / nx;
  mesh.depth = side;
  mesh.area = (nx * mesh.h) * (ny * mesh.h);

  const Index n_nodes = mesh.n_nodes();
  std::vector<bool> fixed(static_cast<size_t>(n_nodes), false);

  if (!span.empty()) {
    const int i0 = aligned_node(span.x0, mesh.h, nx, "x0");
    const int i1 = aligned_node(span.x1, mesh.h, nx, "x1");
    if (i0 > i1) throw ConfigError("build_mesh: dirichlet span is reversed");
    for (int ix = i0; ix <= i1; ++ix) {
      const Index node = mesh.node_index(ix, 0);
      fixed[static_cast<size_t>(node)] = true;
      mesh.dirichlet_nodes.push_back(node);
    }
  }

  mesh.node_to_free.assign(static_cast<size_t>(n_nodes), -1);
  mesh.free_nodes.reserve(static_cast<size_t>(n_nodes));
  for (Index n = 0; n < n_nodes; ++n) {
    if (!fixed[static_cast<size_t>(n)]) {
      mesh.node_to_free[static_cast<size_t>(n)] = static_cast<Index>(mesh.free_nodes.size());
      mesh.free_nodes.push_back(n);
    }
  }

  mesh.element_free_dofs.resize(mesh.n_elements(), 4);
  for (Index e = 0; e < mesh.n_elements(); ++e) {
    const auto nodes = mesh.element_nodes(e);
    for (int a = 0; a < 4; ++a) {
      mesh.element_free_dofs(e, a) = mesh.node_to_free[static_cast<size_t>(nodes[static_cast<size_t>(a)])];
    }
  }
  return mesh;
}

TimeGrid TimeGrid::create(double t_final, int n_fine, int n_coarse) {
  if (t_final <= 0) throw ConfigError("TimeGrid: t_final must be positive");
  if (n_fine < 1 || n_coarse < 1) throw ConfigError("TimeGrid: step counts must be >= 1");
  if (n_fine % n_coarse != 0) {
    std::ostringstream msg;
    msg << "TimeGrid: N_tau = " << n_coarse << " does not divide N_t = " << n_fine;
    throw ConfigError(msg.str());
  }
  TimeGrid grid;
  grid.t_final = t_final;
  grid.n_fine = n_fine;
  grid.n_coarse = n_coarse;
  grid.coarsening = n_fine / n_coarse;
  grid.dt = t_final / n_fine;
  grid.dtau = t_final / n_coarse;
  return grid;
}

}  // namespace pitopt
