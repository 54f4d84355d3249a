#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "pitopt/driver.hpp"

namespace pitopt {

/// Shortest representation that round-trips a double (17 significant digits).
std::string format_double(double value);

/// Element field as CSV, one line per element row (ey ascending), nx values
/// per line in row-major element order.
void write_density_csv(const std::string& path, const Eigen::ArrayXd& values, int nx, int ny);

Eigen::ArrayXd read_density_csv(const std::string& path);

/// ASCII PGM render: chi_phys = 1 maps to black, 0 to white, linear between.
void write_pgm(const std::string& path, const Eigen::ArrayXd& chi_phys, int nx, int ny);

/// Legacy ASCII VTK structured-points export of the element densities.
void write_vtk(const std::string& path, const Eigen::ArrayXd& chi_phys, int nx, int ny, double h);

void write_history_csv(const std::string& path, const RunReport& report);

void write_metadata_json(const std::string& path, const std::string& resolved_config,
                         const RunReport& report);

void write_benchmark_csv(const std::string& path, const BenchmarkTable& table);

}  // namespace pitopt
