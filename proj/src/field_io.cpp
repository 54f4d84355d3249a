#include "pitopt/field_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "pitopt/run_config.hpp"

namespace pitopt {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open output file '" + path + "'");
  return out;
}

}  // namespace

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

void write_density_csv(const std::string& path, const Eigen::ArrayXd& values, int nx, int ny) {
  if (values.size() != static_cast<Index>(nx) * ny) {
    throw ConfigError("write_density_csv: field size does not match nx*ny");
  }
  auto out = open_out(path);
  for (int ey = 0; ey < ny; ++ey) {
    for (int ex = 0; ex < nx; ++ex) {
      if (ex > 0) out << ',';
      out << format_double(values[static_cast<Index>(ey) * nx + ex]);
    }
    out << '\n';
  }
}

Eigen::ArrayXd read_density_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open design file '" + path + "'");
  std::vector<double> values;
  std::string line;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      if (cell.find_first_not_of(" \t\r") == std::string::npos) continue;
      values.push_back(std::stod(cell));
    }
  }
  Eigen::ArrayXd out(static_cast<Index>(values.size()));
  for (size_t i = 0; i < values.size(); ++i) out[static_cast<Index>(i)] = values[i];
  return out;
}

void write_pgm(const std::string& path, const Eigen::ArrayXd& chi_phys, int nx, int ny) {
  if (chi_phys.size() != static_cast<Index>(nx) * ny) {
    throw ConfigError("write_pgm: field size does not match nx*ny");
  }
  auto out = open_out(path);
  out << "P2\n" << nx << ' ' << ny << "\n255\n";
  // Image rows run top-down; the domain's y axis points up.
  for (int ey = ny - 1; ey >= 0; --ey) {
    for (int ex = 0; ex < nx; ++ex) {
      const double v = chi_phys[static_cast<Index>(ey) * nx + ex];
      const int pixel = static_cast<int>(std::lround(255.0 * (1.0 - std::min(1.0, std::max(0.0, v)))));
      out << pixel << (ex + 1 == nx ? '\n' : ' ');
    }
  }
}

void write_vtk(const std::string& path, const Eigen::ArrayXd& chi_phys, int nx, int ny, double h) {
  auto out = open_out(path);
  out << "# vtk DataFile Version 3.0\n";
  out << "element densities\n";
  out << "ASCII\n";
  out << "DATASET STRUCTURED_POINTS\n";
  out << "DIMENSIONS " << nx + 1 << ' ' << ny + 1 << " 1\n";
  out << "ORIGIN 0 0 0\n";
  out << "SPACING " << format_double(h) << ' ' << format_double(h) << " 1\n";
  out << "CELL_DATA " << static_cast<long long>(nx) * ny << '\n';
  out << "SCALARS chi_phys double 1\n";
  out << "LOOKUP_TABLE default\n";
  for (Index e = 0; e < chi_phys.size(); ++e) out << format_double(chi_phys[e]) << '\n';
}

void write_history_csv(const std::string& path, const RunReport& report) {
  auto out = open_out(path);
  out << "iter,theta_est,theta_true,t_primal_s,t_adjoint_s,t_mma_s\n";
  for (const auto& rec : report.history) {
    out << rec.iteration << ',' << format_double(rec.theta_estimate) << ',';
    if (rec.theta_true) out << format_double(*rec.theta_true);
    out << ',' << format_double(rec.primal_seconds) << ',' << format_double(rec.adjoint_seconds)
        << ',' << format_double(rec.mma_seconds) << '\n';
  }
}

void write_metadata_json(const std::string& path, const std::string& resolved_config,
                         const RunReport& report) {
  nlohmann::json doc;
  doc["config"] = nlohmann::json::parse(resolved_config);
  doc["mode"] = to_string(report.mode);
  doc["workers"] = report.workers;
  doc["iterations"] = report.history.size();
  doc["final_true_objective"] = report.final_true_objective;
  doc["total_seconds"] = report.total_seconds;
  double primal = 0, adjoint = 0, coarse = 0, mma = 0;
  for (const auto& rec : report.history) {
    primal += rec.primal_seconds;
    adjoint += rec.adjoint_seconds;
    coarse += rec.coarse_seconds;
    mma += rec.mma_seconds;
  }
  doc["phase_seconds"] = {{"primal", primal}, {"adjoint", adjoint}, {"coarse_sweep", coarse},
                          {"mma", mma}};
  doc["notes"] = report.notes;
  auto out = open_out(path);
  out << doc.dump(2) << '\n';
}

void write_benchmark_csv(const std::string& path, const BenchmarkTable& table) {
  auto out = open_out(path);
  out << "n_tau,k,err_obj,err_sens,t_parareal_s,t_sequential_s,speedup\n";
  for (const auto& cell : table.cells) {
    out << cell.n_tau << ',' << cell.k << ',' << format_double(cell.err_obj) << ','
        << format_double(cell.err_sens) << ',' << format_double(cell.parareal_seconds) << ','
        << format_double(cell.sequential_seconds) << ',' << format_double(cell.speedup) << '\n';
  }
}

}  // namespace pitopt
