#include "pitopt/run_config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace pitopt {

namespace {

using nlohmann::json;

int line_of_byte(const std::string& text, size_t byte) {
  int line = 1;
  for (size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') ++line;
  }
  return line;
}

}  // namespace

std::string to_string(RunMode mode) {
  switch (mode) {
    case RunMode::sequential: return "sequential";
    case RunMode::oneshot: return "oneshot";
    case RunMode::plt: default: return "plt";
  }
}

RunMode parse_run_mode(const std::string& s) {
  if (s == "sequential") return RunMode::sequential;
  if (s == "oneshot") return RunMode::oneshot;
  if (s == "plt") return RunMode::plt;
  throw ConfigError("unknown mode '" + s + "' (expected sequential, oneshot or plt)");
}

std::string to_string(TrueObjectivePolicy policy) {
  return policy == TrueObjectivePolicy::final_only ? "final_only" : "every_iteration";
}

TrueObjectivePolicy parse_true_objective_policy(const std::string& s) {
  if (s == "final_only") return TrueObjectivePolicy::final_only;
  if (s == "every_iteration") return TrueObjectivePolicy::every_iteration;
  throw ConfigError("unknown true_objective_policy '" + s +
                    "' (expected final_only or every_iteration)");
}

RunSetup parse_run_config(const std::string& text, const std::string& origin) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    std::ostringstream msg;
    msg << origin << ":" << line_of_byte(text, e.byte) << ": " << e.what();
    throw ConfigError(msg.str());
  }
  if (!doc.is_object()) throw ConfigError(origin + ": config must be a JSON object");

  static const std::set<std::string> known = {
      "nx", "ny", "L", "t_T", "N_t", "N_tau", "p", "k0", "kmin", "c0", "cmin",
      "pk", "pc", "beta", "eta", "r_fil", "a_max", "i_max", "mode", "workers",
      "output_dir", "true_objective_policy", "dirichlet_x0", "dirichlet_x1"};
  for (const auto& [key, value] : doc.items()) {
    if (known.find(key) == known.end()) {
      throw ConfigError(origin + ": unknown key '" + key + "'");
    }
    (void)value;
  }

  RunSetup setup;
  OptimizationConfig& cfg = setup.config;
  try {
    cfg.nx = doc.value("nx", cfg.nx);
    cfg.ny = doc.value("ny", cfg.ny);
    cfg.side = doc.value("L", cfg.side);
    cfg.t_final = doc.value("t_T", cfg.t_final);
    cfg.n_fine = doc.value("N_t", cfg.n_fine);
    cfg.n_coarse = doc.value("N_tau", cfg.n_coarse);
    cfg.power = doc.value("p", cfg.power);
    cfg.material.k0 = doc.value("k0", cfg.material.k0);
    cfg.material.k_min = doc.value("kmin", cfg.material.k_min);
    cfg.material.c0 = doc.value("c0", cfg.material.c0);
    cfg.material.c_min = doc.value("cmin", cfg.material.c_min);
    cfg.material.p_k = doc.value("pk", cfg.material.p_k);
    cfg.material.p_c = doc.value("pc", cfg.material.p_c);
    cfg.projection.beta = doc.value("beta", cfg.projection.beta);
    cfg.projection.eta = doc.value("eta", cfg.projection.eta);
    cfg.filter_radius = doc.value("r_fil", cfg.filter_radius);
    cfg.a_max = doc.value("a_max", cfg.a_max);
    cfg.i_max = doc.value("i_max", cfg.i_max);
    cfg.workers = doc.value("workers", cfg.workers);
    if (doc.contains("mode")) cfg.mode = parse_run_mode(doc.at("mode").get<std::string>());
    if (doc.contains("true_objective_policy")) {
      cfg.true_objective_policy =
          parse_true_objective_policy(doc.at("true_objective_policy").get<std::string>());
    }
    // Default span: segment of length L/10 centered on the bottom edge.
    cfg.dirichlet = DirichletSpan{0.45 * cfg.side, 0.55 * cfg.side};
    if (doc.contains("dirichlet_x0")) cfg.dirichlet.x0 = doc.at("dirichlet_x0").get<double>();
    if (doc.contains("dirichlet_x1")) cfg.dirichlet.x1 = doc.at("dirichlet_x1").get<double>();
    setup.output_dir = doc.value("output_dir", setup.output_dir);
  } catch (const json::exception& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  return setup;
}

RunSetup load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_run_config(buffer.str(), path);
}

std::string resolved_config_json(const OptimizationConfig& cfg, const std::string& output_dir) {
  json doc;
  doc["nx"] = cfg.nx;
  doc["ny"] = cfg.ny;
  doc["L"] = cfg.side;
  doc["t_T"] = cfg.t_final;
  doc["N_t"] = cfg.n_fine;
  doc["N_tau"] = cfg.n_coarse;
  doc["p"] = cfg.power;
  doc["k0"] = cfg.material.k0;
  doc["kmin"] = cfg.material.k_min;
  doc["c0"] = cfg.material.c0;
  doc["cmin"] = cfg.material.c_min;
  doc["pk"] = cfg.material.p_k;
  doc["pc"] = cfg.material.p_c;
  doc["beta"] = cfg.projection.beta;
  doc["eta"] = cfg.projection.eta;
  doc["r_fil"] = cfg.filter_radius;
  doc["a_max"] = cfg.a_max;
  doc["i_max"] = cfg.i_max;
  doc["mode"] = to_string(cfg.mode);
  doc["workers"] = cfg.workers;
  doc["true_objective_policy"] = to_string(cfg.true_objective_policy);
  doc["dirichlet_x0"] = cfg.dirichlet.x0;
  doc["dirichlet_x1"] = cfg.dirichlet.x1;
  doc["output_dir"] = output_dir;
  return doc.dump(2);
}

}  // namespace pitopt
