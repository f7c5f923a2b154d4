#pragma once

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "evi/csv.hpp"
#include "evi/errors.hpp"
#include "evi/history.hpp"
#include "evi/optimize.hpp"
#include "evi/single_field.hpp"
#include "evi/two_field.hpp"

namespace evi {

// Flat key = value run configuration with dotted section keys, e.g.
// `physics.epsilon = 0.5`. Lines starting with '#' are comments. Unknown
// keys are rejected. Objective targets accept a number (constant in time
// and space) or a CSV path relative to the config file.
struct RunConfig {
  std::string model = "two_field";  // single_field | two_field

  int n_nodes = 4;
  double length = 1.0;
  double horizon = 1.0;
  int n_steps = 16;

  double alpha = 1.0;
  double beta = 1.0;
  double epsilon = 0.5;

  FatigueMap fatigue{FatigueKind::sigmoid_decay, 1.0, 0.1, 1.0};
  KernelKind kernel_kind = KernelKind::constant;
  double kernel_amplitude = 1.0;
  double kernel_rate = 0.0;
  double kernel_offset = 0.0;

  std::string phi_target = "0";
  std::string ell_target = "0";
  double alpha1 = 0.0;
  double alpha2 = 1.0;

  SolveOptions solver;
  double act_tol = 1e-8;
  double z_tol = 1e-10;
  DescentOptions descent;
  std::string dictionary = "coarse";  // coarse | full (single-field optimize)

  std::uint64_t seed = 42;
  std::filesystem::path base_dir;  // directory of the config file
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t");
  return s.substr(begin, end - begin + 1);
}

inline double to_real(const std::string& key, const std::string& value) {
  char* end = nullptr;
  const double x = std::strtod(value.c_str(), &end);
  if (end == value.c_str() || *end != '\0')
    throw ConfigError("config: key '" + key + "' expects a number, got '" + value + "'");
  return x;
}

inline long to_int(const std::string& key, const std::string& value) {
  char* end = nullptr;
  const long x = std::strtol(value.c_str(), &end, 10);
  if (end == value.c_str() || *end != '\0')
    throw ConfigError("config: key '" + key + "' expects an integer, got '" + value + "'");
  return x;
}

}  // namespace detail

inline RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  RunConfig cfg;
  cfg.base_dir = std::filesystem::absolute(std::filesystem::path(path)).parent_path();
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(line_no) + ": expected key = value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));

    if (key == "model") {
      if (value != "single_field" && value != "two_field")
        throw ConfigError("config: model must be single_field or two_field");
      cfg.model = value;
    } else if (key == "mesh.n_nodes") {
      cfg.n_nodes = static_cast<int>(detail::to_int(key, value));
    } else if (key == "mesh.length") {
      cfg.length = detail::to_real(key, value);
    } else if (key == "time.T") {
      cfg.horizon = detail::to_real(key, value);
    } else if (key == "time.n_steps") {
      cfg.n_steps = static_cast<int>(detail::to_int(key, value));
    } else if (key == "physics.alpha") {
      cfg.alpha = detail::to_real(key, value);
    } else if (key == "physics.beta") {
      cfg.beta = detail::to_real(key, value);
    } else if (key == "physics.epsilon") {
      cfg.epsilon = detail::to_real(key, value);
    } else if (key == "fatigue.kind") {
      if (value == "sigmoid_decay")
        cfg.fatigue.kind = FatigueKind::sigmoid_decay;
      else if (value == "softplus_linear")
        cfg.fatigue.kind = FatigueKind::softplus_linear;
      else
        throw ConfigError("config: unknown fatigue.kind '" + value + "'");
    } else if (key == "fatigue.kappa0") {
      cfg.fatigue.kappa0 = detail::to_real(key, value);
    } else if (key == "fatigue.kappa_min") {
      cfg.fatigue.kappa_min = detail::to_real(key, value);
    } else if (key == "fatigue.gamma") {
      cfg.fatigue.gamma = detail::to_real(key, value);
    } else if (key == "kernel.kind") {
      if (value == "constant")
        cfg.kernel_kind = KernelKind::constant;
      else if (value == "exponential")
        cfg.kernel_kind = KernelKind::exponential;
      else
        throw ConfigError("config: unknown kernel.kind '" + value + "'");
    } else if (key == "kernel.amplitude") {
      cfg.kernel_amplitude = detail::to_real(key, value);
    } else if (key == "kernel.rate") {
      cfg.kernel_rate = detail::to_real(key, value);
    } else if (key == "kernel.offset") {
      cfg.kernel_offset = detail::to_real(key, value);
    } else if (key == "objective.phi_target") {
      cfg.phi_target = value;
    } else if (key == "objective.ell_target") {
      cfg.ell_target = value;
    } else if (key == "objective.alpha1") {
      cfg.alpha1 = detail::to_real(key, value);
    } else if (key == "objective.alpha2") {
      cfg.alpha2 = detail::to_real(key, value);
    } else if (key == "solver.tol") {
      cfg.solver.rel_tol = detail::to_real(key, value);
    } else if (key == "solver.act_tol") {
      cfg.act_tol = detail::to_real(key, value);
    } else if (key == "solver.z_tol") {
      cfg.z_tol = detail::to_real(key, value);
    } else if (key == "descent.max_iters") {
      cfg.descent.max_iters = static_cast<int>(detail::to_int(key, value));
    } else if (key == "descent.armijo_c") {
      cfg.descent.armijo_c = detail::to_real(key, value);
    } else if (key == "descent.armijo_shrink") {
      cfg.descent.armijo_shrink = detail::to_real(key, value);
    } else if (key == "descent.grad_tol") {
      cfg.descent.grad_tol = detail::to_real(key, value);
    } else if (key == "descent.initial_step") {
      cfg.descent.initial_step = detail::to_real(key, value);
    } else if (key == "descent.dictionary") {
      if (value != "coarse" && value != "full")
        throw ConfigError("config: descent.dictionary must be coarse or full");
      cfg.dictionary = value;
    } else if (key == "seed") {
      cfg.seed = static_cast<std::uint64_t>(detail::to_int(key, value));
    } else {
      throw ConfigError(path + ":" + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
  }
  if (const char* env_seed = std::getenv("EVI_SEED")) {
    cfg.seed = static_cast<std::uint64_t>(std::strtoull(env_seed, nullptr, 10));
  }
  return cfg;
}

inline TimeGrid config_grid(const RunConfig& cfg) { return make_grid(cfg.horizon, cfg.n_steps); }

inline VolterraKernel config_kernel(const RunConfig& cfg) {
  VolterraKernel kernel;
  kernel.kind = cfg.kernel_kind;
  kernel.amplitude = cfg.kernel_amplitude;
  kernel.rate = cfg.kernel_rate;
  if (cfg.kernel_offset != 0.0)
    kernel.offset = Eigen::VectorXd::Constant(cfg.n_nodes, cfg.kernel_offset);
  return kernel;
}

inline SingleFieldParams config_single_field(const RunConfig& cfg) {
  SingleFieldParams p;
  p.alpha = cfg.alpha;
  p.epsilon = cfg.epsilon;
  p.fatigue = cfg.fatigue;
  p.kernel = config_kernel(cfg);
  p.mesh = build_mesh(cfg.n_nodes, cfg.length, BoundaryCondition::dirichlet);
  p.act_tol = cfg.act_tol;
  p.validate();
  return p;
}

inline TwoFieldParams config_two_field(const RunConfig& cfg) {
  TwoFieldParams p;
  p.alpha = cfg.alpha;
  p.beta = cfg.beta;
  p.epsilon = cfg.epsilon;
  p.fatigue = cfg.fatigue;
  p.kernel = config_kernel(cfg);
  p.mesh = build_mesh(cfg.n_nodes, cfg.length, BoundaryCondition::natural);
  p.z_tol = cfg.z_tol;
  p.solver = cfg.solver;
  p.validate();
  return p;
}

// A target spec is either a constant or a CSV path (step-valued file).
inline Trajectory config_target(const RunConfig& cfg, const std::string& spec) {
  char* end = nullptr;
  const double value = std::strtod(spec.c_str(), &end);
  if (end != spec.c_str() && *end == '\0')
    return constant_trajectory(cfg.n_steps, Eigen::VectorXd::Constant(cfg.n_nodes, value));
  const std::filesystem::path p = cfg.base_dir / spec;
  if (!std::filesystem::exists(p))
    throw ConfigError("config: target file does not exist: " + p.string());
  return read_trajectory_csv(p.string(), cfg.n_steps, cfg.n_nodes);
}

inline TrackingObjective config_objective(const RunConfig& cfg) {
  TrackingObjective obj;
  obj.phi_target = config_target(cfg, cfg.phi_target);
  obj.ell_target = config_target(cfg, cfg.ell_target);
  obj.alpha1 = cfg.alpha1;
  obj.alpha2 = cfg.alpha2;
  obj.validate();
  return obj;
}

}  // namespace evi
