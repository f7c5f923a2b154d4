#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "evi/errors.hpp"

namespace evi {

// Uniform time grid on [0, T] with n_steps Euler steps. States live on
// the n_steps+1 grid points; controls, rates and per-step fields live on
// the n_steps left endpoints.
struct TimeGrid {
  double horizon = 1.0;
  int n_steps = 1;

  double dt() const { return horizon / n_steps; }
  double time(int k) const { return k * dt(); }
  int n_points() const { return n_steps + 1; }
};

inline TimeGrid make_grid(double horizon, int n_steps) {
  if (horizon <= 0.0) throw ConfigError("make_grid: horizon must be positive");
  if (n_steps < 1) throw ConfigError("make_grid: n_steps must be >= 1");
  return TimeGrid{horizon, n_steps};
}

using Trajectory = std::vector<Eigen::VectorXd>;

inline Trajectory zero_trajectory(int count, int dim) {
  return Trajectory(count, Eigen::VectorXd::Zero(dim));
}

inline Trajectory constant_trajectory(int count, const Eigen::VectorXd& v) {
  return Trajectory(count, v);
}

inline void check_trajectory(const Trajectory& t, int count, int dim, const char* what) {
  if (static_cast<int>(t.size()) != count)
    throw ConfigError(std::string(what) + ": expected " + std::to_string(count) +
                      " time slices, got " + std::to_string(t.size()));
  for (const auto& v : t)
    if (v.size() != dim)
      throw ConfigError(std::string(what) + ": expected " + std::to_string(dim) +
                        " nodes per slice, got " + std::to_string(v.size()));
}

inline double sup_diff(const Trajectory& a, const Trajectory& b) {
  if (a.size() != b.size()) throw ConfigError("sup_diff: length mismatch");
  double best = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k)
    best = std::max(best, (a[k] - b[k]).lpNorm<Eigen::Infinity>());
  return best;
}

inline double sup_norm(const Trajectory& a) {
  double best = 0.0;
  for (const auto& v : a) best = std::max(best, v.lpNorm<Eigen::Infinity>());
  return best;
}

// Discrete L2(0,T;L2) inner product and norm over per-step slices.
inline double l2t_dot(const Trajectory& a, const Trajectory& b, const Eigen::VectorXd& mass_diag,
                      double dt) {
  if (a.size() != b.size()) throw ConfigError("l2t_dot: length mismatch");
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) acc += dt * a[k].dot(mass_diag.cwiseProduct(b[k]));
  return acc;
}

inline double l2t_norm(const Trajectory& a, const Eigen::VectorXd& mass_diag, double dt) {
  return std::sqrt(std::max(l2t_dot(a, a, mass_diag, dt), 0.0));
}

// y + c*x, slice by slice.
inline Trajectory axpy(double c, const Trajectory& x, const Trajectory& y) {
  if (x.size() != y.size()) throw ConfigError("axpy: length mismatch");
  Trajectory out(y.size());
  for (std::size_t k = 0; k < y.size(); ++k) out[k] = y[k] + c * x[k];
  return out;
}

inline Trajectory scaled(double c, const Trajectory& x) {
  Trajectory out(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) out[k] = c * x[k];
  return out;
}

}  // namespace evi
