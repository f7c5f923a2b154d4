#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <utility>
#include <vector>

#include "evi/objective.hpp"
#include "evi/single_field.hpp"
#include "evi/two_field.hpp"

namespace evi {

struct DescentOptions {
  int max_iters = 200;
  double armijo_c = 1e-4;
  double armijo_shrink = 0.5;
  double grad_tol = 1e-6;
  double initial_step = 1.0;
  int max_shrinks = 60;
  int report_random_dirs = 5;  // bstat probe uses these plus +-gradient
  std::uint64_t seed = 42;

  void validate() const {
    if (max_iters < 0) throw ConfigError("DescentOptions: max_iters must be >= 0");
    if (armijo_c <= 0.0 || armijo_c >= 1.0) throw ConfigError("DescentOptions: armijo_c in (0,1)");
    if (armijo_shrink <= 0.0 || armijo_shrink >= 1.0)
      throw ConfigError("DescentOptions: armijo_shrink in (0,1)");
    if (grad_tol < 0.0) throw ConfigError("DescentOptions: grad_tol must be >= 0");
    if (initial_step <= 0.0) throw ConfigError("DescentOptions: initial_step must be > 0");
  }
};

// Line-search failure; carries the last iterate and objective history.
class StagnationError : public NumericalError {
 public:
  StagnationError(const std::string& msg, Trajectory last_iterate, std::vector<double> history)
      : NumericalError(msg),
        last_iterate_(std::move(last_iterate)),
        j_history_(std::move(history)) {}
  const Trajectory& last_iterate() const { return last_iterate_; }
  const std::vector<double>& j_history() const { return j_history_; }

 private:
  Trajectory last_iterate_;
  std::vector<double> j_history_;
};

inline double eval_objective(const TrackingObjective& obj, const TwoFieldParams& p,
                             const TwoFieldState& state, const Trajectory& ell,
                             const TimeGrid& grid) {
  obj.validate();
  const auto ops = detail::two_field_ops(p);
  const int n = grid.n_steps;
  check_trajectory(ell, n, p.mesh.n_nodes, "eval_objective: ell");
  check_trajectory(obj.phi_target, n, p.mesh.n_nodes, "eval_objective: phi_target");
  check_trajectory(obj.ell_target, n, p.mesh.n_nodes, "eval_objective: ell_target");
  const double dt = grid.dt();
  double acc = 0.0;
  for (int k = 0; k < n; ++k) {
    const Eigen::VectorXd dphi = state.phi[k] - obj.phi_target[k];
    const Eigen::VectorXd dell = ell[k] - obj.ell_target[k];
    acc += 0.5 * dt * dphi.dot(ops.mass.cwiseProduct(dphi));
    acc += 0.5 * dt * obj.alpha1 * state.d[k].dot(ops.mass.cwiseProduct(state.d[k]));
    acc += 0.5 * dt * obj.alpha2 * dell.dot(ops.mass.cwiseProduct(dell));
  }
  return acc;
}

// Objective tracking q in the H1_0 seminorm plus the usual L2 penalties.
inline double eval_objective(const TrackingObjective& obj, const SingleFieldParams& p,
                             const SingleFieldState& state, const Trajectory& ell,
                             const TimeGrid& grid) {
  obj.validate();
  const auto ops = detail::single_field_ops(p);
  const int n = grid.n_steps;
  check_trajectory(ell, n, p.mesh.n_nodes, "eval_objective: ell");
  check_trajectory(obj.phi_target, n, p.mesh.n_nodes, "eval_objective: q target");
  check_trajectory(obj.ell_target, n, p.mesh.n_nodes, "eval_objective: ell_target");
  const double dt = grid.dt();
  double acc = 0.0;
  for (int k = 0; k < n; ++k) {
    const Eigen::VectorXd dq = state.q[k] - obj.phi_target[k];
    const Eigen::VectorXd dell = ell[k] - obj.ell_target[k];
    acc += 0.5 * dt * dq.dot(ops.stiff.apply(dq));
    acc += 0.5 * dt * obj.alpha1 * state.q[k].dot(ops.mass.cwiseProduct(state.q[k]));
    acc += 0.5 * dt * obj.alpha2 * dell.dot(ops.mass.cwiseProduct(dell));
  }
  return acc;
}

// Partials in load-vector form under the same quadrature, so that the
// derivative of J along (delta d, delta phi, delta ell) is the plain sum
// of dt * load . delta over the steps.
struct TwoFieldPartials {
  Trajectory d;
  Trajectory phi;
  Trajectory ell;
};

inline TwoFieldPartials eval_partials(const TrackingObjective& obj, const TwoFieldParams& p,
                                      const TwoFieldState& state, const Trajectory& ell,
                                      const TimeGrid& grid) {
  obj.validate();
  const auto ops = detail::two_field_ops(p);
  const int n = grid.n_steps;
  TwoFieldPartials out;
  out.d.resize(n);
  out.phi.resize(n);
  out.ell.resize(n);
  for (int k = 0; k < n; ++k) {
    out.d[k] = obj.alpha1 * ops.mass.cwiseProduct(state.d[k]);
    out.phi[k] = ops.mass.cwiseProduct(state.phi[k] - obj.phi_target[k]);
    out.ell[k] = obj.alpha2 * ops.mass.cwiseProduct(ell[k] - obj.ell_target[k]);
  }
  return out;
}

struct SingleFieldPartials {
  Trajectory q;
  Trajectory ell;
};

inline SingleFieldPartials eval_partials(const TrackingObjective& obj, const SingleFieldParams& p,
                                         const SingleFieldState& state, const Trajectory& ell,
                                         const TimeGrid& grid) {
  obj.validate();
  const auto ops = detail::single_field_ops(p);
  const int n = grid.n_steps;
  SingleFieldPartials out;
  out.q.resize(n);
  out.ell.resize(n);
  for (int k = 0; k < n; ++k) {
    out.q[k] = single_field_dq_load(obj, ops, state.q[k], k);
    out.ell[k] = obj.alpha2 * ops.mass.cwiseProduct(ell[k] - obj.ell_target[k]);
  }
  return out;
}

struct DescentResult {
  Trajectory ell_star;
  std::vector<double> j_history;
  StationarityReport report;
  int iterations = 0;
  bool converged = false;
};

inline DescentResult descend_two_field(const TwoFieldParams& p, const TrackingObjective& obj,
                                       const Trajectory& ell0, const DescentOptions& opts,
                                       const TimeGrid& grid) {
  opts.validate();
  obj.validate();
  const auto ops = detail::two_field_ops(p);
  const double dt = grid.dt();

  DescentResult result;
  Trajectory ell = ell0;
  TwoFieldState state = forward_two(p, ell, grid);
  double j_val = eval_objective(obj, p, state, ell, grid);
  result.j_history.push_back(j_val);

  AdjointBundle bundle = adjoint_two(p, state, ell, obj, grid);
  for (int iter = 0; iter < opts.max_iters; ++iter) {
    const double gnorm = l2t_norm(bundle.gradient, ops.mass, dt);
    if (gnorm <= opts.grad_tol) {
      result.converged = true;
      break;
    }
    const double slope = -gnorm * gnorm;
    double step = opts.initial_step;
    bool accepted = false;
    for (int shrink = 0; shrink <= opts.max_shrinks; ++shrink) {
      const Trajectory trial = axpy(-step, bundle.gradient, ell);
      const TwoFieldState trial_state = forward_two(p, trial, grid);
      const double trial_j = eval_objective(obj, p, trial_state, trial, grid);
      if (trial_j <= j_val + opts.armijo_c * step * slope) {
        ell = trial;
        state = trial_state;
        j_val = trial_j;
        accepted = true;
        break;
      }
      step *= opts.armijo_shrink;
    }
    if (!accepted)
      throw StagnationError("descend_two_field: line search stagnated", ell, result.j_history);
    result.j_history.push_back(j_val);
    ++result.iterations;
    bundle = adjoint_two(p, state, ell, obj, grid);
  }

  result.ell_star = ell;
  result.report = stationarity_report_two(p, state, ell, bundle, obj, grid);

  // B-stationarity probe along +-gradient and random directions.
  std::vector<Trajectory> dirs;
  const double gnorm = l2t_norm(bundle.gradient, ops.mass, dt);
  if (gnorm > 0.0) dirs.push_back(scaled(1.0 / gnorm, bundle.gradient));
  Rng rng(opts.seed);
  for (int r = 0; r < opts.report_random_dirs; ++r) {
    Trajectory dir(grid.n_steps);
    for (int k = 0; k < grid.n_steps; ++k) dir[k] = rng.normal_vec(p.mesh.n_nodes);
    const double nrm = l2t_norm(dir, ops.mass, dt);
    if (nrm > 0.0) dirs.push_back(scaled(1.0 / nrm, dir));
  }
  result.report.bstat_min = bstat_check(p, ell, obj, dirs, grid);
  return result;
}

// Coordinate-wise descent on the span of a direction dictionary, with
// directional derivatives obtained from the sensitivity system. An empty
// dictionary returns ell0 unchanged with a sentinel report.
inline DescentResult descend_single_field(const SingleFieldParams& p, const TrackingObjective& obj,
                                          const Trajectory& ell0, const DescentOptions& opts,
                                          const std::vector<Trajectory>& direction_dict,
                                          const TimeGrid& grid) {
  opts.validate();
  obj.validate();
  const auto ops = detail::single_field_ops(p);
  const double dt = grid.dt();
  const int n = grid.n_steps;

  DescentResult result;
  Trajectory ell = ell0;
  SingleFieldState state = forward_single(p, ell, grid);
  double j_val = eval_objective(obj, p, state, ell, grid);
  result.j_history.push_back(j_val);

  if (direction_dict.empty()) {
    result.ell_star = ell;
    result.report.directional_only = true;
    return result;
  }

  auto directional = [&](const Trajectory& dir) {
    const auto sens = sensitivity_single(p, state, ell, dir, grid);
    const auto partials = eval_partials(obj, p, state, ell, grid);
    double acc = 0.0;
    for (int k = 0; k < n; ++k)
      acc += dt * (partials.q[k].dot(sens.dq[k]) + partials.ell[k].dot(dir[k]));
    return acc;
  };

  bool converged = false;
  for (int sweep = 0; sweep < opts.max_iters && !converged; ++sweep) {
    double worst_rel = 0.0;
    for (const auto& dir : direction_dict) {
      const double dir_norm = l2t_norm(dir, ops.mass, dt);
      if (dir_norm == 0.0) continue;
      const double deriv = directional(dir);
      worst_rel = std::max(worst_rel, std::abs(deriv) / dir_norm);
      if (std::abs(deriv) / dir_norm <= opts.grad_tol) continue;

      const double sign = deriv > 0.0 ? -1.0 : 1.0;
      const double slope = -std::abs(deriv);
      double step = opts.initial_step;
      bool accepted = false;
      for (int shrink = 0; shrink <= opts.max_shrinks; ++shrink) {
        const Trajectory trial = axpy(sign * step, dir, ell);
        const SingleFieldState trial_state = forward_single(p, trial, grid);
        const double trial_j = eval_objective(obj, p, trial_state, trial, grid);
        if (trial_j <= j_val + opts.armijo_c * step * slope) {
          ell = trial;
          state = trial_state;
          j_val = trial_j;
          accepted = true;
          break;
        }
        step *= opts.armijo_shrink;
      }
      if (!accepted)
        throw StagnationError("descend_single_field: line search stagnated", ell,
                              result.j_history);
      result.j_history.push_back(j_val);
      ++result.iterations;
    }
    if (worst_rel <= opts.grad_tol) converged = true;
  }
  result.converged = converged;
  result.ell_star = ell;

  long biactive = 0;
  for (int c : state.biactive_counts) biactive += c;
  if (biactive == 0) {
    const auto adj = adjoint_single(p, state, ell, obj, grid);
    result.report = stationarity_residual_single(p, state, ell, adj.xi, adj.lambda, obj, grid);
  } else {
    result.report.directional_only = true;
    result.report.biactive_node_steps = biactive;
  }

  double bstat = std::numeric_limits<double>::infinity();
  for (const auto& dir : direction_dict) {
    bstat = std::min(bstat, directional(dir));
    bstat = std::min(bstat, directional(scaled(-1.0, dir)));
  }
  result.report.bstat_min = bstat;
  return result;
}

}  // namespace evi
