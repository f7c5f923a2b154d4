#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "evi/cone_qp.hpp"
#include "evi/grid.hpp"
#include "evi/history.hpp"
#include "evi/objective.hpp"
#include "evi/ode.hpp"

namespace evi {

// Penalized two-field damage model: local damage d in (lumped) L2 coupled
// to the nonlocal field phi through the beta-penalty, L2 viscosity epsilon.
struct TwoFieldParams {
  double alpha = 1.0;    // gradient regularization of phi
  double beta = 1.0;     // penalization
  double epsilon = 1.0;  // viscosity
  FatigueMap fatigue;
  VolterraKernel kernel;
  SpatialMesh mesh;      // natural
  double z_tol = 1e-10;  // kink classification threshold
  SolveOptions solver;

  void validate() const {
    if (alpha <= 0.0) throw ConfigError("TwoFieldParams: alpha must be positive");
    if (beta <= 0.0) throw ConfigError("TwoFieldParams: beta must be positive");
    if (epsilon <= 0.0) throw ConfigError("TwoFieldParams: epsilon must be positive");
    if (mesh.bc != BoundaryCondition::natural)
      throw ConfigError("TwoFieldParams: mesh must be natural");
    fatigue.validate();
  }
};

struct TwoFieldState {
  Trajectory d;    // n_steps + 1
  Trajectory phi;  // n_steps
  Trajectory z;    // n_steps, nodal max argument -beta(d - phi) - kappa(H(d))
  std::vector<int> biactive_counts;
};

struct AdjointBundle {
  Trajectory xi;        // n_steps + 1 nodal functions, xi(T) = 0
  Trajectory w;         // n_steps
  Trajectory lambda;    // n_steps
  Trajectory gradient;  // n_steps, w + dJ/dell
  long biactive_node_steps = 0;
};

namespace detail {

struct TwoFieldOps {
  SparseOperator stiff;
  Eigen::VectorXd mass;
  SparseOperator elliptic;  // alpha*K + beta*M
};

inline TwoFieldOps two_field_ops(const TwoFieldParams& p) {
  p.validate();
  TwoFieldOps ops;
  ops.stiff = stiffness(p.mesh);
  ops.mass = lumped_mass_diag(p.mesh);
  ops.elliptic = sum(scaled(ops.stiff, p.alpha), diagonal_operator(p.beta * ops.mass));
  return ops;
}

}  // namespace detail

// Elliptic solve (alpha*K + beta*M) phi = beta*M d + M ell.
inline Eigen::VectorXd solve_phi(const TwoFieldParams& p, const Eigen::VectorXd& d,
                                 const Eigen::VectorXd& ell) {
  const auto ops = detail::two_field_ops(p);
  if (d.size() != ops.mass.size() || ell.size() != ops.mass.size())
    throw ConfigError("solve_phi: dimension mismatch");
  return solve_spd(ops.elliptic, ops.mass.cwiseProduct(p.beta * d + ell), p.solver);
}

// Directional derivative of max(., 0).
inline double max_dir(double x, double h) {
  if (x > 0.0) return h;
  if (x < 0.0) return 0.0;
  return std::max(h, 0.0);
}

inline TwoFieldState forward_two(const TwoFieldParams& p, const Trajectory& ell,
                                 const TimeGrid& grid) {
  const auto ops = detail::two_field_ops(p);
  const int n = grid.n_steps;
  const int dim = p.mesh.n_nodes;
  check_trajectory(ell, n, dim, "forward_two: ell");
  const double dt = grid.dt();

  TwoFieldState st;
  st.d = zero_trajectory(n + 1, dim);
  st.phi.resize(n);
  st.z.resize(n);
  st.biactive_counts.assign(n, 0);

  for (int k = 0; k < n; ++k) {
    st.phi[k] = solve_spd(ops.elliptic, ops.mass.cwiseProduct(p.beta * st.d[k] + ell[k]), p.solver);
    const Eigen::VectorXd fatigue_level = apply_history(p.kernel, st.d, k, dt);
    st.z[k] = -p.beta * (st.d[k] - st.phi[k]) - kappa_eval(p.fatigue, fatigue_level);
    for (int i = 0; i < dim; ++i)
      if (std::abs(st.z[k][i]) <= p.z_tol) ++st.biactive_counts[k];
    st.d[k + 1] = st.d[k] + (dt / p.epsilon) * st.z[k].cwiseMax(0.0);
  }
  return st;
}

// Abstract rate-form view of the model (viscosity epsilon*M, load
// -beta*M(d - phi(d, ell))); the cone QP then decouples nodewise into the
// same max(., 0) update as forward_two.
inline OdeModel two_field_ode_model(const TwoFieldParams& p, const TimeGrid& grid) {
  const auto ops = detail::two_field_ops(p);
  OdeModel model;
  model.visc = make_viscosity(diagonal_operator(p.epsilon * ops.mass), p.epsilon, ops.mass);
  model.history_apply = [kernel = p.kernel, dt = grid.dt()](const Trajectory& y, int k) {
    return apply_history(kernel, y, k, dt);
  };
  model.kappa_of = [fatigue = p.fatigue](const Eigen::VectorXd& zeta) {
    return kappa_eval(fatigue, zeta);
  };
  model.rhs_g = [p](const Eigen::VectorXd& d, const Eigen::VectorXd& ell_k) {
    const auto ops = detail::two_field_ops(p);
    const Eigen::VectorXd phi =
        solve_spd(ops.elliptic, ops.mass.cwiseProduct(p.beta * d + ell_k), p.solver);
    return Eigen::VectorXd(ops.mass.cwiseProduct(-p.beta * (d - phi)));
  };
  return model;
}

// Directional derivative of the control-to-state map (eq. of the forward
// scheme linearized through max'): returns (delta d, delta phi).
inline std::pair<Trajectory, Trajectory> sensitivity_two(const TwoFieldParams& p,
                                                         const TwoFieldState& state,
                                                         const Trajectory& ell,
                                                         const Trajectory& dell,
                                                         const TimeGrid& grid) {
  const auto ops = detail::two_field_ops(p);
  const int n = grid.n_steps;
  const int dim = p.mesh.n_nodes;
  check_trajectory(ell, n, dim, "sensitivity_two: ell");
  check_trajectory(dell, n, dim, "sensitivity_two: dell");
  check_trajectory(state.z, n, dim, "sensitivity_two: state");
  const double dt = grid.dt();

  Trajectory dd = zero_trajectory(n + 1, dim);
  Trajectory dphi(n);
  for (int k = 0; k < n; ++k) {
    dphi[k] =
        solve_spd(ops.elliptic, ops.mass.cwiseProduct(p.beta * dd[k] + dell[k]), p.solver);
    const Eigen::VectorXd fatigue_level = apply_history(p.kernel, state.d, k, dt);
    const Eigen::VectorXd dfatigue = history_derivative(p.kernel, dd, k, dt);
    const Eigen::VectorXd dkappa = kappa_deriv(p.fatigue, fatigue_level, dfatigue);
    dd[k + 1] = dd[k];
    for (int i = 0; i < dim; ++i) {
      const double dz = -p.beta * (dd[k][i] - dphi[k][i]) - dkappa[i];
      dd[k + 1][i] += (dt / p.epsilon) * max_dir(state.z[k][i], dz);
    }
  }
  return {std::move(dd), std::move(dphi)};
}

// Discrete transpose of the linearized forward scheme, backward from
// xi(T) = 0. The multiplier on step k takes the selection
// lambda_k = (1/eps) * chi_{z_k > z_tol} * xi_{k+1}; biactive nodes get
// lambda = 0 and are counted (the gradient is exact only where z != 0).
// The history adjoint distributes kappa'-weighted kernel contributions
// backward in time (the kernel reversed).
inline AdjointBundle adjoint_two(const TwoFieldParams& p, const TwoFieldState& state,
                                 const Trajectory& ell, const TrackingObjective& obj,
                                 const TimeGrid& grid) {
  obj.validate();
  const auto ops = detail::two_field_ops(p);
  const int n = grid.n_steps;
  const int dim = p.mesh.n_nodes;
  check_trajectory(ell, n, dim, "adjoint_two: ell");
  check_trajectory(obj.phi_target, n, dim, "adjoint_two: phi_target");
  check_trajectory(obj.ell_target, n, dim, "adjoint_two: ell_target");
  check_trajectory(state.phi, n, dim, "adjoint_two: state");
  const double dt = grid.dt();

  AdjointBundle adj;
  adj.xi = zero_trajectory(n + 1, dim);
  adj.w.resize(n);
  adj.lambda.resize(n);
  adj.gradient.resize(n);
  for (int k = 0; k < n; ++k) adj.biactive_node_steps += state.biactive_counts[k];

  std::vector<Eigen::VectorXd> kappa_prime(n);
  for (int k = 0; k < n; ++k) {
    const Eigen::VectorXd level = apply_history(p.kernel, state.d, k, dt);
    kappa_prime[k].resize(dim);
    for (int i = 0; i < dim; ++i) kappa_prime[k][i] = p.fatigue.deriv(level[i]);
  }

  for (int m = n - 1; m >= 0; --m) {
    adj.lambda[m].resize(dim);
    for (int i = 0; i < dim; ++i)
      adj.lambda[m][i] = state.z[m][i] > p.z_tol ? adj.xi[m + 1][i] / p.epsilon : 0.0;

    const Eigen::VectorXd rhs_w =
        ops.mass.cwiseProduct(state.phi[m] - obj.phi_target[m] + p.beta * adj.lambda[m]);
    adj.w[m] = solve_spd(ops.elliptic, rhs_w, p.solver);

    Eigen::VectorXd hist_adj = Eigen::VectorXd::Zero(dim);
    for (int k = m + 1; k < n; ++k)
      hist_adj += dt * p.kernel.value(grid.time(k) - grid.time(m)) *
                  kappa_prime[k].cwiseProduct(adj.lambda[k]);

    adj.xi[m] = adj.xi[m + 1] + dt * (obj.alpha1 * state.d[m] +
                                      p.beta * (adj.w[m] - adj.lambda[m]) - hist_adj);
    adj.gradient[m] = adj.w[m] + obj.alpha2 * (ell[m] - obj.ell_target[m]);
  }
  return adj;
}

// Pointwise check of the sign condition against the step classification:
// where |z| > z_tol the multiplier must equal (1/eps) chi_{z>0} xi at the
// step's right endpoint; on biactive node-steps it must lie in the
// interval spanned by 0 and xi/eps, and xi < 0 there is flagged since the
// interval of admissible multipliers is then empty.
inline StationarityReport check_sign_condition(const TwoFieldParams& p, const TwoFieldState& state,
                                               const AdjointBundle& bundle, double tol = 1e-9) {
  const int n = static_cast<int>(state.z.size());
  if (bundle.lambda.size() != state.z.size() ||
      bundle.xi.size() != state.z.size() + 1)
    throw ConfigError("check_sign_condition: grid mismatch");
  StationarityReport report;
  report.sign_min = std::numeric_limits<double>::infinity();
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < state.z[k].size(); ++i) {
      const double z = state.z[k][i];
      const double lam = bundle.lambda[k][i];
      const double xi_over_eps = bundle.xi[k + 1][i] / p.epsilon;
      if (std::abs(z) > p.z_tol) {
        const double target = z > 0.0 ? xi_over_eps : 0.0;
        const double margin = tol - std::abs(lam - target);
        report.sign_min = std::min(report.sign_min, margin);
        if (std::abs(lam - target) > tol) ++report.sign_violations;
      } else {
        ++report.biactive_node_steps;
        const double lo = std::min(0.0, xi_over_eps) - tol;
        const double hi = std::max(0.0, xi_over_eps) + tol;
        if (lam < lo || lam > hi) ++report.sign_violations_biactive;
        if (xi_over_eps < -tol) ++report.sign_violations_biactive;  // empty admissible interval
      }
    }
  }
  report.directional_only = report.biactive_node_steps > 0;
  return report;
}

// Directional objective value dJ(ell; dell) computed through the forward
// sensitivity system; shared by bstat_check and the descent diagnostics.
inline double directional_objective_two(const TwoFieldParams& p, const TwoFieldState& state,
                                        const Trajectory& ell, const TrackingObjective& obj,
                                        const Trajectory& dell, const TimeGrid& grid) {
  const auto ops = detail::two_field_ops(p);
  const double dt = grid.dt();
  const auto [dd, dphi] = sensitivity_two(p, state, ell, dell, grid);
  double acc = 0.0;
  for (int k = 0; k < grid.n_steps; ++k) {
    acc += dt * (state.phi[k] - obj.phi_target[k]).dot(ops.mass.cwiseProduct(dphi[k]));
    acc += dt * obj.alpha1 * state.d[k].dot(ops.mass.cwiseProduct(dd[k]));
    acc += dt * obj.alpha2 * (ell[k] - obj.ell_target[k]).dot(ops.mass.cwiseProduct(dell[k]));
  }
  return acc;
}

// B-stationarity probe: minimum of the directional derivative of the
// reduced objective over the supplied directions and their negatives.
// At a strong-stationary point the minimum is >= -tol; an empty direction
// list yields the +infinity sentinel.
inline double bstat_check(const TwoFieldParams& p, const Trajectory& ell,
                          const TrackingObjective& obj, const std::vector<Trajectory>& directions,
                          const TimeGrid& grid) {
  obj.validate();
  double best = std::numeric_limits<double>::infinity();
  if (directions.empty()) return best;
  const TwoFieldState state = forward_two(p, ell, grid);
  for (const auto& dir : directions) {
    best = std::min(best, directional_objective_two(p, state, ell, obj, dir, grid));
    best = std::min(best, directional_objective_two(p, state, ell, obj, scaled(-1.0, dir), grid));
  }
  return best;
}

// Residual norms of the strong-stationarity system at a candidate bundle:
// (a) the backward evolution equation via backward differences,
// (b) the elliptic w-equation, (c) the gradient equation w + dJ/dell = 0,
// plus the pointwise sign-condition counts.
inline StationarityReport stationarity_report_two(const TwoFieldParams& p,
                                                  const TwoFieldState& state,
                                                  const Trajectory& ell,
                                                  const AdjointBundle& bundle,
                                                  const TrackingObjective& obj,
                                                  const TimeGrid& grid) {
  obj.validate();
  const auto ops = detail::two_field_ops(p);
  const int n = grid.n_steps;
  const int dim = p.mesh.n_nodes;
  check_trajectory(bundle.xi, n + 1, dim, "stationarity_report_two: xi");
  check_trajectory(bundle.w, n, dim, "stationarity_report_two: w");
  check_trajectory(bundle.lambda, n, dim, "stationarity_report_two: lambda");
  const double dt = grid.dt();

  StationarityReport report = check_sign_condition(p, state, bundle);
  report.adjoint_residual = bundle.xi[n].lpNorm<Eigen::Infinity>();

  std::vector<Eigen::VectorXd> kappa_prime(n);
  for (int k = 0; k < n; ++k) {
    const Eigen::VectorXd level = apply_history(p.kernel, state.d, k, dt);
    kappa_prime[k].resize(dim);
    for (int i = 0; i < dim; ++i) kappa_prime[k][i] = p.fatigue.deriv(level[i]);
  }

  Trajectory grad_res(n);
  for (int m = 0; m < n; ++m) {
    Eigen::VectorXd hist_adj = Eigen::VectorXd::Zero(dim);
    for (int k = m + 1; k < n; ++k)
      hist_adj += dt * p.kernel.value(grid.time(k) - grid.time(m)) *
                  kappa_prime[k].cwiseProduct(bundle.lambda[k]);
    const Eigen::VectorXd evo = (bundle.xi[m] - bundle.xi[m + 1]) / dt -
                                (obj.alpha1 * state.d[m] +
                                 p.beta * (bundle.w[m] - bundle.lambda[m]) - hist_adj);
    report.adjoint_residual = std::max(report.adjoint_residual, evo.lpNorm<Eigen::Infinity>());

    const Eigen::VectorXd ell_res =
        ops.elliptic.apply(bundle.w[m]) -
        ops.mass.cwiseProduct(state.phi[m] - obj.phi_target[m] + p.beta * bundle.lambda[m]);
    report.elliptic_residual = std::max(report.elliptic_residual, ell_res.lpNorm<Eigen::Infinity>());

    grad_res[m] = bundle.w[m] + obj.alpha2 * (ell[m] - obj.ell_target[m]);
  }
  report.gradient_residual = l2t_norm(grad_res, ops.mass, dt);
  return report;
}

}  // namespace evi
