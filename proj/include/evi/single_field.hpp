#pragma once

#include <Eigen/Dense>
#include <vector>

#include "evi/cone_qp.hpp"
#include "evi/grid.hpp"
#include "evi/history.hpp"
#include "evi/objective.hpp"
#include "evi/ode.hpp"
#include "evi/rng.hpp"

namespace evi {

// H1_0-viscosity damage model: damage q on a dirichlet mesh, viscosity
// epsilon*K, dissipation kappa(H(q)) against the nonnegative rate cone.
struct SingleFieldParams {
  double alpha = 1.0;    // gradient-energy weight
  double epsilon = 1.0;  // viscosity
  FatigueMap fatigue;
  VolterraKernel kernel;
  SpatialMesh mesh;       // dirichlet
  double act_tol = 1e-8;  // strict-complementarity gap threshold
  int max_pdas_iters = 100;

  void validate() const {
    if (alpha <= 0.0) throw ConfigError("SingleFieldParams: alpha must be positive");
    if (epsilon <= 0.0) throw ConfigError("SingleFieldParams: epsilon must be positive");
    if (mesh.bc != BoundaryCondition::dirichlet)
      throw ConfigError("SingleFieldParams: mesh must be dirichlet");
    fatigue.validate();
  }
};

struct SingleFieldState {
  Trajectory q;     // damage at grid points (n_steps + 1)
  Trajectory z;     // pre-projection load -aKq + M ell - M kappa(H(q)), per step
  Trajectory rate;  // per-step rates, >= 0 componentwise
  std::vector<std::vector<std::uint8_t>> active;
  std::vector<int> biactive_counts;
};

namespace detail {

struct SingleFieldOps {
  SparseOperator stiff;
  SparseOperator visc;  // epsilon * stiff
  Eigen::MatrixXd visc_dense;
  Eigen::VectorXd mass;
};

inline SingleFieldOps single_field_ops(const SingleFieldParams& p) {
  p.validate();
  SingleFieldOps ops;
  ops.stiff = stiffness(p.mesh);
  ops.visc = scaled(ops.stiff, p.epsilon);
  ops.visc_dense = ops.visc.dense();
  ops.mass = lumped_mass_diag(p.mesh);
  return ops;
}

// Node classes for the critical-cone problems at one time step:
// rate > 0 -> free, rate = 0 with dual gap above act_tol -> fixed,
// remaining contact nodes are biactive -> bound.
inline std::vector<NodeClass> classify_step(const Eigen::VectorXd& rate,
                                            const Eigen::VectorXd& gap, double act_tol,
                                            int* biactive = nullptr) {
  std::vector<NodeClass> classes(rate.size());
  int count = 0;
  for (int i = 0; i < rate.size(); ++i) {
    if (rate[i] > 0.0) {
      classes[i] = NodeClass::free_node;
    } else if (gap[i] > act_tol) {
      classes[i] = NodeClass::fixed;
    } else {
      classes[i] = NodeClass::bound;
      ++count;
    }
  }
  if (biactive) *biactive = count;
  return classes;
}

}  // namespace detail

// Obstacle solve realizing the polar-cone projection in the
// (1/epsilon) K^{-1} metric: min_{v>=0} (epsilon/2) v'Kv - omega'v.
// Returns the rate v (the model's q-dot) together with mu = omega - eK v.
inline ConeProjectionResult polar_project(const SingleFieldParams& p, const Eigen::VectorXd& omega,
                                          const std::vector<std::uint8_t>* warm_start = nullptr) {
  const auto ops = detail::single_field_ops(p);
  const std::vector<NodeClass> classes(ops.visc.dim(), NodeClass::bound);
  auto res = detail::pdas_solve(ops.visc, omega, classes, warm_start, p.max_pdas_iters);
  ConeProjectionResult out;
  out.z = std::move(res.z);
  out.mu = omega - ops.visc.apply(out.z);
  out.active = std::move(res.active);
  out.iterations = res.iterations;
  return out;
}

inline SingleFieldState forward_single(const SingleFieldParams& p, const Trajectory& ell,
                                       const TimeGrid& grid) {
  const auto ops = detail::single_field_ops(p);
  const int n = grid.n_steps;
  const int dim = p.mesh.n_nodes;
  check_trajectory(ell, n, dim, "forward_single: ell");
  const double dt = grid.dt();
  const std::vector<NodeClass> classes(dim, NodeClass::bound);

  SingleFieldState st;
  st.q = zero_trajectory(n + 1, dim);
  st.z.resize(n);
  st.rate.resize(n);
  st.active.resize(n);
  st.biactive_counts.assign(n, 0);

  std::vector<std::uint8_t> warm;
  for (int k = 0; k < n; ++k) {
    const Eigen::VectorXd fatigue_level = apply_history(p.kernel, st.q, k, dt);
    const Eigen::VectorXd kappa = kappa_eval(p.fatigue, fatigue_level);
    const Eigen::VectorXd omega = -p.alpha * ops.stiff.apply(st.q[k]) +
                                  ops.mass.cwiseProduct(ell[k]) - ops.mass.cwiseProduct(kappa);
    auto res = detail::pdas_solve(ops.visc, omega, classes, warm.empty() ? nullptr : &warm,
                                  p.max_pdas_iters);
    warm = res.active;
    st.z[k] = omega;
    st.rate[k] = res.z;
    st.active[k] = std::move(res.active);
    detail::classify_step(st.rate[k], res.multiplier, p.act_tol, &st.biactive_counts[k]);
    st.q[k + 1] = st.q[k] + dt * st.rate[k];
  }
  return st;
}

// Adapter exposing the model as an abstract rate-form evolution, used to
// cross-check forward_single against the generic integrator.
inline OdeModel single_field_ode_model(const SingleFieldParams& p, const TimeGrid& grid) {
  const auto ops = detail::single_field_ops(p);
  OdeModel model;
  model.visc = make_viscosity(ops.visc, p.epsilon * coercivity_constant(ops.stiff, ops.mass),
                              ops.mass);
  model.history_apply = [kernel = p.kernel, dt = grid.dt()](const Trajectory& y, int k) {
    return apply_history(kernel, y, k, dt);
  };
  model.kappa_of = [fatigue = p.fatigue](const Eigen::VectorXd& zeta) {
    return kappa_eval(fatigue, zeta);
  };
  model.rhs_g = [stiff = ops.stiff, mass = ops.mass, alpha = p.alpha](
                    const Eigen::VectorXd& y, const Eigen::VectorXd& ell_k) {
    return Eigen::VectorXd(-alpha * stiff.apply(y) + mass.cwiseProduct(ell_k));
  };
  return model;
}

struct SensitivityResult {
  Trajectory dq;     // n_steps + 1
  Trajectory drate;  // n_steps
  std::vector<int> biactive_counts;
};

// Directional derivative of the control-to-state map: per step solve the
// critical-cone QP min (epsilon/2) v'Kv - domega'v with v = 0 on strongly
// active nodes, v >= 0 on biactive nodes, v free elsewhere. On steps with
// biactive nodes the map is only directionally linear; counts are reported.
inline SensitivityResult sensitivity_single(const SingleFieldParams& p,
                                            const SingleFieldState& state, const Trajectory& ell,
                                            const Trajectory& dell, const TimeGrid& grid) {
  const auto ops = detail::single_field_ops(p);
  const int n = grid.n_steps;
  const int dim = p.mesh.n_nodes;
  check_trajectory(ell, n, dim, "sensitivity_single: ell");
  check_trajectory(dell, n, dim, "sensitivity_single: dell");
  check_trajectory(state.rate, n, dim, "sensitivity_single: state");
  const double dt = grid.dt();

  SensitivityResult out;
  out.dq = zero_trajectory(n + 1, dim);
  out.drate.resize(n);
  out.biactive_counts.assign(n, 0);

  for (int k = 0; k < n; ++k) {
    const Eigen::VectorXd gap = ops.visc.apply(state.rate[k]) - state.z[k];
    const auto classes =
        detail::classify_step(state.rate[k], gap, p.act_tol, &out.biactive_counts[k]);
    const Eigen::VectorXd fatigue_level = apply_history(p.kernel, state.q, k, dt);
    const Eigen::VectorXd dfatigue = history_derivative(p.kernel, out.dq, k, dt);
    const Eigen::VectorXd dkappa = kappa_deriv(p.fatigue, fatigue_level, dfatigue);
    const Eigen::VectorXd domega = -p.alpha * ops.stiff.apply(out.dq[k]) +
                                   ops.mass.cwiseProduct(dell[k]) - ops.mass.cwiseProduct(dkappa);
    auto res = detail::pdas_solve(ops.visc, domega, classes, nullptr, p.max_pdas_iters);
    out.drate[k] = std::move(res.z);
    out.dq[k + 1] = out.dq[k] + dt * out.drate[k];
  }
  return out;
}

// Objective partial w.r.t. q in load form: K(q - q_d) + alpha1 * M q,
// evaluated at the left node of step k.
inline Eigen::VectorXd single_field_dq_load(const TrackingObjective& obj,
                                            const detail::SingleFieldOps& ops,
                                            const Eigen::VectorXd& q_k, int k) {
  return ops.stiff.apply(q_k - obj.phi_target[k]) +
         obj.alpha1 * ops.mass.cwiseProduct(q_k);
}

struct SingleFieldAdjoint {
  Trajectory xi;        // n_steps + 1 load vectors, xi(T) = 0
  Trajectory lambda;    // n_steps nodal functions
  Trajectory gradient;  // n_steps, lambda + dJ/dell
  long biactive_node_steps = 0;
};

// Discrete transpose of the linearized forward scheme. Only available in
// strict-complementarity mode: the critical cone is then a subspace and
// the projection is linear, so lambda_k is the reduced solve applied to
// the adjoint state at the step's right endpoint.
inline SingleFieldAdjoint adjoint_single(const SingleFieldParams& p, const SingleFieldState& state,
                                         const Trajectory& ell, const TrackingObjective& obj,
                                         const TimeGrid& grid) {
  obj.validate();
  const auto ops = detail::single_field_ops(p);
  const int n = grid.n_steps;
  const int dim = p.mesh.n_nodes;
  check_trajectory(ell, n, dim, "adjoint_single: ell");
  check_trajectory(obj.phi_target, n, dim, "adjoint_single: phi_target");
  check_trajectory(obj.ell_target, n, dim, "adjoint_single: ell_target");
  const double dt = grid.dt();

  std::vector<std::vector<NodeClass>> classes(n);
  long biactive = 0;
  for (int k = 0; k < n; ++k) {
    int count = 0;
    const Eigen::VectorXd gap = ops.visc.apply(state.rate[k]) - state.z[k];
    classes[k] = detail::classify_step(state.rate[k], gap, p.act_tol, &count);
    biactive += count;
  }
  if (biactive > 0)
    throw NumericalError("adjoint_single: biactive node-steps present; only directional "
                         "residual checking is available",
                         static_cast<double>(biactive));

  SingleFieldAdjoint adj;
  adj.xi = zero_trajectory(n + 1, dim);
  adj.lambda.resize(n);
  adj.gradient.resize(n);

  std::vector<Eigen::VectorXd> kappa_prime(n);
  for (int k = 0; k < n; ++k) {
    const Eigen::VectorXd level = apply_history(p.kernel, state.q, k, dt);
    kappa_prime[k] = kappa_eval(p.fatigue, level);  // reuse storage shape
    for (int i = 0; i < dim; ++i) kappa_prime[k][i] = p.fatigue.deriv(level[i]);
  }

  for (int m = n - 1; m >= 0; --m) {
    // lambda_m = [(1/eps) K^{-1} (I - P_T)]^* xi_{m+1}: reduced solve on the
    // inactive set (strict complementarity makes this symmetric).
    auto res = detail::pdas_solve(ops.visc, adj.xi[m + 1], classes[m], nullptr, p.max_pdas_iters);
    adj.lambda[m] = std::move(res.z);

    Eigen::VectorXd hist_adj = Eigen::VectorXd::Zero(dim);
    for (int k = m + 1; k < n; ++k)
      hist_adj += dt * p.kernel.value(grid.time(k) - grid.time(m)) *
                  kappa_prime[k].cwiseProduct(ops.mass.cwiseProduct(adj.lambda[k]));

    adj.xi[m] = adj.xi[m + 1] +
                dt * (single_field_dq_load(obj, ops, state.q[m], m) -
                      p.alpha * ops.stiff.apply(adj.lambda[m]) - hist_adj);
    adj.gradient[m] = adj.lambda[m] + obj.alpha2 * (ell[m] - obj.ell_target[m]);
  }
  return adj;
}

struct SignSamplingOptions {
  double tol = 1e-9;
  int random_dirs = 5;
  std::uint64_t seed = 7;
};

// Residual checking of a candidate (xi, lambda) against the discrete
// strong-stationarity system: (a) the backward evolution equation,
// (b) the sign condition sampled over test directions pushed through the
// critical-cone map, (c) the gradient equation lambda + dJ/dell = 0.
inline StationarityReport stationarity_residual_single(
    const SingleFieldParams& p, const SingleFieldState& state, const Trajectory& ell,
    const Trajectory& xi, const Trajectory& lambda, const TrackingObjective& obj,
    const TimeGrid& grid, const SignSamplingOptions& opts = {}) {
  obj.validate();
  const auto ops = detail::single_field_ops(p);
  const int n = grid.n_steps;
  const int dim = p.mesh.n_nodes;
  check_trajectory(xi, n + 1, dim, "stationarity_residual_single: xi");
  check_trajectory(lambda, n, dim, "stationarity_residual_single: lambda");
  check_trajectory(ell, n, dim, "stationarity_residual_single: ell");
  const double dt = grid.dt();

  StationarityReport report;
  report.adjoint_residual = xi[n].lpNorm<Eigen::Infinity>();  // terminal condition

  std::vector<Eigen::VectorXd> kappa_prime(n);
  std::vector<std::vector<NodeClass>> classes(n);
  for (int k = 0; k < n; ++k) {
    const Eigen::VectorXd level = apply_history(p.kernel, state.q, k, dt);
    kappa_prime[k].resize(dim);
    for (int i = 0; i < dim; ++i) kappa_prime[k][i] = p.fatigue.deriv(level[i]);
    int count = 0;
    const Eigen::VectorXd gap = ops.visc.apply(state.rate[k]) - state.z[k];
    classes[k] = detail::classify_step(state.rate[k], gap, p.act_tol, &count);
    report.biactive_node_steps += count;
  }
  report.directional_only = report.biactive_node_steps > 0;

  // (a) backward differences of -xi' - a*Delta*lambda + [(kappa o H)'(q)]^* lambda = dJ/dq
  for (int m = 0; m < n; ++m) {
    Eigen::VectorXd hist_adj = Eigen::VectorXd::Zero(dim);
    for (int k = m + 1; k < n; ++k)
      hist_adj += dt * p.kernel.value(grid.time(k) - grid.time(m)) *
                  kappa_prime[k].cwiseProduct(ops.mass.cwiseProduct(lambda[k]));
    const Eigen::VectorXd resid = (xi[m] - xi[m + 1]) / dt -
                                  (single_field_dq_load(obj, ops, state.q[m], m) -
                                   p.alpha * ops.stiff.apply(lambda[m]) - hist_adj);
    report.adjoint_residual = std::max(report.adjoint_residual, resid.lpNorm<Eigen::Infinity>());
  }

  // (b) sign condition sampled over +-basis and random load directions.
  Rng rng(opts.seed);
  std::vector<Eigen::VectorXd> dirs;
  for (int i = 0; i < dim; ++i) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(dim);
    e[i] = 1.0;
    dirs.push_back(e);
    dirs.push_back(-e);
  }
  for (int r = 0; r < opts.random_dirs; ++r) {
    Eigen::VectorXd v = rng.normal_vec(dim);
    v.normalize();
    dirs.push_back(v);
  }
  report.sign_min = std::numeric_limits<double>::infinity();
  for (int m = 0; m < n; ++m) {
    for (const auto& v : dirs) {
      auto res = detail::pdas_solve(ops.visc, v, classes[m], nullptr, p.max_pdas_iters);
      const double value = xi[m + 1].dot(res.z) - lambda[m].dot(v);
      report.sign_min = std::min(report.sign_min, value);
      if (value < -opts.tol) ++report.sign_violations;
    }
  }

  // (c) gradient equation lambda + dJ/dell = 0 in L2(0,T;L2).
  Trajectory grad_res(n);
  for (int k = 0; k < n; ++k) grad_res[k] = lambda[k] + obj.alpha2 * (ell[k] - obj.ell_target[k]);
  report.gradient_residual = l2t_norm(grad_res, ops.mass, dt);
  return report;
}

}  // namespace evi
