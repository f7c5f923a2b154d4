#pragma once

#include <Eigen/Dense>
#include <functional>

#include "evi/cone_qp.hpp"
#include "evi/grid.hpp"
#include "evi/rng.hpp"

namespace evi {

// Callback bundle describing one evolution in rate form: the history map
// feeding the dissipation, the toughness field kappa(zeta), the load
// g(y_k, ell_k), and the viscosity metric.
struct OdeModel {
  std::function<Eigen::VectorXd(const Trajectory&, int)> history_apply;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> kappa_of;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Eigen::VectorXd&)> rhs_g;
  ViscositySpec visc;
};

enum class StepMode { explicit_euler, picard };

struct PicardOptions {
  double tol = 1e-10;
  int max_iters = 50;
};

// Forward integration of y' = F(H(y), g(y, ell)) from y(0) = 0.
// The default is explicit Euler. Picard mode evaluates the history at the
// step endpoint and iterates the step map
//     u <- y_k + dt * F(H(y)(t_{k+1}), g(u, ell_k))
// to a fixed point, which doubles as a per-step contraction check.
inline Trajectory integrate_ode(const OdeModel& model, const Trajectory& ell, const TimeGrid& grid,
                                StepMode mode = StepMode::explicit_euler,
                                const PicardOptions& picard = {}) {
  const int n = grid.n_steps;
  if (n < 1) throw ConfigError("integrate_ode: step count must be >= 1");
  const int dim = model.visc.op.dim();
  check_trajectory(ell, n, dim, "integrate_ode: ell");
  const double dt = grid.dt();

  Trajectory y = zero_trajectory(n + 1, dim);
  std::vector<std::uint8_t> warm;
  for (int k = 0; k < n; ++k) {
    if (mode == StepMode::explicit_euler) {
      const DissipationSpec diss{model.kappa_of(model.history_apply(y, k)), model.visc.mass_diag};
      auto res = project_B(diss, model.visc, model.rhs_g(y[k], ell[k]),
                           warm.empty() ? nullptr : &warm);
      y[k + 1] = y[k] + dt * res.z;
      warm = std::move(res.active);
    } else {
      // History at t_{k+1} uses y_0..y_k only (left-rectangle quadrature),
      // so only the g argument is implicit.
      const DissipationSpec diss{model.kappa_of(model.history_apply(y, k + 1)),
                                 model.visc.mass_diag};
      Eigen::VectorXd u = y[k];
      bool converged = false;
      for (int it = 0; it < picard.max_iters; ++it) {
        auto res = project_B(diss, model.visc, model.rhs_g(u, ell[k]),
                             warm.empty() ? nullptr : &warm);
        warm = std::move(res.active);
        const Eigen::VectorXd next = y[k] + dt * res.z;
        const double change = (next - u).lpNorm<Eigen::Infinity>();
        u = next;
        if (change <= picard.tol * (1.0 + u.lpNorm<Eigen::Infinity>())) {
          converged = true;
          break;
        }
      }
      if (!converged)
        throw NumericalError("integrate_ode: picard iteration did not contract at step " +
                             std::to_string(k));
      y[k + 1] = u;
    }
  }
  return y;
}

struct LipschitzStats {
  double max_ratio = 0.0;
  double bound = 0.0;  // max{1, L_kappa} / theta
  bool within_bound = true;
  int samples = 0;
};

// Sampling certificate for the Lipschitz bound of the rate map. Draws
// pairs (zeta_i, omega_i) and compares
//     ||F(zeta_1, omega_1) - F(zeta_2, omega_2)||_M
// against ||zeta_1 - zeta_2||_M + ||omega_1 - omega_2||_{M^-1}.
// The bound is a theorem; a sampled violation indicates an implementation
// bug, not a sharper constant.
inline LipschitzStats lipschitz_certificate(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& kappa_of, double kappa_lipschitz,
    const ViscositySpec& visc, int sample_count, std::uint64_t seed, double rel_slack = 1e-8) {
  if (sample_count < 1) throw ConfigError("lipschitz_certificate: sample_count must be >= 1");
  const int n = visc.op.dim();
  Rng rng(seed);
  LipschitzStats stats;
  stats.bound = std::max(1.0, kappa_lipschitz) / visc.theta;
  stats.samples = sample_count;
  for (int s = 0; s < sample_count; ++s) {
    const Eigen::VectorXd zeta1 = rng.uniform_vec(n, -2.0, 2.0);
    const Eigen::VectorXd zeta2 = rng.uniform_vec(n, -2.0, 2.0);
    const Eigen::VectorXd omega1 = visc.mass_diag.cwiseProduct(rng.uniform_vec(n, -3.0, 3.0));
    const Eigen::VectorXd omega2 = visc.mass_diag.cwiseProduct(rng.uniform_vec(n, -3.0, 3.0));
    const DissipationSpec d1{kappa_of(zeta1), visc.mass_diag};
    const DissipationSpec d2{kappa_of(zeta2), visc.mass_diag};
    const Eigen::VectorXd z1 = eval_F(d1, visc, omega1);
    const Eigen::VectorXd z2 = eval_F(d2, visc, omega2);
    const double denom =
        m_norm(zeta1 - zeta2, visc.mass_diag) + m_inv_norm(omega1 - omega2, visc.mass_diag);
    if (denom == 0.0) continue;
    stats.max_ratio = std::max(stats.max_ratio, m_norm(z1 - z2, visc.mass_diag) / denom);
  }
  stats.within_bound = stats.max_ratio <= stats.bound * (1.0 + rel_slack);
  return stats;
}

}  // namespace evi
