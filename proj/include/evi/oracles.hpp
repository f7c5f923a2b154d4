#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "evi/errors.hpp"
#include "evi/mesh.hpp"
#include "evi/rng.hpp"

// Independent reference implementations used by the test and verify
// suites. They deliberately avoid the production solve paths (no PDAS,
// no CG): exhaustive KKT enumeration, fixed-point iterations and dense
// pivoted factorizations only.

namespace evi::oracles {

inline Eigen::VectorXd dense_lu_solve(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
  return Eigen::FullPivLU<Eigen::MatrixXd>(a).solve(b);
}

// Exhaustive active-set enumeration for min_{z>=0} 1/2 z'Vz - b'z.
// Tries all 2^n candidate active sets, solves each reduced system by LU,
// and returns the KKT point with the largest feasibility margin.
inline Eigen::VectorXd enumerate_cone_qp(const Eigen::MatrixXd& v, const Eigen::VectorXd& b) {
  const int n = static_cast<int>(b.size());
  if (n > 20) throw ConfigError("enumerate_cone_qp: enumeration oracle limited to n <= 20");
  Eigen::VectorXd best;
  double best_margin = -std::numeric_limits<double>::infinity();
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    std::vector<int> inactive;
    for (int i = 0; i < n; ++i)
      if (!(mask & (1u << i))) inactive.push_back(i);
    Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
    if (!inactive.empty()) {
      const int m = static_cast<int>(inactive.size());
      Eigen::MatrixXd vii(m, m);
      Eigen::VectorXd bi(m);
      for (int a = 0; a < m; ++a) {
        bi[a] = b[inactive[a]];
        for (int c = 0; c < m; ++c) vii(a, c) = v(inactive[a], inactive[c]);
      }
      const Eigen::VectorXd zi = dense_lu_solve(vii, bi);
      for (int a = 0; a < m; ++a) z[inactive[a]] = zi[a];
    }
    const Eigen::VectorXd s = v * z - b;
    double margin = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i)
      margin = std::min(margin, mask & (1u << i) ? s[i] : z[i]);
    if (margin > best_margin) {
      best_margin = margin;
      best = z.cwiseMax(0.0);
    }
  }
  return best;
}

// Direct metric projection of omega onto {mu : mu <= cap} in the V^{-1}
// inner product, via enumeration of the dual active sets: on a candidate
// set A the multiplier solves V_AA nu_A = (omega - cap)_A and
// mu = omega - V nu. This is the unshifted realization of the projection.
inline Eigen::VectorXd enumerate_capped_projection(const Eigen::MatrixXd& v,
                                                   const Eigen::VectorXd& omega,
                                                   const Eigen::VectorXd& cap) {
  const int n = static_cast<int>(omega.size());
  if (n > 20) throw ConfigError("enumerate_capped_projection: limited to n <= 20");
  Eigen::VectorXd best_mu;
  double best_margin = -std::numeric_limits<double>::infinity();
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    std::vector<int> active;
    for (int i = 0; i < n; ++i)
      if (mask & (1u << i)) active.push_back(i);
    Eigen::VectorXd nu = Eigen::VectorXd::Zero(n);
    if (!active.empty()) {
      const int m = static_cast<int>(active.size());
      Eigen::MatrixXd vaa(m, m);
      Eigen::VectorXd rhs(m);
      for (int a = 0; a < m; ++a) {
        rhs[a] = omega[active[a]] - cap[active[a]];
        for (int c = 0; c < m; ++c) vaa(a, c) = v(active[a], active[c]);
      }
      const Eigen::VectorXd nua = dense_lu_solve(vaa, rhs);
      for (int a = 0; a < m; ++a) nu[active[a]] = nua[a];
    }
    const Eigen::VectorXd mu = omega - v * nu;
    double margin = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i)
      margin = std::min(margin, mask & (1u << i) ? nu[i] : cap[i] - mu[i]);
    if (margin > best_margin) {
      best_margin = margin;
      best_mu = mu;
    }
  }
  return best_mu;
}

// Projected gradient iteration for min_{z>=0} 1/2 z'Vz - b'z, run to a
// tight fixed-point tolerance. Linear convergence with ratio
// 1 - lambda_min/lambda_max, so keep the test operators well conditioned.
inline Eigen::VectorXd projected_gradient_cone_qp(const Eigen::MatrixXd& v,
                                                  const Eigen::VectorXd& b, double tol = 1e-13,
                                                  long max_iters = 2000000) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(v);
  const double lam_max = eig.eigenvalues().maxCoeff();
  const double step = 1.0 / lam_max;
  Eigen::VectorXd z = Eigen::VectorXd::Zero(b.size()).cwiseMax(0.0);
  const double scale = 1.0 + b.lpNorm<Eigen::Infinity>() / lam_max;
  for (long it = 0; it < max_iters; ++it) {
    const Eigen::VectorXd next = (z - step * (v * z - b)).cwiseMax(0.0);
    const double change = (next - z).lpNorm<Eigen::Infinity>();
    z = next;
    if (change <= tol * scale) return z;
  }
  throw NumericalError("projected_gradient_cone_qp: no convergence");
}

// Golden-section search for a unimodal function on [a, b].
inline double golden_section_min(const std::function<double(double)>& f, double a, double b,
                                 double tol = 1e-10) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > tol) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
    }
  }
  return 0.5 * (a + b);
}

// Random SPD matrix with eigenvalues drawn from [lam_lo, lam_hi].
inline Eigen::MatrixXd random_spd(Rng& rng, int n, double lam_lo, double lam_hi) {
  Eigen::MatrixXd gauss(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) gauss(i, j) = rng.normal();
  const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(gauss).householderQ();
  Eigen::VectorXd eigs(n);
  for (int i = 0; i < n; ++i) eigs[i] = rng.uniform(lam_lo, lam_hi);
  Eigen::MatrixXd a = q * eigs.asDiagonal() * q.transpose();
  return 0.5 * (a + a.transpose());
}

}  // namespace evi::oracles
