#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "evi/errors.hpp"
#include "evi/mesh.hpp"

namespace evi {

struct SolveOptions {
  double rel_tol = 1e-10;
  int max_iters = 20000;
  int dense_threshold = 64;
};

namespace detail {

inline Eigen::VectorXd dense_spd_solve(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success)
    throw NumericalError("solve_spd: dense Cholesky failed (operator not SPD?)");
  return llt.solve(b);
}

// Jacobi-preconditioned CG on the sparse operator.
inline Eigen::VectorXd cg_solve(const SparseOperator& op, const Eigen::VectorXd& b,
                                const SolveOptions& opts) {
  const int n = op.dim();
  Eigen::VectorXd inv_diag(n);
  for (int i = 0; i < n; ++i) {
    const double d = op.m.coeff(i, i);
    inv_diag[i] = d > 0.0 ? 1.0 / d : 1.0;
  }
  const double nb = b.norm();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  if (nb == 0.0) return x;
  Eigen::VectorXd r = b;
  Eigen::VectorXd z = inv_diag.cwiseProduct(r);
  Eigen::VectorXd p = z;
  double rz = r.dot(z);
  double rnorm = nb;
  for (int it = 0; it < opts.max_iters; ++it) {
    const Eigen::VectorXd q = op.apply(p);
    const double pq = p.dot(q);
    if (pq <= 0.0) throw NumericalError("solve_spd: CG breakdown (operator not SPD?)", rnorm / nb);
    const double alpha = rz / pq;
    x += alpha * p;
    r -= alpha * q;
    rnorm = r.norm();
    if (rnorm <= opts.rel_tol * nb) return x;
    z = inv_diag.cwiseProduct(r);
    const double rz_new = r.dot(z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  throw NumericalError("solve_spd: CG did not converge", rnorm / nb);
}

}  // namespace detail

// SPD solve: dense Cholesky below the dense threshold, conjugate
// gradients with diagonal scaling above it.
inline Eigen::VectorXd solve_spd(const SparseOperator& op, const Eigen::VectorXd& rhs,
                                 const SolveOptions& opts = {}) {
  if (op.dim() != rhs.size()) throw ConfigError("solve_spd: dimension mismatch");
  if (op.dim() < opts.dense_threshold) return detail::dense_spd_solve(op.dense(), rhs);
  return detail::cg_solve(op, rhs, opts);
}

enum class InnerProductKind { l2_lumped, h1_seminorm, v_inverse };

struct InnerProductSpec {
  InnerProductKind kind = InnerProductKind::l2_lumped;
  SparseOperator weight;
};

inline double norm(const InnerProductSpec& spec, const Eigen::VectorXd& v) {
  if (spec.weight.dim() != v.size()) throw ConfigError("norm: dimension mismatch");
  double sq = 0.0;
  if (spec.kind == InnerProductKind::v_inverse) {
    sq = v.dot(solve_spd(spec.weight, v));
  } else {
    sq = v.dot(spec.weight.apply(v));
  }
  return std::sqrt(std::max(sq, 0.0));
}

// Lumped L2 norm of a nodal function and the dual norm of a load vector.
inline double m_norm(const Eigen::VectorXd& v, const Eigen::VectorXd& mass_diag) {
  return std::sqrt(std::max(v.dot(mass_diag.cwiseProduct(v)), 0.0));
}

inline double m_inv_norm(const Eigen::VectorXd& load, const Eigen::VectorXd& mass_diag) {
  return std::sqrt(std::max(load.dot(load.cwiseQuotient(mass_diag)), 0.0));
}

}  // namespace evi
