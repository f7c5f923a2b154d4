#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <limits>
#include <vector>

#include "evi/errors.hpp"
#include "evi/linalg.hpp"
#include "evi/mesh.hpp"

namespace evi {

// Dissipation R(zeta, eta) = integral of kappa(zeta) * eta for eta >= 0
// (+infinity otherwise), realized with the lumped L2 pairing, so
// R(eta) = (M kappa)' eta on the nonnegative cone. Positively homogeneous
// by construction.
struct DissipationSpec {
  Eigen::VectorXd kappa_field;  // nodal kappa(zeta), toughness units
  Eigen::VectorXd mass_diag;    // lumped L2 weights

  Eigen::VectorXd kappa_load() const { return mass_diag.cwiseProduct(kappa_field); }

  double eval(const Eigen::VectorXd& eta) const {
    if (eta.size() != kappa_field.size()) throw ConfigError("DissipationSpec: dimension mismatch");
    if (eta.minCoeff() < 0.0)
      throw DomainError("DissipationSpec: dissipation is +inf off the nonnegative cone");
    return kappa_load().dot(eta);
  }
};

// Smallest generalized eigenvalue of (op, diag(mass)): the exact
// coercivity constant of op w.r.t. the lumped L2 norm.
inline double coercivity_constant(const SparseOperator& op, const Eigen::VectorXd& mass_diag) {
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> eig(
      op.dense(), Eigen::MatrixXd(mass_diag.asDiagonal()));
  return eig.eigenvalues().minCoeff();
}

// Discrete coercive self-adjoint viscosity. theta is a coercivity constant
// w.r.t. the lumped L2 norm: <V v, v> >= theta * v'Mv. Verified against a
// dense generalized eigensolve at construction for dimensions <= 64.
struct ViscositySpec {
  SparseOperator op;
  double theta = 0.0;
  Eigen::VectorXd mass_diag;
};

inline ViscositySpec make_viscosity(SparseOperator op, double theta, Eigen::VectorXd mass_diag) {
  if (theta <= 0.0) throw ConfigError("make_viscosity: theta must be positive");
  if (op.dim() != mass_diag.size()) throw ConfigError("make_viscosity: dimension mismatch");
  if (op.dim() <= 64) {
    const Eigen::MatrixXd v = op.dense();
    if ((v - v.transpose()).lpNorm<Eigen::Infinity>() > 1e-12 * (1.0 + v.lpNorm<Eigen::Infinity>()))
      throw ConfigError("make_viscosity: operator must be symmetric");
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> eig(
        v, Eigen::MatrixXd(mass_diag.asDiagonal()));
    const double lam_min = eig.eigenvalues().minCoeff();
    if (lam_min < theta * (1.0 - 1e-10))
      throw ConfigError("make_viscosity: coercivity constant not attained (lambda_min = " +
                        std::to_string(lam_min) + ")");
  }
  return ViscositySpec{std::move(op), theta, std::move(mass_diag)};
}

struct ConeProjectionResult {
  Eigen::VectorXd z;                  // rate = V^{-1}(omega - mu), >= 0 componentwise
  Eigen::VectorXd mu;                 // projected functional B(zeta, omega) = omega - V z
  std::vector<std::uint8_t> active;   // nodes with z = 0 (ties included)
  int iterations = 0;
};

// Constraint class per node for the directional (critical-cone) problems.
enum class NodeClass : std::uint8_t {
  bound,  // z >= 0
  fixed,  // z = 0
  free_node,
};

namespace detail {

struct PdasResult {
  Eigen::VectorXd z;
  Eigen::VectorXd multiplier;  // s = V z - b, >= 0 on the active set
  std::vector<std::uint8_t> active;
  int iterations = 0;
};

// Primal-dual active set iteration for min 1/2 z'Vz - b'z subject to the
// per-node classes. The active set update uses the rule s - z >= 0, which
// classifies ties (z = 0 with zero multiplier) as active; the converged
// rate is clamped so constrained components sit in the cone exactly.
inline PdasResult pdas_solve(const SparseOperator& V, const Eigen::VectorXd& b,
                             const std::vector<NodeClass>& classes,
                             const std::vector<std::uint8_t>* warm_start = nullptr,
                             int max_iters = 100) {
  const int n = V.dim();
  if (b.size() != n || static_cast<int>(classes.size()) != n)
    throw ConfigError("pdas_solve: dimension mismatch");
  const Eigen::MatrixXd vd = V.dense();

  std::vector<std::uint8_t> active(n, 0);
  for (int i = 0; i < n; ++i) {
    switch (classes[i]) {
      case NodeClass::fixed: active[i] = 1; break;
      case NodeClass::free_node: active[i] = 0; break;
      case NodeClass::bound:
        active[i] = warm_start && warm_start->size() == static_cast<std::size_t>(n)
                        ? (*warm_start)[i]
                        : static_cast<std::uint8_t>(b[i] <= 0.0);
        break;
    }
  }

  Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd s = Eigen::VectorXd::Zero(n);
  for (int iter = 1; iter <= max_iters; ++iter) {
    std::vector<int> inactive;
    inactive.reserve(n);
    for (int i = 0; i < n; ++i)
      if (!active[i]) inactive.push_back(i);

    z.setZero();
    if (!inactive.empty()) {
      const int m = static_cast<int>(inactive.size());
      Eigen::MatrixXd vii(m, m);
      Eigen::VectorXd bi(m);
      for (int a = 0; a < m; ++a) {
        bi[a] = b[inactive[a]];
        for (int c = 0; c < m; ++c) vii(a, c) = vd(inactive[a], inactive[c]);
      }
      Eigen::LLT<Eigen::MatrixXd> llt(vii);
      if (llt.info() != Eigen::Success)
        throw NumericalError("pdas_solve: reduced system not SPD");
      const Eigen::VectorXd zi = llt.solve(bi);
      for (int a = 0; a < m; ++a) z[inactive[a]] = zi[a];
    }
    s = vd * z - b;

    bool changed = false;
    for (int i = 0; i < n; ++i) {
      if (classes[i] != NodeClass::bound) continue;
      const std::uint8_t next = s[i] - z[i] >= 0.0 ? 1 : 0;
      if (next != active[i]) {
        active[i] = next;
        changed = true;
      }
    }
    if (!changed) {
      for (int i = 0; i < n; ++i) {
        if (classes[i] == NodeClass::free_node) continue;
        z[i] = active[i] ? 0.0 : std::max(z[i], 0.0);
      }
      return PdasResult{z, vd * z - b, std::move(active), iter};
    }
  }
  double comp = 0.0;
  for (int i = 0; i < n; ++i)
    if (classes[i] == NodeClass::bound) comp = std::max(comp, std::abs(std::min(z[i], s[i])));
  throw NumericalError("pdas_solve: active set did not settle", comp);
}

}  // namespace detail

// Metric projection of omega onto the subdifferential set
// {mu : <mu, v> <= R(zeta, v) for all v} in the V^{-1} inner product,
// together with the rate z = V^{-1}(omega - mu). Computed by shifting by
// the kappa load, projecting onto the polar of the nonnegative cone via
// the QP min_{z>=0} 1/2 z'Vz - (omega - M kappa)'z, and shifting back.
inline ConeProjectionResult project_B(const DissipationSpec& diss, const ViscositySpec& visc,
                                      const Eigen::VectorXd& omega,
                                      const std::vector<std::uint8_t>* warm_start = nullptr,
                                      int max_iters = 100) {
  const int n = visc.op.dim();
  if (omega.size() != n || diss.kappa_field.size() != n)
    throw ConfigError("project_B: dimension mismatch");
  const Eigen::VectorXd b = omega - diss.kappa_load();
  const std::vector<NodeClass> classes(n, NodeClass::bound);
  auto res = detail::pdas_solve(visc.op, b, classes, warm_start, max_iters);
  ConeProjectionResult out;
  out.z = std::move(res.z);
  out.mu = omega - visc.op.apply(out.z);
  out.active = std::move(res.active);
  out.iterations = res.iterations;
  return out;
}

// Rate map F(zeta, omega) = V^{-1}(omega - B(zeta, omega)); solves the
// elliptic VI of the second kind
//   R(zeta,eta) - R(zeta,z) + <Vz, eta - z> >= <omega, eta - z>  for all eta >= 0.
inline Eigen::VectorXd eval_F(const DissipationSpec& diss, const ViscositySpec& visc,
                              const Eigen::VectorXd& omega) {
  return project_B(diss, visc, omega).z;
}

// One-sided residual of the VI above: the max over the supplied test
// directions of <omega, eta-z> - R(eta) + R(z) - <Vz, eta-z>. Positive
// values certify a violation. Directions must lie in the nonnegative cone.
inline double vi_residual(const DissipationSpec& diss, const ViscositySpec& visc,
                          const Eigen::VectorXd& omega, const Eigen::VectorXd& z,
                          const std::vector<Eigen::VectorXd>& test_dirs) {
  const double r_z = diss.eval(z);
  const Eigen::VectorXd vz = visc.op.apply(z);
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& eta : test_dirs) {
    if (eta.size() != z.size()) throw ConfigError("vi_residual: dimension mismatch");
    if (eta.size() > 0 && eta.minCoeff() < 0.0)
      throw DomainError("vi_residual: test direction leaves the nonnegative cone");
    const Eigen::VectorXd diff = eta - z;
    worst = std::max(worst, omega.dot(diff) - diss.eval(eta) + r_z - vz.dot(diff));
  }
  return worst;
}

}  // namespace evi
