#pragma once

#include <Eigen/Dense>
#include <cmath>

#include "evi/errors.hpp"
#include "evi/grid.hpp"

namespace evi {

enum class KernelKind { constant, exponential };

// Volterra convolution kernel A(t) = amplitude * exp(-rate * t) acting
// componentwise (rate = 0 for the constant kind), plus a fixed offset y0
// representing the initial fatigue level.
struct VolterraKernel {
  KernelKind kind = KernelKind::constant;
  double amplitude = 1.0;
  double rate = 0.0;
  Eigen::VectorXd offset;  // empty means zero

  double value(double t) const {
    return kind == KernelKind::constant ? amplitude : amplitude * std::exp(-rate * t);
  }

  // Causal Lipschitz constant on [0, T]: max_t |A(t)|.
  double lipschitz(double horizon) const {
    if (kind == KernelKind::constant) return std::abs(amplitude);
    return rate >= 0.0 ? std::abs(amplitude) : std::abs(amplitude) * std::exp(-rate * horizon);
  }
};

// Left-rectangle quadrature of H(y)(t_k) = int_0^{t_k} A(t_k - s) y(s) ds + y0.
// Depends on y_0..y_{k-1} only, which keeps the forward Euler scheme explicit.
inline Eigen::VectorXd apply_history(const VolterraKernel& kernel, const Trajectory& y, int k,
                                     double dt) {
  if (k < 0 || k >= static_cast<int>(y.size()))
    throw ConfigError("apply_history: time index out of range");
  const int dim = static_cast<int>(y[k].size());
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(dim);
  const double tk = k * dt;
  for (int j = 0; j < k; ++j) acc += dt * kernel.value(tk - j * dt) * y[j];
  if (kernel.offset.size() > 0) {
    if (kernel.offset.size() != dim) throw ConfigError("apply_history: offset dimension mismatch");
    acc += kernel.offset;
  }
  return acc;
}

// H is affine, so H'(y; dy) = H(dy) with the offset dropped.
inline Eigen::VectorXd history_derivative(const VolterraKernel& kernel, const Trajectory& dy,
                                          int k, double dt) {
  VolterraKernel linear = kernel;
  linear.offset.resize(0);
  return apply_history(linear, dy, k, dt);
}

enum class FatigueKind { sigmoid_decay, softplus_linear };

// Toughness as a function of accumulated fatigue. Both families are C^1,
// nonincreasing and bounded below by kappa_min, with closed-form global
// Lipschitz constants:
//   sigmoid_decay:   kappa(s) = kappa_min + (kappa0 - kappa_min) / (1 + e^{gamma s}),
//                    L = (kappa0 - kappa_min) * gamma / 4
//   softplus_linear: kappa(s) = kappa_min + gamma * softplus(s0 - s),
//                    s0 = (kappa0 - kappa_min) / gamma,  L = gamma
// kappa0 == kappa_min gives a constant toughness (no fatigue feedback).
struct FatigueMap {
  FatigueKind kind = FatigueKind::sigmoid_decay;
  double kappa0 = 1.0;
  double kappa_min = 0.0;
  double gamma = 1.0;

  void validate() const {
    if (kappa0 <= 0.0) throw ConfigError("FatigueMap: kappa0 must be positive");
    if (kappa_min < 0.0) throw ConfigError("FatigueMap: kappa_min must be nonnegative");
    if (kappa0 < kappa_min) throw ConfigError("FatigueMap: kappa0 must be >= kappa_min");
    if (gamma <= 0.0) throw ConfigError("FatigueMap: gamma must be positive");
  }

  double eval(double s) const {
    if (kind == FatigueKind::sigmoid_decay) {
      // 1/(1+e^x) evaluated overflow-free on both tails.
      const double x = gamma * s;
      const double sig = x >= 0.0 ? std::exp(-x) / (1.0 + std::exp(-x)) : 1.0 / (1.0 + std::exp(x));
      return kappa_min + (kappa0 - kappa_min) * sig;
    }
    const double x = (kappa0 - kappa_min) / gamma - s;
    const double softplus = x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
    return kappa_min + gamma * softplus;
  }

  double deriv(double s) const {
    if (kind == FatigueKind::sigmoid_decay) {
      const double x = gamma * s;
      const double sig = x >= 0.0 ? std::exp(-x) / (1.0 + std::exp(-x)) : 1.0 / (1.0 + std::exp(x));
      return -(kappa0 - kappa_min) * gamma * sig * (1.0 - sig);
    }
    const double x = (kappa0 - kappa_min) / gamma - s;
    const double logistic = x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
    return -gamma * logistic;
  }

  double lipschitz() const {
    if (kind == FatigueKind::sigmoid_decay) return (kappa0 - kappa_min) * gamma / 4.0;
    return gamma;
  }
};

inline Eigen::VectorXd kappa_eval(const FatigueMap& map, const Eigen::VectorXd& s) {
  Eigen::VectorXd out(s.size());
  for (int i = 0; i < s.size(); ++i) out[i] = map.eval(s[i]);
  return out;
}

inline Eigen::VectorXd kappa_deriv(const FatigueMap& map, const Eigen::VectorXd& s,
                                   const Eigen::VectorXd& ds) {
  if (s.size() != ds.size()) throw ConfigError("kappa_deriv: dimension mismatch");
  Eigen::VectorXd out(s.size());
  for (int i = 0; i < s.size(); ++i) out[i] = map.deriv(s[i]) * ds[i];
  return out;
}

}  // namespace evi
