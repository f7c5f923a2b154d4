#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>

#include "evi/history.hpp"
#include "evi/rng.hpp"

using namespace evi;

namespace {

Eigen::VectorXd scalar(double x) { return (Eigen::VectorXd(1) << x).finished(); }

}  // namespace

TEST(History, ZeroTrajectoryReturnsOffset) {
  VolterraKernel kernel;
  kernel.offset = scalar(0.7);
  const Trajectory y = zero_trajectory(5, 1);
  EXPECT_DOUBLE_EQ(apply_history(kernel, y, 4, 0.25)[0], 0.7);
  EXPECT_DOUBLE_EQ(apply_history(kernel, y, 0, 0.25)[0], 0.7);
}

TEST(History, IndexOutOfRangeThrows) {
  const Trajectory y = zero_trajectory(3, 1);
  EXPECT_THROW(apply_history(VolterraKernel{}, y, 3, 0.1), ConfigError);
  EXPECT_THROW(apply_history(VolterraKernel{}, y, -1, 0.1), ConfigError);
}

// Left-rectangle quadrature of int_0^1 s ds = 1/2 converges at first order.
TEST(History, ConstantKernelRampMatchesExactIntegral) {
  VolterraKernel kernel;  // a0 = 1
  for (int n : {64, 128, 256}) {
    const double dt = 1.0 / n;
    Trajectory y(n + 1);
    for (int j = 0; j <= n; ++j) y[j] = scalar(j * dt);
    const double value = apply_history(kernel, y, n, dt)[0];
    EXPECT_NEAR(value, 0.5, 1.2 * dt);
  }
}

// Exponential kernel against c * a0 (1 - e^{-g t}) / g + y0.
TEST(History, ExponentialKernelConstantTrajectory) {
  VolterraKernel kernel;
  kernel.kind = KernelKind::exponential;
  kernel.amplitude = 1.5;
  kernel.rate = 2.0;
  kernel.offset = scalar(0.25);
  const double c = 0.8;
  const int n = 400;
  const double dt = 1.0 / n;
  const Trajectory y = constant_trajectory(n + 1, scalar(c));
  const double exact = c * kernel.amplitude * (1.0 - std::exp(-kernel.rate)) / kernel.rate + 0.25;
  EXPECT_NEAR(apply_history(kernel, y, n, dt)[0], exact, 5.0 * dt);
}

TEST(History, CausalityIsExact) {
  VolterraKernel kernel;
  kernel.kind = KernelKind::exponential;
  kernel.amplitude = -0.4;
  kernel.rate = 1.0;
  Rng rng(5);
  const int n = 10, dim = 3;
  Trajectory y(n + 1);
  for (auto& v : y) v = rng.normal_vec(dim);
  const int k = 6;
  const Eigen::VectorXd before = apply_history(kernel, y, k, 0.1);
  for (int j = k; j <= n; ++j) y[j] = rng.normal_vec(dim);
  const Eigen::VectorXd after = apply_history(kernel, y, k, 0.1);
  EXPECT_EQ((before - after).lpNorm<Eigen::Infinity>(), 0.0);
}

TEST(History, CausalLipschitzBound) {
  VolterraKernel kernel;
  kernel.kind = KernelKind::exponential;
  kernel.amplitude = 1.3;
  kernel.rate = 0.7;
  const double lh = kernel.lipschitz(1.0);
  Rng rng(17);
  const int n = 20, dim = 4;
  const double dt = 1.0 / n;
  Trajectory y1(n + 1), y2(n + 1);
  for (int j = 0; j <= n; ++j) {
    y1[j] = rng.normal_vec(dim);
    y2[j] = rng.normal_vec(dim);
  }
  for (int k = 0; k <= n; ++k) {
    double bound = 0.0;
    for (int j = 0; j < k; ++j) bound += dt * (y1[j] - y2[j]).norm();
    const double diff =
        (apply_history(kernel, y1, k, dt) - apply_history(kernel, y2, k, dt)).norm();
    EXPECT_LE(diff, lh * bound + 1e-12);
  }
}

TEST(History, DerivativeIsExactForTheAffineOperator) {
  VolterraKernel kernel;
  kernel.kind = KernelKind::exponential;
  kernel.amplitude = 0.9;
  kernel.rate = 1.1;
  kernel.offset = scalar(0.3);
  Rng rng(23);
  const int n = 12;
  const double dt = 1.0 / n;
  Trajectory y(n + 1), dy(n + 1);
  for (int j = 0; j <= n; ++j) {
    y[j] = rng.normal_vec(1);
    dy[j] = rng.normal_vec(1);
  }
  const Eigen::VectorXd dz = history_derivative(kernel, dy, n, dt);
  EXPECT_EQ(history_derivative(kernel, zero_trajectory(n + 1, 1), n, dt)[0], 0.0);
  for (double tau : {1e-2, 1e-4}) {
    Trajectory yp(n + 1);
    for (int j = 0; j <= n; ++j) yp[j] = y[j] + tau * dy[j];
    const Eigen::VectorXd fd =
        (apply_history(kernel, yp, n, dt) - apply_history(kernel, y, n, dt)) / tau;
    EXPECT_NEAR((fd - dz).lpNorm<Eigen::Infinity>(), 0.0, 1e-9 / tau * 1e-3);
  }
  // The derivative-direction estimate holds with the same constant.
  const double lh = kernel.lipschitz(1.0);
  Trajectory d2(n + 1);
  for (int j = 0; j <= n; ++j) d2[j] = rng.normal_vec(1);
  for (int k = 0; k <= n; ++k) {
    double bound = 0.0;
    for (int j = 0; j < k; ++j) bound += dt * (dy[j] - d2[j]).norm();
    const double diff =
        (history_derivative(kernel, dy, k, dt) - history_derivative(kernel, d2, k, dt)).norm();
    EXPECT_LE(diff, lh * bound + 1e-12);
  }
}

TEST(Fatigue, SigmoidLimitsAndMonotonicity) {
  FatigueMap map;
  map.kappa0 = 2.0;
  map.kappa_min = 0.5;
  map.gamma = 3.0;
  EXPECT_NEAR(map.eval(-80.0), map.kappa0, 1e-12);
  EXPECT_NEAR(map.eval(80.0), map.kappa_min, 1e-12);
  EXPECT_NEAR(map.eval(0.0), 0.5 * (map.kappa0 + map.kappa_min), 1e-12);
  EXPECT_LT(map.eval(1.0), map.eval(0.5));
}

TEST(Fatigue, SoftplusFamilyStaysAboveFloor) {
  FatigueMap map;
  map.kind = FatigueKind::softplus_linear;
  map.kappa0 = 1.5;
  map.kappa_min = 0.2;
  map.gamma = 0.8;
  map.validate();
  EXPECT_NEAR(map.eval(1e3), map.kappa_min, 1e-10);
  EXPECT_NEAR(map.eval(0.0), map.kappa0, 0.2);  // pristine toughness up to the softplus rounding
  for (double s : {-5.0, -1.0, 0.0, 2.0, 9.0}) EXPECT_GE(map.eval(s), map.kappa_min);
}

TEST(Fatigue, DerivativeMatchesCentralDifferences) {
  for (auto kind : {FatigueKind::sigmoid_decay, FatigueKind::softplus_linear}) {
    FatigueMap map;
    map.kind = kind;
    map.kappa0 = 1.7;
    map.kappa_min = 0.3;
    map.gamma = 2.1;
    Rng rng(31);
    const double step = 1e-5;
    for (int trial = 0; trial < 20; ++trial) {
      const double s = rng.uniform(-4.0, 4.0);
      const double fd = (map.eval(s + step) - map.eval(s - step)) / (2.0 * step);
      EXPECT_NEAR(map.deriv(s), fd, 1e-6 * std::max(1.0, std::abs(fd)));
    }
  }
}

TEST(Fatigue, SampledLipschitzConstantHolds) {
  for (auto kind : {FatigueKind::sigmoid_decay, FatigueKind::softplus_linear}) {
    FatigueMap map;
    map.kind = kind;
    map.kappa0 = 2.2;
    map.kappa_min = 0.1;
    map.gamma = 1.7;
    const double lk = map.lipschitz();
    Rng rng(37);
    for (int trial = 0; trial < 1000; ++trial) {
      const double s1 = rng.uniform(-6.0, 6.0);
      const double s2 = rng.uniform(-6.0, 6.0);
      if (s1 == s2) continue;
      EXPECT_LE(std::abs(map.eval(s1) - map.eval(s2)), lk * std::abs(s1 - s2) * (1.0 + 1e-12));
    }
  }
}

TEST(Fatigue, ValidationRejectsBadParameters) {
  FatigueMap map;
  map.kappa0 = -1.0;
  EXPECT_THROW(map.validate(), ConfigError);
  map.kappa0 = 1.0;
  map.kappa_min = 2.0;
  EXPECT_THROW(map.validate(), ConfigError);
  map.kappa_min = 0.0;
  map.gamma = 0.0;
  EXPECT_THROW(map.validate(), ConfigError);
}

TEST(Fatigue, VectorWrappersAreComponentwise) {
  FatigueMap map;
  const Eigen::VectorXd s = (Eigen::VectorXd(3) << -1.0, 0.0, 2.0).finished();
  const Eigen::VectorXd ds = (Eigen::VectorXd(3) << 1.0, -2.0, 0.5).finished();
  const Eigen::VectorXd k = kappa_eval(map, s);
  const Eigen::VectorXd dk = kappa_deriv(map, s, ds);
  for (int i = 0; i < 3; ++i) {
    EXPECT_DOUBLE_EQ(k[i], map.eval(s[i]));
    EXPECT_DOUBLE_EQ(dk[i], map.deriv(s[i]) * ds[i]);
  }
}
