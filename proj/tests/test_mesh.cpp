#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>

#include "evi/linalg.hpp"
#include "evi/mesh.hpp"
#include "evi/oracles.hpp"
#include "evi/rng.hpp"

using namespace evi;

TEST(Mesh, UniformSpacing) {
  EXPECT_DOUBLE_EQ(build_mesh(3, 1.0, BoundaryCondition::dirichlet).h, 0.25);
  EXPECT_DOUBLE_EQ(build_mesh(2, 1.0, BoundaryCondition::natural).h, 1.0);
  EXPECT_DOUBLE_EQ(build_mesh(5, 2.0, BoundaryCondition::natural).h, 0.5);
}

TEST(Mesh, InvalidSizesThrow) {
  EXPECT_THROW(build_mesh(0, 1.0, BoundaryCondition::dirichlet), ConfigError);
  EXPECT_THROW(build_mesh(3, 0.0, BoundaryCondition::dirichlet), ConfigError);
  EXPECT_THROW(build_mesh(-2, 1.0, BoundaryCondition::natural), ConfigError);
}

TEST(Mesh, ScalarNaturalMeshIsTheWholeInterval) {
  const auto mesh = build_mesh(1, 1.0, BoundaryCondition::natural);
  EXPECT_DOUBLE_EQ(mesh.h, 1.0);
  EXPECT_DOUBLE_EQ(stiffness(mesh).dense()(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(lumped_mass_diag(mesh)[0], 1.0);
}

TEST(Stiffness, DirichletExamples) {
  const auto one = stiffness(build_mesh(1, 1.0, BoundaryCondition::dirichlet)).dense();
  EXPECT_DOUBLE_EQ(one(0, 0), 4.0);

  const auto three = stiffness(build_mesh(3, 1.0, BoundaryCondition::dirichlet)).dense();
  for (int i = 0; i < 3; ++i) {
    EXPECT_DOUBLE_EQ(three(i, i), 8.0);
    if (i + 1 < 3) {
      EXPECT_DOUBLE_EQ(three(i, i + 1), -4.0);
      EXPECT_DOUBLE_EQ(three(i + 1, i), -4.0);
    }
  }
}

TEST(Stiffness, NaturalIsSemidefiniteWithConstantKernel) {
  const auto k = stiffness(build_mesh(2, 1.0, BoundaryCondition::natural)).dense();
  EXPECT_DOUBLE_EQ(k(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(k(0, 1), -1.0);
  EXPECT_DOUBLE_EQ(k(1, 0), -1.0);
  EXPECT_DOUBLE_EQ(k(1, 1), 1.0);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(2);
  EXPECT_NEAR((k * ones).norm(), 0.0, 1e-15);
}

TEST(Stiffness, DirichletEigenvaluesMatchClosedForm) {
  for (int n = 1; n <= 6; ++n) {
    const auto mesh = build_mesh(n, 1.0, BoundaryCondition::dirichlet);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(stiffness(mesh).dense());
    for (int k = 1; k <= n; ++k) {
      const double expected =
          (2.0 / mesh.h) * (1.0 - std::cos(k * std::numbers::pi / (n + 1)));
      EXPECT_NEAR(eig.eigenvalues()[k - 1], expected, 1e-10);
      EXPECT_GT(eig.eigenvalues()[k - 1], 0.0);
    }
  }
}

TEST(LumpedMass, Examples) {
  const Eigen::VectorXd d3 = lumped_mass_diag(build_mesh(3, 1.0, BoundaryCondition::dirichlet));
  for (int i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(d3[i], 0.25);

  const Eigen::VectorXd n2 = lumped_mass_diag(build_mesh(2, 1.0, BoundaryCondition::natural));
  EXPECT_DOUBLE_EQ(n2[0], 0.5);
  EXPECT_DOUBLE_EQ(n2[1], 0.5);
}

TEST(LumpedMass, RowSumsApproximateLength) {
  for (int n : {1, 2, 5, 17}) {
    const auto dm = build_mesh(n, 2.0, BoundaryCondition::dirichlet);
    EXPECT_NEAR(lumped_mass_diag(dm).sum(), dm.length * n / (n + 1.0), 1e-14);
    if (n >= 2) {
      const auto nm = build_mesh(n, 2.0, BoundaryCondition::natural);
      EXPECT_NEAR(lumped_mass_diag(nm).sum(), nm.length, 1e-14);
    }
  }
}

TEST(SolveSpd, IdentityAndScalar) {
  const Eigen::VectorXd r = (Eigen::VectorXd(3) << 1.0, -2.0, 0.5).finished();
  const auto id = operator_from_dense(Eigen::MatrixXd::Identity(3, 3));
  EXPECT_NEAR((solve_spd(id, r) - r).norm(), 0.0, 1e-14);

  const auto scalar = operator_from_dense((Eigen::MatrixXd(1, 1) << 4.0).finished());
  EXPECT_DOUBLE_EQ(solve_spd(scalar, (Eigen::VectorXd(1) << 2.0).finished())[0], 0.5);
}

TEST(SolveSpd, MatchesDenseLuOracle) {
  Rng rng(101);
  const Eigen::MatrixXd a = oracles::random_spd(rng, 5, 0.5, 4.0);
  const Eigen::VectorXd b = rng.normal_vec(5);
  const Eigen::VectorXd x = solve_spd(operator_from_dense(a), b);
  EXPECT_NEAR((x - oracles::dense_lu_solve(a, b)).norm(), 0.0, 1e-10);
}

TEST(SolveSpd, RightInverseOnRandomInstances) {
  Rng rng(2024);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = rng.uniform_int(1, 8);
    const Eigen::MatrixXd a = oracles::random_spd(rng, n, 0.2, 5.0);
    const Eigen::VectorXd b = rng.normal_vec(n);
    const auto op = operator_from_dense(a);
    const Eigen::VectorXd x = solve_spd(op, b);
    EXPECT_LE((op.apply(x) - b).norm(), 1e-9 * (1.0 + b.norm()));
  }
}

TEST(SolveSpd, ConjugateGradientPathAboveDenseThreshold) {
  const auto mesh = build_mesh(80, 1.0, BoundaryCondition::dirichlet);
  const auto k = stiffness(mesh);
  Rng rng(7);
  const Eigen::VectorXd b = rng.normal_vec(80);
  const Eigen::VectorXd x = solve_spd(k, b);
  EXPECT_LE((k.apply(x) - b).norm(), 1e-8 * b.norm());
  EXPECT_NEAR((x - oracles::dense_lu_solve(k.dense(), b)).norm(), 0.0, 1e-7);
}

TEST(SolveSpd, RejectsNonSpd) {
  Eigen::MatrixXd bad(2, 2);
  bad << 1.0, 0.0, 0.0, -1.0;
  const Eigen::VectorXd b = Eigen::VectorXd::Ones(2);
  EXPECT_THROW(solve_spd(operator_from_dense(bad), b), NumericalError);
}

TEST(Norm, Examples) {
  const auto mass = lumped_mass(build_mesh(3, 1.0, BoundaryCondition::dirichlet));
  EXPECT_DOUBLE_EQ(norm({InnerProductKind::l2_lumped, mass}, Eigen::VectorXd::Zero(3)), 0.0);

  const auto w = operator_from_dense((Eigen::MatrixXd(1, 1) << 4.0).finished());
  EXPECT_DOUBLE_EQ(norm({InnerProductKind::v_inverse, w}, (Eigen::VectorXd(1) << 2.0).finished()),
                   1.0);
}

TEST(Norm, H1SeminormIsTheStiffnessQuadraticForm) {
  const auto mesh = build_mesh(4, 1.5, BoundaryCondition::dirichlet);
  const auto k = stiffness(mesh);
  Rng rng(3);
  const Eigen::VectorXd v = rng.normal_vec(4);
  const double n = norm({InnerProductKind::h1_seminorm, k}, v);
  EXPECT_NEAR(n * n, v.dot(k.apply(v)), 1e-12);
}

TEST(Norm, DualNormsAreEquivalentWithEigenvalueBounds) {
  const auto mesh = build_mesh(5, 1.0, BoundaryCondition::dirichlet);
  const Eigen::VectorXd mass = lumped_mass_diag(mesh);
  Rng rng(11);
  const Eigen::MatrixXd v = oracles::random_spd(rng, 5, 0.5, 3.0);
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> eig(
      v, Eigen::MatrixXd(mass.asDiagonal()));
  const double lo = 1.0 / std::sqrt(eig.eigenvalues().maxCoeff());
  const double hi = 1.0 / std::sqrt(eig.eigenvalues().minCoeff());
  const auto vop = operator_from_dense(v);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::VectorXd omega = rng.normal_vec(5);
    const double ratio =
        norm({InnerProductKind::v_inverse, vop}, omega) / m_inv_norm(omega, mass);
    EXPECT_GE(ratio, lo * (1.0 - 1e-10));
    EXPECT_LE(ratio, hi * (1.0 + 1e-10));
  }
}
