#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <vector>

#include "evi/errors.hpp"

namespace evi {

enum class BoundaryCondition { dirichlet, natural };

// Uniform 1D grid on (0, length). Dirichlet meshes keep interior nodes
// only; natural meshes include the endpoints. A single natural node is
// allowed and carries the whole interval (zero stiffness, full mass) --
// it is the scalar desk instance used throughout the tests.
struct SpatialMesh {
  int n_nodes = 0;
  double length = 0.0;
  BoundaryCondition bc = BoundaryCondition::dirichlet;
  double h = 0.0;
};

inline SpatialMesh build_mesh(int n_nodes, double length, BoundaryCondition bc) {
  if (length <= 0.0) throw ConfigError("build_mesh: length must be positive");
  if (n_nodes < 1) throw ConfigError("build_mesh: n_nodes must be >= 1");
  SpatialMesh mesh;
  mesh.n_nodes = n_nodes;
  mesh.length = length;
  mesh.bc = bc;
  if (bc == BoundaryCondition::dirichlet) {
    mesh.h = length / (n_nodes + 1);
  } else {
    mesh.h = n_nodes == 1 ? length : length / (n_nodes - 1);
  }
  return mesh;
}

// Symmetric operator on nodal vectors.
struct SparseOperator {
  Eigen::SparseMatrix<double> m;

  int dim() const { return static_cast<int>(m.rows()); }
  Eigen::VectorXd apply(const Eigen::VectorXd& v) const { return m * v; }
  Eigen::MatrixXd dense() const { return Eigen::MatrixXd(m); }
};

inline SparseOperator operator_from_dense(const Eigen::MatrixXd& a) {
  SparseOperator op;
  op.m = a.sparseView();
  op.m.makeCompressed();
  return op;
}

inline SparseOperator diagonal_operator(const Eigen::VectorXd& d) {
  SparseOperator op;
  op.m.resize(d.size(), d.size());
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(d.size());
  for (int i = 0; i < d.size(); ++i) trips.emplace_back(i, i, d[i]);
  op.m.setFromTriplets(trips.begin(), trips.end());
  return op;
}

inline SparseOperator scaled(const SparseOperator& a, double c) {
  SparseOperator op;
  op.m = c * a.m;
  return op;
}

inline SparseOperator sum(const SparseOperator& a, const SparseOperator& b) {
  if (a.dim() != b.dim()) throw ConfigError("operator sum: dimension mismatch");
  SparseOperator op;
  op.m = a.m + b.m;
  return op;
}

// Weak-form 1D Laplacian: 2/h on the diagonal, -1/h off it. Natural
// meshes get 1/h at the boundary rows (semidefinite, constants in the
// kernel); the 1-node natural mesh degenerates to the zero operator.
inline SparseOperator stiffness(const SpatialMesh& mesh) {
  const int n = mesh.n_nodes;
  const double h = mesh.h;
  SparseOperator op;
  op.m.resize(n, n);
  if (mesh.bc == BoundaryCondition::natural && n == 1) return op;
  std::vector<Eigen::Triplet<double>> trips;
  for (int i = 0; i < n; ++i) {
    double diag = 2.0 / h;
    if (mesh.bc == BoundaryCondition::natural && (i == 0 || i == n - 1)) diag = 1.0 / h;
    trips.emplace_back(i, i, diag);
    if (i + 1 < n) {
      trips.emplace_back(i, i + 1, -1.0 / h);
      trips.emplace_back(i + 1, i, -1.0 / h);
    }
  }
  op.m.setFromTriplets(trips.begin(), trips.end());
  return op;
}

// Diagonal quadrature weights of the L2 pairing: h per node, h/2 at the
// natural endpoints, so the weights sum to (a mesh-dependent fraction of)
// the domain length.
inline Eigen::VectorXd lumped_mass_diag(const SpatialMesh& mesh) {
  const int n = mesh.n_nodes;
  Eigen::VectorXd d = Eigen::VectorXd::Constant(n, mesh.h);
  if (mesh.bc == BoundaryCondition::natural) {
    if (n == 1) {
      d[0] = mesh.length;
    } else {
      d[0] *= 0.5;
      d[n - 1] *= 0.5;
    }
  }
  return d;
}

inline SparseOperator lumped_mass(const SpatialMesh& mesh) {
  return diagonal_operator(lumped_mass_diag(mesh));
}

}  // namespace evi
