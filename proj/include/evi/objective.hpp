#pragma once

#include <Eigen/Dense>
#include <limits>

#include "evi/errors.hpp"
#include "evi/grid.hpp"

namespace evi {

// Tracking objective
//   J = 1/2 ||x - x_d||^2 + alpha1/2 ||state||^2 + alpha2/2 ||ell - ell_d||^2
// with left-rectangle time quadrature on the step grid (controls are
// piecewise constant in time, so the rectangle rule is exact for them).
// phi_target doubles as the q target for the single-field model, where the
// tracking term is measured in the H1_0 seminorm.
struct TrackingObjective {
  Trajectory phi_target;  // step-valued
  Trajectory ell_target;  // step-valued
  double alpha1 = 0.0;
  double alpha2 = 1.0;

  void validate() const {
    if (alpha1 < 0.0) throw ConfigError("TrackingObjective: alpha1 must be nonnegative");
    if (alpha2 <= 0.0) throw ConfigError("TrackingObjective: alpha2 must be positive");
  }
};

// Residual norms of a strong-stationarity system plus pointwise
// sign-condition bookkeeping.
struct StationarityReport {
  double adjoint_residual = 0.0;    // evolution equation, sup over node-steps
  double elliptic_residual = 0.0;   // w-equation (two-field only)
  double gradient_residual = 0.0;   // ||w + dJ/dell|| resp. ||lambda + dJ/dell||
  double sign_min = 0.0;            // most negative sampled sign-condition value
  long sign_violations = 0;           // violations off the biactive set
  long sign_violations_biactive = 0;  // interval misses and xi < 0 on biactive nodes
  long biactive_node_steps = 0;
  double bstat_min = std::numeric_limits<double>::infinity();
  bool directional_only = false;    // biactivity downgraded the certificate
};

}  // namespace evi
