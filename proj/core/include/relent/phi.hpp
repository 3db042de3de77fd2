#pragma once

// Entropy-generating convex functions phi on [0, 1] with their first and
// second derivatives and endpoint behaviour.

#include <optional>
#include <string>
#include <vector>

#include "relent/operator.hpp"

namespace relent {

struct PhiSpec {
  /// Canonical name, e.g. "vn" or "power_neg:0.5".
  std::string name;
  std::string formula;
  std::vector<double> params;

  ScalarFunction phi;
  ScalarFunction dphi;
  /// May be empty for user functions; disables curvature-based checks.
  ScalarFunction ddphi;

  bool dphi_divergent_at_0 = false;
  bool dphi_divergent_at_1 = false;
  bool strictly_convex = true;

  /// Continuity limits used at exact eigenvalues 0 and 1 (e.g. 0 log 0 := 0).
  double phi_at_0 = 0.0;
  double phi_at_1 = 0.0;
  /// Finite one-sided limits of phi' when the matching divergence flag is
  /// false.
  double dphi_at_0 = 0.0;
  double dphi_at_1 = 0.0;

  /// sup of phi'' over [0, 1] when it is finite.
  std::optional<double> ddphi_sup;
  /// Known operator monotonicity of phi' on (0, 1); empty when unknown.
  std::optional<bool> dphi_operator_monotone;

  /// phi(x) with the stored limits at exactly 0 and 1.
  double value(double x) const;
  /// phi'(x); returns -inf / +inf at a divergent endpoint.
  double derivative(double x) const;
  double second_derivative(double x) const;
  bool has_second_derivative() const { return static_cast<bool>(ddphi); }
};

/// Names accepted by builtin(): vn, car, ccr, power_neg (0 < m <= 1),
/// power_pos (1 <= m <= 2), xlog_shift (t >= 0), neg_log_shift (t > 0).
/// Missing parameters take the catalog defaults (0.5, 1.5, 0.5, 0.5).
PhiSpec builtin(const std::string& name, const std::vector<double>& params = {});

/// The seven catalog functions with their default parameters.
std::vector<PhiSpec> catalog();

/// phi(x) = x^4 / 4. Convex, but phi' = x^3 is not operator monotone.
PhiSpec quartic_control();

/// phi(x) = -(1/2) log x on (0, inf); the Gaussian relative entropy oracle.
PhiSpec half_neg_log();

/// Parses "name" or "name:p1,p2"; also accepts "x4" for quartic_control().
PhiSpec parse_phi(const std::string& spec);

/// phi(x) - phi(y) - phi'(y)(x - y). +inf when y is an endpoint where phi'
/// diverges and x != y; 0 when x == y.
double bregman_scalar(const PhiSpec& phi, double x, double y);

struct PhiValidation {
  bool convex = true;
  bool endpoint_decay = true;
  bool derivative_consistent = true;
  double min_second_derivative = 0.0;
  double max_derivative_rel_error = 0.0;

  bool ok() const { return convex && endpoint_decay && derivative_consistent; }
};

/// Numerical checks of convexity on a 1001-point grid, decay of x phi'(x)
/// and (1 - x) phi'(x) at the endpoints, and phi' against centered finite
/// differences of phi at 101 interior points.
PhiValidation validate_phi(const PhiSpec& phi);

}  // namespace relent
