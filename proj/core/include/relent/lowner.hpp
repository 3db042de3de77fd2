#pragma once

// Loewner integral representations of catalog functions.
//
// Shifted form, with positive measures nu1, nu2 on [0, inf):
//   phi(x) = a' x + c'
//            - int [log(t + x) - log(t + 1/2) - (2x - 1)/(2t + 1)] dnu1(t)
//            - int [log(t + 1 - x) - log(t + 1/2) + (2x - 1)/(2t + 1)] dnu2(t)
//
// Raw form of the derivative, with b >= 0 and a probability measure nu on
// (-1, 1):
//   phi'(x) = a + b int (2x - 1) / (1 - lambda (2x - 1)) dnu(lambda)
//
// Normalization: an atom of raw weight w at lambda becomes an atom of weight
// b w (2t + 1)^2 / 2 at t = -(1 + lambda) / (2 lambda) in nu1 (lambda < 0)
// or at t = (1 - lambda) / (2 lambda) in nu2 (lambda > 0); a' = a and c' is
// the integration constant phi(1/2) - a/2. With this convention the table
// values below reproduce x log x exactly (b = 1, nu uniform on (-1, 0)).

#include <limits>
#include <string>
#include <vector>

namespace relent {

struct MeasureAtom {
  double node = 0.0;
  double weight = 0.0;
};

/// Lebesgue measure with constant density on [lo, hi]; hi may be +inf.
struct DensitySegment {
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();
  double density = 1.0;
};

struct Measure {
  std::vector<MeasureAtom> atoms;
  std::vector<DensitySegment> densities;

  bool empty() const { return atoms.empty() && densities.empty(); }
};

struct LownerRepresentation {
  double a_prime = 0.0;
  double c_prime = 0.0;
  Measure nu1;
  Measure nu2;
};

struct RawLownerRepresentation {
  double a = 0.0;
  double b = 0.0;
  /// Nodes lambda in (-1, 1) \ {0}; weights >= 0 summing to 1.
  std::vector<MeasureAtom> nu;
};

struct QuadratureConfig {
  int node_count = 200;
  double tail_split = 1.0;
  /// Largest accepted difference between the node_count and 2 * node_count
  /// evaluations.
  double tolerance = 1e-8;
};

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
};

/// Table parameters for "vn", "car" and "ccr".
LownerRepresentation builtin_lowner(const std::string& name);

/// Checks the side conditions: finite total mass against (2t + 1)^-2 and
/// finite -int_0^1 log t d(nu1 + nu2). Throws InvalidArgument otherwise.
void validate_lowner(const LownerRepresentation& rep);
void validate_raw_lowner(const RawLownerRepresentation& raw);

/// phi(x) from the shifted representation. Throws ConvergenceError when the
/// doubling error estimate exceeds config.tolerance.
QuadratureResult lowner_reconstruct(const LownerRepresentation& rep, double x,
                                    const QuadratureConfig& config = {});
/// phi'(x) from the shifted representation.
QuadratureResult lowner_reconstruct_derivative(const LownerRepresentation& rep, double x,
                                               const QuadratureConfig& config = {});

/// Raw form evaluated directly: phi'(x), and phi(x) with integration
/// constant c.
double raw_lowner_derivative(const RawLownerRepresentation& raw, double x);
double raw_lowner_value(const RawLownerRepresentation& raw, double x, double c = 0.0);

/// Change of variables from the raw to the shifted form. Throws
/// InvalidArgument for atoms at lambda in {-1, 0, 1}.
LownerRepresentation raw_to_shifted(const RawLownerRepresentation& raw, double c = 0.0);

/// Gauss-Legendre discretization of the density part of a measure, with the
/// infinite tail mapped by t = split + u / (1 - u). Atoms pass through.
std::vector<MeasureAtom> discretize(const Measure& m, int node_count, double tail_split,
                                    double focus = 0.0);

}  // namespace relent
