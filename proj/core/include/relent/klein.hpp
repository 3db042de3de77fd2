#pragma once

// Two-sided quadratic bounds on H(A, B) and its local Lipschitz regularity,
// with constants obtained by grid optimization of the scalar ratios.
//
//   lower:     H(A, B) >= c_lower tr[(1 + |phi'(B)|)(A - B)^2]
//   upper:     H(A, B) <= c_upper tr[(B^-2 + (1 - B)^-2)(A - B)^2]
//   lipschitz: |H(A, B) - H(A', B)| <= c_eps (|A - A'|^2 + |A' - B| |A - A'|)
//
// Traces of the form tr[W (A - B)^2] are evaluated as tr[W^1/2 (A - B)^2 W^1/2].

#include <optional>
#include <string>

#include "relent/entropy.hpp"
#include "relent/operator.hpp"
#include "relent/phi.hpp"

namespace relent {

struct KleinConstants {
  std::string phi_name;
  double c_lower = 0.0;
  double c_upper = 0.0;
  double c_eps = 0.0;
  double eps = 0.1;
  int derivation_grid = 500;
  /// Relative change of each constant when the grid doubles.
  double lower_change = 0.0;
  double upper_change = 0.0;
  double eps_change = 0.0;
  bool stable = true;
  /// sup phi'' / 2 when phi'' is bounded: H(A, B) <= smooth_upper |A - B|_2^2.
  std::optional<double> smooth_upper;
};

inline constexpr double kSafetyFactor = 0.9;
inline constexpr double kStabilityTolerance = 0.05;

/// 0.9 * min over the lattice of bregman(x, y) / [(1 + |phi'(y)|)(x - y)^2].
/// x runs over [0, 1]; y over [0, 1] with a 1e-4 margin at endpoints where
/// phi' diverges. PreconditionError for phi that is not strictly convex.
double derive_lower_constant(const PhiSpec& phi, int grid);
/// max over the lattice of bregman(x, y) / [(y^-2 + (1 - y)^-2)(x - y)^2],
/// divided by 0.9. y stays in [1e-4, 1 - 1e-4].
double derive_upper_constant(const PhiSpec& phi, int grid);
/// max(K, L) / 0.9, with K the sup of bregman(x, y) / (x - y)^2 over
/// x in [0, 1], y in [eps/2, 1 - eps/2] and L the max of phi'' on that
/// interval.
double derive_lipschitz_constant(const PhiSpec& phi, double eps, int grid);

/// All three constants at `grid` and 2 * grid; the finer values are kept and
/// `stable` records whether every change stayed below 5%.
KleinConstants derive_klein_constants(const PhiSpec& phi, double eps = 0.1, int grid = 500);

/// tr[(1 + |phi'(B)|)(A - B)^2]. Rows on a matched kernel where phi'
/// diverges contribute 0; an unmatched one gives +inf.
double hilbert_schmidt_gap(const HermitianOperator& a, const HermitianOperator& b,
                           const PhiSpec& phi, const KernelPolicy& policy = {});

/// tr[(B^-2 + (1 - B)^-2)(A - B)^2]; B must lie in [1e-6, 1 - 1e-6].
double upper_gap(const HermitianOperator& a, const HermitianOperator& b);

/// H(A, B) - c_lower * hilbert_schmidt_gap. VacuousBound if H is infinite.
double klein_lower_defect(const HermitianOperator& a, const HermitianOperator& b,
                          const PhiSpec& phi, const KleinConstants& constants,
                          const KernelPolicy& policy = {});
/// c_upper * upper_gap - H(A, B).
double klein_upper_defect(const HermitianOperator& a, const HermitianOperator& b,
                          const PhiSpec& phi, const KleinConstants& constants,
                          const KernelPolicy& policy = {});
/// c_eps (|A - A'|_2^2 + |A' - B|_2 |A - A'|_2) - |H(A, B) - H(A', B)|.
/// A' and B must have spectrum in [eps, 1 - eps] with eps = constants.eps.
double lipschitz_defect(const HermitianOperator& a, const HermitianOperator& a_prime,
                        const HermitianOperator& b, const PhiSpec& phi,
                        const KleinConstants& constants, const KernelPolicy& policy = {});

}  // namespace relent
