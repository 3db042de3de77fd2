#pragma once

// Numerical certificates for operator monotonicity of phi' and for the
// monotonicity of H under contractions, plus a generic trace-positivity
// checker for scalar inequalities of the form sum_k f_k(x) g_k(y) >= 0.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "relent/entropy.hpp"
#include "relent/operator.hpp"
#include "relent/phi.hpp"

namespace relent {

enum class Verdict { ConsistentWithMonotone, ViolationFound };

std::string to_string(Verdict v);

struct Witness {
  /// "lowner", "contraction" or "pinching".
  std::string kind;
  std::uint64_t seed = 0;
  std::uint64_t trial = 0;
  HermitianOperator a;
  HermitianOperator b;
  /// The contraction X, or an orthonormal basis of range(P) for pinching.
  Matrix x;
  /// Sample points of a Loewner matrix witness.
  RealVector points;
  double defect = 0.0;
  /// Defect recomputed with the extended-precision eigensolver.
  double reverified_defect = 0.0;
};

struct CertReport {
  std::string mode;
  Verdict verdict = Verdict::ConsistentWithMonotone;
  std::int64_t trials = 0;
  /// Trials skipped because H(A, B) was infinite.
  std::int64_t vacuous_trials = 0;
  /// Most negative raw defect over all trials (0 when none was negative).
  double worst_defect = 0.0;
  std::optional<Witness> witness;
};

/// D_ij = (f(x_i) - f(x_j)) / (x_i - x_j), D_ii = f'(x_i) with f = phi'.
RealMatrix lowner_matrix(const PhiSpec& phi, const RealVector& points);

/// Minimum eigenvalue of lowner_matrix on n_points uniform points in
/// (0.01, 0.99), per trial. A trial violates when that eigenvalue is below
/// -1e-8 * max|D_ij|.
CertReport lowner_matrix_test(const PhiSpec& phi, int n_points, std::int64_t trials,
                              std::uint64_t seed);

/// Minimum eigenvalue of Q*(A phi'(A))Q - (Q*AQ) phi'(Q*AQ), Q a basis of
/// range(P). Requires the spectrum of A in [1e-6, 1 - 1e-6].
double pinching_defect(const HermitianOperator& a, const OrthogonalProjector& p,
                       const PhiSpec& phi, EigenPrecision precision = EigenPrecision::Standard);

/// H(A, B) - H(XAX*, XBX*). Empty when H(A, B) is infinite (vacuous trial);
/// -inf when only the left side is infinite.
std::optional<double> contraction_defect(const HermitianOperator& a, const HermitianOperator& b,
                                         const Contraction& x, const PhiSpec& phi,
                                         const KernelPolicy& policy = {},
                                         EigenPrecision precision = EigenPrecision::Standard);

struct SearchOptions {
  bool contraction = true;
  bool pinching = true;
  /// Draw A, B with spectrum in [0, 1] instead of [0.05, 0.95].
  bool edge = false;
  KernelPolicy policy;
};

/// Seeded random search over (A, B, X) triples and (A, P) pairs. Each trial
/// uses its own stream Rng::stream(seed, trial). Even trials draw independent
/// A, B and a square X; odd trials draw A = B + s D with s in [1e-3, 1e-1]
/// and X a random partial isometry of rank in [1, dim - 1]. A candidate
/// violation must persist under the extended-precision eigensolver.
CertReport search_counterexample(const PhiSpec& phi, Index dim, std::int64_t trials,
                                 std::uint64_t seed, const SearchOptions& options = {});

/// sum_k tr[f_k(A) g_k(B)] after checking sum_k f_k(x) g_k(y) >= 0 on a
/// 101 x 101 grid of [lo, hi]^2 (PreconditionError otherwise).
double klein_trace_positivity(const std::vector<ScalarFunction>& f,
                              const std::vector<ScalarFunction>& g, const HermitianOperator& a,
                              const HermitianOperator& b, const SpectralInterval& interval);

}  // namespace relent
