#pragma once

// H(A, B) = tr[phi(A) - phi(B) - phi'(B)(A - B)] with the kernel convention:
// where phi' diverges at an endpoint that is an eigenvalue of B, H is
// +infinity unless A coincides with B on that eigenspace (including the
// coupling to its complement), in which case the trace is taken on the
// complement.

#include <array>
#include <cstdint>
#include <string>

#include "relent/operator.hpp"
#include "relent/phi.hpp"

namespace relent {

enum class EntropyKind { Finite, Infinite };
enum class InfiniteReason { None, KernelMismatchAt0, KernelMismatchAt1 };

struct EntropyValue {
  EntropyKind kind = EntropyKind::Finite;
  double value = 0.0;
  InfiniteReason reason = InfiniteReason::None;

  static EntropyValue finite(double v) { return {EntropyKind::Finite, v, InfiniteReason::None}; }
  static EntropyValue infinite(InfiniteReason r) {
    return {EntropyKind::Infinite, 0.0, r};
  }
  bool is_finite() const { return kind == EntropyKind::Finite; }
  /// value, or +inf.
  double as_double() const;
};

std::string to_string(InfiniteReason r);

struct KernelPolicy {
  /// Eigenvalues of B within eigen_tol of an endpoint sit at the endpoint.
  double eigen_tol = 1e-10;
  /// Kernel blocks match when their Frobenius mismatch is <= match_tol * dim.
  double match_tol = 1e-10;

  /// Both tolerances must lie in (0, 1e-6).
  void validate() const;
};

/// Spectral interval of phi's domain. [0, 1] except for test oracles.
struct SpectralInterval {
  double lo = 0.0;
  double hi = 1.0;
};

/// Eigenvalues further than this outside the interval are rejected; closer
/// ones are clamped.
inline constexpr double kSpectrumClampTolerance = 1e-10;

/// Finite values in [-kNegativeSlack, 0) are clamped to 0; anything lower
/// raises InternalConsistencyError.
inline constexpr double kNegativeSlack = 1e-9;

EntropyValue relative_entropy(const HermitianOperator& a, const HermitianOperator& b,
                              const PhiSpec& phi, const KernelPolicy& policy = {},
                              const SpectralInterval& interval = {},
                              EigenPrecision precision = EigenPrecision::Standard);

/// S(A) = -tr phi(A), using phi's limits at exact endpoint eigenvalues.
double entropy_S(const HermitianOperator& a, const PhiSpec& phi);

/// S(A_12) + S(A_23) - S(A_123) - S(A_2) for consecutive coordinate blocks of
/// sizes dims[0..2].
double ssa_defect(const HermitianOperator& a, const std::array<Index, 3>& dims,
                  const PhiSpec& phi);

/// |H_vn(A, B) - [tr A(log A - log B) - tr A + tr B]|. B must be positive
/// definite.
double vn_identity_defect(const HermitianOperator& a, const HermitianOperator& b);

/// (1/2)[log det A - log det B + tr(B A^-1) - n] for positive definite A, B.
double gaussian_kl_oracle(const HermitianOperator& a, const HermitianOperator& b);

/// Eigenvalues clamped into the interval; throws SpectrumOutOfRange naming
/// `label` when the violation exceeds kSpectrumClampTolerance.
RealVector clamped_spectrum(const RealVector& eigenvalues, const SpectralInterval& interval,
                            const char* label);

}  // namespace relent
