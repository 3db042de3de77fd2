#pragma once

// Operators too large to materialize, given by a matrix-element oracle and
// consumed through leading k x k truncations P_k A P_k. Limits are evidence
// at the examined scale (k <= 512), never proofs.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "relent/entropy.hpp"
#include "relent/operator.hpp"
#include "relent/phi.hpp"

namespace relent {

inline constexpr Index kMaxTruncation = 512;

class TruncatableOperator {
 public:
  using Oracle = std::function<Complex(Index, Index)>;

  /// The oracle must be pure and Hermitian: oracle(j, i) = conj(oracle(i, j)).
  TruncatableOperator(Oracle oracle, std::string kind, std::string decay_hint = {});

  /// diag(entries[0], entries[1], ...), then `fill` beyond the list.
  static TruncatableOperator diagonal(std::vector<double> entries, double fill = 0.0);
  /// diag(f(0), f(1), ...).
  static TruncatableOperator diagonal(std::function<double(Index)> f, std::string decay_hint = {});
  /// Banded Toeplitz: A(i, j) = bands[|i - j|] for |i - j| < bands.size().
  static TruncatableOperator banded(std::vector<double> bands);
  /// A finite operator padded with zeros.
  static TruncatableOperator embedded(const HermitianOperator& a);

  /// U A U* with U = u (+) 1, u acting on the first u.rows() coordinates.
  /// Truncations at k >= u.rows() are unitarily equivalent to the original
  /// ones; smaller k see a different projection family.
  TruncatableOperator rotated(const Matrix& u) const;

  Complex element(Index i, Index j) const { return oracle_(i, j); }
  const std::string& kind() const { return kind_; }
  const std::string& decay_hint() const { return decay_hint_; }

  /// Leading k x k block. Throws SpectrumOutOfRange when its spectrum leaves
  /// [-1e-9, 1 + 1e-9].
  HermitianOperator materialize(Index k) const;

 private:
  Oracle oracle_;
  std::string kind_;
  std::string decay_hint_;
};

/// {"kind": "diagonal" | "banded" | "embedded", "entries": [...],
///  "bandwidth": b, "fill": f}. A matrix file ({"dim": ...}) is read as an
/// embedded operator.
TruncatableOperator parse_oracle_json(const std::string& text);
TruncatableOperator read_oracle_file(const std::string& path);

struct ProjectionSchedule {
  std::vector<Index> dims;

  /// Strictly increasing positive sizes, at most kMaxTruncation.
  void validate() const;
  /// "2,4,8,16".
  static ProjectionSchedule parse(const std::string& text);
  /// start, start * factor, ... while <= last.
  static ProjectionSchedule geometric(Index start, Index factor, Index last);
};

EntropyValue truncated_entropy(const TruncatableOperator& a, const TruncatableOperator& b,
                               const PhiSpec& phi, Index k, const KernelPolicy& policy = {});

enum class LimitVerdict { Converged, Increasing, InfiniteDetected };

std::string to_string(LimitVerdict v);

struct LimitResult {
  std::vector<Index> dims;
  std::vector<EntropyValue> values;
  LimitVerdict verdict = LimitVerdict::Increasing;
  /// Last finite value; the limit when Converged.
  double limit = 0.0;
  /// Earliest schedule size from which every later value is within
  /// rel_tol of the limit (Converged only).
  Index at_dim = 0;
};

/// Monotone truncation limit. A decrease beyond 1e-8 between consecutive
/// sizes raises InternalConsistencyError. Converged when the last two values
/// satisfy |v_n - v_{n-1}| <= rel_tol |v_n|.
LimitResult entropy_limit(const TruncatableOperator& a, const TruncatableOperator& b,
                          const PhiSpec& phi, const ProjectionSchedule& schedule, double rel_tol,
                          const KernelPolicy& policy = {});

/// |l1 - l2| / (1 + |l1|), the second limit taken after the optional
/// rotation. ConvergenceError if either limit fails to converge.
double schedule_independence_check(const TruncatableOperator& a, const TruncatableOperator& b,
                                   const PhiSpec& phi, const ProjectionSchedule& schedule1,
                                   const ProjectionSchedule& schedule2,
                                   const std::optional<Matrix>& rotation, double rel_tol,
                                   const KernelPolicy& policy = {});

/// X_k materialized at truncation size n, as an n x n contraction.
using ContractionFamily = std::function<Contraction(std::int64_t k, Index n)>;

/// X_k = (1 - 1/k) P_n.
ContractionFamily scaled_projection_family();

struct ApproximationResult {
  double reference = 0.0;
  double family_limit = 0.0;
  double gap = 0.0;
  std::vector<std::int64_t> ks;
  std::vector<double> values;
};

/// lim_k lim_n H(X_k A_n X_k*, X_k B_n X_k*) against lim_n H(A_n, B_n).
/// The inner limits run over the schedule; k runs over 2, 4, 8, ... until
/// consecutive values differ by at most rel_tol / 10 relative to 1 + |value|.
/// ConvergenceError if that does not happen by k = 2^max_doublings.
ApproximationResult approximation_check(const TruncatableOperator& a,
                                        const TruncatableOperator& b, const PhiSpec& phi,
                                        const ContractionFamily& family,
                                        const ProjectionSchedule& schedule, double rel_tol,
                                        const KernelPolicy& policy = {},
                                        int max_doublings = 48);

struct WlscResult {
  std::vector<EntropyValue> values;
  EntropyValue limit_value;
  /// min over the trailing window; +inf if any value there is infinite.
  double trailing_min = 0.0;
  /// trailing_min - H(A_lim, B_lim), or trailing_min when the limit is
  /// infinite.
  double defect = 0.0;
  bool limit_infinite = false;
};

/// window = 0 uses the trailing half of the sequence.
WlscResult wlsc_check(const std::vector<HermitianOperator>& a_seq,
                      const std::vector<HermitianOperator>& b_seq, const HermitianOperator& a_lim,
                      const HermitianOperator& b_lim, const PhiSpec& phi,
                      const KernelPolicy& policy = {}, std::size_t window = 0);

struct FiniteRankResult {
  HermitianOperator a_prime;
  double eta = 0.0;
  double eps_prime = 0.0;
  /// rank(A' - B): the finite-rank perturbation of B.
  Index perturbation_rank = 0;
  /// Numerical rank of A' - A at tolerance 1e-12 * max(1, |A|_F).
  Index difference_rank = 0;
  double gap = 0.0;             // tr[(1 + |phi'(B)|)(A - A')^2]
  double entropy_change = 0.0;  // |H(A, B) - H(A', B)|
  double stage_entropy[3] = {0.0, 0.0, 0.0};
  double stage_gap[3] = {0.0, 0.0, 0.0};
};

/// Three stages, each within eps/3 of entropy change and eps/9 of weighted
/// gap: (i) spectral cut of B away from its endpoints, (ii) clamping the
/// compressed A into [eps', 1 - eps'], (iii) smallest-rank eigen truncation
/// of the remaining perturbation. Requires H(A, B) finite.
FiniteRankResult finite_rank_approximation(const HermitianOperator& a,
                                           const HermitianOperator& b, const PhiSpec& phi,
                                           double eps, const KernelPolicy& policy = {});

}  // namespace relent
