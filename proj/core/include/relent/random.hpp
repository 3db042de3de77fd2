#pragma once

// Seeded random instance generators. Every generator takes an explicit seed
// (or an Rng derived from one); there is no hidden global state.

#include <cstdint>
#include <random>

#include "relent/operator.hpp"

namespace relent {

class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  /// Independent stream for trial `index` of an experiment seeded by `seed`.
  /// Identical regardless of the order in which trials are evaluated.
  static Rng stream(std::uint64_t seed, std::uint64_t index);

  double uniform(double lo = 0.0, double hi = 1.0);
  double normal();
  Index uniform_index(Index lo, Index hi);  // inclusive
  std::mt19937_64& engine() { return engine_; }

 private:
  explicit Rng(std::mt19937_64 engine) : engine_(engine) {}
  std::mt19937_64 engine_;
};

/// Haar-distributed n x n unitary: QR of a complex Gaussian matrix with the
/// phases of diag(R) absorbed into Q.
Matrix haar_unitary(Index n, Rng& rng);

/// Hermitian operator with i.i.d. uniform eigenvalues in [lo, hi] and a
/// Haar eigenbasis. No range restriction; used for SPD test instances too.
HermitianOperator random_hermitian(Index n, double lo, double hi, Rng& rng);

/// Same as random_hermitian with [lo, hi] required to lie in [0, 1].
/// A degenerate range returns exactly lo * I.
HermitianOperator random_density(Index n, double lo, double hi, Rng& rng);
HermitianOperator random_density(Index n, double lo, double hi, std::uint64_t seed);

/// G / (||G||_2 (1 + u)) for complex Gaussian G and u uniform in [0, 1].
Contraction random_contraction(Index rows, Index cols, Rng& rng);
Contraction random_contraction(Index rows, Index cols, std::uint64_t seed);

/// Projector onto the first `rank` columns of a Haar unitary.
OrthogonalProjector random_projector(Index dim, Index rank, Rng& rng);
OrthogonalProjector random_projector(Index dim, Index rank, std::uint64_t seed);

/// Random Hermitian direction with unit Frobenius norm.
HermitianOperator random_direction(Index n, Rng& rng);

}  // namespace relent
