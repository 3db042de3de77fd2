#include "relent/random.hpp"

#include <cmath>

#include "relent/errors.hpp"

namespace relent {

Rng::Rng(std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  engine_.seed(seq);
}

Rng Rng::stream(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                    0x9e3779b9u};
  return Rng(std::mt19937_64(seq));
}

double Rng::uniform(double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(engine_);
}

double Rng::normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }

Index Rng::uniform_index(Index lo, Index hi) {
  return std::uniform_int_distribution<Index>(lo, hi)(engine_);
}

namespace {

Matrix complex_gaussian(Index rows, Index cols, Rng& rng) {
  Matrix g(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) {
      const double re = rng.normal();
      const double im = rng.normal();
      g(i, j) = Complex(re, im) / std::sqrt(2.0);
    }
  }
  return g;
}

}  // namespace

Matrix haar_unitary(Index n, Rng& rng) {
  if (n == 0) return Matrix(0, 0);
  const Matrix z = complex_gaussian(n, n, rng);
  Eigen::HouseholderQR<Matrix> qr(z);
  Matrix q = qr.householderQ() * Matrix::Identity(n, n);
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index j = 0; j < n; ++j) {
    const double mag = std::abs(r(j, j));
    if (mag > 0.0) q.col(j) *= r(j, j) / mag;
  }
  return q;
}

HermitianOperator random_hermitian(Index n, double lo, double hi, Rng& rng) {
  if (n < 0) throw InvalidArgument("random_hermitian: negative dimension");
  if (lo > hi) throw InvalidArgument("random_hermitian: lo > hi");
  RealVector d(n);
  for (Index i = 0; i < n; ++i) d(i) = lo == hi ? lo : rng.uniform(lo, hi);
  const Matrix u = haar_unitary(n, rng);
  if (lo == hi) return HermitianOperator::diagonal(d);
  return HermitianOperator::from_spectrum(d, u);
}

HermitianOperator random_density(Index n, double lo, double hi, Rng& rng) {
  if (!(0.0 <= lo && lo <= hi && hi <= 1.0)) {
    throw InvalidArgument("random_density: spectrum range must satisfy 0 <= lo <= hi <= 1");
  }
  return random_hermitian(n, lo, hi, rng);
}

HermitianOperator random_density(Index n, double lo, double hi, std::uint64_t seed) {
  Rng rng(seed);
  return random_density(n, lo, hi, rng);
}

Contraction random_contraction(Index rows, Index cols, Rng& rng) {
  if (rows <= 0 || cols <= 0) throw InvalidArgument("random_contraction: empty shape");
  const Matrix g = complex_gaussian(rows, cols, rng);
  const double u = rng.uniform();
  Eigen::JacobiSVD<Matrix> svd(g);
  const double norm = svd.singularValues()(0);
  return Contraction(g / (norm * (1.0 + u)));
}

Contraction random_contraction(Index rows, Index cols, std::uint64_t seed) {
  Rng rng(seed);
  return random_contraction(rows, cols, rng);
}

OrthogonalProjector random_projector(Index dim, Index rank, Rng& rng) {
  if (rank < 0 || rank > dim) throw InvalidArgument("random_projector: rank exceeds dimension");
  if (rank == dim) return OrthogonalProjector(HermitianOperator::identity(dim));
  if (rank == 0) return OrthogonalProjector(HermitianOperator::zero(dim));
  const Matrix u = haar_unitary(dim, rng);
  return OrthogonalProjector::from_basis(u.leftCols(rank));
}

OrthogonalProjector random_projector(Index dim, Index rank, std::uint64_t seed) {
  Rng rng(seed);
  return random_projector(dim, rank, rng);
}

HermitianOperator random_direction(Index n, Rng& rng) {
  const Matrix g = complex_gaussian(n, n, rng);
  Matrix h = 0.5 * (g + g.adjoint());
  const double norm = h.norm();
  if (norm > 0.0) h /= norm;
  return HermitianOperator::symmetrized(h);
}

}  // namespace relent
