#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <thread>

#include "oracles.hpp"
#include "relent/errors.hpp"
#include "relent/operator.hpp"
#include "relent/random.hpp"

using namespace relent;

namespace {

RealVector vec(std::initializer_list<double> v) {
  RealVector r(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) r(i++) = x;
  return r;
}

}  // namespace

TEST(HermitianOperator, RejectsAsymmetry) {
  Matrix m(2, 2);
  m << 1.0, 0.5, 0.4, 1.0;
  EXPECT_THROW(HermitianOperator{m}, InvalidArgument);
}

TEST(HermitianOperator, SymmetrizesRoundOff) {
  Matrix m(2, 2);
  m << 1.0, 0.5, 0.5 + 1e-14, 1.0;
  const HermitianOperator a(m);
  EXPECT_EQ(a.matrix()(0, 1), a.matrix()(1, 0));
  EXPECT_NEAR(a.matrix()(0, 1).real(), 0.5, 1e-13);
}

TEST(HermitianOperator, ComplexDiagonalImaginaryRejected) {
  Matrix m = Matrix::Identity(2, 2);
  m(0, 0) = Complex(1.0, 0.1);
  EXPECT_THROW(HermitianOperator{m}, InvalidArgument);
}

TEST(HermitianOperator, CopiesShareSpectralCacheAcrossThreads) {
  const HermitianOperator a = random_density(24, 0.0, 1.0, 5);
  const HermitianOperator copy = a;
  std::vector<const SpectralDecomposition*> seen(8);
  std::vector<std::thread> threads;
  for (int i = 0; i < 8; ++i) {
    threads.emplace_back([&, i] { seen[i] = &(i % 2 ? a : copy).spectral(); });
  }
  for (auto& t : threads) t.join();
  for (auto* p : seen) EXPECT_EQ(p, seen[0]);
}

TEST(EigHermitian, Identity) {
  const SpectralDecomposition sd = eig_hermitian(HermitianOperator::identity(3));
  for (Index i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(sd.eigenvalues(i), 1.0);
  EXPECT_LE((sd.eigenvectors.adjoint() * sd.eigenvectors - Matrix::Identity(3, 3)).norm(), 1e-12);
}

TEST(EigHermitian, Diagonal) {
  const SpectralDecomposition sd = eig_hermitian(HermitianOperator::diagonal(vec({0.7, 0.2})));
  EXPECT_DOUBLE_EQ(sd.eigenvalues(0), 0.2);
  EXPECT_DOUBLE_EQ(sd.eigenvalues(1), 0.7);
}

TEST(EigHermitian, TwoByTwoClosedForm) {
  RealMatrix m(2, 2);
  m << 0.5, 0.5, 0.5, 0.5;
  const SpectralDecomposition sd = eig_hermitian(HermitianOperator(m));
  const auto [lo, hi] = oracle::eig2(0.5, 0.5, 0.5);
  EXPECT_NEAR(sd.eigenvalues(0), lo, 1e-15);
  EXPECT_NEAR(sd.eigenvalues(1), hi, 1e-15);
}

TEST(EigHermitian, ComplexTwoByTwoClosedForm) {
  Matrix m(2, 2);
  m << 0.3, Complex(0.1, -0.2), Complex(0.1, 0.2), 0.6;
  const SpectralDecomposition sd = eig_hermitian(HermitianOperator(m));
  const auto [lo, hi] = oracle::eig2(0.3, Complex(0.1, -0.2), 0.6);
  EXPECT_NEAR(sd.eigenvalues(0), lo, 1e-14);
  EXPECT_NEAR(sd.eigenvalues(1), hi, 1e-14);
}

TEST(EigHermitian, ReconstructionAndOrthonormalityProperty) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    const Index n = rng.uniform_index(1, 40);
    const HermitianOperator a = random_hermitian(n, -2.0, 3.0, rng);
    for (EigenPrecision p : {EigenPrecision::Standard, EigenPrecision::Extended}) {
      const SpectralDecomposition sd = eig_hermitian(a, p);
      const double scale = std::max(1.0, a.frobenius_norm());
      EXPECT_LE((sd.reconstruct() - a.matrix()).norm(), 1e-10 * n * scale);
      EXPECT_LE((sd.eigenvectors.adjoint() * sd.eigenvectors - Matrix::Identity(n, n))
                    .cwiseAbs()
                    .maxCoeff(),
                1e-10);
      for (Index i = 1; i < n; ++i) EXPECT_LE(sd.eigenvalues(i - 1), sd.eigenvalues(i));
    }
  }
}

TEST(EigHermitian, DeterministicForIdenticalInput) {
  const HermitianOperator a = random_density(17, 0.0, 1.0, 9);
  const HermitianOperator b(Matrix(a.matrix()));
  const SpectralDecomposition s1 = eig_hermitian(a), s2 = eig_hermitian(b);
  EXPECT_EQ(s1.eigenvalues, s2.eigenvalues);
  EXPECT_EQ(s1.eigenvectors, s2.eigenvectors);
}

TEST(ApplyFunction, IdentityFunction) {
  const HermitianOperator a = random_density(6, 0.0, 1.0, 2);
  const HermitianOperator fa = apply_function(a, [](double x) { return x; });
  EXPECT_LE((fa.matrix() - a.matrix()).norm(), 1e-13);
}

TEST(ApplyFunction, XLogXOnDiagonal) {
  const HermitianOperator a = HermitianOperator::diagonal(vec({0.25, 0.5}));
  const HermitianOperator fa = apply_function(a, [](double x) { return x * std::log(x); });
  EXPECT_NEAR(fa.matrix()(0, 0).real(), 0.25 * std::log(0.25), 1e-15);
  EXPECT_NEAR(fa.matrix()(1, 1).real(), 0.5 * std::log(0.5), 1e-15);
  EXPECT_NEAR(std::abs(fa.matrix()(0, 1)), 0.0, 1e-16);
}

TEST(ApplyFunction, ProjectorIsFixed) {
  const OrthogonalProjector p = random_projector(5, 2, 3);
  const HermitianOperator fp =
      apply_function(p.carrier(), [](double x) { return x < 0.5 ? 0.0 : 1.0; });
  EXPECT_LE((fp.matrix() - p.carrier().matrix()).norm(), 1e-12);
}

TEST(ApplyFunction, DomainErrorCarriesEigenvalue) {
  const HermitianOperator a = HermitianOperator::diagonal(vec({0.0, 0.5}));
  try {
    apply_function(a, [](double x) { return std::log(x); });
    FAIL() << "expected DomainError";
  } catch (const DomainError& e) {
    EXPECT_EQ(e.at(), 0.0);
  }
}

TEST(ApplyFunction, CommutesAndComposesProperty) {
  auto g = [](double x) { return 0.5 * x + 0.25; };
  auto f = [](double x) { return std::sqrt(x); };
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    Rng rng(seed);
    const Index n = rng.uniform_index(2, 16);
    const HermitianOperator a = random_density(n, 0.0, 1.0, rng);
    const HermitianOperator fa = apply_function(a, f);
    EXPECT_LE(commutator_norm(a.matrix(), fa.matrix()), 1e-9 * n);
    const HermitianOperator composed = apply_function(a, [&](double x) { return f(g(x)); });
    const HermitianOperator nested = apply_function(apply_function(a, g), f);
    EXPECT_LE((composed.matrix() - nested.matrix()).norm(), 1e-9);
  }
}

TEST(Compress, IdentityAndZeroProjector) {
  const HermitianOperator a = random_density(4, 0.0, 1.0, 4);
  EXPECT_LE((compress(a, OrthogonalProjector::coordinate(4, 0, 4)).matrix() - a.matrix()).norm(),
            1e-15);
  EXPECT_EQ(compress(a, OrthogonalProjector::coordinate(4, 0, 0)).matrix().norm(), 0.0);
  EXPECT_EQ(compress(a, OrthogonalProjector::coordinate(4, 0, 0), true).dim(), 0);
}

TEST(Compress, DiagonalBlockRestricted) {
  const HermitianOperator a = HermitianOperator::diagonal(vec({0.3, 0.8}));
  const HermitianOperator c = compress(a, OrthogonalProjector::coordinate(2, 0, 1), true);
  ASSERT_EQ(c.dim(), 1);
  EXPECT_DOUBLE_EQ(c.matrix()(0, 0).real(), 0.3);
}

TEST(Compress, DimensionMismatch) {
  EXPECT_THROW(compress(HermitianOperator::identity(3), OrthogonalProjector::coordinate(4, 0, 2)),
               DimensionMismatch);
}

TEST(Compress, ResultIsHermitianProperty) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    const Index n = rng.uniform_index(1, 12);
    const HermitianOperator a = random_density(n, 0.0, 1.0, rng);
    const OrthogonalProjector p = random_projector(n, rng.uniform_index(0, n), rng);
    const Matrix pap = p.carrier().matrix() * a.matrix() * p.carrier().matrix();
    EXPECT_LE((pap - pap.adjoint()).norm(), 1e-12 * std::max(a.frobenius_norm(), 1e-300));
    const HermitianOperator c = compress(a, p);
    EXPECT_LE((c.matrix() - pap).norm(), 1e-12);
  }
}

TEST(Conjugate, IdentityUnitaryAndCoordinate) {
  const HermitianOperator a = random_density(5, 0.0, 1.0, 8);
  EXPECT_LE((conjugate(a, Contraction::identity(5)).matrix() - a.matrix()).norm(), 1e-15);

  Rng rng(1);
  const Matrix u = haar_unitary(5, rng);
  const HermitianOperator rotated = conjugate(a, Contraction(u));
  EXPECT_LE((rotated.eigenvalues() - a.eigenvalues()).cwiseAbs().maxCoeff(), 1e-10);

  Matrix x(1, 2);
  x << 1.0, 0.0;
  const HermitianOperator c = conjugate(HermitianOperator::diagonal(vec({0.3, 0.6})), Contraction(x));
  ASSERT_EQ(c.dim(), 1);
  EXPECT_DOUBLE_EQ(c.matrix()(0, 0).real(), 0.3);
}

TEST(Conjugate, DimensionMismatch) {
  EXPECT_THROW(conjugate(HermitianOperator::identity(3), Contraction::identity(2)),
               DimensionMismatch);
}

TEST(Conjugate, SpectrumStaysInUnitIntervalProperty) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    const Index n = rng.uniform_index(1, 10);
    const Index m = rng.uniform_index(1, 10);
    const HermitianOperator a = random_density(n, 0.0, 1.0, rng);
    const HermitianOperator c = conjugate(a, random_contraction(m, n, rng));
    EXPECT_GE(c.min_eigenvalue(), -1e-10);
    EXPECT_LE(c.max_eigenvalue(), 1.0 + 1e-10);
  }
}

TEST(ContractionType, RejectsLargeNorm) {
  Matrix x(1, 1);
  x << 1.01;
  EXPECT_THROW(Contraction{x}, InvalidArgument);
}

TEST(DoublingIsometry, ScalarCases) {
  Matrix zero = Matrix::Zero(1, 1);
  const Contraction u0 = doubling_isometry(Contraction(zero));
  ASSERT_EQ(u0.rows(), 2);
  EXPECT_NEAR(std::abs(u0.matrix()(0, 0)), 0.0, 1e-15);
  EXPECT_NEAR(u0.matrix()(1, 0).real(), 1.0, 1e-15);

  const Contraction ui = doubling_isometry(Contraction::identity(3));
  EXPECT_LE((ui.matrix().topRows(3) - Matrix::Identity(3, 3)).norm(), 1e-15);
  EXPECT_LE(ui.matrix().bottomRows(3).norm(), 1e-7);

  Matrix x(1, 1);
  x << 0.6;
  const Contraction u = doubling_isometry(Contraction(x));
  EXPECT_NEAR(u.matrix()(0, 0).real(), 0.6, 1e-15);
  EXPECT_NEAR(u.matrix()(1, 0).real(), std::sqrt(1.0 - 0.36), 1e-15);
}

TEST(DoublingIsometry, IsometryWithExactUpperBlockProperty) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    const Index r = rng.uniform_index(1, 8), c = rng.uniform_index(1, 8);
    const Contraction x = random_contraction(r, c, rng);
    const Contraction u = doubling_isometry(x);
    EXPECT_LE((u.matrix().adjoint() * u.matrix() - Matrix::Identity(c, c)).norm(), 1e-10);
    const HermitianOperator a = random_density(c, 0.0, 1.0, rng);
    const HermitianOperator uau = conjugate(a, u);
    const HermitianOperator xax = conjugate(a, x);
    EXPECT_LE((uau.matrix().topLeftCorner(r, r) - xax.matrix()).cwiseAbs().maxCoeff(), 1e-15);
  }
}

TEST(SchurInverse, BlockDiagonalAndTwoByTwo) {
  RealMatrix bd = RealMatrix::Zero(4, 4);
  bd.topLeftCorner(2, 2) << 2.0, 0.5, 0.5, 1.0;
  bd.bottomRightCorner(2, 2) << 3.0, -1.0, -1.0, 2.0;
  EXPECT_LE(schur_inverse_block_check(HermitianOperator(bd), OrthogonalProjector::coordinate(4, 0, 2)),
            1e-12);

  RealMatrix m(2, 2);
  m << 2.0, 1.0, 1.0, 2.0;
  // (2 - 1/2)^-1 = 2/3 = (A^-1)_11.
  EXPECT_LE(schur_inverse_block_check(HermitianOperator(m), OrthogonalProjector::coordinate(2, 0, 1)),
            1e-12);
}

TEST(SchurInverse, RandomSpdProperty) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Rng rng(seed);
    const Index n = rng.uniform_index(2, 16);
    const HermitianOperator a = random_hermitian(n, 0.1, 2.0, rng);
    const OrthogonalProjector p = random_projector(n, rng.uniform_index(1, n - 1), rng);
    EXPECT_LE(schur_inverse_block_check(a, p), 1e-8 * n) << "seed " << seed;
  }
}

TEST(SchurInverse, RequiresPositiveDefinite) {
  EXPECT_THROW(schur_inverse_block_check(HermitianOperator::diagonal(vec({1.0, 0.0})),
                                         OrthogonalProjector::coordinate(2, 0, 1)),
               Error);
}

TEST(Projector, RejectsNonIdempotent) {
  EXPECT_THROW(OrthogonalProjector(HermitianOperator::diagonal(vec({1.0, 0.5}))), InvalidArgument);
}
