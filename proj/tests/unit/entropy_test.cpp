#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "relent/entropy.hpp"
#include "relent/errors.hpp"
#include "relent/random.hpp"

using namespace relent;

namespace {

HermitianOperator diag(std::initializer_list<double> d) {
  RealVector v(static_cast<Index>(d.size()));
  Index i = 0;
  for (double x : d) v(i++) = x;
  return HermitianOperator::diagonal(v);
}

oracle::Scalar reference_for(const PhiSpec& phi) {
  return {phi.name.substr(0, phi.name.find(':')), phi.params.empty() ? 0.0 : phi.params[0]};
}

}  // namespace

TEST(RelativeEntropy, SelfIsZero) {
  for (const PhiSpec& phi : catalog()) {
    const HermitianOperator a = random_density(6, 0.0, 1.0, 3);
    const EntropyValue v = relative_entropy(a, a, phi);
    ASSERT_TRUE(v.is_finite()) << phi.name;
    EXPECT_LE(v.value, 1e-12) << phi.name;
  }
}

TEST(RelativeEntropy, DiagonalExample) {
  const EntropyValue v = relative_entropy(diag({0.5, 0.25}), diag({0.25, 0.25}), builtin("vn"));
  ASSERT_TRUE(v.is_finite());
  EXPECT_NEAR(v.value, 0.0965735902799726547, 1e-14);
}

TEST(RelativeEntropy, KernelMismatchAtZero) {
  const EntropyValue v = relative_entropy(diag({0.5}), diag({0.0}), builtin("vn"));
  EXPECT_FALSE(v.is_finite());
  EXPECT_EQ(v.reason, InfiniteReason::KernelMismatchAt0);
  EXPECT_TRUE(std::isinf(v.as_double()));
}

TEST(RelativeEntropy, KernelMismatchAtOne) {
  const EntropyValue v = relative_entropy(diag({0.5, 0.4}), diag({1.0, 0.4}), builtin("car"));
  EXPECT_FALSE(v.is_finite());
  EXPECT_EQ(v.reason, InfiniteReason::KernelMismatchAt1);
  // vn has a finite derivative at 1.
  EXPECT_TRUE(relative_entropy(diag({0.5, 0.4}), diag({1.0, 0.4}), builtin("vn")).is_finite());
}

TEST(RelativeEntropy, MatchedKernelUsesComplement) {
  const EntropyValue v = relative_entropy(diag({0.0, 0.5}), diag({0.0, 0.25}), builtin("vn"));
  ASSERT_TRUE(v.is_finite());
  EXPECT_NEAR(v.value, 0.0965735902799726547, 1e-14);
}

TEST(RelativeEntropy, KernelCouplingCountsAsMismatch) {
  // A agrees with B on the kernel diagonal but couples it to the complement.
  RealMatrix a(2, 2);
  a << 0.0, 0.0, 0.0, 0.5;
  a(0, 1) = a(1, 0) = 1e-3;
  RealMatrix b = RealMatrix::Zero(2, 2);
  b(1, 1) = 0.5;
  const EntropyValue v = relative_entropy(HermitianOperator(a), HermitianOperator(b), builtin("vn"),
                                          {}, {}, EigenPrecision::Standard);
  EXPECT_FALSE(v.is_finite());
}

TEST(RelativeEntropy, FiniteDerivativeLimitAtKernel) {
  // power_pos(2): phi'(0) = 0, so H(A, 0) = tr A^2.
  const EntropyValue v = relative_entropy(diag({0.5, 0.2}), diag({0.0, 0.0}), builtin("power_pos", {2.0}));
  ASSERT_TRUE(v.is_finite());
  EXPECT_NEAR(v.value, 0.25 + 0.04, 1e-15);
}

TEST(RelativeEntropy, Errors) {
  EXPECT_THROW(relative_entropy(diag({0.5}), diag({0.5, 0.5}), builtin("vn")), DimensionMismatch);
  EXPECT_THROW(relative_entropy(diag({1.2}), diag({0.5}), builtin("vn")), SpectrumOutOfRange);
  EXPECT_NO_THROW(relative_entropy(diag({1.0 + 5e-11}), diag({0.5}), builtin("vn")));
  KernelPolicy bad;
  bad.eigen_tol = 1e-3;
  EXPECT_THROW(relative_entropy(diag({0.5}), diag({0.5}), builtin("vn"), bad), InvalidArgument);
}

TEST(RelativeEntropy, CommutingReductionProperty) {
  for (const PhiSpec& phi : catalog()) {
    const oracle::Scalar ref = reference_for(phi);
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
      Rng rng(seed);
      const Index n = rng.uniform_index(2, 16);
      const Matrix u = haar_unitary(n, rng);
      RealVector la(n), lb(n);
      double expected = 0.0;
      for (Index i = 0; i < n; ++i) {
        la(i) = rng.uniform(0.0, 1.0);
        lb(i) = rng.uniform(0.02, 0.98);
        expected += ref.bregman(la(i), lb(i));
      }
      const EntropyValue v = relative_entropy(HermitianOperator::from_spectrum(la, u),
                                              HermitianOperator::from_spectrum(lb, u), phi);
      ASSERT_TRUE(v.is_finite());
      EXPECT_NEAR(v.value, expected, 1e-10 * n) << phi.name << " seed " << seed;
    }
  }
}

TEST(RelativeEntropy, NonnegativeFaithfulUnitaryInvariantProperty) {
  for (const PhiSpec& phi : catalog()) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      Rng rng(seed);
      const Index n = rng.uniform_index(2, 16);
      const HermitianOperator a = random_density(n, 0.0, 1.0, rng);
      const HermitianOperator b = random_density(n, 0.0, 1.0, rng);
      const EntropyValue v = relative_entropy(a, b, phi);
      ASSERT_TRUE(v.is_finite());
      EXPECT_GE(v.value, 0.0);
      if (phi.strictly_convex && (a - b).frobenius_norm() >= 1e-2) {
        EXPECT_GE(v.value, 1e-10) << phi.name;
      }
      const Contraction u(haar_unitary(n, rng));
      const EntropyValue w = relative_entropy(conjugate(a, u), conjugate(b, u), phi);
      EXPECT_NEAR(w.value, v.value, 1e-10 * std::max(1.0, v.value)) << phi.name;
    }
  }
}

TEST(EntropyS, Examples) {
  EXPECT_NEAR(entropy_S(0.5 * HermitianOperator::identity(2), builtin("car")), 2.0 * std::log(2.0),
              1e-14);
  EXPECT_NEAR(entropy_S(random_projector(5, 2, 1).carrier(), builtin("vn")), 0.0, 1e-12);
  EXPECT_NEAR(entropy_S(diag({0.25, 0.75}), builtin("vn")), 0.562335144618808350, 1e-14);
}

TEST(Ssa, BlockDiagonalIsZero) {
  RealMatrix m = RealMatrix::Zero(6, 6);
  m.block(0, 0, 2, 2) << 0.4, 0.1, 0.1, 0.3;
  m.block(2, 2, 2, 2) << 0.6, -0.2, -0.2, 0.5;
  m.block(4, 4, 2, 2) << 0.2, 0.05, 0.05, 0.7;
  for (const PhiSpec& phi : catalog()) {
    EXPECT_NEAR(ssa_defect(HermitianOperator(m), {2, 2, 2}, phi), 0.0, 1e-10) << phi.name;
  }
}

TEST(Ssa, NonnegativeForCatalogProperty) {
  for (const PhiSpec& phi : catalog()) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      const HermitianOperator a = random_density(6, 0.0, 1.0, seed);
      EXPECT_GE(ssa_defect(a, {2, 2, 2}, phi), -1e-9) << phi.name << " seed " << seed;
    }
  }
}

TEST(Ssa, QuarticViolatesSomewhere) {
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 10000 && worst >= -1e-9; ++seed) {
    worst = std::min(worst, ssa_defect(random_density(6, 0.0, 1.0, seed), {2, 2, 2},
                                       quartic_control()));
  }
  EXPECT_LT(worst, -1e-9);
}

TEST(Ssa, DimsMustSum) {
  EXPECT_THROW(ssa_defect(random_density(6, 0.0, 1.0, 1), {2, 2, 1}, builtin("vn")),
               DimensionMismatch);
}

TEST(VnIdentity, DiagonalExample) {
  EXPECT_LE(vn_identity_defect(diag({0.6, 0.4}), diag({0.5, 0.5})), 1e-12);
  const double h = relative_entropy(diag({0.6, 0.4}), diag({0.5, 0.5}), builtin("vn")).value;
  EXPECT_NEAR(h, 0.0201355135506888734, 1e-15);
}

TEST(VnIdentity, AgainstMatrixLogarithmProperty) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    const Index n = rng.uniform_index(2, 12);
    const HermitianOperator a = random_density(n, 0.02, 1.0, rng);
    const HermitianOperator b = random_density(n, 0.02, 0.98, rng);
    const double h = relative_entropy(a, b, builtin("vn")).value;
    EXPECT_NEAR(h, oracle::vn_formula(a.matrix(), b.matrix()), 1e-9 * n) << "seed " << seed;
    EXPECT_LE(vn_identity_defect(a, b), 1e-9 * n);
  }
}

TEST(VnIdentity, SingularBRejected) {
  EXPECT_THROW(vn_identity_defect(diag({0.5, 0.5}), diag({0.5, 0.0})), Error);
}

TEST(GaussianOracle, ScalarAndSelf) {
  EXPECT_NEAR(gaussian_kl_oracle(diag({2.0}), diag({1.0})), 0.5 * (std::log(2.0) + 0.5 - 1.0),
              1e-15);
  Rng rng(1);
  const HermitianOperator a = random_hermitian(4, 0.5, 3.0, rng);
  EXPECT_NEAR(gaussian_kl_oracle(a, a), 0.0, 1e-13);
  EXPECT_THROW(gaussian_kl_oracle(diag({1.0, -1.0}), diag({1.0, 1.0})), Error);
}

TEST(GaussianOracle, MatchesLuDeterminantProperty) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    const Index n = rng.uniform_index(2, 8);
    const HermitianOperator a = random_hermitian(n, 0.2, 5.0, rng);
    const HermitianOperator b = random_hermitian(n, 0.2, 5.0, rng);
    EXPECT_NEAR(gaussian_kl_oracle(a, b), oracle::gaussian_kl(a.matrix(), b.matrix()), 1e-10 * n);
  }
}

TEST(GaussianOracle, EqualsEntropyOfInversesWithIntervalOverride) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    const Index n = rng.uniform_index(2, 8);
    const HermitianOperator a = random_hermitian(n, 0.2, 5.0, rng);
    const HermitianOperator b = random_hermitian(n, 0.2, 5.0, rng);
    const HermitianOperator ai(Matrix(a.matrix().inverse()));
    const HermitianOperator bi(Matrix(b.matrix().inverse()));
    const EntropyValue h = relative_entropy(ai, bi, half_neg_log(), {}, {0.1, 10.0});
    ASSERT_TRUE(h.is_finite());
    EXPECT_NEAR(h.value, oracle::gaussian_kl(a.matrix(), b.matrix()), 1e-9 * n);
  }
}

TEST(ClampedSpectrum, ClampsOnlyRoundOff) {
  RealVector e(3);
  e << -5e-11, 0.5, 1.0 + 5e-11;
  const RealVector c = clamped_spectrum(e, {}, "test");
  EXPECT_EQ(c(0), 0.0);
  EXPECT_EQ(c(2), 1.0);
  e(0) = -1e-6;
  EXPECT_THROW(clamped_spectrum(e, {}, "test"), SpectrumOutOfRange);
}
