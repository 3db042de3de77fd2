#pragma once

// Dense Hermitian operators and the linear-algebra constructions used
// throughout the library: spectral decomposition, functional calculus,
// compressions by orthogonal projectors, conjugation by contractions,
// the doubling isometry and the Schur-complement inverse identity.
//
// All types are immutable values. HermitianOperator computes its spectral
// decomposition lazily and shares the cached result between copies, so
// concurrent readers are safe.

#include <complex>
#include <functional>
#include <memory>
#include <mutex>
#include <vector>

#include <Eigen/Dense>

namespace relent {

using Complex = std::complex<double>;
using Index = Eigen::Index;
using Matrix = Eigen::MatrixXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;
using ScalarFunction = std::function<double(double)>;

/// Eigen-decomposition A = V diag(eigenvalues) V*, eigenvalues ascending.
struct SpectralDecomposition {
  RealVector eigenvalues;
  Matrix eigenvectors;

  Index dim() const { return eigenvalues.size(); }
  Matrix reconstruct() const;
};

enum class EigenPrecision {
  Standard,
  /// Long-double eigensolver, rounded back to double. Used to re-verify
  /// witnesses of inequality violations.
  Extended,
};

class HermitianOperator {
 public:
  /// Relative asymmetry accepted (and symmetrized away) at construction.
  static constexpr double kAsymmetryTolerance = 1e-12;

  HermitianOperator();

  /// Validates Hermiticity: entries whose asymmetry exceeds
  /// kAsymmetryTolerance * max|entry| are rejected with InvalidArgument;
  /// smaller asymmetry is removed by (M + M*) / 2.
  explicit HermitianOperator(const Matrix& m);
  explicit HermitianOperator(const RealMatrix& m);

  /// For matrices that are Hermitian by construction (products such as
  /// X A X*): symmetrizes without the asymmetry check.
  static HermitianOperator symmetrized(const Matrix& m);

  static HermitianOperator identity(Index n);
  static HermitianOperator zero(Index n);
  static HermitianOperator diagonal(const RealVector& d);
  /// V diag(d) V* for a unitary V.
  static HermitianOperator from_spectrum(const RealVector& d, const Matrix& v);

  Index dim() const { return m_.rows(); }
  const Matrix& matrix() const { return m_; }
  bool is_real() const { return real_; }

  /// Lazily computed and cached; thread safe.
  const SpectralDecomposition& spectral() const;
  const RealVector& eigenvalues() const { return spectral().eigenvalues; }
  double min_eigenvalue() const;
  double max_eigenvalue() const;

  double frobenius_norm() const { return m_.norm(); }
  Complex trace() const { return m_.trace(); }

 private:
  struct Cache {
    std::once_flag once;
    SpectralDecomposition value;
  };

  static HermitianOperator from_trusted(Matrix m);

  Matrix m_;
  bool real_ = true;
  std::shared_ptr<Cache> cache_;
};

HermitianOperator operator+(const HermitianOperator& a, const HermitianOperator& b);
HermitianOperator operator-(const HermitianOperator& a, const HermitianOperator& b);
HermitianOperator operator*(double s, const HermitianOperator& a);

/// A linear map X with X*X <= 1, stored as a rows x cols matrix.
class Contraction {
 public:
  static constexpr double kNormTolerance = 1e-10;

  /// Throws InvalidArgument if the largest singular value exceeds
  /// 1 + kNormTolerance.
  explicit Contraction(const Matrix& m);
  static Contraction identity(Index n);

  Index rows() const { return m_.rows(); }
  Index cols() const { return m_.cols(); }
  const Matrix& matrix() const { return m_; }
  double spectral_norm() const;

 private:
  Matrix m_;
};

/// P = P* = P^2. Keeps an orthonormal basis of its range and of the
/// orthogonal complement.
class OrthogonalProjector {
 public:
  static constexpr double kIdempotenceTolerance = 1e-10;

  explicit OrthogonalProjector(const HermitianOperator& p);
  /// Projector onto the span of the (orthonormal) columns of q.
  static OrthogonalProjector from_basis(const Matrix& q);
  /// Projector onto coordinates [first, first + count).
  static OrthogonalProjector coordinate(Index dim, Index first, Index count);
  static OrthogonalProjector from_coordinates(Index dim, const std::vector<Index>& coords);

  const HermitianOperator& carrier() const { return p_; }
  Index dim() const { return p_.dim(); }
  Index rank() const { return range_.cols(); }
  const Matrix& range_basis() const { return range_; }
  const Matrix& complement_basis() const { return complement_; }

 private:
  OrthogonalProjector(HermitianOperator p, Matrix range, Matrix complement);

  HermitianOperator p_;
  Matrix range_;
  Matrix complement_;
};

/// Deterministic for identical input bytes. Throws InternalConsistencyError
/// if the eigensolver does not converge.
SpectralDecomposition eig_hermitian(const HermitianOperator& a,
                                    EigenPrecision precision = EigenPrecision::Standard);

/// V f(Lambda) V*. Throws DomainError carrying the eigenvalue at which f
/// returns a non-finite value.
HermitianOperator apply_function(const HermitianOperator& a, const ScalarFunction& f);

/// PAP, or with restrict the rank(P) x rank(P) matrix Q*AQ on an orthonormal
/// basis Q of range(P).
HermitianOperator compress(const HermitianOperator& a, const OrthogonalProjector& p,
                           bool restrict = false);

/// X A X*.
HermitianOperator conjugate(const HermitianOperator& a, const Contraction& x);

/// U f = Xf (+) sqrt(1 - X*X) f, a (rows + cols) x cols isometry.
Contraction doubling_isometry(const Contraction& x);

/// ||(A11 - A12 A22^{-1} A21)^{-1} - (A^{-1})_11||_F with blocks taken along
/// range(P) and its complement. Requires A positive definite.
double schur_inverse_block_check(const HermitianOperator& a, const OrthogonalProjector& p);

/// ||AB - BA||_F.
double commutator_norm(const Matrix& a, const Matrix& b);

}  // namespace relent
