#include "relent/operator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "relent/errors.hpp"

namespace relent {

namespace {

bool has_zero_imaginary(const Matrix& m) {
  return (m.imag().array() == 0.0).all();
}

double max_abs_entry(const Matrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

template <typename Scalar>
SpectralDecomposition solve_eigen(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>> solver(m);
  if (solver.info() != Eigen::Success) {
    throw InternalConsistencyError("eig_hermitian: eigensolver did not converge");
  }
  SpectralDecomposition out;
  out.eigenvalues = solver.eigenvalues().template cast<double>();
  out.eigenvectors = solver.eigenvectors().template cast<Complex>();
  return out;
}

bool is_exact_coordinate_projector(const Matrix& p) {
  for (Index j = 0; j < p.cols(); ++j) {
    for (Index i = 0; i < p.rows(); ++i) {
      const Complex v = p(i, j);
      if (i != j && v != Complex(0.0)) return false;
      if (i == j && v != Complex(0.0) && v != Complex(1.0)) return false;
    }
  }
  return true;
}

}  // namespace

Matrix SpectralDecomposition::reconstruct() const {
  return eigenvectors * eigenvalues.cast<Complex>().asDiagonal() * eigenvectors.adjoint();
}

HermitianOperator::HermitianOperator() : m_(0, 0), cache_(std::make_shared<Cache>()) {}

HermitianOperator::HermitianOperator(const Matrix& m) {
  if (m.rows() != m.cols()) {
    std::ostringstream os;
    os << "HermitianOperator: matrix is " << m.rows() << "x" << m.cols() << ", not square";
    throw DimensionMismatch(os.str());
  }
  const double scale = max_abs_entry(m);
  const double asym = max_abs_entry(m - m.adjoint());
  if (asym > kAsymmetryTolerance * scale) {
    std::ostringstream os;
    os << "HermitianOperator: asymmetry " << asym << " exceeds tolerance "
       << kAsymmetryTolerance * scale;
    throw InvalidArgument(os.str());
  }
  *this = from_trusted(m);
}

HermitianOperator::HermitianOperator(const RealMatrix& m)
    : HermitianOperator(Matrix(m.cast<Complex>())) {}

HermitianOperator HermitianOperator::symmetrized(const Matrix& m) {
  if (m.rows() != m.cols()) {
    throw DimensionMismatch("HermitianOperator::symmetrized: matrix is not square");
  }
  return from_trusted(m);
}

HermitianOperator HermitianOperator::from_trusted(Matrix m) {
  HermitianOperator out;
  if (m.size() > 0) {
    Matrix sym = 0.5 * (m + m.adjoint());
    // Exact diagonal reals; keeps real inputs on the real fast path.
    for (Index i = 0; i < sym.rows(); ++i) sym(i, i) = Complex(sym(i, i).real(), 0.0);
    out.m_ = std::move(sym);
  } else {
    out.m_ = std::move(m);
  }
  out.real_ = has_zero_imaginary(out.m_);
  out.cache_ = std::make_shared<Cache>();
  return out;
}

HermitianOperator HermitianOperator::identity(Index n) {
  return from_trusted(Matrix::Identity(n, n));
}

HermitianOperator HermitianOperator::zero(Index n) { return from_trusted(Matrix::Zero(n, n)); }

HermitianOperator HermitianOperator::diagonal(const RealVector& d) {
  return from_trusted(Matrix(d.cast<Complex>().asDiagonal()));
}

HermitianOperator HermitianOperator::from_spectrum(const RealVector& d, const Matrix& v) {
  if (v.rows() != v.cols() || v.cols() != d.size()) {
    throw DimensionMismatch("HermitianOperator::from_spectrum: shape mismatch");
  }
  return from_trusted(v * d.cast<Complex>().asDiagonal() * v.adjoint());
}

const SpectralDecomposition& HermitianOperator::spectral() const {
  std::call_once(cache_->once, [this] { cache_->value = eig_hermitian(*this); });
  return cache_->value;
}

double HermitianOperator::min_eigenvalue() const {
  const auto& ev = eigenvalues();
  return ev.size() == 0 ? 0.0 : ev(0);
}

double HermitianOperator::max_eigenvalue() const {
  const auto& ev = eigenvalues();
  return ev.size() == 0 ? 0.0 : ev(ev.size() - 1);
}

HermitianOperator operator+(const HermitianOperator& a, const HermitianOperator& b) {
  if (a.dim() != b.dim()) throw DimensionMismatch("operator+: dimension mismatch");
  return HermitianOperator::symmetrized(a.matrix() + b.matrix());
}

HermitianOperator operator-(const HermitianOperator& a, const HermitianOperator& b) {
  if (a.dim() != b.dim()) throw DimensionMismatch("operator-: dimension mismatch");
  return HermitianOperator::symmetrized(a.matrix() - b.matrix());
}

HermitianOperator operator*(double s, const HermitianOperator& a) {
  return HermitianOperator::symmetrized(s * a.matrix());
}

Contraction::Contraction(const Matrix& m) : m_(m) {
  const double norm = spectral_norm();
  if (norm > 1.0 + kNormTolerance) {
    std::ostringstream os;
    os << "Contraction: largest singular value " << norm << " exceeds 1";
    throw InvalidArgument(os.str());
  }
}

Contraction Contraction::identity(Index n) { return Contraction(Matrix::Identity(n, n)); }

double Contraction::spectral_norm() const {
  if (m_.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m_);
  return svd.singularValues()(0);
}

OrthogonalProjector::OrthogonalProjector(HermitianOperator p, Matrix range, Matrix complement)
    : p_(std::move(p)), range_(std::move(range)), complement_(std::move(complement)) {}

OrthogonalProjector::OrthogonalProjector(const HermitianOperator& p) : p_(p) {
  const Matrix& m = p.matrix();
  const double defect = (m * m - m).norm();
  if (defect > kIdempotenceTolerance) {
    std::ostringstream os;
    os << "OrthogonalProjector: ||P^2 - P||_F = " << defect << " exceeds tolerance";
    throw InvalidArgument(os.str());
  }
  const Index n = m.rows();
  std::vector<Index> in;
  std::vector<Index> out;
  if (is_exact_coordinate_projector(m)) {
    for (Index i = 0; i < n; ++i) (m(i, i) == Complex(1.0) ? in : out).push_back(i);
    range_ = Matrix::Zero(n, static_cast<Index>(in.size()));
    complement_ = Matrix::Zero(n, static_cast<Index>(out.size()));
    for (std::size_t k = 0; k < in.size(); ++k) range_(in[k], static_cast<Index>(k)) = 1.0;
    for (std::size_t k = 0; k < out.size(); ++k) complement_(out[k], static_cast<Index>(k)) = 1.0;
    return;
  }
  const auto& sd = p.spectral();
  for (Index i = 0; i < n; ++i) (sd.eigenvalues(i) > 0.5 ? in : out).push_back(i);
  range_ = Matrix(n, static_cast<Index>(in.size()));
  complement_ = Matrix(n, static_cast<Index>(out.size()));
  for (std::size_t k = 0; k < in.size(); ++k) range_.col(static_cast<Index>(k)) = sd.eigenvectors.col(in[k]);
  for (std::size_t k = 0; k < out.size(); ++k) complement_.col(static_cast<Index>(k)) = sd.eigenvectors.col(out[k]);
}

OrthogonalProjector OrthogonalProjector::from_basis(const Matrix& q) {
  const Index n = q.rows();
  const Index r = q.cols();
  if (r > n) throw InvalidArgument("OrthogonalProjector::from_basis: more columns than rows");
  if (r > 0 && (q.adjoint() * q - Matrix::Identity(r, r)).cwiseAbs().maxCoeff() >
                   kIdempotenceTolerance) {
    throw InvalidArgument("OrthogonalProjector::from_basis: columns are not orthonormal");
  }
  // Complement from the full QR of q.
  Matrix complement(n, n - r);
  if (r == 0) {
    complement = Matrix::Identity(n, n);
  } else if (n - r > 0) {
    Eigen::HouseholderQR<Matrix> qr(q);
    Matrix full = qr.householderQ() * Matrix::Identity(n, n);
    complement = full.rightCols(n - r);
  }
  return OrthogonalProjector(HermitianOperator::symmetrized(q * q.adjoint()), q, complement);
}

OrthogonalProjector OrthogonalProjector::coordinate(Index dim, Index first, Index count) {
  if (first < 0 || count < 0 || first + count > dim) {
    throw InvalidArgument("OrthogonalProjector::coordinate: range exceeds dimension");
  }
  std::vector<Index> coords;
  for (Index i = first; i < first + count; ++i) coords.push_back(i);
  return from_coordinates(dim, coords);
}

OrthogonalProjector OrthogonalProjector::from_coordinates(Index dim, const std::vector<Index>& coords) {
  RealVector d = RealVector::Zero(dim);
  for (Index c : coords) {
    if (c < 0 || c >= dim) throw InvalidArgument("OrthogonalProjector: coordinate out of range");
    d(c) = 1.0;
  }
  return OrthogonalProjector(HermitianOperator::diagonal(d));
}

SpectralDecomposition eig_hermitian(const HermitianOperator& a, EigenPrecision precision) {
  const Index n = a.dim();
  if (n == 0) return SpectralDecomposition{RealVector(0), Matrix(0, 0)};
  if (precision == EigenPrecision::Extended) {
    using CLD = std::complex<long double>;
    if (a.is_real()) {
      return solve_eigen<long double>(a.matrix().real().cast<long double>());
    }
    return solve_eigen<CLD>(a.matrix().cast<CLD>());
  }
  if (a.is_real()) return solve_eigen<double>(a.matrix().real());
  return solve_eigen<Complex>(a.matrix());
}

HermitianOperator apply_function(const HermitianOperator& a, const ScalarFunction& f) {
  const auto& sd = a.spectral();
  RealVector fv(sd.dim());
  for (Index i = 0; i < sd.dim(); ++i) {
    const double lambda = sd.eigenvalues(i);
    const double v = f(lambda);
    if (!std::isfinite(v)) {
      std::ostringstream os;
      os << "apply_function: function is not finite at eigenvalue " << lambda;
      throw DomainError(os.str(), lambda);
    }
    fv(i) = v;
  }
  return HermitianOperator::from_spectrum(fv, sd.eigenvectors);
}

HermitianOperator compress(const HermitianOperator& a, const OrthogonalProjector& p, bool restrict) {
  if (a.dim() != p.dim()) throw DimensionMismatch("compress: operator and projector dimensions differ");
  if (restrict) {
    const Matrix& q = p.range_basis();
    return HermitianOperator::symmetrized(q.adjoint() * a.matrix() * q);
  }
  const Matrix& pm = p.carrier().matrix();
  return HermitianOperator::symmetrized(pm * a.matrix() * pm);
}

HermitianOperator conjugate(const HermitianOperator& a, const Contraction& x) {
  if (x.cols() != a.dim()) {
    std::ostringstream os;
    os << "conjugate: contraction has " << x.cols() << " columns, operator has dimension " << a.dim();
    throw DimensionMismatch(os.str());
  }
  return HermitianOperator::symmetrized(x.matrix() * a.matrix() * x.matrix().adjoint());
}

Contraction doubling_isometry(const Contraction& x) {
  const Index n = x.cols();
  const HermitianOperator defect =
      HermitianOperator::symmetrized(Matrix::Identity(n, n) - x.matrix().adjoint() * x.matrix());
  const auto& sd = defect.spectral();
  if (n > 0 && sd.eigenvalues(0) < -Contraction::kNormTolerance) {
    throw PreconditionError("doubling_isometry: 1 - X*X is indefinite");
  }
  RealVector root = sd.eigenvalues.cwiseMax(0.0).cwiseSqrt();
  Matrix u(x.rows() + n, n);
  u.topRows(x.rows()) = x.matrix();
  u.bottomRows(n) = sd.eigenvectors * root.cast<Complex>().asDiagonal() * sd.eigenvectors.adjoint();
  return Contraction(u);
}

double schur_inverse_block_check(const HermitianOperator& a, const OrthogonalProjector& p) {
  if (a.dim() != p.dim()) throw DimensionMismatch("schur_inverse_block_check: dimension mismatch");
  if (a.dim() == 0) return 0.0;
  if (a.min_eigenvalue() <= 1e-10) {
    throw PreconditionError("schur_inverse_block_check: A is not positive definite");
  }
  const Matrix& q1 = p.range_basis();
  const Matrix& q2 = p.complement_basis();
  const Matrix& m = a.matrix();
  const Index n = a.dim();

  Eigen::LLT<Matrix> full(m);
  const Matrix a_inv = full.solve(Matrix::Identity(n, n));
  const Matrix inv11 = q1.adjoint() * a_inv * q1;

  Matrix schur = q1.adjoint() * m * q1;
  if (q2.cols() > 0) {
    const Matrix a12 = q1.adjoint() * m * q2;
    const Matrix a22 = q2.adjoint() * m * q2;
    Eigen::LDLT<Matrix> ldlt(a22);
    const double pivot = ldlt.vectorD().cwiseAbs().minCoeff();
    if (ldlt.info() != Eigen::Success || pivot <= 1e-14 * std::max(1.0, a22.norm())) {
      throw PreconditionError("schur_inverse_block_check: A22 is singular");
    }
    schur -= a12 * ldlt.solve(a12.adjoint());
  }
  if (schur.rows() == 0) return 0.0;
  Eigen::LLT<Matrix> schur_llt(schur);
  const Matrix schur_inv = schur_llt.solve(Matrix::Identity(schur.rows(), schur.cols()));
  return (schur_inv - inv11).norm();
}

double commutator_norm(const Matrix& a, const Matrix& b) { return (a * b - b * a).norm(); }

}  // namespace relent
