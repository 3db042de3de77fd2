#include "relent/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "relent/errors.hpp"

namespace relent {

namespace {

void require_same_dim(const HermitianOperator& a, const HermitianOperator& b, const char* what) {
  if (a.dim() != b.dim()) {
    std::ostringstream os;
    os << what << ": dimensions differ (" << a.dim() << " vs " << b.dim() << ")";
    throw DimensionMismatch(os.str());
  }
}

double clamp_result(double h) {
  if (h >= 0.0) return h;
  if (h >= -kNegativeSlack) return 0.0;
  std::ostringstream os;
  os << "relative_entropy: computed value " << h << " is negative beyond round-off";
  throw InternalConsistencyError(os.str());
}

// Frobenius mismatch of A and B = diag(mu) on the rows in `kernel`, plus the
// coupling of those rows to the complement.
double kernel_mismatch(const Matrix& at, const RealVector& mu, const std::vector<Index>& kernel,
                       const std::vector<bool>& in_kernel) {
  double rows = 0.0;
  double coupling = 0.0;
  const Index n = at.rows();
  for (Index i : kernel) {
    for (Index j = 0; j < n; ++j) {
      Complex d = at(i, j);
      if (i == j) d -= mu(i);
      rows += std::norm(d);
      if (!in_kernel[static_cast<std::size_t>(j)]) coupling += std::norm(at(i, j));
    }
  }
  return std::sqrt(rows) + std::sqrt(coupling);
}

}  // namespace

double EntropyValue::as_double() const {
  return is_finite() ? value : std::numeric_limits<double>::infinity();
}

std::string to_string(InfiniteReason r) {
  switch (r) {
    case InfiniteReason::None: return "none";
    case InfiniteReason::KernelMismatchAt0: return "kernel_mismatch_at_0";
    case InfiniteReason::KernelMismatchAt1: return "kernel_mismatch_at_1";
  }
  return "unknown";
}

void KernelPolicy::validate() const {
  if (!(eigen_tol > 0.0 && eigen_tol < 1e-6)) {
    throw InvalidArgument("KernelPolicy: eigen_tol must lie in (0, 1e-6)");
  }
  if (!(match_tol > 0.0 && match_tol < 1e-6)) {
    throw InvalidArgument("KernelPolicy: match_tol must lie in (0, 1e-6)");
  }
}

RealVector clamped_spectrum(const RealVector& eigenvalues, const SpectralInterval& interval,
                            const char* label) {
  RealVector out = eigenvalues;
  for (Index i = 0; i < out.size(); ++i) {
    const double v = out(i);
    if (v < interval.lo - kSpectrumClampTolerance || v > interval.hi + kSpectrumClampTolerance ||
        !std::isfinite(v)) {
      std::ostringstream os;
      os << label << ": eigenvalue " << v << " outside [" << interval.lo << ", " << interval.hi
         << "]";
      throw SpectrumOutOfRange(os.str());
    }
    out(i) = std::clamp(v, interval.lo, interval.hi);
  }
  return out;
}

EntropyValue relative_entropy(const HermitianOperator& a, const HermitianOperator& b,
                              const PhiSpec& phi, const KernelPolicy& policy,
                              const SpectralInterval& interval, EigenPrecision precision) {
  require_same_dim(a, b, "relative_entropy");
  policy.validate();
  if (!(interval.lo < interval.hi)) throw InvalidArgument("relative_entropy: empty interval");
  const Index n = a.dim();
  if (n == 0) return EntropyValue::finite(0.0);

  const bool standard = precision == EigenPrecision::Standard;
  const SpectralDecomposition eb_extended =
      standard ? SpectralDecomposition{} : eig_hermitian(b, precision);
  const SpectralDecomposition& eb = standard ? b.spectral() : eb_extended;

  RealVector mu = clamped_spectrum(eb.eigenvalues, interval, "relative_entropy (B)");
  const bool at0 = interval.lo == 0.0;
  const bool at1 = interval.hi == 1.0;
  for (Index i = 0; i < n; ++i) {
    if (at0 && mu(i) <= policy.eigen_tol) mu(i) = 0.0;
    if (at1 && mu(i) >= 1.0 - policy.eigen_tol) mu(i) = 1.0;
  }

  const Matrix at = eb.eigenvectors.adjoint() * a.matrix() * eb.eigenvectors;

  std::vector<Index> k0, k1, rest;
  std::vector<bool> in_kernel(static_cast<std::size_t>(n), false);
  for (Index i = 0; i < n; ++i) {
    if (at0 && phi.dphi_divergent_at_0 && mu(i) == 0.0) {
      k0.push_back(i);
    } else if (at1 && phi.dphi_divergent_at_1 && mu(i) == 1.0) {
      k1.push_back(i);
    } else {
      rest.push_back(i);
      continue;
    }
    in_kernel[static_cast<std::size_t>(i)] = true;
  }
  const double limit = policy.match_tol * static_cast<double>(n);
  if (!k0.empty() && kernel_mismatch(at, mu, k0, in_kernel) > limit) {
    return EntropyValue::infinite(InfiniteReason::KernelMismatchAt0);
  }
  if (!k1.empty() && kernel_mismatch(at, mu, k1, in_kernel) > limit) {
    return EntropyValue::infinite(InfiniteReason::KernelMismatchAt1);
  }

  // Spectrum of A on the complement of the matched kernel.
  RealVector lambda;
  if (rest.size() == static_cast<std::size_t>(n)) {
    if (standard) {
      lambda = a.eigenvalues();
    } else {
      lambda = eig_hermitian(a, precision).eigenvalues;
    }
  } else {
    const Index m = static_cast<Index>(rest.size());
    Matrix block(m, m);
    for (Index i = 0; i < m; ++i) {
      for (Index j = 0; j < m; ++j) block(i, j) = at(rest[i], rest[j]);
    }
    lambda = eig_hermitian(HermitianOperator::symmetrized(block), precision).eigenvalues;
  }
  lambda = clamped_spectrum(lambda, interval, "relative_entropy (A)");
  for (Index i = 0; i < lambda.size(); ++i) {
    if (at0 && lambda(i) <= policy.eigen_tol) lambda(i) = 0.0;
    if (at1 && lambda(i) >= 1.0 - policy.eigen_tol) lambda(i) = 1.0;
  }

  double h = 0.0;
  for (Index i = 0; i < lambda.size(); ++i) h += phi.value(lambda(i));
  for (Index i : rest) {
    const double m = mu(i);
    const double shift = at(i, i).real() - m;
    h -= phi.value(m);
    if (shift != 0.0) h -= phi.derivative(m) * shift;
  }
  if (!std::isfinite(h)) {
    throw InternalConsistencyError("relative_entropy: non-finite value on the matched complement");
  }
  return EntropyValue::finite(clamp_result(h));
}

double entropy_S(const HermitianOperator& a, const PhiSpec& phi) {
  const RealVector lambda = clamped_spectrum(a.eigenvalues(), {}, "entropy_S");
  double s = 0.0;
  for (Index i = 0; i < lambda.size(); ++i) s -= phi.value(lambda(i));
  return s;
}

double ssa_defect(const HermitianOperator& a, const std::array<Index, 3>& dims,
                  const PhiSpec& phi) {
  const Index d1 = dims[0], d2 = dims[1], d3 = dims[2];
  if (d1 < 0 || d2 < 0 || d3 < 0 || d1 + d2 + d3 != a.dim()) {
    std::ostringstream os;
    os << "ssa_defect: block sizes " << d1 << "+" << d2 << "+" << d3
       << " do not sum to dim " << a.dim();
    throw DimensionMismatch(os.str());
  }
  const Index n = a.dim();
  auto block = [&](Index first, Index count) {
    return entropy_S(compress(a, OrthogonalProjector::coordinate(n, first, count), true), phi);
  };
  return block(0, d1 + d2) + block(d1, d2 + d3) - block(0, n) - block(d1, d2);
}

double vn_identity_defect(const HermitianOperator& a, const HermitianOperator& b) {
  require_same_dim(a, b, "vn_identity_defect");
  if (!(b.min_eigenvalue() > 0.0)) {
    throw PreconditionError("vn_identity_defect: B must be positive definite");
  }
  const PhiSpec vn = builtin("vn");
  const EntropyValue h = relative_entropy(a, b, vn);
  if (!h.is_finite()) throw InternalConsistencyError("vn_identity_defect: infinite entropy");

  const RealVector lambda = clamped_spectrum(a.eigenvalues(), {}, "vn_identity_defect (A)");
  const SpectralDecomposition& eb = b.spectral();
  const Matrix at = eb.eigenvectors.adjoint() * a.matrix() * eb.eigenvectors;
  double a_log_a = 0.0;
  for (Index i = 0; i < lambda.size(); ++i) {
    if (lambda(i) > 0.0) a_log_a += lambda(i) * std::log(lambda(i));
  }
  double a_log_b = 0.0;
  for (Index i = 0; i < at.rows(); ++i) a_log_b += at(i, i).real() * std::log(eb.eigenvalues(i));
  const double rhs = a_log_a - a_log_b - a.trace().real() + b.trace().real();
  return std::abs(h.value - rhs);
}

double gaussian_kl_oracle(const HermitianOperator& a, const HermitianOperator& b) {
  require_same_dim(a, b, "gaussian_kl_oracle");
  Eigen::LLT<Matrix> la(a.matrix());
  Eigen::LLT<Matrix> lb(b.matrix());
  if (la.info() != Eigen::Success) throw PreconditionError("gaussian_kl_oracle: A is not positive definite");
  if (lb.info() != Eigen::Success) throw PreconditionError("gaussian_kl_oracle: B is not positive definite");
  double logdet_a = 0.0;
  double logdet_b = 0.0;
  for (Index i = 0; i < a.dim(); ++i) {
    logdet_a += 2.0 * std::log(la.matrixLLT()(i, i).real());
    logdet_b += 2.0 * std::log(lb.matrixLLT()(i, i).real());
  }
  const double tr = la.solve(b.matrix()).trace().real();
  return 0.5 * (logdet_a - logdet_b + tr - static_cast<double>(a.dim()));
}

}  // namespace relent
