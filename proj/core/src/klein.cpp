#include "relent/klein.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "relent/errors.hpp"

namespace relent {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEndpointMargin = 1e-4;
constexpr double kUpperMargin = 1e-6;

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
  return out;
}

void check_grid(int grid, const char* what) {
  if (grid < 100) throw InvalidArgument(std::string(what) + ": grid must be >= 100");
}

double relative_change(double coarse, double fine) {
  return std::abs(fine - coarse) / std::max(std::abs(fine), 1e-300);
}

// B's eigenbasis: mu and the squared row norms of V*(A - B)V.
struct GapTerms {
  RealVector mu;
  RealVector row_norm2;
};

GapTerms gap_terms(const HermitianOperator& a, const HermitianOperator& b, const char* what) {
  if (a.dim() != b.dim()) throw DimensionMismatch(std::string(what) + ": dimension mismatch");
  const SpectralDecomposition& eb = b.spectral();
  Matrix d = eb.eigenvectors.adjoint() * a.matrix() * eb.eigenvectors;
  d -= eb.eigenvalues.cast<Complex>().asDiagonal();
  return {eb.eigenvalues, d.cwiseAbs2().rowwise().sum()};
}

EntropyValue finite_entropy(const HermitianOperator& a, const HermitianOperator& b,
                            const PhiSpec& phi, const KernelPolicy& policy, const char* what) {
  const EntropyValue h = relative_entropy(a, b, phi, policy);
  if (!h.is_finite()) {
    throw VacuousBound(std::string(what) + ": H(A, B) is infinite (" + to_string(h.reason) + ")");
  }
  return h;
}

}  // namespace

double derive_lower_constant(const PhiSpec& phi, int grid) {
  check_grid(grid, "derive_lower_constant");
  if (!phi.strictly_convex) {
    throw PreconditionError("derive_lower_constant: phi " + phi.name + " is not strictly convex");
  }
  const auto xs = linspace(0.0, 1.0, grid);
  const auto ys = linspace(phi.dphi_divergent_at_0 ? kEndpointMargin : 0.0,
                           phi.dphi_divergent_at_1 ? 1.0 - kEndpointMargin : 1.0, grid);
  double best = kInf;
  for (double y : ys) {
    const double weight = 1.0 + std::abs(phi.derivative(y));
    for (double x : xs) {
      if (x == y) continue;
      const double num = bregman_scalar(phi, x, y);
      if (num < -1e-12) {
        throw PreconditionError("derive_lower_constant: phi " + phi.name + " is not convex");
      }
      best = std::min(best, num / (weight * (x - y) * (x - y)));
    }
  }
  if (!(best > 0.0)) {
    throw PreconditionError("derive_lower_constant: ratio is not bounded away from 0 for " +
                            phi.name);
  }
  return kSafetyFactor * best;
}

double derive_upper_constant(const PhiSpec& phi, int grid) {
  check_grid(grid, "derive_upper_constant");
  const auto xs = linspace(0.0, 1.0, grid);
  const auto ys = linspace(kEndpointMargin, 1.0 - kEndpointMargin, grid);
  double best = 0.0;
  for (double y : ys) {
    const double weight = 1.0 / (y * y) + 1.0 / ((1.0 - y) * (1.0 - y));
    for (double x : xs) {
      if (x == y) continue;
      best = std::max(best, bregman_scalar(phi, x, y) / (weight * (x - y) * (x - y)));
    }
  }
  if (!(best > 0.0)) {
    throw PreconditionError("derive_upper_constant: ratio vanishes for " + phi.name);
  }
  return best / kSafetyFactor;
}

double derive_lipschitz_constant(const PhiSpec& phi, double eps, int grid) {
  check_grid(grid, "derive_lipschitz_constant");
  if (!(eps > 0.0 && eps < 0.5)) throw InvalidArgument("derive_lipschitz_constant: eps must lie in (0, 1/2)");
  if (!phi.has_second_derivative()) {
    throw PreconditionError("derive_lipschitz_constant: phi " + phi.name + " has no second derivative");
  }
  const auto xs = linspace(0.0, 1.0, grid);
  const auto ys = linspace(0.5 * eps, 1.0 - 0.5 * eps, grid);
  double k = 0.0;
  double l = 0.0;
  for (double y : ys) {
    l = std::max(l, phi.second_derivative(y));
    for (double x : xs) {
      if (x == y) continue;
      k = std::max(k, bregman_scalar(phi, x, y) / ((x - y) * (x - y)));
    }
  }
  const double c = std::max(k, l);
  if (!(c > 0.0)) throw PreconditionError("derive_lipschitz_constant: constant vanishes for " + phi.name);
  return c / kSafetyFactor;
}

KleinConstants derive_klein_constants(const PhiSpec& phi, double eps, int grid) {
  KleinConstants k;
  k.phi_name = phi.name;
  k.eps = eps;
  k.derivation_grid = 2 * grid;
  const double lower = derive_lower_constant(phi, grid);
  const double upper = derive_upper_constant(phi, grid);
  const double lip = derive_lipschitz_constant(phi, eps, grid);
  k.c_lower = derive_lower_constant(phi, 2 * grid);
  k.c_upper = derive_upper_constant(phi, 2 * grid);
  k.c_eps = derive_lipschitz_constant(phi, eps, 2 * grid);
  k.lower_change = relative_change(lower, k.c_lower);
  k.upper_change = relative_change(upper, k.c_upper);
  k.eps_change = relative_change(lip, k.c_eps);
  k.stable = k.lower_change < kStabilityTolerance && k.upper_change < kStabilityTolerance &&
             k.eps_change < kStabilityTolerance;
  if (phi.ddphi_sup) k.smooth_upper = 0.5 * *phi.ddphi_sup;
  return k;
}

double hilbert_schmidt_gap(const HermitianOperator& a, const HermitianOperator& b,
                           const PhiSpec& phi, const KernelPolicy& policy) {
  policy.validate();
  const GapTerms g = gap_terms(a, b, "hilbert_schmidt_gap");
  const double limit = policy.match_tol * static_cast<double>(a.dim());
  double gap = 0.0;
  double kernel0 = 0.0, kernel1 = 0.0;
  for (Index i = 0; i < g.mu.size(); ++i) {
    const double m = g.mu(i);
    if (phi.dphi_divergent_at_0 && m <= policy.eigen_tol) {
      kernel0 += g.row_norm2(i);
    } else if (phi.dphi_divergent_at_1 && m >= 1.0 - policy.eigen_tol) {
      kernel1 += g.row_norm2(i);
    } else {
      const double y = std::clamp(m, 0.0, 1.0);
      gap += (1.0 + std::abs(phi.derivative(y))) * g.row_norm2(i);
    }
  }
  if (std::sqrt(kernel0) > limit || std::sqrt(kernel1) > limit) return kInf;
  return gap;
}

double upper_gap(const HermitianOperator& a, const HermitianOperator& b) {
  const GapTerms g = gap_terms(a, b, "upper_gap");
  double gap = 0.0;
  for (Index i = 0; i < g.mu.size(); ++i) {
    const double m = g.mu(i);
    if (m < kUpperMargin || m > 1.0 - kUpperMargin) {
      std::ostringstream os;
      os << "upper_gap: eigenvalue " << m << " of B is within 1e-6 of an endpoint";
      throw PreconditionError(os.str());
    }
    gap += (1.0 / (m * m) + 1.0 / ((1.0 - m) * (1.0 - m))) * g.row_norm2(i);
  }
  return gap;
}

double klein_lower_defect(const HermitianOperator& a, const HermitianOperator& b,
                          const PhiSpec& phi, const KleinConstants& constants,
                          const KernelPolicy& policy) {
  const EntropyValue h = finite_entropy(a, b, phi, policy, "klein_lower_defect");
  return h.value - constants.c_lower * hilbert_schmidt_gap(a, b, phi, policy);
}

double klein_upper_defect(const HermitianOperator& a, const HermitianOperator& b,
                          const PhiSpec& phi, const KleinConstants& constants,
                          const KernelPolicy& policy) {
  const double gap = upper_gap(a, b);
  const EntropyValue h = finite_entropy(a, b, phi, policy, "klein_upper_defect");
  return constants.c_upper * gap - h.value;
}

double lipschitz_defect(const HermitianOperator& a, const HermitianOperator& a_prime,
                        const HermitianOperator& b, const PhiSpec& phi,
                        const KleinConstants& constants, const KernelPolicy& policy) {
  if (a.dim() != a_prime.dim() || a.dim() != b.dim()) {
    throw DimensionMismatch("lipschitz_defect: dimension mismatch");
  }
  const double eps = constants.eps;
  auto inside = [eps](const HermitianOperator& m) {
    return m.dim() == 0 ||
           (m.min_eigenvalue() >= eps - 1e-12 && m.max_eigenvalue() <= 1.0 - eps + 1e-12);
  };
  if (!inside(a_prime) || !inside(b)) {
    std::ostringstream os;
    os << "lipschitz_defect: spectra of A' and B must lie in [" << eps << ", " << 1.0 - eps << "]";
    throw PreconditionError(os.str());
  }
  const double h = finite_entropy(a, b, phi, policy, "lipschitz_defect").value;
  const double h_prime = finite_entropy(a_prime, b, phi, policy, "lipschitz_defect").value;
  const double d1 = (a.matrix() - a_prime.matrix()).norm();
  const double d2 = (a_prime.matrix() - b.matrix()).norm();
  return constants.c_eps * (d1 * d1 + d2 * d1) - std::abs(h - h_prime);
}

}  // namespace relent
