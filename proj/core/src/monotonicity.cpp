#include "relent/monotonicity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "relent/errors.hpp"
#include "relent/random.hpp"

namespace relent {

namespace {

constexpr double kPinchingMargin = 1e-6;
constexpr double kViolationScale = 1e-8;

double min_eigenvalue(const Matrix& m, EigenPrecision precision) {
  if (m.rows() == 0) return 0.0;
  return eig_hermitian(HermitianOperator::symmetrized(m), precision).eigenvalues(0);
}

// V diag(f(lambda)) V* with an explicit precision for the eigensolver.
Matrix function_of(const Matrix& m, const ScalarFunction& f, EigenPrecision precision) {
  const SpectralDecomposition sd = eig_hermitian(HermitianOperator::symmetrized(m), precision);
  RealVector fv(sd.dim());
  for (Index i = 0; i < sd.dim(); ++i) fv(i) = f(sd.eigenvalues(i));
  return sd.eigenvectors * fv.cast<Complex>().asDiagonal() * sd.eigenvectors.adjoint();
}

struct Candidate {
  double normalized = 0.0;  // defect / scale
  Witness witness;
};

}  // namespace

std::string to_string(Verdict v) {
  return v == Verdict::ViolationFound ? "violation_found" : "consistent_with_monotone";
}

RealMatrix lowner_matrix(const PhiSpec& phi, const RealVector& points) {
  if (!phi.has_second_derivative()) {
    throw PreconditionError("lowner_matrix: phi " + phi.name + " has no second derivative");
  }
  const Index n = points.size();
  RealMatrix d(n, n);
  for (Index i = 0; i < n; ++i) {
    d(i, i) = phi.second_derivative(points(i));
    for (Index j = 0; j < i; ++j) {
      const double xi = points(i), xj = points(j);
      double v;
      if (std::abs(xi - xj) < 1e-9) {
        v = 0.5 * (phi.second_derivative(xi) + phi.second_derivative(xj));
      } else {
        v = (phi.dphi(xi) - phi.dphi(xj)) / (xi - xj);
      }
      d(i, j) = v;
      d(j, i) = v;
    }
  }
  return d;
}

CertReport lowner_matrix_test(const PhiSpec& phi, int n_points, std::int64_t trials,
                              std::uint64_t seed) {
  if (n_points < 2) throw InvalidArgument("lowner_matrix_test: n_points must be >= 2");
  if (trials < 1) throw InvalidArgument("lowner_matrix_test: trials must be >= 1");
  CertReport report;
  report.mode = "lowner";
  report.trials = trials;
  std::optional<Candidate> best;
  for (std::int64_t t = 0; t < trials; ++t) {
    Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(t));
    std::vector<double> xs(static_cast<std::size_t>(n_points));
    for (auto& x : xs) x = rng.uniform(0.01, 0.99);
    std::sort(xs.begin(), xs.end());
    const RealVector points = Eigen::Map<RealVector>(xs.data(), n_points);
    const RealMatrix d = lowner_matrix(phi, points);
    const double lo = Eigen::SelfAdjointEigenSolver<RealMatrix>(d, Eigen::EigenvaluesOnly)
                          .eigenvalues()(0);
    const double scale = d.cwiseAbs().maxCoeff();
    report.worst_defect = std::min(report.worst_defect, lo);
    if (lo < -kViolationScale * scale) {
      const double normalized = lo / scale;
      if (!best || normalized < best->normalized) {
        Witness w;
        w.kind = "lowner";
        w.seed = seed;
        w.trial = static_cast<std::uint64_t>(t);
        w.points = points;
        w.defect = lo;
        const Eigen::SelfAdjointEigenSolver<Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>>
            ext(d.cast<long double>(), Eigen::EigenvaluesOnly);
        w.reverified_defect = static_cast<double>(ext.eigenvalues()(0));
        if (w.reverified_defect < -kViolationScale * scale) best = Candidate{normalized, w};
      }
    }
  }
  if (best) {
    report.verdict = Verdict::ViolationFound;
    report.witness = best->witness;
  }
  return report;
}

double pinching_defect(const HermitianOperator& a, const OrthogonalProjector& p,
                       const PhiSpec& phi, EigenPrecision precision) {
  if (a.dim() != p.dim()) throw DimensionMismatch("pinching_defect: dimension mismatch");
  if (a.dim() == 0 || p.rank() == 0) return 0.0;
  const double lo = a.min_eigenvalue(), hi = a.max_eigenvalue();
  if (lo < kPinchingMargin || hi > 1.0 - kPinchingMargin) {
    std::ostringstream os;
    os << "pinching_defect: spectrum [" << lo << ", " << hi << "] must lie in [1e-6, 1 - 1e-6]";
    throw PreconditionError(os.str());
  }
  const ScalarFunction f = [&phi](double x) { return x * phi.dphi(x); };
  const Matrix& q = p.range_basis();
  const Matrix left = q.adjoint() * function_of(a.matrix(), f, precision) * q;
  const Matrix right = function_of(q.adjoint() * a.matrix() * q, f, precision);
  return min_eigenvalue(left - right, precision);
}

std::optional<double> contraction_defect(const HermitianOperator& a, const HermitianOperator& b,
                                         const Contraction& x, const PhiSpec& phi,
                                         const KernelPolicy& policy, EigenPrecision precision) {
  if (a.dim() != b.dim() || x.cols() != a.dim()) {
    throw DimensionMismatch("contraction_defect: dimensions of A, B and X do not agree");
  }
  const EntropyValue outer = relative_entropy(a, b, phi, policy, {}, precision);
  if (!outer.is_finite()) return std::nullopt;
  const EntropyValue inner =
      relative_entropy(conjugate(a, x), conjugate(b, x), phi, policy, {}, precision);
  if (!inner.is_finite()) return -std::numeric_limits<double>::infinity();
  return outer.value - inner.value;
}

CertReport search_counterexample(const PhiSpec& phi, Index dim, std::int64_t trials,
                                 std::uint64_t seed, const SearchOptions& options) {
  if (trials < 1) throw InvalidArgument("search_counterexample: trials must be >= 1");
  if (dim < 1) throw InvalidArgument("search_counterexample: dim must be >= 1");
  if (!options.contraction && !options.pinching) {
    throw InvalidArgument("search_counterexample: no mode selected");
  }
  CertReport report;
  report.mode = options.contraction && options.pinching ? "all"
                : options.contraction                   ? "contraction"
                                                        : "pinching";
  report.trials = trials;
  const double lo = options.edge ? 0.0 : 0.05;
  const double hi = options.edge ? 1.0 : 0.95;
  std::optional<Candidate> best;

  auto consider = [&](double defect, double scale, Witness w, auto&& reverify) {
    report.worst_defect = std::min(report.worst_defect, defect);
    if (!(defect < -kViolationScale * scale)) return;
    const double normalized = std::isinf(defect) ? -std::numeric_limits<double>::infinity()
                                                 : defect / scale;
    if (best && normalized >= best->normalized) return;
    w.defect = defect;
    w.reverified_defect = reverify();
    if (!(w.reverified_defect < -kViolationScale * scale)) return;
    best = Candidate{normalized, std::move(w)};
  };

  for (std::int64_t t = 0; t < trials; ++t) {
    Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(t));
    if (options.contraction) {
      // Odd trials: A = B + s D near B, compressed by a partial isometry.
      // Violations for non-monotone phi' are second order and live there.
      const bool local = (t % 2 == 1) && dim >= 2;
      const HermitianOperator b = random_density(dim, lo, hi, rng);
      HermitianOperator a;
      std::optional<Contraction> xs;
      if (local) {
        const HermitianOperator d = random_direction(dim, rng);
        double s = std::pow(10.0, rng.uniform(-3.0, -1.0));
        a = b + s * d;
        while (a.min_eigenvalue() < 0.0 || a.max_eigenvalue() > 1.0) {
          s *= 0.5;
          a = b + s * d;
        }
        const Index rank = rng.uniform_index(1, dim - 1);
        xs.emplace(Matrix(haar_unitary(dim, rng).leftCols(rank).adjoint()));
      } else {
        a = random_density(dim, lo, hi, rng);
        xs.emplace(random_contraction(dim, dim, rng));
      }
      const Contraction& x = *xs;
      const auto d = contraction_defect(a, b, x, phi, options.policy);
      if (!d) {
        ++report.vacuous_trials;
      } else {
        const double h = relative_entropy(a, b, phi, options.policy).value;
        Witness w;
        w.kind = "contraction";
        w.seed = seed;
        w.trial = static_cast<std::uint64_t>(t);
        w.a = a;
        w.b = b;
        w.x = x.matrix();
        consider(*d, 1.0 + std::abs(h), std::move(w), [&] {
          const auto e = contraction_defect(a, b, x, phi, options.policy, EigenPrecision::Extended);
          return e ? *e : 0.0;
        });
      }
    }
    if (options.pinching && dim >= 2) {
      const HermitianOperator a = random_density(dim, 0.05, 0.95, rng);
      const Index rank = rng.uniform_index(1, dim - 1);
      const OrthogonalProjector p = random_projector(dim, rank, rng);
      const double d = pinching_defect(a, p, phi);
      double scale = 1.0;
      for (Index i = 0; i < dim; ++i) {
        const double x = a.eigenvalues()(i);
        scale = std::max(scale, 1.0 + std::abs(x * phi.dphi(x)));
      }
      Witness w;
      w.kind = "pinching";
      w.seed = seed;
      w.trial = static_cast<std::uint64_t>(t);
      w.a = a;
      w.x = p.range_basis();
      consider(d, scale, std::move(w),
               [&] { return pinching_defect(a, p, phi, EigenPrecision::Extended); });
    }
  }
  if (best) {
    report.verdict = Verdict::ViolationFound;
    report.witness = std::move(best->witness);
  }
  return report;
}

double klein_trace_positivity(const std::vector<ScalarFunction>& f,
                              const std::vector<ScalarFunction>& g, const HermitianOperator& a,
                              const HermitianOperator& b, const SpectralInterval& interval) {
  if (f.size() != g.size() || f.empty()) {
    throw InvalidArgument("klein_trace_positivity: f and g must be non-empty and of equal length");
  }
  if (a.dim() != b.dim()) throw DimensionMismatch("klein_trace_positivity: dimension mismatch");
  if (!(interval.lo < interval.hi)) throw InvalidArgument("klein_trace_positivity: empty interval");

  constexpr int kGrid = 101;
  for (int i = 0; i < kGrid; ++i) {
    const double x = interval.lo + (interval.hi - interval.lo) * i / (kGrid - 1);
    for (int j = 0; j < kGrid; ++j) {
      const double y = interval.lo + (interval.hi - interval.lo) * j / (kGrid - 1);
      double s = 0.0;
      for (std::size_t k = 0; k < f.size(); ++k) s += f[k](x) * g[k](y);
      if (!(s >= -1e-12)) {
        std::ostringstream os;
        os << "klein_trace_positivity: sum_k f_k(x) g_k(y) = " << s << " < 0 at (x, y) = (" << x
           << ", " << y << ")";
        throw PreconditionError(os.str());
      }
    }
  }

  const RealVector la = clamped_spectrum(a.eigenvalues(), interval, "klein_trace_positivity (A)");
  const RealVector lb = clamped_spectrum(b.eigenvalues(), interval, "klein_trace_positivity (B)");
  // tr f(A) g(B) = sum_ij f(a_i) g(b_j) |<u_i, v_j>|^2.
  const RealMatrix overlap =
      (a.spectral().eigenvectors.adjoint() * b.spectral().eigenvectors).cwiseAbs2();
  double total = 0.0;
  for (Index i = 0; i < la.size(); ++i) {
    for (Index j = 0; j < lb.size(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < f.size(); ++k) s += f[k](la(i)) * g[k](lb(j));
      total += overlap(i, j) * s;
    }
  }
  return total;
}

}  // namespace relent
