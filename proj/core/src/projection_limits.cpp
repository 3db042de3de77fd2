#include "relent/projection_limits.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "relent/errors.hpp"
#include "relent/matrix_io.hpp"

namespace relent {

namespace {

using nlohmann::json;

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTruncationSpectrumSlack = 1e-9;
constexpr double kMonotoneSlack = 1e-8;

double require_number(const json& v, const std::string& where) {
  if (!v.is_number()) throw InvalidArgument("oracle file: " + where + " must be a number");
  return v.get<double>();
}

std::vector<double> number_list(const json& v, const std::string& where) {
  if (!v.is_array()) throw InvalidArgument("oracle file: " + where + " must be an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(require_number(v[i], where + "[" + std::to_string(i) + "]"));
  }
  return out;
}

bool converged_pair(double previous, double last, double rel_tol) {
  return std::abs(last - previous) <= rel_tol * std::abs(last);
}

// Spectral data of B used by the finite-rank construction.
struct Basis {
  Matrix v;
  RealVector mu;       // eigenvalues, snapped to 0 / 1 within eigen_tol
  std::vector<int> kernel;  // 0: none, 1: divergent kernel, 2: endpoint with finite phi'
};

Basis basis_of(const HermitianOperator& b, const PhiSpec& phi, const KernelPolicy& policy) {
  Basis out;
  const SpectralDecomposition& sd = b.spectral();
  out.v = sd.eigenvectors;
  out.mu = clamped_spectrum(sd.eigenvalues, {}, "finite_rank_approximation (B)");
  out.kernel.assign(static_cast<std::size_t>(out.mu.size()), 0);
  for (Index i = 0; i < out.mu.size(); ++i) {
    double& m = out.mu(i);
    if (m <= policy.eigen_tol) m = 0.0;
    if (m >= 1.0 - policy.eigen_tol) m = 1.0;
    const bool divergent = (m == 0.0 && phi.dphi_divergent_at_0) || (m == 1.0 && phi.dphi_divergent_at_1);
    if (divergent) {
      out.kernel[static_cast<std::size_t>(i)] = 1;
    } else if (m == 0.0 || m == 1.0) {
      out.kernel[static_cast<std::size_t>(i)] = 2;
    }
  }
  return out;
}

// sum_i w_i sum_j |D_ij|^2 with w = 1 + |phi'(mu)|; rows on a divergent
// kernel count only if they do not vanish.
double weighted_gap(const Matrix& d, const Basis& basis, const PhiSpec& phi,
                    const KernelPolicy& policy) {
  const double limit = policy.match_tol * static_cast<double>(d.rows());
  double gap = 0.0;
  for (Index i = 0; i < d.rows(); ++i) {
    const double row = d.row(i).squaredNorm();
    if (basis.kernel[static_cast<std::size_t>(i)] == 1) {
      if (std::sqrt(row) > limit) return kInf;
      continue;
    }
    gap += (1.0 + std::abs(phi.derivative(basis.mu(i)))) * row;
  }
  return gap;
}

double entropy_in_basis(const Matrix& at, const Basis& basis, const PhiSpec& phi,
                        const KernelPolicy& policy) {
  const EntropyValue h = relative_entropy(HermitianOperator::symmetrized(at),
                                          HermitianOperator::diagonal(basis.mu), phi, policy);
  return h.as_double();
}

Matrix restrict_rows(const Matrix& m, const std::vector<Index>& idx) {
  const Index r = static_cast<Index>(idx.size());
  Matrix out(r, r);
  for (Index i = 0; i < r; ++i) {
    for (Index j = 0; j < r; ++j) out(i, j) = m(idx[i], idx[j]);
  }
  return out;
}

void scatter(Matrix& m, const std::vector<Index>& idx, const Matrix& block) {
  for (std::size_t i = 0; i < idx.size(); ++i) {
    for (std::size_t j = 0; j < idx.size(); ++j) m(idx[i], idx[j]) = block(i, j);
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// TruncatableOperator

TruncatableOperator::TruncatableOperator(Oracle oracle, std::string kind, std::string decay_hint)
    : oracle_(std::move(oracle)), kind_(std::move(kind)), decay_hint_(std::move(decay_hint)) {
  if (!oracle_) throw InvalidArgument("TruncatableOperator: empty oracle");
}

TruncatableOperator TruncatableOperator::diagonal(std::vector<double> entries, double fill) {
  auto shared = std::make_shared<std::vector<double>>(std::move(entries));
  return TruncatableOperator(
      [shared, fill](Index i, Index j) -> Complex {
        if (i != j) return 0.0;
        return static_cast<std::size_t>(i) < shared->size() ? (*shared)[static_cast<std::size_t>(i)]
                                                           : fill;
      },
      "diagonal", "diagonal; constant beyond the listed entries");
}

TruncatableOperator TruncatableOperator::diagonal(std::function<double(Index)> f,
                                                  std::string decay_hint) {
  return TruncatableOperator(
      [f = std::move(f)](Index i, Index j) -> Complex { return i == j ? f(i) : 0.0; }, "diagonal",
      std::move(decay_hint));
}

TruncatableOperator TruncatableOperator::banded(std::vector<double> bands) {
  if (bands.empty()) throw InvalidArgument("TruncatableOperator::banded: no bands");
  const std::string hint = "banded Toeplitz, bandwidth " + std::to_string(bands.size() - 1);
  auto shared = std::make_shared<std::vector<double>>(std::move(bands));
  return TruncatableOperator(
      [shared](Index i, Index j) -> Complex {
        const auto d = static_cast<std::size_t>(i > j ? i - j : j - i);
        return d < shared->size() ? (*shared)[d] : 0.0;
      },
      "banded", hint);
}

TruncatableOperator TruncatableOperator::embedded(const HermitianOperator& a) {
  auto shared = std::make_shared<Matrix>(a.matrix());
  const Index n = a.dim();
  return TruncatableOperator(
      [shared, n](Index i, Index j) -> Complex {
        return (i < n && j < n) ? (*shared)(i, j) : Complex(0.0);
      },
      "embedded", "finite rank; zero beyond dimension " + std::to_string(n));
}

TruncatableOperator TruncatableOperator::rotated(const Matrix& u) const {
  if (u.rows() != u.cols()) throw DimensionMismatch("TruncatableOperator::rotated: u is not square");
  const Index m = u.rows();
  if ((u.adjoint() * u - Matrix::Identity(m, m)).cwiseAbs().maxCoeff() > 1e-10) {
    throw InvalidArgument("TruncatableOperator::rotated: u is not unitary");
  }
  auto shared = std::make_shared<Matrix>(u);
  Oracle base = oracle_;
  return TruncatableOperator(
      [shared, base, m](Index i, Index j) -> Complex {
        const Matrix& w = *shared;
        if (i >= m && j >= m) return base(i, j);
        Complex s = 0.0;
        if (i < m && j < m) {
          for (Index p = 0; p < m; ++p) {
            for (Index q = 0; q < m; ++q) s += w(i, p) * base(p, q) * std::conj(w(j, q));
          }
        } else if (i < m) {
          for (Index p = 0; p < m; ++p) s += w(i, p) * base(p, j);
        } else {
          for (Index q = 0; q < m; ++q) s += base(i, q) * std::conj(w(j, q));
        }
        return s;
      },
      kind_ + "+rotated", decay_hint_);
}

HermitianOperator TruncatableOperator::materialize(Index k) const {
  if (k < 1 || k > kMaxTruncation) {
    std::ostringstream os;
    os << "materialize: truncation size " << k << " outside [1, " << kMaxTruncation << "]";
    throw InvalidArgument(os.str());
  }
  Matrix m(k, k);
  for (Index i = 0; i < k; ++i) {
    for (Index j = 0; j < k; ++j) m(i, j) = oracle_(i, j);
  }
  if (!m.allFinite()) throw InvalidArgument("materialize: oracle returned a non-finite entry");
  HermitianOperator out(m);
  const double lo = out.min_eigenvalue(), hi = out.max_eigenvalue();
  if (lo < -kTruncationSpectrumSlack || hi > 1.0 + kTruncationSpectrumSlack) {
    std::ostringstream os;
    os << "materialize: truncation " << k << " of " << kind_ << " oracle has spectrum [" << lo
       << ", " << hi << "], outside [0, 1]";
    throw SpectrumOutOfRange(os.str());
  }
  return out;
}

TruncatableOperator parse_oracle_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InvalidArgument(std::string("oracle file: invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw InvalidArgument("oracle file: top level must be an object");
  if (doc.contains("dim")) return TruncatableOperator::embedded(parse_matrix_json(text));
  for (const auto& item : doc.items()) {
    if (item.key() != "kind" && item.key() != "entries" && item.key() != "bandwidth" &&
        item.key() != "fill") {
      throw InvalidArgument("oracle file: unknown field \"" + item.key() + "\"");
    }
  }
  if (!doc.contains("kind") || !doc["kind"].is_string()) {
    throw InvalidArgument("oracle file: missing string field \"kind\"");
  }
  if (!doc.contains("entries")) throw InvalidArgument("oracle file: missing field \"entries\"");
  const std::string kind = doc["kind"].get<std::string>();
  const json& entries = doc["entries"];
  if (kind != "diagonal" && doc.contains("fill")) {
    throw InvalidArgument("oracle file: \"fill\" applies only to kind \"diagonal\"");
  }
  if (kind != "banded" && doc.contains("bandwidth")) {
    throw InvalidArgument("oracle file: \"bandwidth\" applies only to kind \"banded\"");
  }
  if (kind == "diagonal") {
    const double fill = doc.contains("fill") ? require_number(doc["fill"], "fill") : 0.0;
    return TruncatableOperator::diagonal(number_list(entries, "entries"), fill);
  }
  if (kind == "banded") {
    std::vector<double> bands = number_list(entries, "entries");
    if (doc.contains("bandwidth")) {
      const json& bw = doc["bandwidth"];
      if (!bw.is_number_integer() || bw.get<long long>() < 0) {
        throw InvalidArgument("oracle file: \"bandwidth\" must be a non-negative integer");
      }
      const auto b = static_cast<std::size_t>(bw.get<long long>());
      if (b + 1 > bands.size()) {
        throw InvalidArgument("oracle file: \"bandwidth\" exceeds the number of listed bands - 1");
      }
      bands.resize(b + 1);
    }
    return TruncatableOperator::banded(std::move(bands));
  }
  if (kind == "embedded") {
    if (!entries.is_array() || entries.empty()) {
      throw InvalidArgument("oracle file: embedded \"entries\" must be a non-empty square array");
    }
    const Index n = static_cast<Index>(entries.size());
    RealMatrix m(n, n);
    for (Index i = 0; i < n; ++i) {
      const std::vector<double> row =
          number_list(entries[static_cast<std::size_t>(i)], "entries[" + std::to_string(i) + "]");
      if (static_cast<Index>(row.size()) != n) {
        throw InvalidArgument("oracle file: embedded \"entries\" must be square");
      }
      for (Index j = 0; j < n; ++j) m(i, j) = row[static_cast<std::size_t>(j)];
    }
    return TruncatableOperator::embedded(HermitianOperator(m));
  }
  throw InvalidArgument("oracle file: unknown kind \"" + kind +
                        "\" (expected diagonal, banded or embedded)");
}

TruncatableOperator read_oracle_file(const std::string& path) {
  try {
    return parse_oracle_json(read_text_file(path));
  } catch (const InvalidArgument& e) {
    throw InvalidArgument(path + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Schedules and limits

void ProjectionSchedule::validate() const {
  if (dims.empty()) throw InvalidArgument("schedule: empty");
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (dims[i] < 1) throw InvalidArgument("schedule: sizes must be positive");
    if (i > 0 && dims[i] <= dims[i - 1]) throw InvalidArgument("schedule: sizes must strictly increase");
  }
  if (dims.back() > kMaxTruncation) {
    throw InvalidArgument("schedule: last size exceeds " + std::to_string(kMaxTruncation));
  }
}

ProjectionSchedule ProjectionSchedule::parse(const std::string& text) {
  ProjectionSchedule s;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const long long v = std::stoll(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      s.dims.push_back(static_cast<Index>(v));
    } catch (const std::exception&) {
      throw InvalidArgument("schedule: cannot parse \"" + item + "\"");
    }
  }
  s.validate();
  return s;
}

ProjectionSchedule ProjectionSchedule::geometric(Index start, Index factor, Index last) {
  if (start < 1 || factor < 2) throw InvalidArgument("schedule: need start >= 1 and factor >= 2");
  ProjectionSchedule s;
  for (Index k = start; k <= last; k *= factor) s.dims.push_back(k);
  s.validate();
  return s;
}

EntropyValue truncated_entropy(const TruncatableOperator& a, const TruncatableOperator& b,
                               const PhiSpec& phi, Index k, const KernelPolicy& policy) {
  return relative_entropy(a.materialize(k), b.materialize(k), phi, policy);
}

std::string to_string(LimitVerdict v) {
  switch (v) {
    case LimitVerdict::Converged: return "converged";
    case LimitVerdict::Increasing: return "increasing";
    case LimitVerdict::InfiniteDetected: return "infinite_detected";
  }
  return "unknown";
}

LimitResult entropy_limit(const TruncatableOperator& a, const TruncatableOperator& b,
                          const PhiSpec& phi, const ProjectionSchedule& schedule, double rel_tol,
                          const KernelPolicy& policy) {
  schedule.validate();
  if (!(rel_tol > 0.0)) throw InvalidArgument("entropy_limit: rel_tol must be positive");
  LimitResult r;
  r.dims = schedule.dims;
  for (Index k : schedule.dims) {
    const EntropyValue v = truncated_entropy(a, b, phi, k, policy);
    r.values.push_back(v);
    if (!v.is_finite()) {
      r.verdict = LimitVerdict::InfiniteDetected;
      return r;
    }
    if (r.values.size() > 1) {
      const double previous = r.values[r.values.size() - 2].value;
      if (v.value < previous - kMonotoneSlack) {
        std::ostringstream os;
        os << "entropy_limit: truncated entropy decreased from " << previous << " to " << v.value
           << " at size " << k << " (phi' may not be operator monotone)";
        throw InternalConsistencyError(os.str());
      }
    }
    r.limit = v.value;
  }
  const std::size_t n = r.values.size();
  if (n >= 2 && converged_pair(r.values[n - 2].value, r.values[n - 1].value, rel_tol)) {
    r.verdict = LimitVerdict::Converged;
    std::size_t first = n - 1;
    while (first > 0 && std::abs(r.values[first - 1].value - r.limit) <= rel_tol * std::abs(r.limit)) {
      --first;
    }
    r.at_dim = r.dims[first];
  } else {
    r.verdict = LimitVerdict::Increasing;
  }
  return r;
}

double schedule_independence_check(const TruncatableOperator& a, const TruncatableOperator& b,
                                   const PhiSpec& phi, const ProjectionSchedule& schedule1,
                                   const ProjectionSchedule& schedule2,
                                   const std::optional<Matrix>& rotation, double rel_tol,
                                   const KernelPolicy& policy) {
  const LimitResult l1 = entropy_limit(a, b, phi, schedule1, rel_tol, policy);
  const LimitResult l2 = rotation ? entropy_limit(a.rotated(*rotation), b.rotated(*rotation), phi,
                                                  schedule2, rel_tol, policy)
                                  : entropy_limit(a, b, phi, schedule2, rel_tol, policy);
  if (l1.verdict != LimitVerdict::Converged || l2.verdict != LimitVerdict::Converged) {
    throw ConvergenceError("schedule_independence_check: limit along schedule " +
                           std::string(l1.verdict != LimitVerdict::Converged ? "1" : "2") +
                           " did not converge");
  }
  return std::abs(l1.limit - l2.limit) / (1.0 + std::abs(l1.limit));
}

ContractionFamily scaled_projection_family() {
  return [](std::int64_t k, Index n) {
    return Contraction(Matrix::Identity(n, n) * Complex(1.0 - 1.0 / static_cast<double>(k)));
  };
}

ApproximationResult approximation_check(const TruncatableOperator& a,
                                        const TruncatableOperator& b, const PhiSpec& phi,
                                        const ContractionFamily& family,
                                        const ProjectionSchedule& schedule, double rel_tol,
                                        const KernelPolicy& policy, int max_doublings) {
  const LimitResult ref = entropy_limit(a, b, phi, schedule, rel_tol, policy);
  if (ref.verdict != LimitVerdict::Converged) {
    throw ConvergenceError("approximation_check: reference limit did not converge");
  }
  std::vector<HermitianOperator> an, bn;
  for (Index n : schedule.dims) {
    an.push_back(a.materialize(n));
    bn.push_back(b.materialize(n));
  }

  ApproximationResult out;
  out.reference = ref.limit;
  for (int d = 1; d <= max_doublings; ++d) {
    const std::int64_t k = std::int64_t{1} << d;
    double previous = 0.0, last = 0.0;
    for (std::size_t i = 0; i < an.size(); ++i) {
      const Contraction x = family(k, schedule.dims[i]);
      const EntropyValue v = relative_entropy(conjugate(an[i], x), conjugate(bn[i], x), phi, policy);
      if (!v.is_finite()) {
        throw ConvergenceError("approximation_check: infinite entropy along the family at k = " +
                               std::to_string(k));
      }
      previous = last;
      last = v.value;
    }
    if (an.size() >= 2 && !converged_pair(previous, last, rel_tol) &&
        std::abs(last - previous) > rel_tol) {
      throw ConvergenceError("approximation_check: inner limit did not converge at k = " +
                             std::to_string(k));
    }
    out.ks.push_back(k);
    out.values.push_back(last);
    const std::size_t m = out.values.size();
    if (m >= 2 &&
        std::abs(out.values[m - 1] - out.values[m - 2]) <= 0.1 * rel_tol * (1.0 + std::abs(last))) {
      out.family_limit = last;
      out.gap = std::abs(last - out.reference) / (1.0 + std::abs(out.reference));
      return out;
    }
  }
  throw ConvergenceError("approximation_check: family values did not settle by k = 2^" +
                         std::to_string(max_doublings));
}

WlscResult wlsc_check(const std::vector<HermitianOperator>& a_seq,
                      const std::vector<HermitianOperator>& b_seq, const HermitianOperator& a_lim,
                      const HermitianOperator& b_lim, const PhiSpec& phi,
                      const KernelPolicy& policy, std::size_t window) {
  if (a_seq.size() != b_seq.size() || a_seq.empty()) {
    throw InvalidArgument("wlsc_check: sequences must be non-empty and of equal length");
  }
  WlscResult r;
  for (std::size_t i = 0; i < a_seq.size(); ++i) {
    r.values.push_back(relative_entropy(a_seq[i], b_seq[i], phi, policy));
  }
  r.limit_value = relative_entropy(a_lim, b_lim, phi, policy);
  r.limit_infinite = !r.limit_value.is_finite();
  const std::size_t w = window == 0 ? std::max<std::size_t>(1, r.values.size() / 2)
                                    : std::min(window, r.values.size());
  r.trailing_min = kInf;
  for (std::size_t i = r.values.size() - w; i < r.values.size(); ++i) {
    r.trailing_min = std::min(r.trailing_min, r.values[i].as_double());
  }
  r.defect = r.limit_infinite ? r.trailing_min : r.trailing_min - r.limit_value.value;
  return r;
}

// ---------------------------------------------------------------------------
// Finite-rank approximation

FiniteRankResult finite_rank_approximation(const HermitianOperator& a,
                                           const HermitianOperator& b, const PhiSpec& phi,
                                           double eps, const KernelPolicy& policy) {
  if (a.dim() != b.dim()) throw DimensionMismatch("finite_rank_approximation: dimension mismatch");
  if (!(eps > 0.0)) throw InvalidArgument("finite_rank_approximation: eps must be positive");
  policy.validate();
  const EntropyValue h_ab = relative_entropy(a, b, phi, policy);
  if (!h_ab.is_finite()) {
    throw PreconditionError("finite_rank_approximation: H(A, B) is infinite (" +
                            to_string(h_ab.reason) + ")");
  }
  const Index n = a.dim();
  const Basis basis = basis_of(b, phi, policy);
  const Matrix at = basis.v.adjoint() * a.matrix() * basis.v;
  const Matrix bt = basis.mu.cast<Complex>().asDiagonal();
  const double h_ref = entropy_in_basis(at, basis, phi, policy);
  const double entropy_budget = eps / 3.0;
  const double gap_budget = eps / 9.0;

  FiniteRankResult res;

  // (i) Pi_eta: eigenvectors of B with eta <= mu <= 1 - eta, plus endpoint
  // eigenvectors where phi' stays finite.
  std::vector<double> candidates{0.0};
  for (Index i = 0; i < n; ++i) {
    if (basis.kernel[static_cast<std::size_t>(i)] == 0) {
      candidates.push_back(std::min(basis.mu(i), 1.0 - basis.mu(i)));
    }
  }
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  auto indices_for = [&](double eta) {
    std::vector<Index> idx;
    for (Index i = 0; i < n; ++i) {
      const int k = basis.kernel[static_cast<std::size_t>(i)];
      if (k == 2 || (k == 0 && std::min(basis.mu(i), 1.0 - basis.mu(i)) >= eta)) idx.push_back(i);
    }
    return idx;
  };
  auto cut = [&](const std::vector<Index>& idx) {
    Matrix m = bt;
    scatter(m, idx, restrict_rows(at, idx));
    return m;
  };
  struct Stage {
    Matrix m;
    double dh = 0.0;
    double gap = 0.0;
  };
  auto evaluate = [&](const Matrix& m, const Matrix& previous, double h_previous) {
    Stage s{m, 0.0, 0.0};
    s.dh = std::abs(entropy_in_basis(m, basis, phi, policy) - h_previous);
    s.gap = weighted_gap(previous - m, basis, phi, policy);
    return s;
  };
  auto within = [&](const Stage& s) { return s.dh <= entropy_budget && s.gap <= gap_budget; };

  // Largest admissible eta by bisection over the sorted candidates; eta = 0
  // keeps every admissible direction and is always within budget.
  std::size_t lo = 0, hi = candidates.size();
  Stage stage1 = evaluate(cut(indices_for(0.0)), at, h_ref);
  while (hi - lo > 1) {
    const std::size_t mid = (lo + hi) / 2;
    const Stage s = evaluate(cut(indices_for(candidates[mid])), at, h_ref);
    if (within(s)) {
      lo = mid;
      stage1 = s;
    } else {
      hi = mid;
    }
  }
  if (!within(stage1)) {
    throw ConvergenceError("finite_rank_approximation: spectral cut exceeds its budget at eta = 0");
  }
  res.eta = candidates[lo];
  const std::vector<Index> idx = indices_for(res.eta);
  const double h1 = entropy_in_basis(stage1.m, basis, phi, policy);

  // (ii) clamp the compressed A into [eps', 1 - eps'] on range(Pi_eta).
  Stage stage2{stage1.m, 0.0, 0.0};
  if (!idx.empty()) {
    const SpectralDecomposition sd =
        eig_hermitian(HermitianOperator::symmetrized(restrict_rows(stage1.m, idx)));
    double eps_prime = 0.25;
    bool done = false;
    for (int halvings = 0; halvings < 1100 && !done; ++halvings, eps_prime *= 0.5) {
      const RealVector clamped = sd.eigenvalues.cwiseMax(eps_prime).cwiseMin(1.0 - eps_prime);
      Matrix m = stage1.m;
      scatter(m, idx,
              sd.eigenvectors * clamped.cast<Complex>().asDiagonal() * sd.eigenvectors.adjoint());
      if (clamped == sd.eigenvalues) m = stage1.m;
      const Stage s = evaluate(m, stage1.m, h1);
      if (within(s)) {
        stage2 = s;
        res.eps_prime = eps_prime;
        done = true;
      }
      if (eps_prime == 0.0) break;
    }
    if (!done) {
      throw ConvergenceError("finite_rank_approximation: no endpoint shift within budget");
    }
  }
  const double h2 = entropy_in_basis(stage2.m, basis, phi, policy);

  // (iii) smallest-rank eigen truncation of the perturbation on range(Pi_eta).
  Stage stage3{stage2.m, 0.0, 0.0};
  Index rank = 0;
  if (!idx.empty()) {
    const Matrix r = restrict_rows(stage2.m - bt, idx);
    const SpectralDecomposition sd = eig_hermitian(HermitianOperator::symmetrized(r));
    std::vector<Index> order(static_cast<std::size_t>(sd.dim()));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index x, Index y) {
      return std::abs(sd.eigenvalues(x)) > std::abs(sd.eigenvalues(y));
    });
    const Matrix b_block = restrict_rows(bt, idx);
    bool done = false;
    for (Index k = 0; k <= sd.dim() && !done; ++k) {
      if (k > 0 && sd.eigenvalues(order[static_cast<std::size_t>(k - 1)]) == 0.0) continue;
      Matrix q = Matrix::Zero(sd.dim(), sd.dim());
      for (Index t = 0; t < k; ++t) {
        const Index c = order[static_cast<std::size_t>(t)];
        q += sd.eigenvalues(c) * sd.eigenvectors.col(c) * sd.eigenvectors.col(c).adjoint();
      }
      const Matrix block = b_block + q;
      const RealVector spec = eig_hermitian(HermitianOperator::symmetrized(block)).eigenvalues;
      if (spec.size() > 0 && (spec(0) < -1e-12 || spec(spec.size() - 1) > 1.0 + 1e-12)) continue;
      Matrix m = bt;
      scatter(m, idx, block);
      const Stage s = evaluate(m, stage2.m, h2);
      if (within(s)) {
        stage3 = s;
        rank = k;
        done = true;
      }
    }
    if (!done) throw ConvergenceError("finite_rank_approximation: no truncation rank within budget");
  }

  res.a_prime = HermitianOperator::symmetrized(basis.v * stage3.m * basis.v.adjoint());
  res.perturbation_rank = rank;
  res.stage_entropy[0] = stage1.dh;
  res.stage_entropy[1] = stage2.dh;
  res.stage_entropy[2] = stage3.dh;
  res.stage_gap[0] = stage1.gap;
  res.stage_gap[1] = stage2.gap;
  res.stage_gap[2] = stage3.gap;

  const EntropyValue h_new = relative_entropy(res.a_prime, b, phi, policy);
  res.entropy_change = std::abs(h_ab.value - h_new.as_double());
  const Matrix diff = a.matrix() - res.a_prime.matrix();
  res.gap = weighted_gap(basis.v.adjoint() * diff * basis.v, basis, phi, policy);
  const RealVector dspec = eig_hermitian(HermitianOperator::symmetrized(diff)).eigenvalues;
  const double tol = 1e-12 * std::max(1.0, a.frobenius_norm());
  res.difference_rank = (dspec.array().abs() > tol).count();
  return res;
}

}  // namespace relent
