#include "relent/lowner.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>

#include <boost/math/special_functions/legendre.hpp>

#include "relent/errors.hpp"

namespace relent {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct GaussLegendre {
  std::vector<double> nodes;    // on [0, 1]
  std::vector<double> weights;  // sum to 1
};

const GaussLegendre& gauss_legendre(int n) {
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<GaussLegendre>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = cache[n];
  if (!slot) {
    // Nonnegative zeros of P_n; w = 2 / ((1 - x^2) P_n'(x)^2) on [-1, 1].
    const std::vector<double> zeros = boost::math::legendre_p_zeros<double>(n);
    auto rule = std::make_unique<GaussLegendre>();
    for (double x : zeros) {
      const double dp = boost::math::legendre_p_prime<double>(n, x);
      const double w = 1.0 / ((1.0 - x * x) * dp * dp);  // halved for [0, 1]
      rule->nodes.push_back(0.5 * (1.0 - x));
      rule->weights.push_back(w);
      if (x != 0.0) {
        rule->nodes.push_back(0.5 * (1.0 + x));
        rule->weights.push_back(w);
      }
    }
    slot = std::move(rule);
  }
  return *slot;
}

void append_finite(std::vector<MeasureAtom>& out, double lo, double hi, double density,
                   const GaussLegendre& rule) {
  const double len = hi - lo;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    out.push_back({lo + len * rule.nodes[i], density * len * rule.weights[i]});
  }
}

// [lo, hi] with geometric refinement toward `focus` above lo, where the
// integrands have a logarithmic singularity at lo - focus.
void append_graded(std::vector<MeasureAtom>& out, double lo, double hi, double density,
                   double focus, const GaussLegendre& rule) {
  double left = lo;
  if (focus > 0.0) {
    double edge = lo + focus;
    while (edge < hi) {
      append_finite(out, left, edge, density, rule);
      left = edge;
      edge = lo + 4.0 * (edge - lo);
    }
  }
  if (hi > left) append_finite(out, left, hi, density, rule);
}

void append_tail(std::vector<MeasureAtom>& out, double start, double density,
                 const GaussLegendre& rule) {
  // t = start + u / (1 - u), dt = du / (1 - u)^2.
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double u = rule.nodes[i];
    const double jac = 1.0 / ((1.0 - u) * (1.0 - u));
    out.push_back({start + u / (1.0 - u), density * rule.weights[i] * jac});
  }
}

// log(t + x) - log(t + 1/2) - (2x - 1)/(2t + 1), written as log1p(u) - u.
double kernel_nu1(double x, double t) {
  const double u = (x - 0.5) / (t + 0.5);
  return std::log1p(u) - u;
}

// log(t + 1 - x) - log(t + 1/2) + (2x - 1)/(2t + 1).
double kernel_nu2(double x, double t) {
  const double v = (0.5 - x) / (t + 0.5);
  return std::log1p(v) - v;
}

double kernel_nu1_dx(double x, double t) { return (1.0 - 2.0 * x) / ((t + x) * (2.0 * t + 1.0)); }
double kernel_nu2_dx(double x, double t) {
  return (1.0 - 2.0 * x) / ((t + 1.0 - x) * (2.0 * t + 1.0));
}

template <typename K1, typename K2>
double evaluate(const LownerRepresentation& rep, double x, int n, double split, double linear,
                K1 k1, K2 k2) {
  double total = linear;
  for (const auto& a : discretize(rep.nu1, n, split, x)) total -= a.weight * k1(x, a.node);
  for (const auto& a : discretize(rep.nu2, n, split, 1.0 - x)) total -= a.weight * k2(x, a.node);
  return total;
}

template <typename K1, typename K2>
QuadratureResult reconstruct_with(const LownerRepresentation& rep, double x,
                                  const QuadratureConfig& config, double linear, K1 k1, K2 k2,
                                  const char* what) {
  if (!(x > 0.0 && x < 1.0)) throw DomainError(std::string(what) + ": x must lie in (0, 1)", x);
  if (config.node_count < 2) throw InvalidArgument(std::string(what) + ": node_count must be >= 2");
  const double coarse = evaluate(rep, x, config.node_count, config.tail_split, linear, k1, k2);
  const double fine = evaluate(rep, x, 2 * config.node_count, config.tail_split, linear, k1, k2);
  QuadratureResult r{fine, std::abs(fine - coarse)};
  if (r.error_estimate > config.tolerance) {
    std::ostringstream os;
    os << what << ": quadrature error estimate " << r.error_estimate << " at x = " << x
       << " exceeds tolerance " << config.tolerance;
    throw ConvergenceError(os.str());
  }
  return r;
}

void check_measure(const Measure& m, const char* label) {
  for (const auto& a : m.atoms) {
    if (!(a.node >= 0.0) || !std::isfinite(a.node)) {
      throw InvalidArgument(std::string(label) + ": atom node must be finite and >= 0");
    }
    if (!(a.weight >= 0.0) || !std::isfinite(a.weight)) {
      throw InvalidArgument(std::string(label) + ": atom weight must be finite and >= 0");
    }
    if (a.node == 0.0 && a.weight > 0.0) {
      throw InvalidArgument(std::string(label) + ": atom at t = 0 violates the finite-log condition");
    }
  }
  for (const auto& d : m.densities) {
    if (!(d.lo >= 0.0) || !(d.hi > d.lo) || !(d.density >= 0.0)) {
      throw InvalidArgument(std::string(label) + ": density segment must satisfy 0 <= lo < hi, density >= 0");
    }
    // Constant densities: int dt / (2t + 1)^2 and -int_0^1 log t dt are both
    // finite, so no further condition.
  }
}

}  // namespace

LownerRepresentation builtin_lowner(const std::string& name) {
  LownerRepresentation rep;
  if (name == "vn") {
    rep.a_prime = 1.0 - std::log(2.0);
    rep.c_prime = -0.5;
    rep.nu1.densities.push_back({0.0, kInf, 1.0});
  } else if (name == "car") {
    rep.a_prime = 0.0;
    rep.c_prime = -std::log(2.0);
    rep.nu1.densities.push_back({0.0, kInf, 1.0});
    rep.nu2.densities.push_back({0.0, kInf, 1.0});
  } else if (name == "ccr") {
    rep.a_prime = -std::log(3.0);
    rep.c_prime = std::log(2.0) - std::log(3.0);
    rep.nu1.densities.push_back({0.0, 1.0, 1.0});
  } else {
    throw InvalidArgument("builtin_lowner: no tabulated representation for \"" + name +
                          "\" (expected vn, car or ccr)");
  }
  return rep;
}

void validate_lowner(const LownerRepresentation& rep) {
  check_measure(rep.nu1, "nu1");
  check_measure(rep.nu2, "nu2");
}

void validate_raw_lowner(const RawLownerRepresentation& raw) {
  if (!(raw.b >= 0.0)) throw InvalidArgument("raw Loewner representation: b must be >= 0");
  double mass = 0.0;
  for (const auto& a : raw.nu) {
    if (!(a.weight >= 0.0)) throw InvalidArgument("raw Loewner representation: negative weight");
    if (!(a.node > -1.0 && a.node < 1.0)) {
      throw InvalidArgument("raw Loewner representation: nodes must lie in (-1, 1)");
    }
    if (a.node == 0.0) {
      throw InvalidArgument("raw Loewner representation: atom at lambda = 0 is not supported");
    }
    mass += a.weight;
  }
  if (!raw.nu.empty() && std::abs(mass - 1.0) > 1e-12) {
    throw InvalidArgument("raw Loewner representation: nu must be a probability measure");
  }
}

std::vector<MeasureAtom> discretize(const Measure& m, int node_count, double tail_split,
                                    double focus) {
  std::vector<MeasureAtom> out(m.atoms.begin(), m.atoms.end());
  if (m.densities.empty()) return out;
  const GaussLegendre& rule = gauss_legendre(node_count);
  for (const auto& seg : m.densities) {
    const double graded_focus = seg.lo == 0.0 ? focus : 0.0;
    if (std::isfinite(seg.hi)) {
      append_graded(out, seg.lo, seg.hi, seg.density, graded_focus, rule);
      continue;
    }
    const double split = std::max(seg.lo, tail_split);
    if (split > seg.lo) append_graded(out, seg.lo, split, seg.density, graded_focus, rule);
    append_tail(out, split, seg.density, rule);
  }
  return out;
}

QuadratureResult lowner_reconstruct(const LownerRepresentation& rep, double x,
                                    const QuadratureConfig& config) {
  return reconstruct_with(rep, x, config, rep.a_prime * x + rep.c_prime, kernel_nu1, kernel_nu2,
                          "lowner_reconstruct");
}

QuadratureResult lowner_reconstruct_derivative(const LownerRepresentation& rep, double x,
                                               const QuadratureConfig& config) {
  return reconstruct_with(rep, x, config, rep.a_prime, kernel_nu1_dx, kernel_nu2_dx,
                          "lowner_reconstruct_derivative");
}

double raw_lowner_derivative(const RawLownerRepresentation& raw, double x) {
  const double s = 2.0 * x - 1.0;
  double integral = 0.0;
  for (const auto& a : raw.nu) integral += a.weight * s / (1.0 - a.node * s);
  return raw.a + raw.b * integral;
}

double raw_lowner_value(const RawLownerRepresentation& raw, double x, double c) {
  const double s = 2.0 * x - 1.0;
  double integral = 0.0;
  for (const auto& a : raw.nu) {
    const double l = a.node;
    integral += a.weight * (s / l + std::log1p(-l * s) / (l * l));
  }
  return raw.a * x + c - 0.5 * raw.b * integral;
}

LownerRepresentation raw_to_shifted(const RawLownerRepresentation& raw, double c) {
  validate_raw_lowner(raw);
  LownerRepresentation rep;
  rep.a_prime = raw.a;
  rep.c_prime = c;
  for (const auto& a : raw.nu) {
    if (a.weight == 0.0) continue;
    const double l = a.node;
    if (l < 0.0) {
      const double t = -(1.0 + l) / (2.0 * l);
      rep.nu1.atoms.push_back({t, raw.b * a.weight * (2.0 * t + 1.0) * (2.0 * t + 1.0) / 2.0});
    } else {
      const double t = (1.0 - l) / (2.0 * l);
      rep.nu2.atoms.push_back({t, raw.b * a.weight * (2.0 * t + 1.0) * (2.0 * t + 1.0) / 2.0});
    }
  }
  if (raw.b == 0.0) {
    rep.nu1.atoms.clear();
    rep.nu2.atoms.clear();
  }
  return rep;
}

}  // namespace relent
