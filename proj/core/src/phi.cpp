#include "relent/phi.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "relent/errors.hpp"

namespace relent {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double xlogx(double x) { return x == 0.0 ? 0.0 : x * std::log(x); }

std::string param_name(const std::string& base, const std::vector<double>& params) {
  if (params.empty()) return base;
  std::string out = base + ":";
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (i) out += ",";
    std::ostringstream os;
    os << params[i];
    out += os.str();
  }
  return out;
}

double single_param(const std::string& name, const std::vector<double>& params, double fallback) {
  if (params.size() > 1) throw InvalidArgument("phi " + name + ": expects at most one parameter");
  return params.empty() ? fallback : params[0];
}

PhiSpec make_vn() {
  PhiSpec s;
  s.name = "vn";
  s.formula = "x log x";
  s.phi = [](double x) { return xlogx(x); };
  s.dphi = [](double x) { return 1.0 + std::log(x); };
  s.ddphi = [](double x) { return 1.0 / x; };
  s.dphi_divergent_at_0 = true;
  s.dphi_at_1 = 1.0;
  s.dphi_operator_monotone = true;
  return s;
}

PhiSpec make_car() {
  PhiSpec s;
  s.name = "car";
  s.formula = "x log x + (1 - x) log(1 - x)";
  s.phi = [](double x) { return xlogx(x) + xlogx(1.0 - x); };
  s.dphi = [](double x) { return std::log(x) - std::log1p(-x); };
  s.ddphi = [](double x) { return 1.0 / x + 1.0 / (1.0 - x); };
  s.dphi_divergent_at_0 = true;
  s.dphi_divergent_at_1 = true;
  s.dphi_operator_monotone = true;
  return s;
}

PhiSpec make_ccr() {
  PhiSpec s;
  s.name = "ccr";
  s.formula = "x log x - (1 + x) log(1 + x)";
  s.phi = [](double x) { return xlogx(x) - (1.0 + x) * std::log1p(x); };
  s.dphi = [](double x) { return std::log(x) - std::log1p(x); };
  s.ddphi = [](double x) { return 1.0 / (x * (1.0 + x)); };
  s.dphi_divergent_at_0 = true;
  s.phi_at_1 = -2.0 * std::log(2.0);
  s.dphi_at_1 = -std::log(2.0);
  s.dphi_operator_monotone = true;
  return s;
}

PhiSpec make_power_neg(double m) {
  if (!(m > 0.0 && m <= 1.0)) throw InvalidArgument("phi power_neg: requires 0 < m <= 1");
  PhiSpec s;
  s.name = param_name("power_neg", {m});
  s.formula = "-x^m";
  s.params = {m};
  s.phi = [m](double x) { return -std::pow(x, m); };
  s.dphi = [m](double x) { return -m * std::pow(x, m - 1.0); };
  s.ddphi = [m](double x) { return m * (1.0 - m) * std::pow(x, m - 2.0); };
  s.phi_at_1 = -1.0;
  s.dphi_divergent_at_0 = m < 1.0;
  s.dphi_at_0 = m < 1.0 ? 0.0 : -1.0;
  s.dphi_at_1 = -m;
  s.strictly_convex = m < 1.0;
  if (m == 1.0) s.ddphi_sup = 0.0;
  s.dphi_operator_monotone = true;
  return s;
}

PhiSpec make_power_pos(double m) {
  if (!(m >= 1.0 && m <= 2.0)) throw InvalidArgument("phi power_pos: requires 1 <= m <= 2");
  PhiSpec s;
  s.name = param_name("power_pos", {m});
  s.formula = "x^m";
  s.params = {m};
  s.phi = [m](double x) { return std::pow(x, m); };
  s.dphi = [m](double x) { return m * std::pow(x, m - 1.0); };
  s.ddphi = [m](double x) { return m * (m - 1.0) * std::pow(x, m - 2.0); };
  s.phi_at_1 = 1.0;
  s.dphi_at_0 = m == 1.0 ? 1.0 : 0.0;
  s.dphi_at_1 = m;
  s.strictly_convex = m > 1.0;
  if (m == 1.0) s.ddphi_sup = 0.0;
  if (m == 2.0) s.ddphi_sup = 2.0;
  s.dphi_operator_monotone = true;
  return s;
}

PhiSpec make_xlog_shift(double t) {
  if (!(t >= 0.0)) throw InvalidArgument("phi xlog_shift: requires t >= 0");
  PhiSpec s;
  s.name = param_name("xlog_shift", {t});
  s.formula = "(t + x) log(t + x)";
  s.params = {t};
  s.phi = [t](double x) { return xlogx(t + x); };
  s.dphi = [t](double x) { return 1.0 + std::log(t + x); };
  s.ddphi = [t](double x) { return 1.0 / (t + x); };
  s.phi_at_0 = xlogx(t);
  s.phi_at_1 = xlogx(t + 1.0);
  s.dphi_divergent_at_0 = t == 0.0;
  s.dphi_at_0 = t == 0.0 ? 0.0 : 1.0 + std::log(t);
  s.dphi_at_1 = 1.0 + std::log(t + 1.0);
  if (t > 0.0) s.ddphi_sup = 1.0 / t;
  s.dphi_operator_monotone = true;
  return s;
}

PhiSpec make_neg_log_shift(double t) {
  if (!(t > 0.0)) throw InvalidArgument("phi neg_log_shift: requires t > 0");
  PhiSpec s;
  s.name = param_name("neg_log_shift", {t});
  s.formula = "-log(t + x)";
  s.params = {t};
  s.phi = [t](double x) { return -std::log(t + x); };
  s.dphi = [t](double x) { return -1.0 / (t + x); };
  s.ddphi = [t](double x) { return 1.0 / ((t + x) * (t + x)); };
  s.phi_at_0 = -std::log(t);
  s.phi_at_1 = -std::log(t + 1.0);
  s.dphi_at_0 = -1.0 / t;
  s.dphi_at_1 = -1.0 / (t + 1.0);
  s.ddphi_sup = 1.0 / (t * t);
  s.dphi_operator_monotone = true;
  return s;
}

}  // namespace

double PhiSpec::value(double x) const {
  if (x == 0.0) return phi_at_0;
  if (x == 1.0) return phi_at_1;
  return phi(x);
}

double PhiSpec::derivative(double x) const {
  if (x == 0.0) return dphi_divergent_at_0 ? -kInf : dphi_at_0;
  if (x == 1.0) return dphi_divergent_at_1 ? kInf : dphi_at_1;
  return dphi(x);
}

double PhiSpec::second_derivative(double x) const {
  if (!ddphi) throw PreconditionError("phi " + name + ": second derivative not available");
  return ddphi(x);
}

PhiSpec builtin(const std::string& name, const std::vector<double>& params) {
  if (name == "vn" || name == "car" || name == "ccr") {
    if (!params.empty()) throw InvalidArgument("phi " + name + ": takes no parameters");
    if (name == "vn") return make_vn();
    if (name == "car") return make_car();
    return make_ccr();
  }
  if (name == "power_neg") return make_power_neg(single_param(name, params, 0.5));
  if (name == "power_pos") return make_power_pos(single_param(name, params, 1.5));
  if (name == "xlog_shift") return make_xlog_shift(single_param(name, params, 0.5));
  if (name == "neg_log_shift") return make_neg_log_shift(single_param(name, params, 0.5));
  throw InvalidArgument("unknown phi \"" + name +
                        "\" (expected vn, car, ccr, power_neg, power_pos, xlog_shift, "
                        "neg_log_shift or x4)");
}

std::vector<PhiSpec> catalog() {
  return {builtin("vn"),        builtin("car"),        builtin("ccr"),
          builtin("power_neg"), builtin("power_pos"),  builtin("xlog_shift"),
          builtin("neg_log_shift")};
}

PhiSpec quartic_control() {
  PhiSpec s;
  s.name = "x4";
  s.formula = "x^4 / 4";
  s.phi = [](double x) { return 0.25 * x * x * x * x; };
  s.dphi = [](double x) { return x * x * x; };
  s.ddphi = [](double x) { return 3.0 * x * x; };
  s.phi_at_1 = 0.25;
  s.dphi_at_1 = 1.0;
  s.ddphi_sup = 3.0;
  s.dphi_operator_monotone = false;
  return s;
}

PhiSpec half_neg_log() {
  PhiSpec s;
  s.name = "half_neg_log";
  s.formula = "-(1/2) log x";
  s.phi = [](double x) { return -0.5 * std::log(x); };
  s.dphi = [](double x) { return -0.5 / x; };
  s.ddphi = [](double x) { return 0.5 / (x * x); };
  s.phi_at_0 = kInf;
  s.phi_at_1 = 0.0;
  s.dphi_divergent_at_0 = true;
  s.dphi_at_1 = -0.5;
  s.dphi_operator_monotone = true;
  return s;
}

PhiSpec parse_phi(const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string name = spec.substr(0, colon);
  if (name == "x4") {
    if (colon != std::string::npos) throw InvalidArgument("phi x4: takes no parameters");
    return quartic_control();
  }
  std::vector<double> params;
  if (colon != std::string::npos) {
    std::stringstream ss(spec.substr(colon + 1));
    std::string item;
    while (std::getline(ss, item, ',')) {
      try {
        std::size_t used = 0;
        params.push_back(std::stod(item, &used));
        if (used != item.size()) throw std::invalid_argument(item);
      } catch (const std::exception&) {
        throw InvalidArgument("phi " + name + ": cannot parse parameter \"" + item + "\"");
      }
    }
  }
  return builtin(name, params);
}

double bregman_scalar(const PhiSpec& phi, double x, double y) {
  if (!(x >= 0.0 && x <= 1.0)) throw DomainError("bregman_scalar: x outside [0, 1]", x);
  if (!(y >= 0.0 && y <= 1.0)) throw DomainError("bregman_scalar: y outside [0, 1]", y);
  if (x == y) return 0.0;
  if ((y == 0.0 && phi.dphi_divergent_at_0) || (y == 1.0 && phi.dphi_divergent_at_1)) return kInf;
  return phi.value(x) - phi.value(y) - phi.derivative(y) * (x - y);
}

PhiValidation validate_phi(const PhiSpec& phi) {
  PhiValidation v;
  if (phi.ddphi) {
    v.min_second_derivative = kInf;
    for (int i = 1; i < 1001; ++i) {
      const double x = i / 1001.0;
      v.min_second_derivative = std::min(v.min_second_derivative, phi.ddphi(x));
    }
    v.convex = v.min_second_derivative >= -1e-12;
  }

  // |x phi'(x)| <= 10 |x phi'(x / 10)| at x in {1e-4, 1e-6, 1e-8}, plus the
  // mirrored statement at 1, and the sequence must not grow toward the end.
  // A term already below 1e-12 counts as decayed (phi' -> 0 faster than 1/x
  // fails the ratio form, e.g. x^3).
  auto decays = [&](auto&& term) {
    double previous = kInf;
    for (double x : {1e-4, 1e-6, 1e-8}) {
      const double here = std::abs(term(x, x));
      const double tenth = std::abs(term(x, x / 10.0));
      if (!(here <= 10.0 * tenth || here <= 1e-12)) return false;
      if (!(here <= previous)) return false;
      previous = here;
    }
    return previous < 1e-3;
  };
  const bool at0 = decays([&](double x, double z) { return x * phi.dphi(z); });
  const bool at1 = decays([&](double x, double z) { return x * phi.dphi(1.0 - z); });
  v.endpoint_decay = at0 && at1;

  for (int i = 1; i <= 101; ++i) {
    const double x = i / 102.0;
    const double h = 1e-5 * std::min(x, 1.0 - x);
    const double fd = (phi.phi(x + h) - phi.phi(x - h)) / (2.0 * h);
    const double exact = phi.dphi(x);
    const double rel = std::abs(fd - exact) / std::max(1.0, std::abs(exact));
    v.max_derivative_rel_error = std::max(v.max_derivative_rel_error, rel);
  }
  v.derivative_consistent = v.max_derivative_rel_error <= 1e-6;
  return v;
}

}  // namespace relent
