#include "relent_cli/cli.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "relent/entropy.hpp"
#include "relent/errors.hpp"
#include "relent/klein.hpp"
#include "relent/lowner.hpp"
#include "relent/matrix_io.hpp"
#include "relent/monotonicity.hpp"
#include "relent/phi.hpp"
#include "relent/projection_limits.hpp"
#include "relent/random.hpp"

namespace relent::cli {

namespace {

using nlohmann::json;

constexpr double kDefectThreshold = -1e-8;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json matrix_json(const Matrix& m) {
  json re = json::array(), im = json::array();
  bool real = true;
  for (Index i = 0; i < m.rows(); ++i) {
    json r = json::array(), c = json::array();
    for (Index j = 0; j < m.cols(); ++j) {
      r.push_back(m(i, j).real());
      c.push_back(m(i, j).imag());
      if (m(i, j).imag() != 0.0) real = false;
    }
    re.push_back(r);
    im.push_back(c);
  }
  json out = {{"rows", m.rows()}, {"cols", m.cols()}, {"re", re}};
  if (!real) out["im"] = im;
  return out;
}

json entropy_json(const EntropyValue& v) {
  if (v.is_finite()) return {{"kind", "finite"}, {"value", v.value}};
  return {{"kind", "infinite"}, {"value", nullptr}, {"reason", to_string(v.reason)}};
}

json measure_json(const Measure& m) {
  json atoms = json::array(), densities = json::array();
  for (const auto& a : m.atoms) atoms.push_back({{"node", a.node}, {"weight", a.weight}});
  for (const auto& d : m.densities) {
    densities.push_back({{"lo", d.lo}, {"hi", number(d.hi)}, {"density", d.density}});
  }
  return {{"atoms", atoms}, {"densities", densities}};
}

json phi_json(const PhiSpec& phi) {
  json out = {{"name", phi.name},
              {"formula", phi.formula},
              {"params", phi.params},
              {"dphi_divergent_at_0", phi.dphi_divergent_at_0},
              {"dphi_divergent_at_1", phi.dphi_divergent_at_1},
              {"strictly_convex", phi.strictly_convex},
              {"phi_at_0", number(phi.phi_at_0)},
              {"phi_at_1", number(phi.phi_at_1)}};
  if (phi.ddphi_sup) out["ddphi_sup"] = *phi.ddphi_sup;
  if (phi.dphi_operator_monotone) out["dphi_operator_monotone"] = *phi.dphi_operator_monotone;
  return out;
}

json witness_json(const Witness& w) {
  json out = {{"kind", w.kind},
              {"seed", w.seed},
              {"trial", w.trial},
              {"defect", number(w.defect)},
              {"reverified_defect", number(w.reverified_defect)}};
  if (w.kind == "lowner") {
    out["points"] = std::vector<double>(w.points.data(), w.points.data() + w.points.size());
  } else {
    out["a"] = matrix_json(w.a.matrix());
    if (w.kind == "contraction") {
      out["b"] = matrix_json(w.b.matrix());
      out["x"] = matrix_json(w.x);
    } else {
      out["projector_basis"] = matrix_json(w.x);
    }
  }
  return out;
}

json report_json(const CertReport& r) {
  json out = {{"mode", r.mode},
              {"verdict", to_string(r.verdict)},
              {"trials", r.trials},
              {"vacuous_trials", r.vacuous_trials},
              {"worst_defect", number(r.worst_defect)}};
  out["witness"] = r.witness ? witness_json(*r.witness) : json(nullptr);
  return out;
}

KernelPolicy policy_of(const RunConfig& c) {
  KernelPolicy p{c.eigen_tol, c.match_tol};
  try {
    p.validate();
  } catch (const InvalidArgument& e) {
    throw UsageError(std::string("--eigen-tol/--match-tol: ") + e.what());
  }
  return p;
}

std::uint64_t require_seed(const RunConfig& c) {
  if (!c.seed) throw UsageError("--seed is required for the " + c.subcommand + " subcommand");
  return *c.seed;
}

void require(bool ok, const std::string& message) {
  if (!ok) throw UsageError(message);
}

json config_echo(const RunConfig& c) {
  json out = {{"subcommand", c.subcommand}};
  const std::string& s = c.subcommand;
  if (s == "entropy") {
    out.update({{"a", c.a_path}, {"b", c.b_path}, {"phi", c.phi}, {"eigen-tol", c.eigen_tol},
                {"match-tol", c.match_tol}, {"expect-finite", c.expect_finite}});
  } else if (s == "certify") {
    out.update({{"phi", c.phi}, {"dim", c.dim}, {"trials", c.trials}, {"seed", *c.seed},
                {"mode", c.mode}, {"points", c.points}, {"edge", c.edge}});
  } else if (s == "klein") {
    out.update({{"phi", c.phi}, {"dim", c.dim}, {"trials", c.trials}, {"seed", *c.seed},
                {"eps", c.eps}, {"grid", c.grid}});
  } else if (s == "converge") {
    out.update({{"a-oracle", c.a_oracle}, {"b-oracle", c.b_oracle}, {"phi", c.phi},
                {"schedule", c.schedule}, {"rel-tol", c.rel_tol}, {"eigen-tol", c.eigen_tol},
                {"match-tol", c.match_tol}, {"expect-finite", c.expect_finite}});
  }
  return out;
}

json run_entropy(const RunConfig& c, int& code, json& meta) {
  require(!c.a_path.empty() && !c.b_path.empty(), "entropy: --a and --b are required");
  const PhiSpec phi = parse_phi(c.phi);
  const HermitianOperator a = read_matrix_file(c.a_path);
  const HermitianOperator b = read_matrix_file(c.b_path);
  if (a.dim() != b.dim()) {
    std::ostringstream os;
    os << "entropy: --a has dimension " << a.dim() << " but --b has dimension " << b.dim();
    throw UsageError(os.str());
  }
  const EntropyValue v = relative_entropy(a, b, phi, policy_of(c));
  meta["phi"] = phi_json(phi);
  if (!v.is_finite() && c.expect_finite) code = kExitInfinite;
  return entropy_json(v);
}

json run_certify(const RunConfig& c, int& code, json& meta) {
  const std::uint64_t seed = require_seed(c);
  require(c.dim >= 1 && c.dim <= 512, "certify: --dim must lie in [1, 512]");
  require(c.trials >= 1, "certify: --trials must be >= 1");
  require(c.points >= 2, "certify: --points must be >= 2");
  require(c.mode == "lowner" || c.mode == "pinching" || c.mode == "contraction" || c.mode == "all",
          "certify: --mode must be one of lowner, pinching, contraction, all");
  const PhiSpec phi = parse_phi(c.phi);
  meta["phi"] = phi_json(phi);
  meta["violation_threshold"] = "-1e-8 * (1 + |H(A, B)|); lowner: -1e-8 * max|D|";
  json reports = json::array();
  bool violation = false;
  if (c.mode == "lowner" || c.mode == "all") {
    const CertReport r = lowner_matrix_test(phi, c.points, c.trials, seed);
    violation |= r.verdict == Verdict::ViolationFound;
    reports.push_back(report_json(r));
  }
  if (c.mode != "lowner") {
    SearchOptions opt;
    opt.contraction = c.mode != "pinching";
    opt.pinching = c.mode != "contraction";
    opt.edge = c.edge;
    opt.policy = policy_of(c);
    const CertReport r = search_counterexample(phi, c.dim, c.trials, seed, opt);
    violation |= r.verdict == Verdict::ViolationFound;
    reports.push_back(report_json(r));
  }
  if (violation) code = kExitViolation;
  return {{"verdict", violation ? "violation_found" : "consistent_with_monotone"},
          {"reports", reports}};
}

json run_klein(const RunConfig& c, int& code, json& meta) {
  const std::uint64_t seed = require_seed(c);
  require(c.dim >= 1 && c.dim <= 512, "klein: --dim must lie in [1, 512]");
  require(c.trials >= 1, "klein: --trials must be >= 1");
  require(c.eps > 0.0 && c.eps < 0.5, "klein: --eps must lie in (0, 0.5)");
  require(c.grid >= 100, "klein: --grid must be >= 100");
  const PhiSpec phi = parse_phi(c.phi);
  const KleinConstants k = derive_klein_constants(phi, c.eps, c.grid);
  meta["phi"] = phi_json(phi);
  meta["constants"] = {{"c_lower", k.c_lower},
                       {"c_upper", k.c_upper},
                       {"c_eps", k.c_eps},
                       {"eps", k.eps},
                       {"derivation_grid", k.derivation_grid},
                       {"coarse_grid", c.grid},
                       {"lower_change", k.lower_change},
                       {"upper_change", k.upper_change},
                       {"eps_change", k.eps_change},
                       {"stable", k.stable},
                       {"safety_factor", kSafetyFactor},
                       {"smooth_upper", k.smooth_upper ? json(*k.smooth_upper) : json(nullptr)}};
  meta["sampling"] = {{"a", "[0, 1]"}, {"b", "[0.1, 0.9]"}, {"lipschitz_a_prime_b", "[eps, 1 - eps]"}};

  struct Worst {
    double defect = std::numeric_limits<double>::infinity();
    long long trial = -1;
  } lower, upper, lip;
  auto track = [](Worst& w, double d, long long t) {
    if (d < w.defect) w = {d, t};
  };
  const KernelPolicy policy = policy_of(c);
  const Index n = static_cast<Index>(c.dim);
  for (long long t = 0; t < c.trials; ++t) {
    Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(t));
    const HermitianOperator a = random_density(n, 0.0, 1.0, rng);
    const HermitianOperator b = random_density(n, 0.1, 0.9, rng);
    track(lower, klein_lower_defect(a, b, phi, k, policy), t);
    track(upper, klein_upper_defect(a, b, phi, k, policy), t);
    const HermitianOperator ap = random_density(n, c.eps, 1.0 - c.eps, rng);
    const HermitianOperator bp = random_density(n, c.eps, 1.0 - c.eps, rng);
    track(lip, lipschitz_defect(a, ap, bp, phi, k, policy), t);
  }
  auto worst_json = [seed](const Worst& w) {
    return json{{"worst_defect", number(w.defect)}, {"seed", seed}, {"trial", w.trial}};
  };
  const bool violation = lower.defect < kDefectThreshold || upper.defect < kDefectThreshold ||
                         lip.defect < kDefectThreshold;
  if (violation) code = kExitViolation;
  return {{"lower", worst_json(lower)},
          {"upper", worst_json(upper)},
          {"lipschitz", worst_json(lip)},
          {"verdict", violation ? "violation_found" : "bounds_hold"}};
}

json run_converge(const RunConfig& c, int& code, json& meta) {
  require(!c.a_oracle.empty() && !c.b_oracle.empty(),
          "converge: --a-oracle and --b-oracle are required");
  require(c.rel_tol > 0.0 && c.rel_tol < 1.0, "converge: --rel-tol must lie in (0, 1)");
  const PhiSpec phi = parse_phi(c.phi);
  const TruncatableOperator a = read_oracle_file(c.a_oracle);
  const TruncatableOperator b = read_oracle_file(c.b_oracle);
  ProjectionSchedule schedule;
  try {
    schedule = ProjectionSchedule::parse(c.schedule);
  } catch (const InvalidArgument& e) {
    throw UsageError(std::string("--schedule: ") + e.what());
  }
  const LimitResult r = entropy_limit(a, b, phi, schedule, c.rel_tol, policy_of(c));
  meta["phi"] = phi_json(phi);
  meta["oracles"] = {{"a", {{"kind", a.kind()}, {"decay_hint", a.decay_hint()}}},
                     {"b", {{"kind", b.kind()}, {"decay_hint", b.decay_hint()}}}};
  meta["note"] = "convergence is evidence at the examined truncation sizes only";
  json values = json::array();
  for (std::size_t i = 0; i < r.values.size(); ++i) {
    json v = entropy_json(r.values[i]);
    v["dim"] = r.dims[i];
    values.push_back(v);
  }
  json out = {{"verdict", to_string(r.verdict)}, {"values", values}};
  if (r.verdict == LimitVerdict::Converged) {
    out["limit"] = r.limit;
    out["at_dim"] = r.at_dim;
  } else if (r.verdict == LimitVerdict::Increasing) {
    out["last_value"] = r.limit;
  }
  if (r.verdict == LimitVerdict::InfiniteDetected && c.expect_finite) code = kExitInfinite;
  return out;
}

json run_catalog(json& meta) {
  json entries = json::array();
  for (const PhiSpec& phi : catalog()) {
    json e = phi_json(phi);
    const std::string base = phi.name.substr(0, phi.name.find(':'));
    if (base == "vn" || base == "car" || base == "ccr") {
      const LownerRepresentation rep = builtin_lowner(base);
      e["lowner"] = {{"a_prime", rep.a_prime},
                     {"c_prime", rep.c_prime},
                     {"nu1", measure_json(rep.nu1)},
                     {"nu2", measure_json(rep.nu2)}};
    }
    entries.push_back(e);
  }
  const QuadratureConfig q;
  meta["quadrature"] = {{"node_count", q.node_count},
                        {"tail_split", q.tail_split},
                        {"tolerance", q.tolerance},
                        {"rule", "Gauss-Legendre, geometric refinement near the singularity, "
                                 "tail t = split + u / (1 - u)"}};
  return {{"functions", entries}};
}

const std::set<std::string>& allowed_keys(const std::string& sub) {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"entropy", {"a", "b", "phi", "eigen-tol", "match-tol", "expect-finite", "output"}},
      {"certify", {"phi", "dim", "trials", "seed", "mode", "points", "edge", "eigen-tol",
                   "match-tol", "output"}},
      {"klein", {"phi", "dim", "trials", "seed", "eps", "grid", "eigen-tol", "match-tol",
                 "output"}},
      {"converge", {"a-oracle", "b-oracle", "phi", "schedule", "rel-tol", "eigen-tol",
                    "match-tol", "expect-finite", "output"}},
      {"catalog", {"output"}},
  };
  const auto it = keys.find(sub);
  if (it == keys.end()) {
    throw UsageError("unknown subcommand \"" + sub +
                     "\" (expected entropy, certify, klein, converge or catalog)");
  }
  return it->second;
}

template <typename T>
T get_field(const json& doc, const std::string& key) {
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception&) {
    throw UsageError("config: field \"" + key + "\" has the wrong type");
  }
}

void add_common_tolerances(CLI::App* app, RunConfig& c) {
  app->add_option("--eigen-tol", c.eigen_tol,
                  "eigenvalues of B this close to 0 or 1 count as exactly at the endpoint")
      ->capture_default_str();
  app->add_option("--match-tol", c.match_tol,
                  "A = B on a kernel when the block mismatch is <= match-tol * dim")
      ->capture_default_str();
}

}  // namespace

RunConfig config_from_json(const json& doc) {
  if (!doc.is_object()) throw UsageError("config: top level must be a JSON object");
  if (!doc.contains("subcommand") || !doc["subcommand"].is_string()) {
    throw UsageError("config: missing string field \"subcommand\"");
  }
  RunConfig c;
  c.subcommand = doc["subcommand"].get<std::string>();
  const auto& allowed = allowed_keys(c.subcommand);
  for (const auto& item : doc.items()) {
    if (item.key() != "subcommand" && !allowed.count(item.key())) {
      throw UsageError("config: unknown field \"" + item.key() + "\" for subcommand " +
                       c.subcommand);
    }
  }
  auto str = [&](const char* k, std::string& dst) {
    if (doc.contains(k)) dst = get_field<std::string>(doc, k);
  };
  auto num = [&](const char* k, auto& dst) {
    if (doc.contains(k)) dst = get_field<std::decay_t<decltype(dst)>>(doc, k);
  };
  str("a", c.a_path);
  str("b", c.b_path);
  str("a-oracle", c.a_oracle);
  str("b-oracle", c.b_oracle);
  str("phi", c.phi);
  str("mode", c.mode);
  str("schedule", c.schedule);
  str("output", c.output);
  num("dim", c.dim);
  num("trials", c.trials);
  num("points", c.points);
  num("grid", c.grid);
  num("eps", c.eps);
  num("rel-tol", c.rel_tol);
  num("eigen-tol", c.eigen_tol);
  num("match-tol", c.match_tol);
  num("edge", c.edge);
  num("expect-finite", c.expect_finite);
  if (doc.contains("seed")) c.seed = get_field<std::uint64_t>(doc, "seed");
  return c;
}

json run(const RunConfig& c, int& code) {
  code = kExitOk;
  const auto start = std::chrono::steady_clock::now();
  allowed_keys(c.subcommand);
  json meta = {{"clamp_tolerance", kSpectrumClampTolerance},
               {"negative_slack", kNegativeSlack},
               {"eigen_tol", c.eigen_tol},
               {"match_tol", c.match_tol}};
  json results;
  if (c.subcommand == "entropy") {
    results = run_entropy(c, code, meta);
  } else if (c.subcommand == "certify") {
    results = run_certify(c, code, meta);
  } else if (c.subcommand == "klein") {
    results = run_klein(c, code, meta);
  } else if (c.subcommand == "converge") {
    results = run_converge(c, code, meta);
  } else {
    results = run_catalog(meta);
  }
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {{"version", RELENT_VERSION},
          {"config", config_echo(c)},
          {"results", results},
          {"metadata", meta},
          {"timing", {{"wall_seconds", wall}}}};
}

std::string deterministic_dump(const json& report) {
  json copy = report;
  copy.erase("timing");
  return copy.dump();
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"relent: generalized operator relative entropy and certificates"};
  app.set_version_flag("--version", RELENT_VERSION);
  RunConfig c;
  std::string config_path;
  app.add_option("--config", config_path, "read the whole run configuration from a JSON file")
      ->check(CLI::ExistingFile);
  app.require_subcommand(0, 1);

  auto* entropy = app.add_subcommand("entropy", "evaluate H(A, B) for two matrix files");
  entropy->add_option("--a", c.a_path, "matrix file for A")->check(CLI::ExistingFile);
  entropy->add_option("--b", c.b_path, "matrix file for B")->check(CLI::ExistingFile);
  entropy->add_option("--phi", c.phi, "function name[:params]")->capture_default_str();
  add_common_tolerances(entropy, c);
  entropy->add_flag("--expect-finite", c.expect_finite, "exit 4 when H(A, B) is infinite");

  auto* certify = app.add_subcommand("certify", "monotonicity certificates for phi");
  certify->add_option("--phi", c.phi, "function name[:params], or x4")->capture_default_str();
  certify->add_option("--dim", c.dim, "matrix dimension")->capture_default_str();
  certify->add_option("--trials", c.trials, "number of trials")->capture_default_str();
  certify->add_option("--seed", c.seed, "experiment seed (required)");
  certify->add_option("--mode", c.mode, "lowner, pinching, contraction or all")
      ->capture_default_str();
  certify->add_option("--points", c.points, "points per Loewner matrix")->capture_default_str();
  certify->add_flag("--edge", c.edge, "draw A, B with spectrum in [0, 1]");
  add_common_tolerances(certify, c);

  auto* klein = app.add_subcommand("klein", "derive Klein constants and test the bounds");
  klein->add_option("--phi", c.phi, "function name[:params]")->capture_default_str();
  klein->add_option("--dim", c.dim, "matrix dimension")->capture_default_str();
  klein->add_option("--trials", c.trials, "number of random instances")->capture_default_str();
  klein->add_option("--seed", c.seed, "experiment seed (required)");
  klein->add_option("--eps", c.eps, "spectral margin for the Lipschitz bound")
      ->capture_default_str();
  klein->add_option("--grid", c.grid, "coarse derivation grid (the fine grid is twice this)")
      ->capture_default_str();
  add_common_tolerances(klein, c);

  auto* converge = app.add_subcommand("converge", "entropy limit along truncations");
  converge->add_option("--a-oracle", c.a_oracle, "oracle or matrix file for A")
      ->check(CLI::ExistingFile);
  converge->add_option("--b-oracle", c.b_oracle, "oracle or matrix file for B")
      ->check(CLI::ExistingFile);
  converge->add_option("--phi", c.phi, "function name[:params]")->capture_default_str();
  converge->add_option("--schedule", c.schedule, "comma separated truncation sizes")
      ->capture_default_str();
  converge->add_option("--rel-tol", c.rel_tol, "relative convergence tolerance")
      ->capture_default_str();
  add_common_tolerances(converge, c);
  converge->add_flag("--expect-finite", c.expect_finite, "exit 4 when the limit is infinite");

  app.add_subcommand("catalog", "list the builtin functions and their representations");

  for (auto* sub : app.get_subcommands({})) {
    sub->add_option("--output", c.output, "write the report here instead of stdout");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (!config_path.empty()) {
      if (!app.get_subcommands().empty()) {
        throw UsageError("--config cannot be combined with a subcommand");
      }
      json doc;
      try {
        doc = json::parse(read_text_file(config_path));
      } catch (const json::parse_error& e) {
        throw UsageError(config_path + ": invalid JSON: " + e.what());
      }
      c = config_from_json(doc);
    } else {
      if (app.get_subcommands().empty()) throw UsageError("a subcommand or --config is required");
      c.subcommand = app.get_subcommands().front()->get_name();
    }
    int code = kExitOk;
    const json report = run(c, code);
    const std::string text = report.dump(2) + "\n";
    if (c.output.empty()) {
      out << text;
    } else {
      std::ofstream f(c.output);
      if (!f) throw UsageError("--output: cannot open " + c.output + " for writing");
      f << text;
    }
    return code;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DimensionMismatch& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const SpectrumOutOfRange& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const PreconditionError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}

}  // namespace relent::cli
