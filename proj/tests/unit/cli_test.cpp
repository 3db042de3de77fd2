#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "relent/matrix_io.hpp"
#include "relent/random.hpp"
#include "relent_cli/cli.hpp"

using nlohmann::json;
using namespace relent;

namespace {

const std::filesystem::path kTmp = RELENT_TEST_TMPDIR;

std::string write(const std::string& name, const std::string& text) {
  std::filesystem::create_directories(kTmp);
  const auto path = kTmp / name;
  std::ofstream(path) << text;
  return path.string();
}

struct Result {
  int code;
  std::string out;
  std::string err;
  json doc() const { return json::parse(out); }
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "relent");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

}  // namespace

TEST(Cli, EntropySelfIsZero) {
  const std::string a = write("a.json", format_matrix_json(random_density(3, 0.0, 1.0, 1)));
  const Result r = invoke({"entropy", "--a", a, "--b", a, "--phi", "vn"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json res = r.doc()["results"];
  EXPECT_EQ(res["kind"], "finite");
  EXPECT_EQ(res["value"], 0.0);
}

TEST(Cli, EntropyInfiniteExitCode) {
  const std::string a = write("ia.json", R"({"dim": 1, "re": [[0.5]]})");
  const std::string b = write("ib.json", R"({"dim": 1, "re": [[0.0]]})");
  Result r = invoke({"entropy", "--a", a, "--b", b, "--phi", "vn"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.doc()["results"]["kind"], "infinite");
  EXPECT_EQ(r.doc()["results"]["reason"], "kernel_mismatch_at_0");
  r = invoke({"entropy", "--a", a, "--b", b, "--phi", "vn", "--expect-finite"});
  EXPECT_EQ(r.code, cli::kExitInfinite);
}

TEST(Cli, CertifyQuarticFindsViolation) {
  const Result r = invoke({"certify", "--phi", "x4", "--trials", "2000", "--seed", "7"});
  EXPECT_EQ(r.code, cli::kExitViolation);
  const json res = r.doc()["results"];
  EXPECT_EQ(res["verdict"], "violation_found");
  bool has_witness = false;
  for (const json& rep : res["reports"]) has_witness |= !rep["witness"].is_null();
  EXPECT_TRUE(has_witness);
}

TEST(Cli, CertifyVnConsistent) {
  const Result r = invoke({"certify", "--phi", "vn", "--trials", "300", "--seed", "1"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.doc()["results"]["verdict"], "consistent_with_monotone");
}

TEST(Cli, SeedIsMandatory) {
  const Result r = invoke({"certify", "--phi", "vn"});
  EXPECT_EQ(r.code, cli::kExitUsage);
  EXPECT_NE(r.err.find("--seed"), std::string::npos);
}

TEST(Cli, CatalogListsTable) {
  const Result r = invoke({"catalog"});
  ASSERT_EQ(r.code, 0);
  const json fns = r.doc()["results"]["functions"];
  ASSERT_EQ(fns.size(), 7u);
  EXPECT_EQ(fns[0]["name"], "vn");
  EXPECT_NEAR(fns[0]["lowner"]["a_prime"].get<double>(), 1.0 - std::log(2.0), 1e-15);
}

TEST(Cli, KleinReport) {
  const Result r = invoke({"klein", "--phi", "car", "--trials", "20", "--seed", "3", "--dim", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json doc = r.doc();
  EXPECT_EQ(doc["results"]["verdict"], "bounds_hold");
  EXPECT_TRUE(doc["metadata"]["constants"]["stable"].get<bool>());
}

TEST(Cli, ConvergeDiagonalOracles) {
  const std::string a = write("oa.json", R"({"kind": "diagonal", "entries": [0.9, 0.7, 0.6], "fill": 0.5})");
  const std::string b = write("ob.json", R"({"kind": "diagonal", "entries": [0.2, 0.4, 0.45], "fill": 0.5})");
  const Result r = invoke({"converge", "--a-oracle", a, "--b-oracle", b, "--phi", "vn",
                           "--schedule", "2,4,8,16"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.doc()["results"]["verdict"], "converged");
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(invoke({}).code, cli::kExitUsage);
  EXPECT_EQ(invoke({"bogus"}).code, cli::kExitUsage);
  EXPECT_EQ(invoke({"entropy", "--a", "/nonexistent.json", "--b", "/nonexistent.json"}).code,
            cli::kExitUsage);
  EXPECT_EQ(invoke({"certify", "--phi", "nope", "--seed", "1"}).code, cli::kExitUsage);
  EXPECT_EQ(invoke({"certify", "--seed", "1", "--mode", "sideways"}).code, cli::kExitUsage);
  EXPECT_EQ(invoke({"certify", "--seed", "1", "--eigen-tol", "0.1"}).code, cli::kExitUsage);
}

TEST(Cli, HelpMentionsEveryFlag) {
  const Result r = invoke({"certify", "--help"});
  EXPECT_EQ(r.code, 0);
  for (const char* flag : {"--phi", "--dim", "--trials", "--seed", "--mode", "--output"}) {
    EXPECT_NE(r.out.find(flag), std::string::npos) << flag;
  }
}

TEST(Cli, ConfigFileRejectsUnknownFields) {
  const std::string good = write("cfg.json", R"({"subcommand": "certify", "phi": "vn", "seed": 1, "trials": 50})");
  EXPECT_EQ(invoke({"--config", good}).code, 0);
  const std::string bad = write("bad.json", R"({"subcommand": "certify", "seed": 1, "colour": "red"})");
  const Result r = invoke({"--config", bad});
  EXPECT_EQ(r.code, cli::kExitUsage);
  EXPECT_NE(r.err.find("colour"), std::string::npos);
  const std::string wrong = write("wrong.json", R"({"subcommand": "catalog", "seed": 1})");
  EXPECT_EQ(invoke({"--config", wrong}).code, cli::kExitUsage);
}

TEST(Cli, OutputFile) {
  const std::string out = (kTmp / "catalog_out.json").string();
  std::filesystem::remove(out);
  EXPECT_EQ(invoke({"catalog", "--output", out}).code, 0);
  EXPECT_TRUE(json::parse(read_text_file(out)).contains("results"));
}

TEST(Cli, DeterministicAcrossRuns) {
  cli::RunConfig c;
  c.subcommand = "certify";
  c.phi = "x4";
  c.seed = 11;
  c.trials = 300;
  int code1 = 0, code2 = 0;
  const json r1 = cli::run(c, code1);
  const json r2 = cli::run(c, code2);
  EXPECT_EQ(cli::deterministic_dump(r1), cli::deterministic_dump(r2));
  EXPECT_EQ(code1, code2);
  EXPECT_TRUE(r1.contains("timing"));
  EXPECT_EQ(cli::deterministic_dump(r1).find("wall_seconds"), std::string::npos);
}
