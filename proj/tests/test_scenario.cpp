#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "oplab/errors.hpp"
#include "oplab/scenario.hpp"

using namespace oplab;
using nlohmann::json;

namespace {

const std::filesystem::path kScenarios = OPLAB_SCENARIO_DIR;

Scenario from_text(const std::string& text) { return parse_scenario(json::parse(text), kScenarios); }

const CheckVerdict& verdict(const Report& r, const std::string& name) { return r.verdicts.at(name); }

}  // namespace

TEST(ParseScenario, DefaultsAndChecks) {
  Scenario sc = load_scenario(kScenarios / "hardy-2x2.json");
  EXPECT_EQ(sc.name, "hardy-2x2");
  EXPECT_EQ(sc.factors.size(), 2u);
  EXPECT_EQ(sc.tol, 1e-10);
  EXPECT_EQ(sc.trials, 64);
  EXPECT_EQ(sc.seed, 42u);
  EXPECT_EQ(sc.checks, default_check_names());
  EXPECT_EQ(std::find(sc.checks.begin(), sc.checks.end(), "inequality_only"), sc.checks.end());
}

TEST(ParseScenario, ConfigErrors) {
  EXPECT_THROW(load_scenario(kScenarios / "does-not-exist.json"), ConfigError);
  EXPECT_THROW(from_text(R"({"factors": [{"kind": "hardy", "m": 4, "coinvariant": {"prefix": 2}}]})"), ConfigError);
  EXPECT_THROW(from_text(R"({"factors": [{"kind": "hilbert", "m": 4}, {"kind": "hardy", "m": 4}]})"), ConfigError);
  EXPECT_THROW(from_text(R"({"checks": ["nope"], "factors": []})"), ConfigError);
  EXPECT_THROW(from_text(R"({"factors": [{"kind": "hardy", "m": 4}, {"kind": "hardy", "m": 4}]})"), ConfigError);
  EXPECT_THROW(from_text(R"({"tol": -1, "factors": []})"), ConfigError);
  EXPECT_THROW(from_text(R"({"factors": [{"kind": "hardy", "coinvariant": {"prefix": 1}},
                                         {"kind": "hardy", "m": 3, "coinvariant": {"prefix": 1}}]})"),
               ConfigError);
  EXPECT_THROW(from_text(R"({"factors": [{"kind": "hardy", "m": 3, "coinvariant": {"prefix": 1, "ideal": [0]}},
                                         {"kind": "hardy", "m": 3, "coinvariant": {"prefix": 1}}]})"),
               ConfigError);
}

TEST(BuildFactor, UnresolvableSpecsBecomeConfigErrors) {
  auto spec = [](const std::string& t) { return parse_factor_spec(json::parse(t), kScenarios); };
  EXPECT_THROW(build_factor(spec(R"({"kind": "hardy", "m": 3, "coinvariant": {"prefix": 3}})")), ConfigError);
  EXPECT_THROW(build_factor(spec(R"({"kind": "hardy", "m": 3, "coinvariant": {"ideal": [0]}})")), ConfigError);
  EXPECT_THROW(build_factor(spec(R"({"kind": "hardy", "m": 3, "coinvariant": {"basis": [[0], [1], [0]]}})")),
               ConfigError);
  EXPECT_THROW(build_factor(spec(R"({"kind": "quotient", "p_roots": [0.3], "coinvariant": {"ideal": [0.5]}})")),
               ConfigError);
  EXPECT_THROW(build_factor(spec(R"({"kind": "quotient", "p_roots": [1.5], "coinvariant": {"ideal": [1.5]}})")),
               ConfigError);
  EXPECT_THROW(build_factor(spec(R"({"kind": "matrix", "operator_file": "nowhere.txt",
                                     "coinvariant": {"prefix": 1}})")),
               ConfigError);
  EXPECT_NO_THROW(build_factor(spec(R"({"kind": "custom", "weights": [2, 3], "coinvariant": {"prefix": 1}})")));
}

TEST(BuildFactor, MatrixAndBasisFiles) {
  auto dir = std::filesystem::temp_directory_path() / "oplab_scenario_files";
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "t.txt") << "3 3\n0 0 0 0 0 0\n1 0 0 0 0 0\n0 0 1 0 0 0\n";
  std::ofstream(dir / "q.json") << R"({"rows": 3, "cols": 1, "data": [1, 0, 0]})";
  auto spec = parse_factor_spec(
      json::parse(R"({"kind": "matrix", "operator_file": "t.txt", "coinvariant": {"basis_file": "q.json"}})"), dir);
  TensorFactor f = build_factor(spec);
  EXPECT_EQ(f.dim(), 3);
  EXPECT_EQ(f.q.dim(), 1);
  EXPECT_EQ(f.s.dim(), 2);
  std::filesystem::remove_all(dir);
}

TEST(RunScenario, HardyPair) {
  Report r = run_scenario(load_scenario(kScenarios / "hardy-2x2.json"));
  EXPECT_TRUE(r.all_passed());
  EXPECT_EQ(r.multiplicities["S"]["lower"], 2);
  EXPECT_EQ(r.multiplicities["S"]["upper"], 2);
  EXPECT_EQ(r.multiplicities["wandering_sum"], 2);
  EXPECT_EQ(r.system["dim_S"], 12);
  EXPECT_EQ(r.system["dim_F"], 8);
  EXPECT_EQ(r.system["dim_E"], 2);
  EXPECT_EQ(verdict(r, "additive_formula").details["equality_asserted"], true);
  for (const auto& name : r.check_order) EXPECT_EQ(r.verdicts.count(name), 1u) << name;
}

TEST(RunScenario, MixedThree) {
  Report r = run_scenario(load_scenario(kScenarios / "mixed-3.json"));
  EXPECT_TRUE(r.all_passed());
  EXPECT_EQ(r.multiplicities["S"]["upper"], 3);
  EXPECT_EQ(r.multiplicities["S"]["certified"], true);
  EXPECT_EQ(r.multiplicities["F"].size(), 2u);
}

TEST(RunScenario, LiteralQuotientIsDowngraded) {
  Report r = run_scenario(load_scenario(kScenarios / "quotient-zeros.json"));
  EXPECT_EQ(r.multiplicities["S"]["upper"], 1);
  EXPECT_EQ(r.multiplicities["S"]["certified"], true);
  const auto& v = verdict(r, "additive_formula");
  EXPECT_EQ(v.details["mode"], "inequality_only");
  EXPECT_EQ(v.details["equality_asserted"], false);
  EXPECT_EQ(v.status, "pass");
  EXPECT_NE(v.summary.find("does not generate"), std::string::npos);
  EXPECT_EQ(r.hypotheses[0]["gws"]["holds"], false);
  EXPECT_EQ(r.hypotheses[0]["cyclic"]["status"], "pass");
}

TEST(RunScenario, DoubleRootQuotient) {
  Report r = run_scenario(load_scenario(kScenarios / "quotient-double-root.json"));
  EXPECT_TRUE(r.all_passed());
  EXPECT_EQ(r.multiplicities["S"]["upper"], 2);
  EXPECT_EQ(r.multiplicities["wandering_sum"], 2);
  EXPECT_EQ(verdict(r, "additive_formula").details["mode"], "equality");
  EXPECT_NEAR(r.hypotheses[0]["gws"]["alpha"][0].get<double>(), 0.3, 1e-12);
}

TEST(RunScenario, NonCyclicFactorIsInequalityOnly) {
  Report r = run_scenario(load_scenario(kScenarios / "noncyclic-jordan.json"));
  EXPECT_TRUE(r.all_passed());
  const auto& add = verdict(r, "additive_formula");
  EXPECT_EQ(add.details["equality_asserted"], false);
  EXPECT_EQ(add.details["failed_hypotheses"].size(), 1u);
  EXPECT_NE(add.details["failed_hypotheses"][0].get<std::string>().find("mult(T) = 1"), std::string::npos);
  EXPECT_EQ(r.hypotheses[0]["cyclic"]["mult"]["upper"], 2);
  EXPECT_EQ(r.multiplicities["S"]["upper"], 4);
  EXPECT_EQ(r.multiplicities["F"][0]["upper"], 4);
  EXPECT_EQ(r.multiplicities["wandering_sum"], 3);
  EXPECT_EQ(verdict(r, "inequality_only").status, "pass");
}

TEST(RunScenario, DeterministicModuloWallClock) {
  Scenario sc = load_scenario(kScenarios / "mixed-3.json");
  std::string a = run_scenario(sc).to_json(false).dump();
  std::string b = run_scenario(sc).to_json(false).dump();
  EXPECT_EQ(a, b);
  EXPECT_EQ(run_scenario(sc).to_json(true).count("wall_clock_seconds"), 1u);
}

TEST(RunScenario, RequestedChecksOnly) {
  Scenario sc = load_scenario(kScenarios / "hardy-2x2.json");
  sc.checks = {"chain", "gws"};
  Report r = run_scenario(sc);
  EXPECT_EQ(r.verdicts.size(), 2u);
  json j = r.to_json();
  EXPECT_EQ(j["verdicts"].size(), 2u);
  EXPECT_TRUE(j["verdicts"].contains("chain"));
  EXPECT_NE(r.to_text().find("gws"), std::string::npos);
}

TEST(RunScenario, ZeroCoinvariantSlot) {
  Scenario sc = from_text(R"({"name": "zero-q", "factors": [
      {"kind": "hardy", "m": 3, "coinvariant": {"basis": {"rows": 3, "cols": 0, "data": []}}},
      {"kind": "hardy", "m": 3, "coinvariant": {"prefix": 1}}]})");
  Report r = run_scenario(sc);
  // S is everything; the eigenpair hypothesis fails, so no equality is claimed
  EXPECT_EQ(r.system["dim_S"], 9);
  EXPECT_EQ(verdict(r, "additive_formula").details["equality_asserted"], false);
  EXPECT_EQ(verdict(r, "projection_identities").status, "pass");
}

TEST(Report, AnyNonPassVerdictFails) {
  Report r = run_scenario(load_scenario(kScenarios / "hardy-2x2.json"));
  ASSERT_TRUE(r.all_passed());
  r.verdicts.at("gws").status = "uncertified";
  EXPECT_FALSE(r.all_passed());
  EXPECT_EQ(r.to_json()["all_passed"], false);
  EXPECT_NE(r.to_text().find("result: fail"), std::string::npos);
  r.verdicts.erase("gws");
  EXPECT_FALSE(r.all_passed());
}
