#pragma once

// Declarative scenarios and the verification pipeline behind `oplab run`.
//
// Scenario JSON:
//
//   {
//     "name": "hardy-2x2",
//     "tol": 1e-10, "trials": 64, "seed": 42,          // optional
//     "checks": ["projection_identities", ...],        // optional
//     "factors": [
//       {"kind": "hardy", "m": 4, "coinvariant": {"prefix": 2}},
//       {"kind": "weighted_bergman", "alpha": 3, "m": 4, "coinvariant": {"prefix": 1}},
//       {"kind": "custom", "weights": [2, 3], "coinvariant": {"prefix": 1}},
//       {"kind": "quotient", "p_roots": [0.3, -0.5], "coinvariant": {"ideal": [0.3]}},
//       {"kind": "matrix", "operator_file": "t.json", "coinvariant": {"basis_file": "q.txt"}}
//     ]
//   }
//
// Roots are numbers, [re, im] pairs, or {"value": ..., "multiplicity": k}.
// "operator"/"basis" may be given inline in the matrix import format
// instead of as files; relative file paths resolve against the scenario's
// directory.  An explicit basis spans Q (the co-invariant subspace).

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "oplab/linalg.hpp"
#include "oplab/model_spaces.hpp"
#include "oplab/multiplicity.hpp"
#include "oplab/tensorized.hpp"

namespace oplab {

inline constexpr const char* kCheckProjectionIdentities = "projection_identities";
inline constexpr const char* kCheckChain = "chain";
inline constexpr const char* kCheckSemiInvariance = "semi_invariance";
inline constexpr const char* kCheckCommutativity = "commutativity";
inline constexpr const char* kCheckShiftLemma = "shift_lemma";
inline constexpr const char* kCheckGws = "gws";
inline constexpr const char* kCheckAdditiveFormula = "additive_formula";
inline constexpr const char* kCheckInequalityOnly = "inequality_only";

/// Smallest accepted scenario tolerance; below it exact orthonormal bases
/// fail their own 10 * tol Gram check in double precision.
inline constexpr double kMinTol = 1e-15;

/// Every known check name, in report order.
const std::vector<std::string>& all_check_names();
/// Checks run when a scenario lists none (everything but inequality_only).
const std::vector<std::string>& default_check_names();

struct CoinvariantSpec {
  enum class Mode { Prefix, Ideal, Basis };
  Mode mode = Mode::Prefix;
  Index prefix = 0;
  std::vector<Root> q_roots;
  Matrix basis;  ///< columns span Q
};

struct FactorSpec {
  std::string kind;  ///< hardy | bergman | dirichlet | weighted_bergman | custom | quotient | matrix
  Index m = 0;
  int alpha = 0;
  std::vector<double> weights;
  std::vector<Root> p_roots;
  Matrix op;  ///< kind == "matrix"
  std::optional<CoinvariantSpec> coinvariant;
};

struct Scenario {
  std::string name;
  std::vector<FactorSpec> factors;
  double tol = kDefaultTol;
  int trials = 64;
  std::uint64_t seed = 42;
  std::vector<std::string> checks;
  nlohmann::json source;  ///< echoed verbatim in the report
};

std::vector<Root> roots_from_json(const nlohmann::json& j);

/// Throws ConfigError on anything unresolvable.
FactorSpec parse_factor_spec(const nlohmann::json& j, const std::filesystem::path& base_dir);
Scenario parse_scenario(const nlohmann::json& j, const std::filesystem::path& base_dir);
Scenario load_scenario(const std::filesystem::path& path);

/// The factor's operator and, when a coinvariant spec is present, its Q.
struct FactorModel {
  Operator t = Operator::zero(0);
  std::optional<Subspace> q;
  std::vector<double> weights;  ///< shift models only
  std::string description;
};

FactorModel build_factor_model(const FactorSpec& spec, double tol = kDefaultTol);
/// Requires a coinvariant spec; co-invariance violations become ConfigError.
TensorFactor build_factor(const FactorSpec& spec, double tol = kDefaultTol);

struct CheckVerdict {
  std::string status;  ///< pass | fail | uncertified
  std::string summary;
  nlohmann::json details;
};

struct Report {
  nlohmann::json scenario;
  double tol = kDefaultTol;
  int trials = 0;
  std::uint64_t seed = 0;
  nlohmann::json hypotheses;
  nlohmann::json system;
  nlohmann::json multiplicities;
  std::map<std::string, CheckVerdict> verdicts;
  std::vector<std::string> check_order;
  double wall_clock_seconds = 0.0;

  bool all_passed() const;
  nlohmann::json to_json(bool include_wall_clock = true) const;
  std::string to_text() const;
};

/// Runs the full pipeline.  Configuration problems throw ConfigError;
/// numerical inconsistencies surface as failed checks.
Report run_scenario(const Scenario& scenario);

nlohmann::json multiplicity_to_json(const MultiplicityResult& r);

}  // namespace oplab
