#include "oplab/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "oplab/errors.hpp"
#include "oplab/matrix_io.hpp"

namespace oplab {

using nlohmann::json;
namespace fs = std::filesystem;

const std::vector<std::string>& all_check_names() {
  static const std::vector<std::string> names = {
      kCheckProjectionIdentities, kCheckChain, kCheckSemiInvariance, kCheckCommutativity,
      kCheckShiftLemma,           kCheckGws,   kCheckAdditiveFormula, kCheckInequalityOnly};
  return names;
}

const std::vector<std::string>& default_check_names() {
  static const std::vector<std::string> names(all_check_names().begin(),
                                              all_check_names().end() - 1);
  return names;
}

namespace {

// ---------------------------------------------------------------- parsing

[[noreturn]] void config_fail(const std::string& what) { throw ConfigError(what); }

const json& require(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) config_fail(where + ": missing \"" + key + "\"");
  return *it;
}

Index positive_index(const json& j, const std::string& what) {
  if (!j.is_number_integer() || j.get<long long>() <= 0) config_fail(what + " must be a positive integer");
  return static_cast<Index>(j.get<long long>());
}

Matrix matrix_field(const json& obj, const char* inline_key, const char* file_key,
                    const fs::path& base_dir, const std::string& where) {
  if (obj.contains(inline_key)) {
    try {
      return matrix_from_json(obj.at(inline_key));
    } catch (const ConfigError& e) {
      config_fail(where + ": " + e.what());
    }
  }
  if (obj.contains(file_key)) {
    const json& f = obj.at(file_key);
    if (!f.is_string()) config_fail(where + ": \"" + file_key + "\" must be a path string");
    fs::path p = f.get<std::string>();
    if (p.is_relative()) p = base_dir / p;
    return load_matrix_file(p);
  }
  config_fail(where + ": expected \"" + inline_key + "\" or \"" + file_key + "\"");
}

CoinvariantSpec parse_coinvariant(const json& j, const fs::path& base_dir, const std::string& where) {
  if (!j.is_object()) config_fail(where + ": coinvariant must be an object");
  int given = static_cast<int>(j.contains("prefix")) + static_cast<int>(j.contains("ideal")) +
              static_cast<int>(j.contains("basis") || j.contains("basis_file"));
  if (given != 1) config_fail(where + ": coinvariant needs exactly one of prefix, ideal, basis");
  CoinvariantSpec c;
  if (j.contains("prefix")) {
    c.mode = CoinvariantSpec::Mode::Prefix;
    c.prefix = positive_index(j.at("prefix"), where + ": prefix");
  } else if (j.contains("ideal")) {
    c.mode = CoinvariantSpec::Mode::Ideal;
    c.q_roots = roots_from_json(j.at("ideal"));
  } else {
    c.mode = CoinvariantSpec::Mode::Basis;
    c.basis = matrix_field(j, "basis", "basis_file", base_dir, where);
  }
  return c;
}

SpaceKind shift_kind(const FactorSpec& spec) {
  if (spec.kind == "hardy") return SpaceKind::hardy();
  if (spec.kind == "bergman") return SpaceKind::bergman();
  if (spec.kind == "dirichlet") return SpaceKind::dirichlet();
  if (spec.kind == "weighted_bergman") return SpaceKind::weighted_bergman(spec.alpha);
  return SpaceKind::custom(spec.weights);
}

bool is_shift_kind(const std::string& kind) {
  return kind == "hardy" || kind == "bergman" || kind == "dirichlet" ||
         kind == "weighted_bergman" || kind == "custom";
}

std::string format_double(double x) {
  std::ostringstream os;
  os.precision(3);
  os << x;
  return os.str();
}

std::string format_scalar(Scalar z) {
  std::ostringstream os;
  os.precision(6);
  if (std::abs(z.imag()) < 1e-12) {
    os << z.real();
  } else {
    os << z.real() << (z.imag() < 0 ? "-" : "+") << std::abs(z.imag()) << "i";
  }
  return os.str();
}

// ---------------------------------------------------------------- pipeline helpers

json residual_entry(double value, double limit) {
  return json{{"value", value}, {"limit", limit}, {"ok", value <= limit}};
}

std::vector<Scalar> eigenvalues(const Operator& op) {
  if (op.dim() == 0) return {};
  Eigen::ComplexEigenSolver<Matrix> solver(op.matrix(), false);
  if (solver.info() != Eigen::Success) throw EigenError("eigenvalue computation did not converge");
  std::vector<Scalar> out(solver.eigenvalues().data(),
                          solver.eigenvalues().data() + solver.eigenvalues().size());
  return out;
}

bool scalar_less(Scalar a, Scalar b) {
  if (std::abs(a) != std::abs(b)) return std::abs(a) < std::abs(b);
  if (a.real() != b.real()) return a.real() < b.real();
  return a.imag() < b.imag();
}

// Sorted, deduplicated within 1e-8, with tiny real/imaginary parts snapped
// to zero so reports do not carry rounding noise.
std::vector<Scalar> clean_values(std::vector<Scalar> v) {
  for (auto& z : v) {
    double re = std::abs(z.real()) < 1e-12 ? 0.0 : z.real();
    double im = std::abs(z.imag()) < 1e-12 ? 0.0 : z.imag();
    z = Scalar(re, im);
  }
  std::sort(v.begin(), v.end(), scalar_less);
  std::vector<Scalar> out;
  for (Scalar z : v) {
    if (out.empty() || std::abs(out.back() - z) > 1e-8) out.push_back(z);
  }
  return out;
}

json point_to_json(const Point& p) {
  json a = json::array();
  for (Scalar z : p) a.push_back(scalar_to_json(z));
  return a;
}

struct FactorHypotheses {
  MultiplicityResult cyclic;
  std::string cyclic_status;
  std::vector<EigenChoice> eigenpairs;
  bool point_spectrum = false;
  bool gws = false;
  size_t choice = 0;  ///< index into eigenpairs
  Scalar shift{0.0, 0.0};
  Index wandering_dim = 0;
  Index unshifted_wandering_dim = 0;
  MultiplicityResult mult_s;
};

std::string bound_status(const MultiplicityResult& r, Index value) {
  if (r.certified && r.upper == value) return "pass";
  if (r.lower > value || r.upper < value) return "fail";
  return "uncertified";
}

// Claim big >= small for two bracketed multiplicities.
std::string ge_status(Index big_lower, Index big_upper, Index small_lower, Index small_upper) {
  if (big_lower >= small_upper) return "pass";
  if (big_upper < small_lower) return "fail";
  return "uncertified";
}

std::string combine(const std::vector<std::string>& statuses) {
  bool uncertified = false;
  for (const auto& s : statuses) {
    if (s == "fail") return "fail";
    if (s == "uncertified") uncertified = true;
  }
  return uncertified ? "uncertified" : "pass";
}

std::string bracket(const MultiplicityResult& r) {
  if (r.certified) return std::to_string(r.upper);
  return "[" + std::to_string(r.lower) + ", " + std::to_string(r.upper) + "]";
}

FactorHypotheses check_hypotheses(const TensorFactor& f, size_t slot, const Scenario& sc) {
  FactorHypotheses h;
  const std::uint64_t seed = sc.seed + 7919ULL * (slot + 1);
  OperatorTuple single({f.t});
  h.cyclic = multiplicity(single, Subspace::full(f.dim(), sc.tol), {}, sc.trials, seed);
  h.cyclic_status = bound_status(h.cyclic, 1);

  if (!f.q.is_zero()) h.eigenpairs = coinvariant_eigenpairs(f);
  h.point_spectrum = !h.eigenpairs.empty() && h.eigenpairs.front().residual <= 10 * sc.tol;

  // The wandering subspace is taken at the point alpha where the
  // eigenvector of T^H|_Q lives: W = S (-) (T - alpha) S.  The lower bound
  // needs every block annihilated at one common point, so the shift is tied
  // to the eigenpair.  Eigenpairs are tried in order and the first whose W
  // generates S is kept.
  h.unshifted_wandering_dim = wandering_subspace(single, f.s).dim();
  std::vector<size_t> usable;
  for (size_t k = 0; k < h.eigenpairs.size(); ++k) {
    if (h.eigenpairs[k].residual <= 10 * sc.tol) usable.push_back(k);
  }
  for (size_t k : usable) {
    OperatorTuple shifted({f.t.shifted(h.eigenpairs[k].lambda)});
    if (has_gws(shifted, f.s)) {
      h.gws = true;
      h.choice = k;
      break;
    }
  }
  if (!h.eigenpairs.empty()) h.shift = h.eigenpairs[h.choice].lambda;
  if (h.eigenpairs.empty()) h.gws = has_gws(single, f.s);
  h.wandering_dim = wandering_subspace(OperatorTuple({f.t.shifted(h.shift)}), f.s).dim();
  h.mult_s = multiplicity(single, f.s, {}, sc.trials, seed + 1);
  return h;
}

// Explicit per-slot candidates followed by the generic sample set.
std::vector<Point> pipeline_samples(const OperatorTuple& a, const Subspace& l,
                                    const std::vector<std::vector<Scalar>>& per_slot,
                                    std::uint64_t seed) {
  std::vector<Point> samples = lambda_grid(per_slot, 256);
  if (l.is_zero()) return samples;
  auto extra = default_lambda_samples(a, l, seed);
  samples.insert(samples.end(), extra.begin(), extra.end());
  return samples;
}

struct WgsConsistency {
  std::string object;
  bool gws = false;
  Index wandering_dim = 0;
  MultiplicityResult mult;
  bool consistent = true;
};

WgsConsistency wws_entry(std::string object, const OperatorTuple& a, const Subspace& l,
                         const MultiplicityResult& mult) {
  WgsConsistency c;
  c.object = std::move(object);
  c.gws = has_gws(a, l);
  c.wandering_dim = wandering_subspace(a, l).dim();
  c.mult = mult;
  c.consistent = !(c.gws && mult.certified) || mult.upper == c.wandering_dim;
  return c;
}

std::vector<Vector> random_vectors(Index dim, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<Vector> out;
  for (int k = 0; k < count; ++k) {
    Vector v(dim);
    for (Index i = 0; i < dim; ++i) v(i) = Scalar(g(rng), g(rng));
    out.push_back(v / v.norm());
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------- parsing API

std::vector<Root> roots_from_json(const json& j) {
  if (!j.is_array()) config_fail("roots must be an array");
  std::vector<Root> roots;
  for (const json& r : j) {
    Root root;
    try {
      if (r.is_object()) {
        root.value = scalar_from_json(r.at("value"));
        if (r.contains("multiplicity")) {
          root.multiplicity = static_cast<int>(positive_index(r.at("multiplicity"), "root multiplicity"));
        }
      } else {
        root.value = scalar_from_json(r);
      }
    } catch (const json::exception& e) {
      config_fail(std::string("bad root entry: ") + e.what());
    }
    roots.push_back(root);
  }
  return roots;
}

FactorSpec parse_factor_spec(const json& j, const fs::path& base_dir) {
  if (!j.is_object()) config_fail("factor spec must be an object");
  FactorSpec spec;
  const json& kind = require(j, "kind", "factor");
  if (!kind.is_string()) config_fail("factor kind must be a string");
  spec.kind = kind.get<std::string>();
  const std::string where = "factor '" + spec.kind + "'";

  if (j.contains("m")) spec.m = positive_index(j.at("m"), where + ": m");
  if (is_shift_kind(spec.kind)) {
    if (spec.kind == "weighted_bergman") {
      spec.alpha = static_cast<int>(positive_index(require(j, "alpha", where), where + ": alpha"));
    }
    if (spec.kind == "custom") {
      const json& w = require(j, "weights", where);
      if (!w.is_array()) config_fail(where + ": weights must be an array");
      for (const json& x : w) {
        if (!x.is_number()) config_fail(where + ": weights must be numbers");
        spec.weights.push_back(x.get<double>());
      }
      Index implied = static_cast<Index>(spec.weights.size()) + 1;
      if (spec.m == 0) spec.m = implied;
      if (spec.m != implied) config_fail(where + ": m must equal len(weights) + 1");
    }
    if (spec.m == 0) config_fail(where + ": missing \"m\"");
  } else if (spec.kind == "quotient") {
    spec.p_roots = roots_from_json(require(j, "p_roots", where));
  } else if (spec.kind == "matrix") {
    spec.op = matrix_field(j, "operator", "operator_file", base_dir, where);
  } else {
    config_fail("unknown factor kind '" + spec.kind + "'");
  }
  if (j.contains("coinvariant")) spec.coinvariant = parse_coinvariant(j.at("coinvariant"), base_dir, where);
  return spec;
}

Scenario parse_scenario(const json& j, const fs::path& base_dir) {
  if (!j.is_object()) config_fail("scenario must be a JSON object");
  Scenario sc;
  sc.source = j;
  try {
    sc.name = j.value("name", std::string("unnamed"));
    if (j.contains("tol")) {
      sc.tol = j.at("tol").get<double>();
      if (!(sc.tol >= kMinTol) || sc.tol >= 1.0) config_fail("tol must lie in [1e-15, 1)");
    }
    if (j.contains("trials")) sc.trials = static_cast<int>(positive_index(j.at("trials"), "trials"));
    if (j.contains("seed")) {
      const json& s = j.at("seed");
      if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0)) {
        config_fail("seed must be a non-negative integer");
      }
      sc.seed = s.get<std::uint64_t>();
    }
    if (j.contains("checks")) {
      const json& c = j.at("checks");
      if (!c.is_array()) config_fail("checks must be an array of names");
      const auto& known = all_check_names();
      for (const json& name : c) {
        if (!name.is_string()) config_fail("check names must be strings");
        std::string s = name.get<std::string>();
        if (std::find(known.begin(), known.end(), s) == known.end()) {
          config_fail("unknown check '" + s + "'");
        }
        if (std::find(sc.checks.begin(), sc.checks.end(), s) == sc.checks.end()) sc.checks.push_back(s);
      }
    }
    const json& factors = require(j, "factors", "scenario");
    if (!factors.is_array()) config_fail("factors must be an array");
    for (const json& f : factors) sc.factors.push_back(parse_factor_spec(f, base_dir));
  } catch (const json::exception& e) {
    config_fail(std::string("malformed scenario: ") + e.what());
  }
  if (sc.factors.size() < 2) config_fail("a scenario needs at least two factors");
  for (const auto& f : sc.factors) {
    if (!f.coinvariant) config_fail("factor '" + f.kind + "' has no coinvariant spec");
  }
  if (sc.checks.empty()) sc.checks = default_check_names();
  return sc;
}

Scenario load_scenario(const fs::path& path) {
  std::ifstream in(path);
  if (!in) config_fail("cannot open scenario file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    config_fail(path.string() + ": " + e.what());
  }
  return parse_scenario(j, path.parent_path());
}

FactorModel build_factor_model(const FactorSpec& spec, double tol) {
  FactorModel model;
  try {
    if (is_shift_kind(spec.kind)) {
      ShiftModel shift = make_shift(shift_kind(spec), spec.m);
      model.t = shift.op;
      model.weights = shift.weights;
      model.description = shift.kind.name() + " shift, m=" + std::to_string(spec.m);
    } else if (spec.kind == "quotient") {
      QuotientModel qm = make_quotient(spec.p_roots);
      model.t = qm.op;
      std::ostringstream os;
      os << "quotient C[z]/(p), roots {";
      for (size_t i = 0; i < qm.roots.size(); ++i) {
        os << (i ? ", " : "") << format_scalar(qm.roots[i].value);
        if (qm.roots[i].multiplicity > 1) os << "^" << qm.roots[i].multiplicity;
      }
      os << "}, m=" << qm.m;
      model.description = os.str();
      if (spec.coinvariant && spec.coinvariant->mode == CoinvariantSpec::Mode::Ideal) {
        model.q = orthogonal_complement(ideal_subspace(qm, spec.coinvariant->q_roots, tol));
      }
    } else if (spec.kind == "matrix") {
      if (spec.op.rows() != spec.op.cols()) config_fail("operator matrix must be square");
      model.t = Operator(spec.op);
      model.description = "explicit operator, m=" + std::to_string(spec.op.rows());
    } else {
      config_fail("unknown factor kind '" + spec.kind + "'");
    }

    const Index m = model.t.dim();
    if (spec.coinvariant && !model.q) {
      const CoinvariantSpec& c = *spec.coinvariant;
      switch (c.mode) {
        case CoinvariantSpec::Mode::Prefix:
          if (c.prefix >= m) config_fail("prefix must be smaller than m");
          model.q = orthonormalize(Matrix(Matrix::Identity(m, c.prefix)), tol);
          break;
        case CoinvariantSpec::Mode::Ideal:
          config_fail("an ideal coinvariant spec needs a quotient factor");
        case CoinvariantSpec::Mode::Basis:
          if (c.basis.rows() != m) config_fail("coinvariant basis must have m rows");
          model.q = orthonormalize(c.basis, tol);
          break;
      }
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    config_fail("factor '" + spec.kind + "': " + e.what());
  }
  return model;
}

TensorFactor build_factor(const FactorSpec& spec, double tol) {
  FactorModel model = build_factor_model(spec, tol);
  if (!model.q) config_fail("factor '" + spec.kind + "' has no coinvariant spec");
  try {
    return TensorFactor::make(model.t, model.q->with_tol(tol));
  } catch (const ModelError& e) {
    config_fail("factor '" + spec.kind + "': " + e.what());
  }
}

nlohmann::json multiplicity_to_json(const MultiplicityResult& r) {
  return json{{"lower", r.lower},
              {"upper", r.upper},
              {"certified", r.certified},
              {"witness_size", r.witness_generators.size()},
              {"witness_point", point_to_json(r.witness_point)},
              {"trials_used", r.trials_used},
              {"seed", r.seed}};
}

// ---------------------------------------------------------------- run_scenario

Report run_scenario(const Scenario& sc) {
  const auto started = std::chrono::steady_clock::now();
  const double tol = sc.tol;
  const double limit = 10 * tol;

  Report rep;
  rep.scenario = sc.source.is_null() ? json{{"name", sc.name}} : sc.source;
  rep.tol = tol;
  rep.trials = sc.trials;
  rep.seed = sc.seed;
  rep.check_order = sc.checks.empty() ? default_check_names() : sc.checks;
  if (sc.factors.size() < 2) config_fail("a scenario needs at least two factors");

  std::vector<TensorFactor> factors;
  std::vector<std::string> descriptions;
  for (const auto& spec : sc.factors) {
    factors.push_back(build_factor(spec, tol));
    descriptions.push_back(build_factor_model(spec, tol).description);
  }
  const size_t n = factors.size();

  // Hypotheses of the additive formula, factor by factor.
  std::vector<FactorHypotheses> hyp;
  rep.hypotheses = json::array();
  std::vector<std::string> failed_hypotheses;
  for (size_t i = 0; i < n; ++i) {
    hyp.push_back(check_hypotheses(factors[i], i, sc));
    const auto& h = hyp.back();
    json eig = json::array();
    for (const auto& e : h.eigenpairs) {
      eig.push_back(json{{"alpha", scalar_to_json(e.lambda)}, {"residual", e.residual}});
    }
    rep.hypotheses.push_back(json{
        {"factor", i},
        {"model", descriptions[i]},
        {"dim", factors[i].dim()},
        {"dim_S", factors[i].s.dim()},
        {"dim_Q", factors[i].q.dim()},
        {"coinvariance_residual", factors[i].coinvariance_residual},
        {"cyclic", {{"status", h.cyclic_status}, {"mult", multiplicity_to_json(h.cyclic)}}},
        {"point_spectrum", {{"holds", h.point_spectrum}, {"eigenpairs", eig}}},
        {"gws",
         {{"holds", h.gws},
          {"alpha", scalar_to_json(h.shift)},
          {"wandering_dim", h.wandering_dim},
          {"unshifted_wandering_dim", h.unshifted_wandering_dim}}},
        {"mult_S_i", multiplicity_to_json(h.mult_s)}});
    const std::string tag = "factor " + std::to_string(i) + ": ";
    if (h.cyclic_status != "pass") {
      failed_hypotheses.push_back(tag + "mult(T) = 1 " +
                                  (h.cyclic_status == "fail" ? "fails (mult " + bracket(h.cyclic) + ")"
                                                             : "is uncertified"));
    }
    if (!h.gws) {
      failed_hypotheses.push_back(tag + "S (-) (T - " + format_scalar(h.shift) +
                                  ") S does not generate S");
    }
    if (!h.point_spectrum) failed_hypotheses.push_back(tag + "T^H|_Q has no usable eigenvalue");
  }

  TensorSystem sys = build_system(factors, tol);
  OperatorTuple tuple = sys.tuple();

  // Structural pipeline.  Numerical inconsistencies are reported as failed
  // checks rather than thrown.
  std::string pipeline_error;
  std::optional<JointInvariantS> js;
  std::optional<XProjections> xp;
  std::optional<ChainDecomposition> chain;
  std::optional<StructureReport> structure;
  std::optional<WanderingE> we;
  std::string e_error;
  try {
    js = joint_invariant_S(sys);
    xp = x_projections(sys);
    chain = f_chain(sys);
    structure = verify_compression_structure(sys, *chain, sc.seed);
  } catch (const InternalConsistencyError& e) {
    pipeline_error = std::string(e.what()) + " (index " + std::to_string(e.index()) +
                     ", residual " + format_double(e.residual()) + ")";
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    pipeline_error = e.what();
  }

  std::vector<Scalar> shifts, alphas;
  bool all_point_spectrum = true;
  for (const auto& h : hyp) {
    shifts.push_back(h.shift);
    all_point_spectrum = all_point_spectrum && h.point_spectrum;
    alphas.push_back(h.shift);
  }
  if (chain && all_point_spectrum) {
    try {
      std::vector<EigenChoice> choices;
      for (const auto& h : hyp) choices.push_back(h.eigenpairs[h.choice]);
      we = wandering_E(sys, choices, shifts);
    } catch (const Error& e) {
      e_error = e.what();
    }
  } else if (!all_point_spectrum) {
    e_error = "some T^H|_Q has no usable eigenvalue";
  }

  // Multiplicities of S and of every level of the chain.
  std::vector<std::vector<Scalar>> per_slot(n);
  for (size_t i = 0; i < n; ++i) {
    std::vector<Scalar> v = {Scalar(0.0, 0.0), hyp[i].shift, alphas[i]};
    for (Scalar z : eigenvalues(compress(factors[i].t, factors[i].q))) v.push_back(z);
    for (Scalar z : eigenvalues(compress(factors[i].t, factors[i].s))) v.push_back(z);
    per_slot[i] = clean_values(v);
  }
  Subspace q_tensor = factors[0].q;
  for (size_t i = 1; i < n; ++i) q_tensor = tensor(q_tensor, factors[i].q);
  const Subspace s_space = js ? js->s : orthogonal_complement(q_tensor);
  MultiplicityResult mult_s = multiplicity(tuple, s_space, pipeline_samples(tuple, s_space, per_slot, sc.seed),
                                           sc.trials, sc.seed);
  std::vector<MultiplicityResult> mult_f;
  if (chain) {
    for (size_t i = 0; i < chain->f_chain.size(); ++i) {
      const Subspace& fi = chain->f_chain[i];
      mult_f.push_back(multiplicity(tuple, fi, pipeline_samples(tuple, fi, per_slot, sc.seed + 101 * (i + 1)),
                                    sc.trials, sc.seed + 101 * (i + 1)));
    }
  }

  Index rhs = 0;
  for (const auto& h : hyp) rhs += h.wandering_dim;

  rep.multiplicities = json::object();
  rep.multiplicities["S"] = multiplicity_to_json(mult_s);
  rep.multiplicities["S"]["dim"] = s_space.dim();
  rep.multiplicities["F"] = json::array();
  for (size_t i = 0; i < mult_f.size(); ++i) {
    json e = multiplicity_to_json(mult_f[i]);
    e["level"] = i + 1;
    e["dim"] = chain->f_chain[i].dim();
    rep.multiplicities["F"].push_back(e);
  }
  rep.multiplicities["S_i"] = json::array();
  for (const auto& h : hyp) rep.multiplicities["S_i"].push_back(multiplicity_to_json(h.mult_s));
  rep.multiplicities["wandering_sum"] = rhs;

  rep.system = json{{"dims", sys.dims}, {"total_dim", sys.total_dim}, {"dim_S", s_space.dim()}};
  if (xp) rep.system["x_ranks"] = xp->ranks;
  if (chain) {
    json dims = json::array();
    for (const auto& f : chain->f_chain) dims.push_back(f.dim());
    rep.system["dim_F_chain"] = dims;
    rep.system["dim_F"] = chain->f.dim();
  }
  if (we) rep.system["dim_E"] = we->e.dim();
  if (!pipeline_error.empty()) rep.system["pipeline_error"] = pipeline_error;
  if (!e_error.empty()) rep.system["wandering_E_error"] = e_error;

  auto residual_verdict = [&](const std::string& what, const json& residuals) {
    CheckVerdict v;
    double worst = 0.0;
    bool ok = true;
    for (const auto& [key, entry] : residuals.items()) {
      ok = ok && entry.at("ok").get<bool>();
      worst = std::max(worst, entry.at("value").get<double>());
    }
    v.status = ok ? "pass" : "fail";
    v.summary = what + (ok ? " hold" : " violated") + " (max residual " + format_double(worst) +
                ", limit " + format_double(limit) + ")";
    v.details = json{{"residuals", residuals}};
    return v;
  };
  auto pipeline_failure = [&](const std::string& what) {
    CheckVerdict v;
    v.status = "fail";
    v.summary = what + " not evaluated: " + pipeline_error;
    v.details = json{{"error", pipeline_error}};
    return v;
  };

  auto want = [&](const char* name) {
    return std::find(rep.check_order.begin(), rep.check_order.end(), name) != rep.check_order.end();
  };

  if (want(kCheckProjectionIdentities)) {
    if (!js || !xp) {
      rep.verdicts[kCheckProjectionIdentities] = pipeline_failure("projection identities");
    } else {
      json r = {{"S_cross_check_distance", residual_entry(js->cross_check_distance, limit)},
                {"S_expansion", residual_entry(js->expansion_residual, limit)},
                {"S_invariance", residual_entry(js->invariance_residual, limit)},
                {"projection_commutators", residual_entry(sys.projection_commutator_residual, limit)},
                {"X_orthogonality", residual_entry(xp->orthogonality_residual, limit)},
                {"X_idempotence", residual_entry(xp->idempotence_residual, limit)},
                {"X_sum_equals_P_S", residual_entry(xp->sum_residual, limit)}};
      auto v = residual_verdict("projection identities", r);
      v.details["x_ranks"] = xp->ranks;
      v.details["dim_S"] = js->s.dim();
      rep.verdicts[kCheckProjectionIdentities] = v;
    }
  }

  if (want(kCheckChain)) {
    if (!chain) {
      rep.verdicts[kCheckChain] = pipeline_failure("chain");
    } else {
      json r = json::object();
      for (size_t i = 0; i < chain->containment_residuals.size(); ++i) {
        std::string key = i == 0 ? "F_1_in_S" : "F_" + std::to_string(i + 1) + "_in_F_" + std::to_string(i);
        r[key] = residual_entry(chain->containment_residuals[i], limit);
      }
      r["F_cross_check_distance"] = residual_entry(chain->f_cross_check_distance, limit);
      r["S_minus_F_1_distance"] = residual_entry(chain->s_minus_f1_distance, limit);
      if (we) {
        r["E_in_F"] = residual_entry(we->containment_in_f, limit);
        r["E_i_in_M_i"] = residual_entry(we->containment_in_m, limit);
        r["E_mutual_orthogonality"] = residual_entry(we->mutual_orthogonality, limit);
      }
      auto v = residual_verdict("chain containments", r);
      if (we && we->e.dim() != rhs) {
        v.status = "fail";
        v.summary = "dim E = " + std::to_string(we->e.dim()) + " differs from the wandering sum " +
                    std::to_string(rhs);
      }
      if (!we) v.details["wandering_E"] = e_error;
      else v.details["dim_E"] = we->e.dim();
      rep.verdicts[kCheckChain] = v;
    }
  }

  if (want(kCheckSemiInvariance)) {
    if (!structure) {
      rep.verdicts[kCheckSemiInvariance] = pipeline_failure("semi-invariance");
    } else {
      json r = {{"semi_invariance", residual_entry(structure->max_semi_invariance(), limit)},
                {"block_orthogonality", residual_entry(structure->block_orthogonality, limit)},
                {"power_preservation", residual_entry(structure->power_preservation, limit)}};
      if (we) r["E_annihilation"] = residual_entry(we->annihilation_residual, limit);
      auto v = residual_verdict("semi-invariance identities", r);
      v.details["per_level"] = structure->semi_invariance;
      rep.verdicts[kCheckSemiInvariance] = v;
    }
  }

  if (want(kCheckCommutativity)) {
    json r = {{"commutator", residual_entry(sys.commutator_residual, limit)},
              {"double_commutator", residual_entry(sys.double_commutator_residual, limit)}};
    if (structure) r["compressed_commutator"] = residual_entry(structure->max_commutator(), limit);
    auto v = residual_verdict("commutation relations", r);
    if (structure) v.details["per_level"] = structure->commutator;
    if (!structure) {
      v.status = "fail";
      v.summary = "compressed tuples not evaluated: " + pipeline_error;
    }
    rep.verdicts[kCheckCommutativity] = v;
  }

  if (want(kCheckShiftLemma)) {
    std::vector<std::vector<Vector>> gen_sets;
    if (!mult_s.witness_generators.empty()) gen_sets.push_back(mult_s.witness_generators);
    for (const auto& mf : mult_f) {
      if (!mf.witness_generators.empty()) gen_sets.push_back(mf.witness_generators);
    }
    gen_sets.push_back(random_vectors(sys.total_dim, 2, sc.seed + 17));
    std::vector<Point> points;
    if (mult_s.witness_point.size() == n) points.push_back(mult_s.witness_point);
    points.push_back(shifts);
    for (auto& p : random_polydisc_points(n, 4, 0.9, sc.seed + 23)) points.push_back(p);

    CheckVerdict v;
    int total = 0, held = 0;
    double worst = 0.0;
    for (const auto& g : gen_sets) {
      for (const auto& p : points) {
        auto res = shifted_closure_check(tuple, g, p, tol);
        ++total;
        held += res.holds ? 1 : 0;
        worst = std::max(worst, res.distance);
      }
    }
    v.status = held == total ? "pass" : "fail";
    v.summary = std::to_string(held) + "/" + std::to_string(total) +
                " shifted closures agree (max distance " + format_double(worst) + ")";
    v.details = json{{"instances", total}, {"held", held}, {"max_distance", worst}, {"limit", 100 * tol}};
    rep.verdicts[kCheckShiftLemma] = v;
  }

  if (want(kCheckGws)) {
    std::vector<WgsConsistency> entries;
    entries.push_back(wws_entry("S", tuple, s_space, mult_s));
    if (chain) {
      for (size_t i = 0; i < mult_f.size(); ++i) {
        entries.push_back(wws_entry("F_" + std::to_string(i + 1), tuple, chain->f_chain[i], mult_f[i]));
      }
    }
    for (size_t i = 0; i < n; ++i) {
      entries.push_back(wws_entry("S_" + std::to_string(i), OperatorTuple({factors[i].t}), factors[i].s,
                                  hyp[i].mult_s));
    }
    // Multiplicities do not move under a shift, so the same results apply
    // to the tuple recentred at alpha.
    const bool centred = std::all_of(shifts.begin(), shifts.end(), [](Scalar z) { return std::abs(z) == 0.0; });
    if (!centred) {
      OperatorTuple at_alpha = tuple.shifted(shifts);
      entries.push_back(wws_entry("S at alpha", at_alpha, s_space, mult_s));
      if (chain) {
        for (size_t i = 0; i < mult_f.size(); ++i) {
          entries.push_back(wws_entry("F_" + std::to_string(i + 1) + " at alpha", at_alpha, chain->f_chain[i],
                                      mult_f[i]));
        }
      }
      for (size_t i = 0; i < n; ++i) {
        entries.push_back(wws_entry("S_" + std::to_string(i) + " at alpha",
                                    OperatorTuple({factors[i].t.shifted(shifts[i])}), factors[i].s, hyp[i].mult_s));
      }
    }
    CheckVerdict v;
    int applicable = 0, bad = 0;
    json list = json::array();
    for (const auto& e : entries) {
      bool applies = e.gws && e.mult.certified;
      applicable += applies ? 1 : 0;
      bad += e.consistent ? 0 : 1;
      list.push_back(json{{"object", e.object},
                          {"gws", e.gws},
                          {"wandering_dim", e.wandering_dim},
                          {"mult", bracket(e.mult)},
                          {"certified", e.mult.certified},
                          {"consistent", e.consistent}});
    }
    v.status = bad == 0 ? "pass" : "fail";
    v.summary = std::to_string(applicable) + " objects with GWS and certified multiplicity, " +
                std::to_string(bad) + " where mult differs from the wandering dimension";
    v.details = json{{"objects", list}};
    rep.verdicts[kCheckGws] = v;
  }

  // Inequalities licensed without the cyclicity hypothesis.
  json ineq_claims = json::array();
  std::vector<std::string> ineq_statuses;
  auto add_claim = [&](const std::string& claim, const std::string& status, json detail) {
    detail["claim"] = claim;
    detail["status"] = status;
    ineq_claims.push_back(detail);
    ineq_statuses.push_back(status);
  };
  if (!mult_f.empty()) {
    const auto& mf = mult_f.back();
    add_claim("mult(S) >= mult(P_F T|_F)", ge_status(mult_s.lower, mult_s.upper, mf.lower, mf.upper),
              json{{"mult_S", bracket(mult_s)}, {"mult_F", bracket(mf)}});
    const MultiplicityResult* prev = &mult_s;
    for (size_t i = 0; i < mult_f.size(); ++i) {
      std::string from = i == 0 ? "S" : "F_" + std::to_string(i);
      add_claim("mult(" + from + ") >= mult(F_" + std::to_string(i + 1) + ")",
                ge_status(prev->lower, prev->upper, mult_f[i].lower, mult_f[i].upper),
                json{{"left", bracket(*prev)}, {"right", bracket(mult_f[i])}});
      prev = &mult_f[i];
    }
  } else {
    add_claim("mult(S) >= mult(P_F T|_F)", "fail", json{{"error", pipeline_error}});
  }
  bool gws_and_spectrum = all_point_spectrum;
  for (const auto& h : hyp) gws_and_spectrum = gws_and_spectrum && h.gws;
  if (gws_and_spectrum) {
    add_claim("mult(S) >= sum dim wandering(S_i)",
              ge_status(mult_s.lower, mult_s.upper, rhs, rhs),
              json{{"mult_S", bracket(mult_s)}, {"wandering_sum", rhs}});
  }
  const std::string ineq_status = combine(ineq_statuses);

  if (want(kCheckAdditiveFormula)) {
    CheckVerdict v;
    std::ostringstream sum;
    for (size_t i = 0; i < n; ++i) sum << (i ? " + " : "") << hyp[i].wandering_dim;
    if (failed_hypotheses.empty()) {
      v.status = bound_status(mult_s, rhs);
      if (v.status == "pass") {
        v.summary = "mult(S) = " + std::to_string(mult_s.upper) + " = " + sum.str() +
                    " (certified, sum of wandering dimensions)";
      } else if (v.status == "fail") {
        v.summary = "mult(S) = " + bracket(mult_s) + " differs from " + sum.str() + " = " + std::to_string(rhs);
      } else {
        v.summary = "mult(S) in " + bracket(mult_s) + " not certified; expected " + std::to_string(rhs);
      }
      v.details = json{{"mode", "equality"},
                       {"equality_asserted", true},
                       {"mult_S", multiplicity_to_json(mult_s)},
                       {"wandering_dims", json::array()},
                       {"wandering_sum", rhs}};
      for (const auto& h : hyp) v.details["wandering_dims"].push_back(h.wandering_dim);
      if (we) v.details["dim_E"] = we->e.dim();
    } else {
      v.status = ineq_status;
      std::ostringstream os;
      os << "hypothesis failed (" << failed_hypotheses.front()
         << "); equality not asserted, inequality-only: ";
      os << "mult(S) = " << bracket(mult_s);
      if (!mult_f.empty()) os << " >= mult(P_F T|_F) = " << bracket(mult_f.back());
      os << " " << (ineq_status == "pass" ? "holds" : ineq_status == "fail" ? "violated" : "uncertified");
      v.summary = os.str();
      v.details = json{{"mode", "inequality_only"},
                       {"equality_asserted", false},
                       {"failed_hypotheses", failed_hypotheses},
                       {"claims", ineq_claims},
                       {"wandering_sum", rhs}};
    }
    rep.verdicts[kCheckAdditiveFormula] = v;
  }

  if (want(kCheckInequalityOnly)) {
    CheckVerdict v;
    v.status = ineq_status;
    v.summary = std::to_string(ineq_claims.size()) + " inequality claims, status " + ineq_status +
                "; equality not asserted";
    v.details = json{{"claims", ineq_claims},
                     {"equality_asserted", false},
                     {"failed_hypotheses", failed_hypotheses}};
    rep.verdicts[kCheckInequalityOnly] = v;
  }

  rep.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return rep;
}

}  // namespace oplab
