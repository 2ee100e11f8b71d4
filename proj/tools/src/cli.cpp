#include "oplab_cli/cli.hpp"

#include <algorithm>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "oplab/errors.hpp"
#include "oplab/matrix_io.hpp"
#include "oplab/scenario.hpp"

namespace oplab::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct GlobalOptions {
  double tol = kDefaultTol;
  int trials = 64;
  std::uint64_t seed = 42;
  std::string format = "json";
  std::string out_path;
  CLI::Option* tol_opt = nullptr;
  CLI::Option* trials_opt = nullptr;
  CLI::Option* seed_opt = nullptr;
};

// Explicit flags win over the values stored in a scenario file.
void apply_overrides(Scenario& sc, const GlobalOptions& g) {
  if (g.tol_opt->count() > 0) {
    if (g.tol < kMinTol || g.tol >= 1.0) throw ConfigError("--tol must lie in [1e-15, 1)");
    sc.tol = g.tol;
  }
  if (g.trials_opt->count() > 0) sc.trials = g.trials;
  if (g.seed_opt->count() > 0) sc.seed = g.seed;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) parts.push_back(cur);
  return parts;
}

double parse_number(const std::string& s, const std::string& what) {
  try {
    size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("bad " + what + " '" + s + "'");
  }
}

// Compact model specs: hardy:4, bergman:4, dirichlet:3,
// weighted_bergman:ALPHA:M, custom:w1,w2,..., quotient:r1,r2,... (real
// roots).  Anything else is read as a factor-spec JSON file.
FactorSpec parse_model_spec(const std::string& text) {
  auto parts = split(text, ':');
  const std::string kind = parts.empty() ? "" : parts[0];
  json j;
  if ((kind == "hardy" || kind == "bergman" || kind == "dirichlet") && parts.size() == 2) {
    j = {{"kind", kind}, {"m", static_cast<long long>(parse_number(parts[1], "dimension"))}};
  } else if (kind == "weighted_bergman" && parts.size() == 3) {
    j = {{"kind", kind},
         {"alpha", static_cast<long long>(parse_number(parts[1], "alpha"))},
         {"m", static_cast<long long>(parse_number(parts[2], "dimension"))}};
  } else if (kind == "custom" && parts.size() == 2) {
    json w = json::array();
    for (const auto& x : split(parts[1], ',')) w.push_back(parse_number(x, "weight"));
    j = {{"kind", kind}, {"weights", w}};
  } else if (kind == "quotient" && parts.size() == 2) {
    json r = json::array();
    for (const auto& x : split(parts[1], ',')) r.push_back(parse_number(x, "root"));
    j = {{"kind", kind}, {"p_roots", r}};
  } else {
    fs::path p = text;
    std::ifstream in(p);
    if (!in) throw ConfigError("unrecognized model spec '" + text + "'");
    try {
      j = json::parse(in);
    } catch (const json::exception& e) {
      throw ConfigError(p.string() + ": " + e.what());
    }
    return parse_factor_spec(j, p.parent_path());
  }
  return parse_factor_spec(j, fs::current_path());
}

class Output {
 public:
  Output(const GlobalOptions& g, std::ostream& out) : out_(out) {
    if (!g.out_path.empty()) {
      file_.open(g.out_path);
      if (!file_) throw ConfigError("cannot write " + g.out_path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : out_; }

 private:
  std::ostream& out_;
  std::ofstream file_;
};

int run_command(const GlobalOptions& g, const std::string& path, std::ostream& out) {
  Scenario sc = load_scenario(path);
  apply_overrides(sc, g);
  Report rep = run_scenario(sc);
  Output o(g, out);
  if (g.format == "text") {
    o.stream() << rep.to_text();
  } else {
    o.stream() << rep.to_json().dump(2) << "\n";
  }
  return rep.all_passed() ? kExitPass : kExitCheckFailure;
}

struct SuiteEntry {
  std::string file;
  std::optional<Report> report;
  std::string error;
};

int suite_command(const GlobalOptions& g, const std::string& dir, std::ostream& out) {
  if (!fs::is_directory(dir)) throw ConfigError("not a directory: " + dir);
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw ConfigError("no scenario files in " + dir);

  std::vector<std::future<SuiteEntry>> jobs;
  for (const auto& f : files) {
    jobs.push_back(std::async(std::launch::async, [f, &g] {
      SuiteEntry entry{f.filename().string(), std::nullopt, ""};
      try {
        Scenario sc = load_scenario(f);
        apply_overrides(sc, g);
        entry.report = run_scenario(sc);
      } catch (const Error& e) {
        entry.error = e.what();
      }
      return entry;
    }));
  }
  std::vector<SuiteEntry> entries;
  for (auto& j : jobs) entries.push_back(j.get());

  int passed = 0, failed = 0, errors = 0;
  for (const auto& e : entries) {
    if (!e.report) ++errors;
    else if (e.report->all_passed()) ++passed;
    else ++failed;
  }

  Output o(g, out);
  if (g.format == "text") {
    for (const auto& e : entries) {
      o.stream() << e.file << ": ";
      if (!e.report) {
        o.stream() << "config error: " << e.error << "\n";
        continue;
      }
      o.stream() << (e.report->all_passed() ? "pass" : "fail") << "\n";
      std::istringstream lines(e.report->to_text());
      std::string line;
      while (std::getline(lines, line)) o.stream() << "  " << line << "\n";
    }
    o.stream() << passed << " passed, " << failed << " failed, " << errors << " config errors\n";
  } else {
    json reports = json::array();
    for (const auto& e : entries) {
      json r = {{"file", e.file}};
      if (e.report) r["report"] = e.report->to_json();
      else r["error"] = e.error;
      reports.push_back(r);
    }
    json doc = {{"reports", reports},
                {"passed", passed},
                {"failed", failed},
                {"config_errors", errors},
                {"all_passed", failed == 0 && errors == 0}};
    o.stream() << doc.dump(2) << "\n";
  }
  if (errors > 0) return kExitConfigError;
  return failed == 0 ? kExitPass : kExitCheckFailure;
}

int model_dump_command(const GlobalOptions& g, const std::string& spec_text, std::ostream& out) {
  FactorSpec spec = parse_model_spec(spec_text);
  FactorModel model = build_factor_model(spec, g.tol);
  Output o(g, out);
  if (g.format == "text") {
    o.stream() << "# " << model.description << "\n" << matrix_to_text(model.t.matrix());
    if (model.q) o.stream() << "# Q basis\n" << matrix_to_text(model.q->basis());
  } else {
    json doc = {{"model", model.description}, {"operator", matrix_to_json(model.t.matrix())}};
    if (!model.weights.empty()) doc["weights"] = model.weights;
    if (model.q) {
      doc["q_basis"] = matrix_to_json(model.q->basis());
      doc["coinvariance_residual"] = coinvariance_residual(model.t, *model.q);
    }
    o.stream() << doc.dump(2) << "\n";
  }
  return kExitPass;
}

int closure_command(const GlobalOptions& g, const std::string& spec_text, const std::string& vectors_file,
                    std::ostream& out) {
  FactorSpec spec = parse_model_spec(spec_text);
  FactorModel model = build_factor_model(spec, g.tol);
  Matrix gens = load_matrix_file(vectors_file);
  if (gens.rows() != model.t.dim()) {
    throw ConfigError("generator vectors must have " + std::to_string(model.t.dim()) + " rows");
  }
  std::vector<Vector> g_list;
  for (Index c = 0; c < gens.cols(); ++c) g_list.push_back(gens.col(c));
  OperatorTuple a({model.t});
  Subspace closure = krylov_closure(a, g_list, g.tol);
  Output o(g, out);
  if (g.format == "text") {
    o.stream() << "# closure of " << gens.cols() << " vectors under " << model.description
               << ": dim " << closure.dim() << "\n"
               << matrix_to_text(closure.basis());
  } else {
    json doc = {{"model", model.description},
                {"generators", gens.cols()},
                {"dim", closure.dim()},
                {"ambient_dim", closure.ambient_dim()},
                {"basis", matrix_to_json(closure.basis())}};
    o.stream() << doc.dump(2) << "\n";
  }
  return kExitPass;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"oplab: multiplicity verifier for tensor products of shift-type operators", "oplab"};
  app.require_subcommand(1);
  GlobalOptions g;
  g.tol_opt = app.add_option("--tol", g.tol, "rank tolerance")->check(CLI::PositiveNumber);
  g.trials_opt = app.add_option("--trials", g.trials, "random trials per multiplicity bound")
                     ->check(CLI::PositiveNumber);
  g.seed_opt = app.add_option("--seed", g.seed, "random seed");
  app.add_option("--format", g.format, "output format")->check(CLI::IsMember({"json", "text"}));
  app.add_option("--out", g.out_path, "write output to a file instead of stdout");

  std::string scenario_path, suite_dir, model_spec, closure_spec, vectors_file;
  auto* run = app.add_subcommand("run", "run one scenario and print its report")->fallthrough();
  run->add_option("scenario", scenario_path, "scenario JSON file")->required();
  auto* suite = app.add_subcommand("suite", "run every scenario in a directory")->fallthrough();
  suite->add_option("dir", suite_dir, "directory of scenario files")->required();
  auto* model = app.add_subcommand("model", "inspect factor models")->fallthrough();
  model->require_subcommand(1);
  auto* dump = model->add_subcommand("dump", "print a model's operator matrix")->fallthrough();
  dump->add_option("spec", model_spec, "hardy:4, weighted_bergman:3:4, quotient:0.3,-0.5, or a JSON file")
      ->required();
  auto* closure = app.add_subcommand("closure", "Krylov closure of vectors under a model")->fallthrough();
  closure->add_option("spec", closure_spec, "model spec as for `model dump`")->required();
  closure->add_option("vectors", vectors_file, "matrix file whose columns are the generators")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitPass;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitPass;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kExitConfigError;
  }

  try {
    if (*run) return run_command(g, scenario_path, out);
    if (*suite) return suite_command(g, suite_dir, out);
    if (*dump) return model_dump_command(g, model_spec, out);
    if (*closure) return closure_command(g, closure_spec, vectors_file, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitCheckFailure;
  }
  err << app.help();
  return kExitConfigError;
}

}  // namespace oplab::cli
