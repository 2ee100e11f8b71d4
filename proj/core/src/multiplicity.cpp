#include "oplab/multiplicity.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "oplab/errors.hpp"

namespace oplab {

namespace {

std::vector<Matrix> matrices_of(const OperatorTuple& a) {
  std::vector<Matrix> out;
  out.reserve(a.size());
  for (const Operator& op : a.ops()) out.push_back(op.matrix());
  return out;
}

std::vector<Matrix> compressed_matrices(const OperatorTuple& a, const Subspace& l) {
  if (a.dim() != l.ambient_dim()) throw InputError("tuple and subspace dimensions differ");
  std::vector<Matrix> out;
  out.reserve(a.size());
  const Matrix& b = l.basis();
  for (const Operator& op : a.ops()) out.push_back(b.adjoint() * op.matrix() * b);
  return out;
}

Matrix stack_columns(std::span<const Vector> vectors, Index dim) {
  Matrix cols(dim, static_cast<Index>(vectors.size()));
  for (size_t j = 0; j < vectors.size(); ++j) {
    if (vectors[j].size() != dim) throw InputError("generator dimension mismatch");
    cols.col(static_cast<Index>(j)) = vectors[j];
  }
  return cols;
}

// Closure of span(gens) under ops, all in the same coordinates.  Grows the
// basis one frontier at a time; each round strictly increases the dimension
// or terminates, so at most dim rounds run.
Matrix closure_coords(const std::vector<Matrix>& ops, const Matrix& gens, double tol) {
  const Index k = gens.rows();
  Matrix basis = extend_orthonormal(Matrix(k, 0), gens, tol);
  Matrix frontier = basis;
  while (frontier.cols() > 0 && basis.cols() < k) {
    const Index fc = frontier.cols();
    Matrix candidates(k, fc * static_cast<Index>(ops.size()));
    for (size_t i = 0; i < ops.size(); ++i) {
      candidates.middleCols(static_cast<Index>(i) * fc, fc) = ops[i] * frontier;
    }
    Matrix fresh = extend_orthonormal(basis, candidates, tol);
    const Index old = basis.cols();
    basis.conservativeResize(k, old + fresh.cols());
    basis.rightCols(fresh.cols()) = fresh;
    frontier = std::move(fresh);
  }
  return basis;
}

Index corank_coords(const std::vector<Matrix>& ops, std::span<const Scalar> lambda, double tol) {
  if (ops.empty()) return 0;
  const Index k = ops.front().rows();
  if (k == 0) return 0;
  Matrix stacked(k, k * static_cast<Index>(ops.size()));
  for (size_t i = 0; i < ops.size(); ++i) {
    Matrix shifted = ops[i];
    shifted.diagonal().array() -= lambda[i];
    stacked.middleCols(static_cast<Index>(i) * k, k) = shifted;
  }
  return k - extend_orthonormal(Matrix(k, 0), stacked, tol).cols();
}

Matrix wandering_coords(const std::vector<Matrix>& ops, double tol) {
  const Index k = ops.empty() ? 0 : ops.front().rows();
  Matrix stacked(k, k * static_cast<Index>(ops.size()));
  for (size_t i = 0; i < ops.size(); ++i) stacked.middleCols(static_cast<Index>(i) * k, k) = ops[i];
  const Subspace range = orthonormalize(stacked, tol);
  return orthogonal_complement(range).basis();
}

std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b)};
  return std::mt19937_64(seq);
}

Vector random_unit(std::mt19937_64& rng, Index k) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(k);
  for (Index i = 0; i < k; ++i) v(i) = Scalar(normal(rng), normal(rng));
  const double n = v.norm();
  if (n > 0.0) v /= n;
  return v;
}

void check_lambda(const OperatorTuple& a, std::span<const Scalar> lambda) {
  if (lambda.size() != a.size()) {
    std::ostringstream msg;
    msg << "lambda has " << lambda.size() << " entries for a tuple of size " << a.size();
    throw InputError(msg.str());
  }
}

// Eigenvalues of a small matrix, merged when closer than `merge` and capped.
std::vector<Scalar> clustered_eigenvalues(const Matrix& m, double merge, size_t cap) {
  std::vector<Scalar> out;
  if (m.rows() == 0) return out;
  Eigen::ComplexEigenSolver<Matrix> solver(m, false);
  if (solver.info() != Eigen::Success) return out;
  std::vector<Scalar> values(solver.eigenvalues().begin(), solver.eigenvalues().end());
  std::sort(values.begin(), values.end(), [](Scalar x, Scalar y) {
    if (std::abs(x) != std::abs(y)) return std::abs(x) < std::abs(y);
    if (x.real() != y.real()) return x.real() < y.real();
    return x.imag() < y.imag();
  });
  for (Scalar v : values) {
    const bool seen = std::any_of(out.begin(), out.end(),
                                  [&](Scalar u) { return std::abs(u - v) < merge; });
    if (!seen) out.push_back(v);
    if (out.size() >= cap) break;
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

OperatorTuple::OperatorTuple(std::vector<Operator> ops) : ops_(std::move(ops)) {
  if (ops_.empty()) throw InputError("OperatorTuple needs at least one operator");
  for (const Operator& op : ops_) {
    if (op.dim() != ops_.front().dim()) throw InputError("OperatorTuple dimension mismatch");
  }
  for (size_t i = 0; i < ops_.size(); ++i) {
    for (size_t j = i + 1; j < ops_.size(); ++j) {
      const Matrix c = ops_[i].matrix() * ops_[j].matrix() - ops_[j].matrix() * ops_[i].matrix();
      commutator_residual_ = std::max(commutator_residual_, operator_norm(c));
    }
  }
}

OperatorTuple OperatorTuple::shifted(std::span<const Scalar> lambda) const {
  check_lambda(*this, lambda);
  std::vector<Operator> out;
  out.reserve(ops_.size());
  for (size_t i = 0; i < ops_.size(); ++i) out.push_back(ops_[i].shifted(lambda[i]));
  return OperatorTuple(std::move(out));
}

OperatorTuple OperatorTuple::compressed(const Subspace& l) const {
  std::vector<Operator> out;
  for (Matrix& m : compressed_matrices(*this, l)) out.emplace_back(std::move(m));
  return OperatorTuple(std::move(out));
}

double tuple_invariance_residual(const OperatorTuple& a, const Subspace& l) {
  if (l.is_zero()) return 0.0;
  double worst = 0.0;
  const Matrix& b = l.basis();
  for (const Operator& op : a.ops()) {
    const Matrix image = op.matrix() * b;
    worst = std::max(worst, operator_norm(image - b * (b.adjoint() * image)));
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Closures

Subspace krylov_closure(const OperatorTuple& a, std::span<const Vector> generators, double tol) {
  const Matrix gens = stack_columns(generators, a.dim());
  return Subspace::from_orthonormal(closure_coords(matrices_of(a), gens, tol), tol);
}

Subspace krylov_closure(const OperatorTuple& a, std::span<const Vector> generators,
                        const Subspace& restrict_to) {
  const Matrix gens = stack_columns(generators, a.dim());
  const Matrix& b = restrict_to.basis();
  const Matrix coords =
      closure_coords(compressed_matrices(a, restrict_to), b.adjoint() * gens, restrict_to.tol());
  return Subspace::from_orthonormal(b * coords, restrict_to.tol());
}

ShiftCheckResult shifted_closure_check(const OperatorTuple& a, std::span<const Vector> generators,
                                       std::span<const Scalar> lambda, double tol) {
  check_lambda(a, lambda);
  const Subspace plain = krylov_closure(a, generators, tol);
  const Subspace shifted = krylov_closure(a.shifted(lambda), generators, tol);
  ShiftCheckResult r;
  r.plain_dim = plain.dim();
  r.shifted_dim = shifted.dim();
  r.distance = subspace_distance(plain, shifted);
  r.holds = r.plain_dim == r.shifted_dim && r.distance <= 100.0 * tol;
  return r;
}

Subspace wandering_subspace(const OperatorTuple& a, const Subspace& l) {
  if (l.is_zero()) return l;
  const Matrix coords = wandering_coords(compressed_matrices(a, l), l.tol());
  return Subspace::from_orthonormal(l.basis() * coords, l.tol());
}

bool has_gws(const OperatorTuple& a, const Subspace& l) {
  if (l.is_zero()) return true;
  const std::vector<Matrix> ops = compressed_matrices(a, l);
  const Matrix w = wandering_coords(ops, l.tol());
  return closure_coords(ops, w, l.tol()).cols() == l.dim();
}

Index local_corank(const OperatorTuple& a, const Subspace& l, std::span<const Scalar> lambda) {
  check_lambda(a, lambda);
  return corank_coords(compressed_matrices(a, l), lambda, l.tol());
}

// ---------------------------------------------------------------------------
// Multiplicity

namespace {

std::optional<Matrix> upper_witness_coords(const std::vector<Matrix>& ops, Index k, Index r,
                                           int trials, std::uint64_t seed, double tol,
                                           int& trials_used) {
  if (k == 0) return Matrix(0, 0);
  if (r <= 0) return std::nullopt;
  for (int t = 0; t < trials; ++t) {
    ++trials_used;
    auto rng = make_engine(seed, static_cast<std::uint64_t>(r), static_cast<std::uint64_t>(t));
    Matrix gens(k, r);
    for (Index j = 0; j < r; ++j) gens.col(j) = random_unit(rng, k);
    if (closure_coords(ops, gens, tol).cols() == k) return gens;
  }
  return std::nullopt;
}

}  // namespace

std::optional<std::vector<Vector>> mult_upper(const OperatorTuple& a, const Subspace& l, Index r,
                                              int trials, std::uint64_t seed) {
  int used = 0;
  const auto coords =
      upper_witness_coords(compressed_matrices(a, l), l.dim(), r, trials, seed, l.tol(), used);
  if (!coords) return std::nullopt;
  std::vector<Vector> out;
  for (Index j = 0; j < coords->cols(); ++j) out.push_back(l.basis() * coords->col(j));
  return out;
}

std::vector<Point> lambda_grid(const std::vector<std::vector<Scalar>>& per_slot, size_t cap) {
  std::vector<Point> out;
  if (per_slot.empty()) return out;
  for (const auto& slot : per_slot) {
    if (slot.empty()) return out;
  }
  std::vector<size_t> idx(per_slot.size(), 0);
  while (out.size() < cap) {
    Point p(per_slot.size());
    for (size_t s = 0; s < per_slot.size(); ++s) p[s] = per_slot[s][idx[s]];
    out.push_back(std::move(p));
    // odometer, last slot fastest
    size_t s = per_slot.size();
    while (s > 0) {
      --s;
      if (++idx[s] < per_slot[s].size()) break;
      idx[s] = 0;
      if (s == 0) return out;
    }
  }
  return out;
}

std::vector<Point> random_polydisc_points(size_t n, int count, double radius, std::uint64_t seed) {
  std::vector<Point> out;
  auto rng = make_engine(seed, 0x9e3779b97f4a7c15ULL, n);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int c = 0; c < count; ++c) {
    Point p(n);
    for (size_t i = 0; i < n; ++i) {
      const double rho = radius * std::sqrt(unit(rng));
      const double theta = 2.0 * std::numbers::pi * unit(rng);
      p[i] = std::polar(rho, theta);
    }
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<Point> default_lambda_samples(const OperatorTuple& a, const Subspace& l,
                                          std::uint64_t seed, int random_points) {
  std::vector<Point> out;
  out.emplace_back(a.size(), Scalar(0.0));
  if (!l.is_zero()) {
    std::vector<std::vector<Scalar>> per_slot;
    for (const Matrix& c : compressed_matrices(a, l)) {
      per_slot.push_back(clustered_eigenvalues(c, 1e-6, 8));
    }
    for (Point& p : lambda_grid(per_slot, 512)) out.push_back(std::move(p));
  }
  for (Point& p : random_polydisc_points(a.size(), random_points, 0.9, seed)) {
    out.push_back(std::move(p));
  }
  return out;
}

MultiplicityResult multiplicity(const OperatorTuple& a, const Subspace& l,
                                std::vector<Point> lambda_samples, int trials,
                                std::uint64_t seed) {
  MultiplicityResult result;
  result.seed = seed;
  result.witness_point.assign(a.size(), Scalar(0.0));
  const Index k = l.dim();
  if (k == 0) {
    result.certified = true;
    return result;
  }
  if (lambda_samples.empty()) lambda_samples = default_lambda_samples(a, l, seed);

  const std::vector<Matrix> ops = compressed_matrices(a, l);
  result.lower = -1;
  for (const Point& p : lambda_samples) {
    check_lambda(a, p);
    const Index c = corank_coords(ops, p, l.tol());
    if (c > result.lower) {
      result.lower = c;
      result.witness_point = p;
    }
  }

  for (Index r = std::max<Index>(result.lower, 1); r <= k; ++r) {
    const auto coords = upper_witness_coords(ops, k, r, trials, seed, l.tol(), result.trials_used);
    if (coords) {
      result.upper = r;
      for (Index j = 0; j < coords->cols(); ++j) {
        result.witness_generators.push_back(l.basis() * coords->col(j));
      }
      break;
    }
  }
  if (result.witness_generators.empty()) {
    // the basis of L always generates L
    result.upper = k;
    for (Index j = 0; j < k; ++j) result.witness_generators.push_back(l.basis().col(j));
  }
  result.certified = result.lower == result.upper;
  return result;
}

// ---------------------------------------------------------------------------

std::vector<std::vector<int>> multi_indices(size_t n, int max_degree) {
  std::vector<std::vector<int>> out;
  for (int degree = 0; degree <= max_degree; ++degree) {
    std::vector<int> k(n, 0);
    // enumerate compositions of `degree` into n parts
    auto rec = [&](auto&& self, size_t slot, int left) -> void {
      if (slot + 1 == n) {
        k[slot] = left;
        out.push_back(k);
        return;
      }
      for (int v = left; v >= 0; --v) {
        k[slot] = v;
        self(self, slot + 1, left - v);
      }
    };
    if (n == 0) {
      if (degree == 0) out.emplace_back();
      continue;
    }
    rec(rec, 0, degree);
  }
  return out;
}

SemiInvariantReport semi_invariant_bound_check(const OperatorTuple& a, const Subspace& l1,
                                               const Subspace& l2, int trials,
                                               std::uint64_t seed) {
  SemiInvariantReport report{complement_within(l1, l2), {}, {}, 0.0, 0.0, 0.0, ""};
  const Subspace& l = report.difference;
  report.l1_invariance_residual = tuple_invariance_residual(a, l1);
  report.l2_invariance_residual = tuple_invariance_residual(a, l2);
  report.compressed = multiplicity(a, l, {}, trials, seed);
  report.restricted = multiplicity(a, l1, {}, trials, seed);

  const MultiplicityResult& c = report.compressed;
  const MultiplicityResult& r = report.restricted;
  if (c.upper <= r.lower) {
    report.status = "pass";
  } else if (c.lower > r.upper) {
    report.status = "fail";
  } else {
    report.status = "uncertified";
  }

  // (P_L A P_L)^k = P_L A^k P_{L1} on random vectors
  const Index dim = a.dim();
  const Matrix pl = l.projector();
  const Matrix pl1 = l1.projector();
  std::vector<Matrix> compressed_ops;
  for (const Operator& op : a.ops()) compressed_ops.push_back(pl * op.matrix() * pl);
  auto rng = make_engine(seed, 0xc0ffeeULL, 3);
  std::vector<Vector> probes;
  for (int p = 0; p < 4; ++p) probes.push_back(random_unit(rng, dim));
  for (const auto& k : multi_indices(a.size(), 3)) {
    for (const Vector& x : probes) {
      Vector lhs = x;
      Vector rhs = pl1 * x;
      // A^k = A_1^{k_1} ... A_n^{k_n}: apply the rightmost factor first
      for (size_t i = a.size(); i-- > 0;) {
        for (int e = 0; e < k[i]; ++e) {
          lhs = compressed_ops[i] * lhs;
          rhs = a[i].matrix() * rhs;
        }
      }
      const bool is_identity = std::all_of(k.begin(), k.end(), [](int e) { return e == 0; });
      if (is_identity) lhs = pl * lhs;
      rhs = pl * rhs;
      report.power_identity_residual =
          std::max(report.power_identity_residual, (lhs - rhs).norm());
    }
  }
  return report;
}

}  // namespace oplab
