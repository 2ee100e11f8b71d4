#include "oplab/tensorized.hpp"

#include <algorithm>
#include <random>
#include <sstream>

#include "oplab/errors.hpp"
#include "oplab/model_spaces.hpp"

namespace oplab {

namespace {

Matrix identity(Index n) { return Matrix::Identity(n, n); }

// Q~_first * ... * Q~_{last-1}; identity for an empty range.
Matrix q_product(const TensorSystem& sys, size_t first, size_t last) {
  Matrix out = identity(sys.total_dim);
  for (size_t t = first; t < last; ++t) out = out * sys.qproj[t];
  return out;
}

Matrix x_projection(const TensorSystem& sys, size_t i) {
  return sys.p[i] * q_product(sys, i + 1, sys.n());
}

Subspace range_of(const Matrix& projector, double tol) { return orthonormalize(projector, tol); }

double max_of(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, x);
  return m;
}

// Summands of P_{F_i} for chain level `level` (0-based, F_{level+1}).
std::vector<Matrix> level_summands(const TensorSystem& sys, const std::vector<Matrix>& x,
                                   size_t level) {
  const size_t n = sys.n();
  std::vector<Matrix> out;
  out.reserve(n);
  for (size_t j = 0; j < n; ++j) {
    if (j <= level) {
      out.push_back(q_product(sys, 0, j) * x[j]);
    } else if (j + 1 < n) {
      out.push_back(q_product(sys, 0, level) * x[j]);
    } else {
      out.push_back(q_product(sys, 0, level) * sys.qproj[n - 2] * x[j]);
    }
  }
  return out;
}

Matrix kron_all(const std::vector<Matrix>& parts) {
  Matrix out = Matrix::Ones(1, 1);
  for (const Matrix& m : parts) out = kronecker(out, m);
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

TensorFactor TensorFactor::make(Operator t, Subspace q) {
  if (q.ambient_dim() != t.dim()) throw ModelError("co-invariant subspace has the wrong ambient dimension");
  const double residual = oplab::coinvariance_residual(t, q);
  if (residual > 10.0 * q.tol()) {
    std::ostringstream msg;
    msg << "Q is not T^H-invariant (residual " << residual << ")";
    throw ModelError(msg.str());
  }
  Subspace s = orthogonal_complement(q);
  Matrix p = s.projector();
  Matrix qproj = identity(t.dim()) - p;
  return TensorFactor{std::move(t), std::move(q), std::move(s), std::move(p), std::move(qproj),
                      residual};
}

Matrix lift(const Matrix& op, size_t slot, const std::vector<Index>& dims) {
  Index before = 1;
  Index after = 1;
  for (size_t k = 0; k < dims.size(); ++k) {
    if (k < slot) before *= dims[k];
    if (k > slot) after *= dims[k];
  }
  return kronecker(kronecker(identity(before), op), identity(after));
}

OperatorTuple TensorSystem::tuple() const {
  std::vector<Operator> ops;
  for (const Matrix& m : t) ops.emplace_back(m);
  return OperatorTuple(std::move(ops));
}

TensorSystem build_system(std::vector<TensorFactor> factors, double tol) {
  if (factors.size() < 2) throw InputError("build_system: need at least two factors");
  TensorSystem sys;
  sys.tol = tol;
  sys.total_dim = 1;
  for (const TensorFactor& f : factors) {
    if (f.coinvariance_residual > 10.0 * tol) throw ModelError("factor Q is not co-invariant");
    sys.dims.push_back(f.dim());
    sys.total_dim *= f.dim();
  }
  sys.factors = std::move(factors);
  const Matrix id = identity(sys.total_dim);
  for (size_t i = 0; i < sys.n(); ++i) {
    sys.t.push_back(lift(sys.factors[i].t.matrix(), i, sys.dims));
    sys.p.push_back(lift(sys.factors[i].p, i, sys.dims));
    sys.qproj.push_back(id - sys.p.back());
  }
  for (size_t i = 0; i < sys.n(); ++i) {
    for (size_t j = 0; j < sys.n(); ++j) {
      if (i == j) continue;
      sys.commutator_residual = std::max(
          sys.commutator_residual, operator_norm(sys.t[i] * sys.t[j] - sys.t[j] * sys.t[i]));
      sys.double_commutator_residual =
          std::max(sys.double_commutator_residual,
                   operator_norm(sys.t[i].adjoint() * sys.t[j] - sys.t[j] * sys.t[i].adjoint()));
      sys.projection_commutator_residual =
          std::max(sys.projection_commutator_residual,
                   operator_norm(sys.p[i] * sys.p[j] - sys.p[j] * sys.p[i]));
    }
  }
  return sys;
}

// ---------------------------------------------------------------------------

JointInvariantS joint_invariant_S(const TensorSystem& sys) {
  const Matrix id = identity(sys.total_dim);
  const Matrix ps_lemma = id - q_product(sys, 0, sys.n());
  const Subspace from_projections = range_of(ps_lemma, sys.tol);

  Subspace q_tensor = sys.factors.front().q.with_tol(sys.tol);
  for (size_t i = 1; i < sys.n(); ++i) q_tensor = tensor(q_tensor, sys.factors[i].q.with_tol(sys.tol));
  const Subspace from_tensor = orthogonal_complement(q_tensor);

  JointInvariantS out{from_tensor, 0.0, 0.0, 0.0};
  out.cross_check_distance = subspace_distance(from_projections, from_tensor);
  if (out.cross_check_distance > sys.tol) {
    std::ostringstream msg;
    msg << "joint_invariant_S: projection and tensor constructions differ by "
        << out.cross_check_distance;
    throw InternalConsistencyError(msg.str(), -1, out.cross_check_distance);
  }

  Matrix expansion = Matrix::Zero(sys.total_dim, sys.total_dim);
  for (size_t i = 0; i < sys.n(); ++i) expansion += x_projection(sys, i);
  out.expansion_residual = operator_norm(ps_lemma - expansion);

  const Matrix ps = out.s.projector();
  for (const Matrix& t : sys.t) {
    out.invariance_residual = std::max(out.invariance_residual, operator_norm((id - ps) * t * ps));
  }
  return out;
}

XProjections x_projections(const TensorSystem& sys) {
  XProjections out;
  const Index nn = sys.total_dim;
  Matrix total = Matrix::Zero(nn, nn);
  for (size_t i = 0; i < sys.n(); ++i) {
    out.x.push_back(x_projection(sys, i));
    total += out.x.back();
    out.ranks.push_back(static_cast<Index>(std::llround(out.x.back().trace().real())));
  }
  for (size_t a = 0; a < sys.n(); ++a) {
    const Matrix& xa = out.x[a];
    out.idempotence_residual = std::max(
        {out.idempotence_residual, operator_norm(xa * xa - xa), operator_norm(xa - xa.adjoint())});
    for (size_t b = 0; b < sys.n(); ++b) {
      if (a != b) out.orthogonality_residual = std::max(out.orthogonality_residual, operator_norm(xa * out.x[b]));
    }
  }
  const Matrix ps = identity(nn) - q_product(sys, 0, sys.n());
  out.sum_residual = operator_norm(total - ps);
  return out;
}

ChainDecomposition f_chain(const TensorSystem& sys) {
  const size_t n = sys.n();
  ChainDecomposition out{{}, joint_invariant_S(sys).s, {}, Subspace::zero(sys.total_dim, sys.tol),
                         {}, {}, {}, 0.0, 0.0};
  for (size_t i = 0; i < n; ++i) out.x.push_back(x_projection(sys, i));

  for (size_t level = 0; level + 1 < n; ++level) {
    std::vector<Matrix> summands = level_summands(sys, out.x, level);
    Matrix pf = Matrix::Zero(sys.total_dim, sys.total_dim);
    for (const Matrix& m : summands) pf += m;
    out.f_chain.push_back(range_of(pf, sys.tol));
    out.level_summands.push_back(std::move(summands));
  }
  out.f = out.f_chain.back();

  for (size_t j = 0; j < n; ++j) {
    out.m_summands.push_back(sys.p[j] * q_product(sys, 0, j) * q_product(sys, j + 1, n));
  }

  // containments S >= F_1 >= ... >= F_{n-1}
  const Subspace* outer = &out.s;
  for (size_t i = 0; i < out.f_chain.size(); ++i) {
    const double r = containment_residual(out.f_chain[i], *outer);
    out.containment_residuals.push_back(r);
    if (r > 10.0 * sys.tol) {
      std::ostringstream msg;
      msg << "f_chain: F_" << i + 1 << " is not contained in "
          << (i == 0 ? std::string("S") : "F_" + std::to_string(i)) << " (residual " << r << ")";
      throw InternalConsistencyError(msg.str(), static_cast<int>(i + 1), r);
    }
    outer = &out.f_chain[i];
  }

  // F straight from its defining direct sum
  Matrix cols(sys.total_dim, 0);
  for (size_t j = 0; j < n; ++j) {
    const Matrix term = q_product(sys, 0, j) * out.x[j];
    Matrix grown(sys.total_dim, cols.cols() + term.cols());
    grown << cols, term;
    cols = std::move(grown);
  }
  out.f_cross_check_distance = subspace_distance(orthonormalize(cols, sys.tol), out.f);

  const Subspace gap = complement_within(out.s, out.f_chain.front());
  const Subspace top = range_of(sys.p[n - 2] * sys.p[n - 1], sys.tol);
  out.s_minus_f1_distance = subspace_distance(gap, top);
  return out;
}

// ---------------------------------------------------------------------------

double StructureReport::max_semi_invariance() const {
  double m = 0.0;
  for (const auto& row : semi_invariance) m = std::max(m, max_of(row));
  return m;
}
double StructureReport::max_commutator() const { return max_of(commutator); }

StructureReport verify_compression_structure(const TensorSystem& sys,
                                             const ChainDecomposition& chain,
                                             std::uint64_t seed) {
  StructureReport report;
  const size_t n = sys.n();
  const Index nn = sys.total_dim;

  std::vector<const Subspace*> levels{&chain.s};
  for (const Subspace& f : chain.f_chain) levels.push_back(&f);

  // semi-invariance of F_{i-1} (-) F_i under the compression to F_{i-1}
  for (size_t i = 1; i < levels.size(); ++i) {
    const Matrix outer = levels[i - 1]->projector();
    const Matrix diff = complement_within(*levels[i - 1], *levels[i]).projector();
    std::vector<double> row;
    for (size_t s = 0; s < n; ++s) {
      row.push_back(operator_norm(outer * sys.t[s] * diff - diff * sys.t[s] * diff));
    }
    report.semi_invariance.push_back(std::move(row));
  }

  for (const Subspace* level : levels) {
    const Matrix pf = level->projector();
    std::vector<Matrix> c;
    for (const Matrix& t : sys.t) c.push_back(pf * t * pf);
    double worst = 0.0;
    for (size_t s = 0; s < n; ++s) {
      for (size_t t = s + 1; t < n; ++t) worst = std::max(worst, operator_norm(c[s] * c[t] - c[t] * c[s]));
    }
    report.commutator.push_back(worst);
  }

  std::mt19937_64 rng(seed ^ 0x5eedULL);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Vector> probes;
  for (int p = 0; p < 4; ++p) {
    Vector v(nn);
    for (Index k = 0; k < nn; ++k) v(k) = Scalar(normal(rng), normal(rng));
    probes.push_back(v / v.norm());
  }
  const auto powers = multi_indices(n, 3);

  const auto& ms = chain.m_summands;
  for (size_t j = 0; j < ms.size(); ++j) {
    for (size_t k = 0; k < ms.size(); ++k) {
      if (j == k) continue;
      for (const Matrix& t : sys.t) {
        report.block_orthogonality = std::max(report.block_orthogonality, operator_norm(ms[j] * t * ms[k]));
      }
    }
  }

  const Matrix pf = chain.f.projector();
  std::vector<Matrix> c;
  for (const Matrix& t : sys.t) c.push_back(pf * t * pf);
  for (const auto& k : powers) {
    for (const Vector& x : probes) {
      Vector lhs = pf * x;
      std::vector<Vector> parts;
      for (const Matrix& m : ms) parts.push_back(m * x);
      for (size_t s = n; s-- > 0;) {
        for (int e = 0; e < k[s]; ++e) {
          lhs = c[s] * lhs;
          for (Vector& part : parts) part = sys.t[s] * part;
        }
      }
      Vector rhs = Vector::Zero(nn);
      for (size_t j = 0; j < ms.size(); ++j) rhs += ms[j] * parts[j];
      report.power_preservation = std::max(report.power_preservation, (lhs - rhs).norm());
    }
  }
  return report;
}

// ---------------------------------------------------------------------------

std::vector<EigenChoice> coinvariant_eigenpairs(const TensorFactor& factor) {
  std::vector<EigenChoice> out;
  if (factor.q.is_zero()) return out;
  const Matrix& b = factor.q.basis();
  const Matrix tadj = factor.t.matrix().adjoint();
  const Matrix c = b.adjoint() * tadj * b;
  Eigen::ComplexEigenSolver<Matrix> solver(c, false);
  if (solver.info() != Eigen::Success) throw EigenError("eigendecomposition of T^H|_Q failed");

  std::vector<Scalar> mus;
  for (Index k = 0; k < solver.eigenvalues().size(); ++k) {
    const Scalar mu = solver.eigenvalues()(k);
    const bool seen = std::any_of(mus.begin(), mus.end(), [&](Scalar m) { return std::abs(m - mu) < 1e-8; });
    if (!seen) mus.push_back(mu);
  }
  const Index q = c.rows();
  for (Scalar mu : mus) {
    Eigen::JacobiSVD<Matrix> svd(c - mu * Matrix::Identity(q, q), Eigen::ComputeFullV);
    const Vector y = svd.matrixV().col(q - 1);
    Vector v = b * y;
    v.normalize();
    const double residual = (tadj * v - mu * v).norm();
    out.push_back(EigenChoice{std::conj(mu), v, residual});
  }
  const double tie = 10.0 * factor.q.tol();
  std::stable_sort(out.begin(), out.end(), [tie](const EigenChoice& x, const EigenChoice& y) {
    if (std::abs(x.residual - y.residual) > tie) return x.residual < y.residual;
    if (std::abs(x.lambda) != std::abs(y.lambda)) return std::abs(x.lambda) < std::abs(y.lambda);
    if (x.lambda.real() != y.lambda.real()) return x.lambda.real() < y.lambda.real();
    return x.lambda.imag() < y.lambda.imag();
  });
  return out;
}

EigenChoice choose_eigenpair(const TensorFactor& factor) {
  auto pairs = coinvariant_eigenpairs(factor);
  if (pairs.empty()) throw EigenError("T^H|_Q has empty point spectrum (Q = 0)");
  return pairs.front();
}

WanderingE wandering_E(const TensorSystem& sys, const std::vector<EigenChoice>& eigen_choices,
                       const std::vector<Scalar>& wandering_shifts) {
  const size_t n = sys.n();
  if (eigen_choices.size() != n) throw InputError("wandering_E: need one eigenpair per factor");
  if (!wandering_shifts.empty() && wandering_shifts.size() != n) {
    throw InputError("wandering_E: need one wandering shift per factor");
  }
  const double limit = 10.0 * sys.tol;
  for (size_t i = 0; i < n; ++i) {
    const TensorFactor& f = sys.factors[i];
    const EigenChoice& ec = eigen_choices[i];
    if (ec.v.size() != f.dim()) throw InputError("wandering_E: eigenvector dimension mismatch");
    const double residual =
        (f.t.matrix().adjoint() * ec.v - std::conj(ec.lambda) * ec.v).norm() / ec.v.norm();
    const double outside = (ec.v - f.q.basis() * (f.q.basis().adjoint() * ec.v)).norm() / ec.v.norm();
    if (residual > limit || outside > limit) {
      std::ostringstream msg;
      msg << "wandering_E: factor " << i << " eigenpair residual " << residual
          << ", distance from Q " << outside;
      throw EigenError(msg.str());
    }
  }

  WanderingE out{{}, Subspace::zero(sys.total_dim, sys.tol), {}, 0.0, 0.0, 0.0, 0.0};
  std::vector<Vector> units;
  for (const EigenChoice& ec : eigen_choices) units.push_back(ec.v / ec.v.norm());

  Matrix all(sys.total_dim, 0);
  for (size_t i = 0; i < n; ++i) {
    const TensorFactor& f = sys.factors[i];
    const Scalar mu = wandering_shifts.empty() ? Scalar(0.0) : wandering_shifts[i];
    const Subspace w = wandering_subspace(OperatorTuple({f.t.shifted(mu)}), f.s.with_tol(sys.tol));
    out.wandering_dims.push_back(w.dim());
    std::vector<Matrix> parts;
    for (size_t j = 0; j < n; ++j) parts.push_back(j == i ? w.basis() : Matrix(units[j]));
    Matrix basis = kron_all(parts);
    out.e_list.push_back(Subspace::from_orthonormal(basis, sys.tol));
    Matrix grown(sys.total_dim, all.cols() + basis.cols());
    grown << all, basis;
    all = std::move(grown);
  }
  out.e = orthonormalize(all, sys.tol);

  std::vector<Matrix> m;
  Matrix pf = Matrix::Zero(sys.total_dim, sys.total_dim);
  for (size_t j = 0; j < n; ++j) {
    m.push_back(sys.p[j] * q_product(sys, 0, j) * q_product(sys, j + 1, n));
    pf += m.back();
  }
  out.containment_in_f = containment_residual(out.e, range_of(pf, sys.tol));

  for (size_t i = 0; i < n; ++i) {
    const Subspace& ei = out.e_list[i];
    out.containment_in_m =
        std::max(out.containment_in_m, containment_residual(ei, range_of(m[i], sys.tol)));
    for (size_t j = 0; j < n; ++j) {
      if (j != i) {
        out.mutual_orthogonality = std::max(
            out.mutual_orthogonality, operator_norm(ei.basis().adjoint() * out.e_list[j].basis()));
      }
    }
    const Matrix pe = ei.projector();
    for (size_t j = 0; j < n; ++j) {
      Scalar shift = eigen_choices[j].lambda;
      if (j == i) shift = wandering_shifts.empty() ? Scalar(0.0) : wandering_shifts[i];
      const Matrix op = m[i] * sys.t[j] * m[i] - shift * m[i];
      out.annihilation_residual = std::max(out.annihilation_residual, operator_norm(pe * op));
    }
  }
  return out;
}

}  // namespace oplab
