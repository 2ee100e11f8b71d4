#include "oplab/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "oplab/errors.hpp"

namespace oplab {

namespace {

void require_same_ambient(Index a, Index b, const char* where) {
  if (a != b) {
    std::ostringstream msg;
    msg << where << ": ambient dimension mismatch (" << a << " vs " << b << ")";
    throw InputError(msg.str());
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Operator

Operator::Operator(Matrix entries) : entries_(std::move(entries)) {
  if (entries_.rows() != entries_.cols()) {
    std::ostringstream msg;
    msg << "Operator must be square, got " << entries_.rows() << "x" << entries_.cols();
    throw InputError(msg.str());
  }
  if (!entries_.allFinite()) throw InputError("Operator entries must be finite");
}

Operator Operator::identity(Index dim) { return Operator(Matrix::Identity(dim, dim)); }

Operator Operator::zero(Index dim) { return Operator(Matrix::Zero(dim, dim)); }

Operator Operator::adjoint() const { return Operator(entries_.adjoint()); }

Operator Operator::shifted(Scalar lambda) const {
  Matrix m = entries_;
  m.diagonal().array() -= lambda;
  return Operator(std::move(m));
}

Vector Operator::apply(const Vector& v) const {
  require_same_ambient(dim(), v.size(), "Operator::apply");
  return entries_ * v;
}

Operator operator*(const Operator& a, const Operator& b) {
  require_same_ambient(a.dim(), b.dim(), "Operator product");
  return Operator(a.entries_ * b.entries_);
}

Operator operator+(const Operator& a, const Operator& b) {
  require_same_ambient(a.dim(), b.dim(), "Operator sum");
  return Operator(a.entries_ + b.entries_);
}

Operator operator-(const Operator& a, const Operator& b) {
  require_same_ambient(a.dim(), b.dim(), "Operator difference");
  return Operator(a.entries_ - b.entries_);
}

// ---------------------------------------------------------------------------
// Subspace

Subspace Subspace::zero(Index ambient_dim, double tol) {
  return Subspace(Matrix(ambient_dim, 0), tol);
}

Subspace Subspace::full(Index ambient_dim, double tol) {
  return Subspace(Matrix::Identity(ambient_dim, ambient_dim), tol);
}

Subspace Subspace::from_orthonormal(Matrix basis, double tol) {
  if (!(tol > 0.0)) throw InputError("Subspace tolerance must be positive");
  if (basis.cols() > basis.rows()) throw InputError("Subspace basis has more columns than rows");
  if (!basis.allFinite()) throw InputError("Subspace basis entries must be finite");
  const Matrix gram = basis.adjoint() * basis;
  const double dev =
      basis.cols() == 0
          ? 0.0
          : (gram - Matrix::Identity(basis.cols(), basis.cols())).cwiseAbs().maxCoeff();
  if (dev > 10.0 * tol) {
    std::ostringstream msg;
    msg << "Subspace basis is not orthonormal (max Gram deviation " << dev << ")";
    throw InputError(msg.str());
  }
  return Subspace(std::move(basis), tol);
}

Matrix Subspace::projector() const { return basis_ * basis_.adjoint(); }

Subspace Subspace::with_tol(double tol) const {
  if (!(tol > 0.0)) throw InputError("Subspace tolerance must be positive");
  return Subspace(basis_, tol);
}

// ---------------------------------------------------------------------------
// Orthonormalization

Matrix extend_orthonormal(const Matrix& base, const Matrix& candidates, double tol) {
  if (!(tol > 0.0)) throw InputError("orthonormalize: tolerance must be positive");
  require_same_ambient(base.rows(), candidates.rows(), "extend_orthonormal");
  const Index n = candidates.rows();
  const Index count = candidates.cols();
  const Index room = n - base.cols();

  Matrix work = candidates;
  std::vector<double> scale(static_cast<size_t>(count));
  std::vector<Index> active;
  active.reserve(static_cast<size_t>(count));
  for (Index j = 0; j < count; ++j) {
    scale[static_cast<size_t>(j)] = std::max(1.0, candidates.col(j).norm());
    active.push_back(j);
  }
  if (base.cols() > 0) work -= base * (base.adjoint() * work);

  Matrix q(n, std::max<Index>(0, std::min(room, count)));
  Index rank = 0;
  while (!active.empty() && rank < q.cols()) {
    // pivot on the largest relative residual
    auto best = active.begin();
    double best_ratio = -1.0;
    for (auto it = active.begin(); it != active.end(); ++it) {
      const double ratio = work.col(*it).norm() / scale[static_cast<size_t>(*it)];
      if (ratio > best_ratio) {
        best_ratio = ratio;
        best = it;
      }
    }
    if (best_ratio <= tol) break;

    Vector v = work.col(*best);
    active.erase(best);
    // second pass against everything accepted so far
    if (base.cols() > 0) v -= base * (base.adjoint() * v);
    if (rank > 0) {
      const auto accepted = q.leftCols(rank);
      v -= accepted * (accepted.adjoint() * v);
    }
    const double norm = v.norm();
    if (norm == 0.0) continue;
    v /= norm;
    q.col(rank) = v;
    ++rank;

    for (Index j : active) work.col(j) -= v * v.dot(work.col(j));
  }
  return q.leftCols(rank);
}

Subspace orthonormalize(const Matrix& columns, double tol) {
  return Subspace::from_orthonormal(extend_orthonormal(Matrix(columns.rows(), 0), columns, tol),
                                    tol);
}

Subspace orthonormalize(std::span<const Vector> vectors, Index ambient_dim, double tol) {
  Matrix cols(ambient_dim, static_cast<Index>(vectors.size()));
  for (size_t j = 0; j < vectors.size(); ++j) {
    require_same_ambient(ambient_dim, vectors[j].size(), "orthonormalize");
    cols.col(static_cast<Index>(j)) = vectors[j];
  }
  return orthonormalize(cols, tol);
}

// ---------------------------------------------------------------------------
// Subspace arithmetic

Vector project(const Subspace& s, const Vector& v) {
  require_same_ambient(s.ambient_dim(), v.size(), "project");
  if (s.is_zero()) return Vector::Zero(v.size());
  return s.basis() * (s.basis().adjoint() * v);
}

double containment_residual(const Subspace& sub, const Subspace& ambient) {
  require_same_ambient(sub.ambient_dim(), ambient.ambient_dim(), "containment_residual");
  if (sub.is_zero()) return 0.0;
  const Matrix& b = sub.basis();
  const Matrix residual = b - ambient.basis() * (ambient.basis().adjoint() * b);
  return residual.colwise().norm().maxCoeff();
}

Subspace complement_within(const Subspace& ambient, const Subspace& sub) {
  require_same_ambient(ambient.ambient_dim(), sub.ambient_dim(), "complement_within");
  const double tol = std::max(ambient.tol(), sub.tol());
  const double residual = containment_residual(sub, ambient);
  if (residual > 10.0 * tol || sub.dim() > ambient.dim()) {
    std::ostringstream msg;
    msg << "complement_within: subspace not contained in ambient (residual " << residual << ")";
    throw ContainmentError(msg.str(), residual);
  }
  const Index a = ambient.dim();
  const Index s = sub.dim();
  if (s == 0) return ambient.with_tol(tol);
  if (s == a) return Subspace::zero(ambient.ambient_dim(), tol);

  // Coordinates of sub inside ambient; their orthogonal complement in C^a
  // is read off the trailing columns of a full QR factor.
  const Matrix coords = ambient.basis().adjoint() * sub.basis();
  Eigen::HouseholderQR<Matrix> qr(coords);
  const Matrix full_q = qr.householderQ() * Matrix::Identity(a, a);
  Matrix basis = ambient.basis() * full_q.rightCols(a - s);
  return Subspace::from_orthonormal(std::move(basis), tol);
}

Subspace orthogonal_complement(const Subspace& s) {
  return complement_within(Subspace::full(s.ambient_dim(), s.tol()), s);
}

Subspace sum(const Subspace& a, const Subspace& b) {
  require_same_ambient(a.ambient_dim(), b.ambient_dim(), "sum");
  Matrix cols(a.ambient_dim(), a.dim() + b.dim());
  cols << a.basis(), b.basis();
  return orthonormalize(cols, std::max(a.tol(), b.tol()));
}

Subspace image(const Operator& t, const Subspace& s) {
  require_same_ambient(t.dim(), s.ambient_dim(), "image");
  return orthonormalize(t.matrix() * s.basis(), s.tol());
}

Operator compress(const Operator& t, const Subspace& s) {
  require_same_ambient(t.dim(), s.ambient_dim(), "compress");
  return Operator(s.basis().adjoint() * t.matrix() * s.basis());
}

Vector embed(const Subspace& s, const Vector& coords) {
  if (coords.size() != s.dim()) throw InputError("embed: coordinate length mismatch");
  return s.basis() * coords;
}

double subspace_distance(const Subspace& a, const Subspace& b) {
  require_same_ambient(a.ambient_dim(), b.ambient_dim(), "subspace_distance");
  if (a.dim() != b.dim()) return 1.0;
  if (a.is_zero()) return 0.0;
  const Matrix residual = a.basis() - b.basis() * (b.basis().adjoint() * a.basis());
  return std::min(1.0, operator_norm(residual));
}

double operator_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::BDCSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

Matrix kronecker(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

Subspace tensor(const Subspace& a, const Subspace& b) {
  return Subspace::from_orthonormal(kronecker(a.basis(), b.basis()), std::max(a.tol(), b.tol()));
}

}  // namespace oplab
