#pragma once

// Tolerance-aware dense complex linear algebra and subspace arithmetic.
//
// Every subspace carries an orthonormal basis together with the relative
// tolerance that was used to make its rank decisions.  All operations are
// pure: inputs are never modified and results are fresh values.

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace oplab {

using Scalar = std::complex<double>;
using Index = Eigen::Index;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;

inline constexpr double kDefaultTol = 1e-10;

/// A square complex matrix acting on a finite model space.
///
/// Compressions onto the zero subspace produce a 0x0 operator, which is
/// legal everywhere an Operator is accepted.
class Operator {
 public:
  explicit Operator(Matrix entries);

  static Operator identity(Index dim);
  static Operator zero(Index dim);

  Index dim() const noexcept { return entries_.rows(); }
  const Matrix& matrix() const noexcept { return entries_; }
  Scalar operator()(Index row, Index col) const { return entries_(row, col); }

  Operator adjoint() const;
  /// T - lambda * I
  Operator shifted(Scalar lambda) const;
  Vector apply(const Vector& v) const;

  friend Operator operator*(const Operator& a, const Operator& b);
  friend Operator operator+(const Operator& a, const Operator& b);
  friend Operator operator-(const Operator& a, const Operator& b);

 private:
  Matrix entries_;
};

/// A linear subspace of C^ambient_dim, stored as an orthonormal basis.
class Subspace {
 public:
  static Subspace zero(Index ambient_dim, double tol = kDefaultTol);
  static Subspace full(Index ambient_dim, double tol = kDefaultTol);
  /// Wraps a basis that is already orthonormal.  Throws InputError when
  /// basis^H basis deviates from the identity by more than 10*tol entrywise.
  static Subspace from_orthonormal(Matrix basis, double tol = kDefaultTol);

  Index ambient_dim() const noexcept { return basis_.rows(); }
  Index dim() const noexcept { return basis_.cols(); }
  bool is_zero() const noexcept { return basis_.cols() == 0; }
  const Matrix& basis() const noexcept { return basis_; }
  double tol() const noexcept { return tol_; }

  /// Orthogonal projector basis * basis^H onto the subspace.
  Matrix projector() const;
  Subspace with_tol(double tol) const;

 private:
  Subspace(Matrix basis, double tol) : basis_(std::move(basis)), tol_(tol) {}

  Matrix basis_;
  double tol_;
};

/// Rank-revealing orthonormalization (column-pivoted Gram-Schmidt with a
/// second orthogonalization pass).  A candidate whose residual after
/// projection is <= tol * max(1, |input|) is discarded.
Subspace orthonormalize(std::span<const Vector> vectors, Index ambient_dim,
                        double tol = kDefaultTol);
/// Same, with the candidates given as the columns of a matrix.
Subspace orthonormalize(const Matrix& columns, double tol = kDefaultTol);

/// Orthonormal columns spanning (base + span(candidates)) (-) base, using
/// the same rank rule as orthonormalize relative to the candidate norms.
Matrix extend_orthonormal(const Matrix& base, const Matrix& candidates, double tol);

Vector project(const Subspace& s, const Vector& v);

/// ambient (-) sub.  Requires sub to lie inside ambient; throws
/// ContainmentError carrying the largest residual otherwise.
Subspace complement_within(const Subspace& ambient, const Subspace& sub);
/// C^n (-) s
Subspace orthogonal_complement(const Subspace& s);

Subspace sum(const Subspace& a, const Subspace& b);
/// Orthonormalized range of T restricted to s.
Subspace image(const Operator& t, const Subspace& s);
/// basis^H * T * basis, i.e. P_s T|_s written in the basis of s.
Operator compress(const Operator& t, const Subspace& s);

/// Lifts coordinates with respect to s.basis() back to the ambient space.
Vector embed(const Subspace& s, const Vector& coords);

/// Largest residual ||(I - P_ambient) b|| over the basis vectors b of sub.
double containment_residual(const Subspace& sub, const Subspace& ambient);

/// Sine of the largest principal angle between a and b.  Subspaces of
/// different dimension are at distance 1.
double subspace_distance(const Subspace& a, const Subspace& b);

/// Spectral norm (largest singular value); 0 for empty matrices.
double operator_norm(const Matrix& m);

Matrix kronecker(const Matrix& a, const Matrix& b);

/// Kronecker product of orthonormal bases; the result is again orthonormal.
Subspace tensor(const Subspace& a, const Subspace& b);

}  // namespace oplab
