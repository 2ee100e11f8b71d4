#pragma once

// Krylov closures and multiplicity certification for operator tuples.
//
// The multiplicity of a tuple A on an invariant subspace L is the smallest
// number of vectors whose joint orbit spans L.  It is bracketed from both
// sides:
//   * lower: for any point lambda, dim L (-) sum_i (A_i - lambda_i) L is a
//     lower bound (every generating set must hit that cokernel);
//   * upper: a randomly drawn set of r vectors whose closure is all of L.
// The result is certified when the two meet.
//
// Everything works on the compression P_L A|_L, so non-invariant L is
// accepted and treated as the weak multiplicity of the compressed tuple.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "oplab/linalg.hpp"

namespace oplab {

/// A point of C^n used to shift a tuple.
using Point = std::vector<Scalar>;

class OperatorTuple {
 public:
  /// All operators must share one dimension; the list must be nonempty.
  explicit OperatorTuple(std::vector<Operator> ops);

  size_t size() const noexcept { return ops_.size(); }
  Index dim() const noexcept { return ops_.front().dim(); }
  const Operator& operator[](size_t i) const { return ops_[i]; }
  const std::vector<Operator>& ops() const noexcept { return ops_; }

  /// max_{i<j} ||A_i A_j - A_j A_i||; recorded, never enforced.
  double commutator_residual() const noexcept { return commutator_residual_; }

  /// (A_1 - lambda_1 I, ..., A_n - lambda_n I)
  OperatorTuple shifted(std::span<const Scalar> lambda) const;
  /// (P_L A_1|_L, ..., P_L A_n|_L) in the basis of L.
  OperatorTuple compressed(const Subspace& l) const;

 private:
  std::vector<Operator> ops_;
  double commutator_residual_ = 0.0;
};

/// Smallest A-invariant subspace containing the generators.
Subspace krylov_closure(const OperatorTuple& a, std::span<const Vector> generators,
                        double tol = kDefaultTol);
/// Closure under the compressed tuple P_L A|_L; generators are projected
/// onto L first.  The result is returned in ambient coordinates.
Subspace krylov_closure(const OperatorTuple& a, std::span<const Vector> generators,
                        const Subspace& restrict_to);

struct ShiftCheckResult {
  bool holds = false;
  double distance = 0.0;  ///< sine of the largest principal angle
  Index plain_dim = 0;
  Index shifted_dim = 0;
};

/// Compares [G]_A with [G]_{A - lambda}.  They agree exactly in theory; the
/// check passes when dimensions match and the distance is <= 100 * tol.
ShiftCheckResult shifted_closure_check(const OperatorTuple& a, std::span<const Vector> generators,
                                       std::span<const Scalar> lambda, double tol = kDefaultTol);

/// L (-) sum_i (P_L A_i|_L) L, in ambient coordinates.
Subspace wandering_subspace(const OperatorTuple& a, const Subspace& l);

/// True when the compressed tuple's wandering subspace generates L.
bool has_gws(const OperatorTuple& a, const Subspace& l);

/// dim L (-) sum_i (P_L A_i|_L - lambda_i I) L.
Index local_corank(const OperatorTuple& a, const Subspace& l, std::span<const Scalar> lambda);

/// Draws `trials` independent sets of r random unit vectors of L and
/// returns the first one whose compressed closure is all of L.
std::optional<std::vector<Vector>> mult_upper(const OperatorTuple& a, const Subspace& l, Index r,
                                              int trials, std::uint64_t seed);

struct MultiplicityResult {
  Index lower = 0;
  Index upper = 0;
  bool certified = false;
  std::vector<Vector> witness_generators;  ///< ambient coordinates
  Point witness_point;                     ///< lambda attaining `lower`
  int trials_used = 0;
  std::uint64_t seed = 0;
};

/// 0^n, combinations of the (clustered) eigenvalues of the compressed
/// operators, and `random_points` uniform points of the polydisc of radius
/// 0.9.
std::vector<Point> default_lambda_samples(const OperatorTuple& a, const Subspace& l,
                                          std::uint64_t seed, int random_points = 32);

/// Cartesian product of per-slot candidate values, truncated at `cap`.
std::vector<Point> lambda_grid(const std::vector<std::vector<Scalar>>& per_slot, size_t cap = 4096);

/// Uniform samples of the polydisc {|z_i| <= radius}.
std::vector<Point> random_polydisc_points(size_t n, int count, double radius, std::uint64_t seed);

/// lower = max local corank over lambda_samples (the default set when the
/// list is empty); upper = smallest r >= max(lower, 1) with a witness.
MultiplicityResult multiplicity(const OperatorTuple& a, const Subspace& l,
                                std::vector<Point> lambda_samples = {}, int trials = 64,
                                std::uint64_t seed = 42);

struct SemiInvariantReport {
  Subspace difference;             ///< L = L1 (-) L2
  MultiplicityResult compressed;   ///< of P_L A|_L
  MultiplicityResult restricted;   ///< of A|_{L1}
  double l1_invariance_residual = 0.0;
  double l2_invariance_residual = 0.0;
  /// max over |k| <= 3 of ||(P_L A P_L)^k x - P_L A^k P_{L1} x|| / ||x||
  double power_identity_residual = 0.0;
  std::string status;  ///< "pass", "fail" or "uncertified"
};

/// Checks mult(P_L A|_L) <= mult(A|_{L1}) for L = L1 (-) L2.  Throws
/// ContainmentError when L2 is not inside L1.
SemiInvariantReport semi_invariant_bound_check(const OperatorTuple& a, const Subspace& l1,
                                               const Subspace& l2, int trials = 64,
                                               std::uint64_t seed = 42);

/// Largest ||(I - P_L) A_i P_L|| over the tuple.
double tuple_invariance_residual(const OperatorTuple& a, const Subspace& l);

/// All exponent vectors k in Z_+^n with |k| <= max_degree, in graded order.
std::vector<std::vector<int>> multi_indices(size_t n, int max_degree);

}  // namespace oplab
