#pragma once

// Finite models of the shift on Hardy, Bergman, Dirichlet and weighted
// Bergman spaces, plus the polynomial quotient model that realizes
// invariant subspaces vanishing at a point other than the origin.
//
// Truncated shifts act on the monomial orthonormal basis e_k = z^k/|z^k|
// and map e_k to w_k e_{k+1}.  The top weight is dropped, so the m x m
// truncation is nilpotent and every suffix span{e_k, ..., e_{m-1}} is
// exactly invariant.

#include <string>
#include <vector>

#include "oplab/linalg.hpp"

namespace oplab {

enum class SpaceFamily { Hardy, Bergman, Dirichlet, WeightedBergman, Custom };

struct SpaceKind {
  SpaceFamily family = SpaceFamily::Hardy;
  int alpha = 1;                ///< WeightedBergman only, alpha >= 1
  std::vector<double> weights;  ///< Custom only, all > 0

  static SpaceKind hardy() { return {SpaceFamily::Hardy, 1, {}}; }
  static SpaceKind bergman() { return {SpaceFamily::Bergman, 2, {}}; }
  static SpaceKind dirichlet() { return {SpaceFamily::Dirichlet, 0, {}}; }
  static SpaceKind weighted_bergman(int alpha);
  static SpaceKind custom(std::vector<double> weights);

  std::string name() const;
};

/// Squared norm of z^k in the space with kernel (1 - z conj(w))^(-alpha),
/// i.e. 1 / binom(k + alpha - 1, k).
double weighted_bergman_monomial_norm2(int alpha, int k);

struct ShiftModel {
  SpaceKind kind;
  Index m = 0;
  Operator op = Operator::zero(0);
  std::vector<double> weights;  ///< m - 1 subdiagonal entries
};

/// Throws InputError for m < 2, alpha < 1, non-positive custom weights, or
/// a custom weight list whose length is not m - 1.
ShiftModel make_shift(const SpaceKind& kind, Index m);

struct KernelVector {
  Vector v;
  /// ||(T^H - conj(lambda) I) v|| for the normalized v.
  double defect = 0.0;
};

/// Normalized truncation of the eigen-candidate of T^H at conj(lambda):
/// v_0 = 1, v_{k+1} = conj(lambda) v_k / w_k.  Requires |lambda| < 1.
KernelVector kernel_vector(const ShiftModel& model, Scalar lambda);

/// span{e_0, ..., e_{k-1}}; T^H-invariant.  Requires 0 < k < m.
Subspace prefix_coinvariant(const ShiftModel& model, Index k, double tol = kDefaultTol);

struct Root {
  Scalar value;
  int multiplicity = 1;
};

struct QuotientModel {
  std::vector<Root> roots;
  Index m = 0;
  Operator op = Operator::zero(0);
  /// Monic p(z), coefficients of z^0 ... z^m.
  std::vector<Scalar> p_coefficients;
};

/// Coefficients (low degree first) of prod (z - root)^multiplicity.
std::vector<Scalar> poly_from_roots(const std::vector<Root>& roots);
/// Horner evaluation of a low-degree-first coefficient vector.
Scalar poly_eval(std::span<const Scalar> coefficients, Scalar z);

/// Multiplication by z on C[z]/(p), monomials orthonormal.  Every root must
/// satisfy |root| < 1 and multiplicities must be positive.
QuotientModel make_quotient(std::vector<Root> roots);

/// Span of the coefficient vectors of q(z) z^j, j = 0 .. m - deg q - 1.
/// q_roots must be a proper sub-multiset of the model's roots.
Subspace ideal_subspace(const QuotientModel& model, const std::vector<Root>& q_roots,
                        double tol = kDefaultTol);

/// Largest ||(I - P_q) T^H P_q||; zero for a co-invariant q.
double coinvariance_residual(const Operator& t, const Subspace& q);
/// Largest ||(I - P_s) T P_s||; zero for an invariant s.
double invariance_residual(const Operator& t, const Subspace& s);

}  // namespace oplab
