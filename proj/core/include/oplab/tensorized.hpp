#pragma once

// Commuting tuples on H_1 (x) ... (x) H_n built from one operator per
// factor, the joint invariant subspace S = (Q_1 (x) ... (x) Q_n)^perp, and
// the projection architecture used to bound its multiplicity:
//
//   X_i = P~_i Q~_{i+1} ... Q~_n                       (orthogonal ranges)
//   F_i = ran( X_1 + Q~_1 X_2 + ... )                  (nested chain)
//   F   = ran X_1 + ran Q~_1 X_2 + ... + ran Q~_1..Q~_{n-1} X_n
//   E_i = W_i (x) (x)_{j != i} C v_j                   (inside F)
//
// Slots are 0-based in code.  Kronecker ordering is big-endian: slot 0
// varies slowest, so basis index (a_0, ..., a_{n-1}) maps to
// ((a_0 * m_1 + a_1) * m_2 + ...).

#include <vector>

#include "oplab/linalg.hpp"
#include "oplab/multiplicity.hpp"

namespace oplab {

struct TensorFactor {
  Operator t;
  Subspace q;  ///< T^H-invariant
  Subspace s;  ///< q^perp, T-invariant
  Matrix p;    ///< P_S
  Matrix qproj;
  double coinvariance_residual = 0.0;

  /// Throws ModelError when ||(I - P_Q) T^H P_Q|| exceeds 10 * q.tol().
  static TensorFactor make(Operator t, Subspace q);
  Index dim() const noexcept { return t.dim(); }
};

/// I (x) ... (x) op (x) ... (x) I with op in `slot`.
Matrix lift(const Matrix& op, size_t slot, const std::vector<Index>& dims);

struct TensorSystem {
  std::vector<TensorFactor> factors;
  std::vector<Index> dims;
  Index total_dim = 0;
  std::vector<Matrix> t;      ///< T~_i
  std::vector<Matrix> p;      ///< P~_i
  std::vector<Matrix> qproj;  ///< Q~_i = I - P~_i
  double tol = kDefaultTol;
  double commutator_residual = 0.0;         ///< max ||[T~_i, T~_j]||
  double double_commutator_residual = 0.0;  ///< max_{p != q} ||T~_p^H T~_q - T~_q T~_p^H||
  double projection_commutator_residual = 0.0;

  size_t n() const noexcept { return factors.size(); }
  OperatorTuple tuple() const;
};

/// Requires n >= 2 and a common tolerance; every factor was validated by
/// TensorFactor::make.
TensorSystem build_system(std::vector<TensorFactor> factors, double tol = kDefaultTol);

struct JointInvariantS {
  Subspace s;
  double cross_check_distance = 0.0;  ///< range(I - prod Q~_i) vs (Q_1 (x) ... )^perp
  double expansion_residual = 0.0;    ///< ||I - prod Q~_i - sum_i P~_i prod_{j>i} Q~_j||
  double invariance_residual = 0.0;   ///< max_i ||(I - P_S) T~_i P_S||
};

/// Throws InternalConsistencyError when the two constructions disagree by
/// more than tol.
JointInvariantS joint_invariant_S(const TensorSystem& sys);

struct XProjections {
  std::vector<Matrix> x;
  std::vector<Index> ranks;
  double orthogonality_residual = 0.0;  ///< max_{p != q} ||X_p X_q||
  double idempotence_residual = 0.0;    ///< max ||X_i^2 - X_i||, ||X_i - X_i^H||
  double sum_residual = 0.0;            ///< ||sum X_i - P_S||
};

XProjections x_projections(const TensorSystem& sys);

struct ChainDecomposition {
  std::vector<Matrix> x;
  Subspace s;
  std::vector<Subspace> f_chain;  ///< F_1 .. F_{n-1}
  Subspace f;
  /// Summands M_j of P_{F_i}, one list per chain level (level i-1 <-> F_i).
  std::vector<std::vector<Matrix>> level_summands;
  /// M_j = P~_j prod_{k != j} Q~_k, the summands of P_F.
  std::vector<Matrix> m_summands;
  /// containment_residuals[0] = F_1 in S, [i] = F_{i+1} in F_i.
  std::vector<double> containment_residuals;
  double f_cross_check_distance = 0.0;  ///< F_{n-1} vs the direct sum defining F
  double s_minus_f1_distance = 0.0;     ///< S (-) F_1 vs ran(P~_{n-1} P~_n)
};

/// Throws InternalConsistencyError naming the first failing containment.
ChainDecomposition f_chain(const TensorSystem& sys);

struct StructureReport {
  /// semi_invariance[i][s]: pair (F_i, F_{i+1}) with F_0 = S, operator s.
  std::vector<std::vector<double>> semi_invariance;
  /// commutator[i]: max_{s,t} commutator of the compressed tuple on F_i
  /// (index 0 is S itself).
  std::vector<double> commutator;
  /// max_{j != k, s} ||M_j T~_s M_k|| for P_F = sum_j M_j.  Only the last
  /// level splits this way; the intermediate F_i do not reduce T~.
  double block_orthogonality = 0.0;
  /// (P_F T~|_F)^k vs sum_j M_j T~^k M_j for |k| <= 3, on random probes.
  double power_preservation = 0.0;

  double max_semi_invariance() const;
  double max_commutator() const;
};

StructureReport verify_compression_structure(const TensorSystem& sys,
                                             const ChainDecomposition& chain,
                                             std::uint64_t seed = 42);

/// An eigenpair of T^H restricted to Q: T^H v = conj(lambda) v, v in Q.
struct EigenChoice {
  Scalar lambda;  ///< alpha; the eigenvalue of T^H|_Q is conj(alpha)
  Vector v;       ///< unit vector in ambient coordinates of the factor
  double residual = 0.0;
};

/// All eigenpairs of compress(T^H, Q), each refined to the best null vector
/// of (T^H|_Q - mu I).  Sorted by residual, then |lambda|, then real and
/// imaginary part.
std::vector<EigenChoice> coinvariant_eigenpairs(const TensorFactor& factor);
/// First entry of coinvariant_eigenpairs; throws EigenError when Q = 0.
EigenChoice choose_eigenpair(const TensorFactor& factor);

struct WanderingE {
  std::vector<Subspace> e_list;
  Subspace e;
  std::vector<Index> wandering_dims;
  double containment_in_f = 0.0;     ///< E in F
  double containment_in_m = 0.0;     ///< max_i E_i in ran M_i
  double mutual_orthogonality = 0.0; ///< max_{i != j} ||E_i^H E_j||
  /// max_{i,j} ||P_{E_i} (M_i T~_j M_i - lambda^{(i)}_j M_i)|| with
  /// lambda^{(i)}_i = wandering shift of factor i, lambda^{(i)}_j = alpha_j.
  double annihilation_residual = 0.0;
};

/// E_i = W_i (x) (x)_{j != i} C v_j where W_i = S_i (-) (T_i - mu_i) S_i.
/// `wandering_shifts` may be empty (all mu_i = 0).  Throws EigenError when
/// an eigen residual exceeds 10 * tol.
WanderingE wandering_E(const TensorSystem& sys, const std::vector<EigenChoice>& eigen_choices,
                       const std::vector<Scalar>& wandering_shifts = {});

}  // namespace oplab
