#include <gtest/gtest.h>

#include "oplab/errors.hpp"
#include "oplab/model_spaces.hpp"
#include "oplab/tensorized.hpp"
#include "oracle/oracle.hpp"

using namespace oplab;

namespace {

Matrix jordan(Index m) {
  Matrix j = Matrix::Zero(m, m);
  for (Index k = 0; k + 1 < m; ++k) j(k + 1, k) = 1.0;
  return j;
}

TensorFactor prefix_factor(const SpaceKind& kind, Index m, Index k) {
  ShiftModel s = make_shift(kind, m);
  return TensorFactor::make(s.op, prefix_coinvariant(s, k));
}

TensorSystem hardy_pair() {
  return build_system({prefix_factor(SpaceKind::hardy(), 4, 2), prefix_factor(SpaceKind::hardy(), 4, 2)});
}

TensorSystem mixed_three() {
  return build_system({prefix_factor(SpaceKind::hardy(), 3, 1), prefix_factor(SpaceKind::bergman(), 3, 1),
                       prefix_factor(SpaceKind::dirichlet(), 3, 1)});
}

Matrix trace_free_eye(Index n) { return Matrix::Identity(n, n); }

}  // namespace

TEST(BuildSystem, KroneckerPlacement) {
  TensorSystem sys = build_system({prefix_factor(SpaceKind::hardy(), 2, 1), prefix_factor(SpaceKind::hardy(), 2, 1)});
  EXPECT_EQ(sys.total_dim, 4);
  Matrix j = jordan(2), i2 = trace_free_eye(2);
  EXPECT_EQ(sys.t[0], oracle::kron(j, i2));
  EXPECT_EQ(sys.t[1], oracle::kron(i2, j));
  EXPECT_EQ(sys.commutator_residual, 0.0);
  EXPECT_EQ(sys.double_commutator_residual, 0.0);
  EXPECT_EQ(sys.projection_commutator_residual, 0.0);
}

TEST(BuildSystem, ThreeSlots) {
  TensorSystem sys = build_system({prefix_factor(SpaceKind::hardy(), 2, 1), prefix_factor(SpaceKind::hardy(), 2, 1),
                                   prefix_factor(SpaceKind::hardy(), 2, 1)});
  EXPECT_EQ(sys.total_dim, 8);
  EXPECT_EQ(sys.t.size(), 3u);
  for (size_t s = 0; s < 3; ++s) EXPECT_EQ(sys.t[s], oracle::lift(jordan(2), s, {2, 2, 2}));
}

TEST(BuildSystem, Errors) {
  EXPECT_THROW(build_system({prefix_factor(SpaceKind::hardy(), 3, 1)}), InputError);
  // span{e1} is not J^H-invariant
  Matrix e1 = Vector::Unit(3, 1);
  EXPECT_THROW(TensorFactor::make(Operator(jordan(3)), orthonormalize(e1)), ModelError);
}

TEST(Lift, SlotPermutationRoundTrip) {
  // Swapping the two tensor legs moves an operator from slot 0 to slot 1.
  const Index a = 2, b = 3;
  Matrix swap = Matrix::Zero(a * b, a * b);
  for (Index i = 0; i < a; ++i)
    for (Index j = 0; j < b; ++j) swap(j * a + i, i * b + j) = 1.0;
  Matrix op = jordan(a);
  op(0, 1) = Scalar(0.0, 2.0);
  Matrix in_slot0 = lift(op, 0, {a, b});
  Matrix in_slot1 = lift(op, 1, {b, a});
  EXPECT_LE((swap * in_slot0 * swap.adjoint() - in_slot1).norm(), 1e-15);
  EXPECT_LE((swap.adjoint() * in_slot1 * swap - in_slot0).norm(), 1e-15);
}

TEST(JointInvariantS, HardyPair) {
  TensorSystem sys = hardy_pair();
  auto js = joint_invariant_S(sys);
  EXPECT_EQ(js.s.dim(), 12);
  EXPECT_EQ(oracle::joint_s_basis({Matrix::Identity(4, 4).leftCols(2), Matrix::Identity(4, 4).leftCols(2)}).cols(),
            12);
  EXPECT_LE(js.cross_check_distance, 1e-12);
  EXPECT_LE(js.expansion_residual, 1e-12);
  EXPECT_LE(js.invariance_residual, 1e-12);
  for (const Matrix& t : sys.t) {
    Matrix p = js.s.projector();
    EXPECT_LE(((Matrix::Identity(16, 16) - p) * t * p).norm(), 1e-12);
  }
}

TEST(JointInvariantS, FullQGivesZero) {
  ShiftModel h = make_shift(SpaceKind::hardy(), 3);
  TensorSystem sys = build_system({TensorFactor::make(h.op, Subspace::full(3)), TensorFactor::make(h.op, Subspace::full(3))});
  EXPECT_EQ(joint_invariant_S(sys).s.dim(), 0);
}

TEST(XProjections, HardyPair) {
  TensorSystem sys = hardy_pair();
  auto xp = x_projections(sys);
  EXPECT_EQ(xp.ranks, (std::vector<Index>{4, 8}));
  EXPECT_LE(xp.orthogonality_residual, 1e-15);
  EXPECT_LE(xp.idempotence_residual, 1e-15);
  EXPECT_LE(xp.sum_residual, 1e-12);
  Matrix sum = xp.x[0] + xp.x[1];
  EXPECT_NEAR(sum.trace().real(), 12.0, 1e-12);
  EXPECT_EQ(oracle::rank(xp.x[0]), 4);
  EXPECT_EQ(oracle::rank(xp.x[1]), 8);
}

TEST(FChain, HardyPair) {
  TensorSystem sys = hardy_pair();
  auto c = f_chain(sys);
  ASSERT_EQ(c.f_chain.size(), 1u);
  EXPECT_EQ(c.f.dim(), 8);
  EXPECT_LE(c.containment_residuals.front(), 1e-12);
  EXPECT_LE(c.f_cross_check_distance, 1e-12);
  EXPECT_LE(c.s_minus_f1_distance, 1e-12);
  EXPECT_EQ(c.m_summands.size(), 2u);
}

TEST(FChain, ThreeQubits) {
  TensorSystem sys = build_system({prefix_factor(SpaceKind::hardy(), 2, 1), prefix_factor(SpaceKind::hardy(), 2, 1),
                                   prefix_factor(SpaceKind::hardy(), 2, 1)});
  auto c = f_chain(sys);
  ASSERT_EQ(c.f_chain.size(), 2u);
  EXPECT_EQ(c.f.dim(), 3);
  EXPECT_EQ(c.s.dim(), 7);
  EXPECT_GE(c.f_chain[0].dim(), c.f_chain[1].dim());
  EXPECT_LE(c.s_minus_f1_distance, 1e-12);
}

TEST(FChain, MixedThreeDimensions) {
  auto c = f_chain(mixed_three());
  EXPECT_EQ(c.s.dim(), 26);
  EXPECT_EQ(c.f_chain[0].dim(), 14);
  EXPECT_EQ(c.f.dim(), 6);
  for (double r : c.containment_residuals) EXPECT_LE(r, 1e-10);
}

TEST(CompressionStructure, HardyPair) {
  TensorSystem sys = hardy_pair();
  auto r = verify_compression_structure(sys, f_chain(sys));
  EXPECT_LE(r.max_semi_invariance(), 1e-12);
  EXPECT_LE(r.max_commutator(), 1e-12);
  EXPECT_LE(r.block_orthogonality, 1e-12);
  EXPECT_LE(r.power_preservation, 1e-12);
}

TEST(CompressionStructure, MixedThree) {
  TensorSystem sys = mixed_three();
  auto r = verify_compression_structure(sys, f_chain(sys));
  ASSERT_EQ(r.semi_invariance.size(), 2u);
  ASSERT_EQ(r.commutator.size(), 3u);
  EXPECT_LE(r.max_semi_invariance(), 1e-10);
  EXPECT_LE(r.max_commutator(), 1e-10);
  EXPECT_LE(r.block_orthogonality, 1e-10);
  EXPECT_LE(r.power_preservation, 1e-10);
}

TEST(CompressionStructure, DegenerateZeroQ) {
  ShiftModel h = make_shift(SpaceKind::hardy(), 3);
  TensorSystem sys = build_system({TensorFactor::make(h.op, Subspace::zero(3)), prefix_factor(SpaceKind::hardy(), 3, 1)});
  auto c = f_chain(sys);
  EXPECT_EQ(c.s.dim(), 9);
  auto r = verify_compression_structure(sys, c);
  EXPECT_EQ(r.semi_invariance.size(), 1u);
  EXPECT_LE(r.max_semi_invariance(), 1e-12);
  EXPECT_THROW(choose_eigenpair(sys.factors[0]), EigenError);
}

TEST(Eigenpairs, OrderAndResidual) {
  TensorSystem sys = hardy_pair();
  auto e = choose_eigenpair(sys.factors[0]);
  EXPECT_NEAR(std::abs(e.lambda), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(e.v(0)), 1.0, 1e-15);
  EXPECT_LE(e.residual, 1e-15);

  QuotientModel q = make_quotient({{0.3, 1}, {-0.5, 1}});
  TensorFactor f = TensorFactor::make(q.op, orthogonal_complement(ideal_subspace(q, {{0.3, 1}})));
  auto pairs = coinvariant_eigenpairs(f);
  ASSERT_EQ(pairs.size(), 1u);
  EXPECT_NEAR(std::abs(pairs[0].lambda - 0.3), 0.0, 1e-12);
}

TEST(WanderingE, HardyPair) {
  TensorSystem sys = hardy_pair();
  std::vector<EigenChoice> ch = {choose_eigenpair(sys.factors[0]), choose_eigenpair(sys.factors[1])};
  auto e = wandering_E(sys, ch);
  EXPECT_EQ(e.e.dim(), 2);
  EXPECT_EQ(e.wandering_dims, (std::vector<Index>{1, 1}));
  EXPECT_LE(e.containment_in_f, 1e-12);
  EXPECT_LE(e.containment_in_m, 1e-12);
  EXPECT_LE(e.mutual_orthogonality, 1e-12);
  EXPECT_LE(e.annihilation_residual, 1e-12);
}

TEST(WanderingE, RejectsBadEigenpair) {
  TensorSystem sys = hardy_pair();
  EigenChoice bad = choose_eigenpair(sys.factors[0]);
  bad.v = Vector::Unit(4, 1);  // in Q but not an eigenvector of J^H
  EXPECT_THROW(wandering_E(sys, {bad, choose_eigenpair(sys.factors[1])}), EigenError);
}
