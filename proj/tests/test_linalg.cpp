#include <gtest/gtest.h>

#include "igkls/random.hpp"
#include "oracles.hpp"

using namespace igkls;

TEST(Kron, IdentityTimesIdentity) { EXPECT_LE((kron(identity(2), identity(3)) - identity(6)).norm(), 0.0); }

TEST(Kron, DiagonalCase) {
    CMatrix z = CMatrix::Zero(2, 2);
    z(0, 0) = 1.0;
    z(1, 1) = -1.0;
    CMatrix expected = CMatrix::Zero(4, 4);
    expected.diagonal() << 1, 1, -1, -1;
    EXPECT_LE((kron(z, identity(2)) - expected).norm(), 0.0);
}

TEST(Kron, MatchesLoopOracle) {
    Rng rng(11);
    for (int t = 0; t < 5; ++t) {
        const CMatrix a = gaussian_matrix(rng, 2, 3), b = gaussian_matrix(rng, 3, 2);
        EXPECT_LE((kron(a, b) - oracle::loop_kron(a, b)).norm(), 1e-14);
    }
}

TEST(Kron, Associative) {
    Rng rng(12);
    for (int t = 0; t < 10; ++t) {
        const CMatrix a = gaussian_matrix(rng, 1 + t % 3, 2), b = gaussian_matrix(rng, 3, 1 + t % 2),
                      c = gaussian_matrix(rng, 2, 3);
        EXPECT_LE((kron(kron(a, b), c) - kron(a, kron(b, c))).norm(), 1e-12);
    }
}

TEST(PartialTrace, IdentityOverA) {
    EXPECT_LE((partial_trace(identity(4), 2, 2, Subsystem::A) - 2.0 * identity(2)).norm(), 1e-15);
}

TEST(PartialTrace, ProductStates) {
    Rng rng(13);
    const CMatrix p = gaussian_matrix(rng, 2, 2), q = gaussian_matrix(rng, 3, 3);
    EXPECT_LE((partial_trace(oracle::loop_kron(p, q), 2, 3, Subsystem::A) - p.trace() * q).norm(), 1e-12);
    EXPECT_LE((partial_trace(oracle::loop_kron(p, q), 2, 3, Subsystem::B) - q.trace() * p).norm(), 1e-12);
}

TEST(PartialTrace, MatchesIndexSumAndPreservesTrace) {
    Rng rng(14);
    const CMatrix m = gaussian_matrix(rng, 6, 6);
    const CMatrix r = partial_trace(m, 2, 3, Subsystem::A);
    EXPECT_LE((r - oracle::trace_first(m, 2, 3)).norm(), 1e-13);
    EXPECT_LE(std::abs(r.trace() - m.trace()), 1e-13);
    EXPECT_LE(std::abs(partial_trace(m, 2, 3, Subsystem::B).trace() - m.trace()), 1e-13);
}

TEST(PartialTrace, RejectsWrongShape) {
    EXPECT_THROW(partial_trace(identity(5), 2, 2, Subsystem::A), Error);
}

TEST(Orthonormalize, ParallelVectorsGiveOne) {
    std::vector<CVector> vs{CVector::Zero(2), CVector::Zero(2)};
    vs[0](0) = 1.0;
    vs[1](0) = 2.0;
    const SubspaceBasis b = orthonormalize_span(vs, 2, 1e-9);
    ASSERT_EQ(b.size(), 1);
    EXPECT_NEAR(std::abs(b.vectors(0, 0)), 1.0, 1e-14);
}

TEST(Orthonormalize, StandardBasis) {
    std::vector<CVector> vs{CVector::Unit(2, 0).cast<cplx>(), CVector::Unit(2, 1).cast<cplx>()};
    EXPECT_EQ(orthonormalize_span(vs, 2, 1e-9).size(), 2);
}

TEST(Orthonormalize, ManyRandomVectorsSpanAndAreOrthonormal) {
    Rng rng(15);
    std::vector<CVector> vs;
    for (int k = 0; k < 50; ++k) vs.push_back(gaussian_vector(rng, 4));
    const SubspaceBasis b = orthonormalize_span(vs, 4, 1e-9);
    EXPECT_EQ(b.size(), 4);
    EXPECT_LE((b.vectors.adjoint() * b.vectors - identity(4)).cwiseAbs().maxCoeff(), 1e-10);
    for (const auto& v : vs) EXPECT_LE(subspace_residual(b, v), 1e-10 * v.norm());
}

TEST(Orthonormalize, EmptyInput) {
    const SubspaceBasis b = orthonormalize_span({}, 3, 1e-9);
    EXPECT_EQ(b.size(), 0);
    EXPECT_EQ(b.ambient_dim, 3);
}

TEST(SubspaceResidual, UnitVectors) {
    std::vector<CVector> e1{CVector::Unit(3, 0).cast<cplx>()};
    const SubspaceBasis b = orthonormalize_span(e1, 3, 1e-9);
    EXPECT_NEAR(subspace_residual(b, CVector::Unit(3, 0).cast<cplx>()), 0.0, 1e-15);
    EXPECT_NEAR(subspace_residual(b, CVector::Unit(3, 1).cast<cplx>()), 1.0, 1e-15);
}

TEST(SubspaceResidual, MatchesExplicitProjector) {
    Rng rng(16);
    const CMatrix span = gaussian_matrix(rng, 4, 2);
    const SubspaceBasis b = orthonormalize_columns(span, 1e-9);
    Eigen::HouseholderQR<CMatrix> qr(span);
    const CMatrix q = qr.householderQ() * CMatrix::Identity(4, 2);
    for (int t = 0; t < 5; ++t) {
        const CVector v = gaussian_vector(rng, 4);
        EXPECT_NEAR(subspace_residual(b, v), ((identity(4) - q * q.adjoint()) * v).norm(), 1e-13);
    }
}

TEST(EmbedSupport, Cases) {
    CMatrix p = CMatrix::Zero(2, 3);
    p(0, 0) = 1.0;
    p(1, 1) = 1.0;
    CMatrix expected = CMatrix::Zero(3, 3);
    expected(0, 0) = expected(1, 1) = 1.0;
    EXPECT_LE((embed_support(identity(2), p) - expected).norm(), 0.0);
    EXPECT_LE(embed_support(CMatrix::Zero(2, 2), p).norm(), 0.0);

    Rng rng(17);
    const CMatrix outer = haar_isometry(rng, 4, 3).adjoint();  // 3 x 4 coisometry
    const CMatrix inner = haar_isometry(rng, 3, 2).adjoint();  // 2 x 3 coisometry
    const CMatrix x = gaussian_matrix(rng, 2, 2);
    EXPECT_LE((embed_support(embed_support(x, inner), outer) - embed_support(x, inner * outer)).norm(), 1e-13);
}

TEST(Svd, RankPinvPolar) {
    Rng rng(18);
    const CMatrix m = gaussian_matrix(rng, 5, 2) * gaussian_matrix(rng, 2, 4);
    EXPECT_EQ(numeric_rank(m, 1e-9), 2);
    EXPECT_EQ(range_basis(m, 1e-9).cols(), 2);
    EXPECT_EQ(null_space(m, 1e-9).cols(), 2);
    EXPECT_LE((m * null_space(m, 1e-9)).norm(), 1e-12 * m.norm());
    const CMatrix pi = pinv(m, 1e-9);
    EXPECT_LE((m * pi * m - m).norm(), 1e-12 * m.norm());
    const CMatrix w = polar_isometry(gaussian_matrix(rng, 5, 3));
    EXPECT_LE(isometry_defect(w), 1e-13);
}

TEST(Vec, RowMajorConvention) {
    Rng rng(19);
    const CMatrix a = gaussian_matrix(rng, 2, 2), x = gaussian_matrix(rng, 2, 3), b = gaussian_matrix(rng, 3, 3);
    EXPECT_LE((vec(a * x * b) - kron(a, b.transpose()) * vec(x)).norm(), 1e-12);
    EXPECT_LE((vec(x) - oracle::row_vec(x)).norm(), 0.0);
    EXPECT_LE((unvec(vec(x), 2, 3) - x).norm(), 0.0);
}

TEST(Rng, FirstOutputMatchesReferenceSplitMix) {
    // splitmix64 started from state 0: first output.
    Rng rng(0);
    EXPECT_EQ(rng.next_u64(), 0xE220A8397B1DCDAFull);
}

TEST(Rng, DeterministicAndForked) {
    Rng a(42), b(42);
    for (int k = 0; k < 100; ++k) EXPECT_EQ(a.next_u64(), b.next_u64());
    Rng c(42);
    EXPECT_NE(c.fork(1).next_u64(), c.fork(2).next_u64());
    for (int k = 0; k < 1000; ++k) {
        const double u = c.uniform();
        EXPECT_GE(u, 0.0);
        EXPECT_LT(u, 1.0);
    }
}

TEST(Rng, HaarSamplesAreUnitary) {
    Rng rng(20);
    EXPECT_LE(isometry_defect(haar_unitary(rng, 6)), 1e-13);
    EXPECT_LE(hermitian_defect(random_hermitian(rng, 5)), 0.0);
}
