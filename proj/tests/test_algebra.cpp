#include <gtest/gtest.h>

#include <algorithm>

#include "igkls/algebra.hpp"
#include "igkls/sampling.hpp"
#include "oracles.hpp"

using namespace igkls;

namespace {

CMatrix pauli_z() { return oracle::paulis()[3]; }

std::vector<FactorDims> sorted(std::vector<FactorDims> f) {
    std::sort(f.begin(), f.end(), [](auto a, auto b) { return std::pair(a.dim_a, a.dim_b) < std::pair(b.dim_a, b.dim_b); });
    return f;
}

// Off-pattern residual of every basis element in the decomposition frame.
double pattern_residual(const AtomicDecomposition& dec, const AlgebraBasis& alg) { return decomposition_residual(dec, alg); }

AtomicDecomposition one_factor(int da, int db) {
    AtomicDecomposition d;
    d.dim = da * db;
    d.u_alg = identity(d.dim);
    d.factors = {{da, db}};
    return d;
}

}  // namespace

TEST(Closure, PauliZGivesDiagonals) {
    const AlgebraBasis a = close_star_algebra({pauli_z()}, true, 1e-9);
    EXPECT_EQ(a.size(), 2);
    CMatrix diag = CMatrix::Zero(2, 2);
    diag(0, 0) = 0.3;
    diag(1, 1) = -1.7;
    EXPECT_LE(membership_residual(diag, a), 1e-12);
    EXPECT_NEAR(membership_residual(oracle::paulis()[1], a), std::sqrt(2.0), 1e-12);
}

TEST(Closure, EmptyUnitalIsScalars) {
    const AlgebraBasis a = close_star_algebra({}, true, 1e-9, 3);
    ASSERT_EQ(a.size(), 1);
    EXPECT_LE(membership_residual(identity(3), a), 1e-12);
}

TEST(Closure, MatrixUnitGeneratesFullM2) {
    const AlgebraBasis a = close_star_algebra({matrix_unit(2, 0, 1)}, false, 1e-9);
    EXPECT_EQ(a.size(), 4);
    EXPECT_LE(closure_residual(a), 1e-12);
}

TEST(Closure, RejectsNonSquare) { EXPECT_THROW(close_star_algebra({CMatrix::Zero(2, 3)}, false, 1e-9), Error); }

TEST(Commutant, Examples) {
    EXPECT_EQ(commutant(close_star_algebra({}, true, 1e-9, 2)).size(), 4);
    EXPECT_EQ(commutant(close_star_algebra({matrix_unit(2, 0, 1)}, false, 1e-9)).size(), 1);

    std::vector<CMatrix> gens;
    for (const auto& p : oracle::paulis()) gens.push_back(kron(p, identity(3)));
    const AlgebraBasis a = close_star_algebra(gens, true, 1e-9);
    EXPECT_EQ(a.size(), 4);
    const AlgebraBasis c = commutant(a);
    EXPECT_EQ(c.size(), 9);
    Rng rng(3);
    EXPECT_LE(membership_residual(kron(identity(2), gaussian_matrix(rng, 3, 3)), c), 1e-10);
}

TEST(Commutant, BicommutantOfUnitalAlgebra) {
    Rng rng(4);
    const SampledAlgebra s = random_algebra(rng, 0, {{2, 1}, {1, 2}});
    const AlgebraBasis bc = commutant(commutant(s.alg));
    ASSERT_EQ(bc.size(), s.alg.size());
    std::vector<CMatrix> b1 = s.alg.basis, b2 = bc.basis;
    EXPECT_LE((oracle::span_projector(b1) - oracle::span_projector(b2)).norm(), 1e-8);
}

TEST(AtomicDecompose, FullM3) {
    const AlgebraBasis a = close_star_algebra({matrix_unit(3, 0, 1), matrix_unit(3, 1, 2)}, false, 1e-9);
    const AtomicDecomposition d = atomic_decompose(a, 1e-9, 1);
    EXPECT_EQ(d.d0, 0);
    ASSERT_EQ(d.factors.size(), 1u);
    EXPECT_EQ(d.factors[0], (FactorDims{3, 1}));
}

TEST(AtomicDecompose, DiagonalQubit) {
    const AtomicDecomposition d = atomic_decompose(close_star_algebra({pauli_z()}, true, 1e-9), 1e-9, 1);
    EXPECT_EQ(d.d0, 0);
    EXPECT_EQ(d.factors, (std::vector<FactorDims>{{1, 1}, {1, 1}}));
}

TEST(AtomicDecompose, NullPartPlusScalarBlock) {
    CMatrix g = CMatrix::Zero(3, 3);
    g(1, 1) = g(2, 2) = 1.0;
    const AlgebraBasis a = close_star_algebra({g}, false, 1e-9);
    const AtomicDecomposition d = atomic_decompose(a, 1e-9, 1);
    EXPECT_EQ(d.d0, 1);
    EXPECT_EQ(d.factors, (std::vector<FactorDims>{{1, 2}}));
    EXPECT_LE(pattern_residual(d, a), 1e-9);
    EXPECT_LE(isometry_defect(d.u_alg), 1e-10);
}

TEST(AtomicDecompose, RejectsUnclosedInput) {
    AlgebraBasis a;
    a.ambient_dim = 2;
    a.basis = {matrix_unit(2, 0, 1)};
    EXPECT_THROW(atomic_decompose(a, 1e-9, 1), Error);
}

TEST(AtomicDecompose, RandomConjugatedAlgebras) {
    const std::vector<std::pair<int, std::vector<FactorDims>>> shapes{
        {0, {{2, 2}}}, {1, {{2, 1}, {1, 2}}}, {2, {{1, 1}, {1, 1}, {2, 1}}}, {0, {{3, 2}, {1, 1}}}, {1, {{2, 2}, {2, 2}}}};
    for (std::size_t s = 0; s < shapes.size(); ++s) {
        Rng rng(100 + s);
        const SampledAlgebra sa = random_algebra(rng, shapes[s].first, shapes[s].second);
        const AtomicDecomposition d = atomic_decompose(sa.alg, 1e-9, 7 + s);
        EXPECT_EQ(d.d0, shapes[s].first);
        EXPECT_EQ(sorted(d.factors), sorted(shapes[s].second));
        EXPECT_LE(pattern_residual(d, sa.alg), 1e-9);
        // Unitary invariance of the factor multiset.
        const CMatrix u = haar_unitary(rng, sa.alg.ambient_dim);
        AlgebraBasis rot = sa.alg;
        for (auto& b : rot.basis) b = u * b * u.adjoint();
        EXPECT_EQ(sorted(atomic_decompose(rot, 1e-9, 3).factors), sorted(d.factors));
    }
}

TEST(Membership, Examples) {
    const AlgebraBasis diag = close_star_algebra({pauli_z()}, true, 1e-9);
    EXPECT_LE(membership_residual(diag.basis[0], diag), 1e-14);
    EXPECT_NEAR(membership_residual(matrix_unit(2, 0, 1), diag), 1.0, 1e-14);
    Rng rng(5);
    const CMatrix x = gaussian_matrix(rng, 2, 2);
    CMatrix off = x;
    off(0, 0) = off(1, 1) = 0.0;
    EXPECT_NEAR(membership_residual(x, diag), off.norm(), 1e-13);
}

TEST(TwirlCommutant, Examples) {
    EXPECT_LE((twirl_to_commutant(identity(3), one_factor(3, 1)) - identity(3)).norm(), 1e-14);
    EXPECT_LE(twirl_to_commutant(kron(pauli_z(), identity(2)), one_factor(2, 2)).norm(), 1e-14);

    Rng rng(6);
    const CMatrix x = gaussian_matrix(rng, 4, 4);
    CMatrix avg = CMatrix::Zero(4, 4);
    for (const auto& p : oracle::paulis()) {
        const CMatrix pp = oracle::loop_kron(p, oracle::eye(2));
        avg += pp.adjoint() * x * pp;
    }
    avg /= 4.0;
    EXPECT_LE((twirl_to_commutant(x, one_factor(2, 2)) - avg).norm(), 1e-13);
}

TEST(TwirlCommutant, ProjectorOntoIndependentCommutant) {
    Rng rng(7);
    const SampledAlgebra sa = random_algebra(rng, 1, {{2, 1}, {1, 2}});
    const AtomicDecomposition d = atomic_decompose(sa.alg, 1e-9, 2);
    const AlgebraBasis com = commutant(sa.alg);
    for (int t = 0; t < 5; ++t) {
        const CMatrix x = gaussian_matrix(rng, sa.alg.ambient_dim, sa.alg.ambient_dim);
        const CMatrix y = twirl_to_commutant(x, d);
        EXPECT_LE((twirl_to_commutant(y, d) - y).norm(), 1e-10);
        EXPECT_LE(membership_residual(y, com), 1e-9);
        for (const auto& b : sa.alg.basis) EXPECT_LE((b * y - y * b).norm(), 1e-9);
        EXPECT_LE((d.null_projector() * y).norm(), 1e-12);
    }
}

TEST(TwirlIntertwiner, Examples) {
    Rng rng(8);
    const int e = 2;
    const AtomicDecomposition d = one_factor(2, 2);
    // 1_A (x) b is already an intertwiner.
    const CMatrix b = gaussian_matrix(rng, 2 * e, 2);
    const CMatrix v = kron(identity(2), b);
    EXPECT_LE((twirl_intertwiner(v, d, e) - v).norm(), 1e-13);
    // Traceless A-factor times an intertwiner vanishes.
    const CMatrix xa = kron(kron(pauli_z(), identity(2)), identity(e));
    EXPECT_LE(twirl_intertwiner(xa * v, d, e).norm(), 1e-13);
    // Pauli 1-design oracle.
    const CMatrix r = gaussian_matrix(rng, 4 * e, 4);
    CMatrix avg = CMatrix::Zero(4 * e, 4);
    for (const auto& p : oracle::paulis()) {
        const CMatrix pl = oracle::loop_kron(p, oracle::eye(2));
        avg += oracle::loop_kron(pl.adjoint(), oracle::eye(e)) * r * pl;
    }
    avg /= 4.0;
    EXPECT_LE((twirl_intertwiner(r, d, e) - avg).norm(), 1e-13);
}

TEST(TwirlIntertwiner, ProjectorAndRelation) {
    Rng rng(9);
    const SampledAlgebra sa = random_algebra(rng, 0, {{2, 1}, {1, 2}});
    const AtomicDecomposition d = atomic_decompose(sa.alg, 1e-9, 2);
    const int e = 2, n = sa.alg.ambient_dim;
    const CMatrix v = gaussian_matrix(rng, n * e, n);
    const CMatrix b = twirl_intertwiner(v, d, e);
    EXPECT_LE((twirl_intertwiner(b, d, e) - b).norm(), 1e-10);
    for (const auto& x : sa.alg.basis) EXPECT_LE((kron(x, identity(e)) * b - b * x).norm(), 1e-9);
}

TEST(IntertwinerDecompose, RoundTripAndErrors) {
    Rng rng(10);
    const AtomicDecomposition d = random_decomposition(rng, 1, {{2, 1}, {1, 2}});
    const int e = 2;
    IntertwinerBlocks blocks;
    blocks.b0 = gaussian_matrix(rng, d.d0 * e, d.d0);
    for (const auto& f : d.factors) blocks.blocks.push_back(gaussian_matrix(rng, f.dim_b * e, f.dim_b));
    const CMatrix b = assemble_intertwiner(blocks, d, e, 1);
    const IntertwinerBlocks back = intertwiner_decompose(b, d, e, 1, 1e-9);
    EXPECT_LE((back.b0 - blocks.b0).norm(), 1e-10);
    for (std::size_t i = 0; i < blocks.blocks.size(); ++i) EXPECT_LE((back.blocks[i] - blocks.blocks[i]).norm(), 1e-10);
    EXPECT_LE((assemble_intertwiner(back, d, e, 1) - b).norm(), 1e-9);

    const IntertwinerBlocks zero = intertwiner_decompose(CMatrix::Zero(d.dim * e, d.dim), d, e, 1, 1e-9);
    for (const auto& blk : zero.blocks) EXPECT_LE(blk.norm(), 0.0);

    try {
        intertwiner_decompose(gaussian_matrix(rng, d.dim * e, d.dim), d, e, 1, 1e-9);
        FAIL() << "expected NotIntertwiner";
    } catch (const Error& err) {
        EXPECT_EQ(err.kind(), ErrorKind::NotIntertwiner);
        EXPECT_GT(err.residual(), 1e-3);
    }
}
