#include <gtest/gtest.h>

#include "igkls/normal_form.hpp"
#include "igkls/sampling.hpp"
#include "oracles.hpp"

using namespace igkls;

namespace {

AtomicDecomposition one_factor(int da, int db) {
    AtomicDecomposition d;
    d.dim = da * db;
    d.u_alg = identity(d.dim);
    d.factors = {{da, db}};
    return d;
}

double action_distance(const GKLSRep& g1, const GKLSRep& g2) {
    return oracle::map_distance(
        g1.d, [&](const CMatrix& x) { return oracle::gkls_apply_kraus(g1.stine.v, g1.stine.d_env, g1.k, x); },
        [&](const CMatrix& x) { return oracle::gkls_apply_kraus(g2.stine.v, g2.stine.d_env, g2.k, x); });
}

AtomicNormalForm sample_nf(std::uint64_t seed, int d0, std::vector<FactorDims> factors, int e = 2, int f_max = 2) {
    Rng rng(seed);
    NormalFormParams p;
    p.d0 = d0;
    p.factors = std::move(factors);
    p.d_env = e;
    p.f_max = f_max;
    const AtomicDecomposition dec = random_decomposition(rng, p.d0, p.factors);
    return random_normal_form(rng, dec, p);
}

GaugeData random_gauge(Rng& rng, const AtomicNormalForm& nf, bool with_psi = true) {
    GaugeData g;
    g.n = nf.n();
    for (int i = 0; i < g.n; ++i) {
        for (int j = 0; j < g.n; ++j) g.w.push_back(haar_unitary(rng, nf.pair(i, j).d_f));
        const int f = nf.pair(i, i).d_f;
        g.psi.push_back(with_psi ? CVector(0.5 * gaussian_vector(rng, f)) : CVector(CVector::Zero(f)));
        g.mu.push_back(rng.normal());
    }
    return g;
}

}  // namespace

TEST(GklsApply, CommutatorCase) {
    Rng rng(1);
    const CMatrix h = random_hermitian(rng, 3), x = gaussian_matrix(rng, 3, 3);
    const GKLSRep g = make_gkls(CMatrix(0, 3), 0, kI * h);
    EXPECT_LE((gkls_apply(g, x) - kI * (h * x - x * h)).norm(), 1e-13);
    EXPECT_LE(gkls_apply(g, identity(3)).norm(), 1e-14);
}

TEST(GklsApply, ConditionallyUnital) {
    Rng rng(2);
    const CMatrix v = gaussian_matrix(rng, 6, 3);
    const GKLSRep g = make_gkls(v, 2, 0.5 * v.adjoint() * v);
    EXPECT_LE(gkls_apply(g, identity(3)).norm(), 1e-13);
}

TEST(GklsApply, MatchesKrausFormAndIsHermitianPreserving) {
    Rng rng(3);
    const GKLSRep g = make_gkls(gaussian_matrix(rng, 9, 3), 3, gaussian_matrix(rng, 3, 3));
    for (int t = 0; t < 5; ++t) {
        const CMatrix x = gaussian_matrix(rng, 3, 3);
        EXPECT_LE((gkls_apply(g, x) - oracle::gkls_apply_kraus(g.stine.v, 3, g.k, x)).norm(), 1e-12);
        EXPECT_LE((gkls_apply(g, x.adjoint()) - gkls_apply(g, x).adjoint()).norm(), 1e-10);
    }
    // Superoperator acts on row-major vec.
    const CMatrix x = gaussian_matrix(rng, 3, 3);
    EXPECT_LE((superoperator(g) * oracle::row_vec(x) - oracle::row_vec(gkls_apply(g, x))).norm(), 1e-12);
}

TEST(GklsMinimalize, PureIntertwinerCollapses) {
    Rng rng(4);
    const CVector chi = gaussian_vector(rng, 2);
    const GKLSRep g = make_gkls(kron(identity(3), CMatrix(chi)), 2, gaussian_matrix(rng, 3, 3));
    const GKLSMinimal m = gkls_minimalize(g, 1e-9);
    EXPECT_EQ(m.g_min.stine.d_env, 0);
    EXPECT_LE((m.g_min.k - (g.k - 0.5 * chi.squaredNorm() * identity(3))).norm(), 1e-12);
    EXPECT_LE(action_distance(g, m.g_min), 1e-12);
}

TEST(GklsMinimalize, AlreadyMinimalIsUnchanged) {
    Rng rng(5);
    CMatrix v = gaussian_matrix(rng, 6, 3);
    // Remove the intertwiner part so the representation is minimal.
    v -= kron(identity(3), CMatrix(twirl_intertwiner(v, one_factor(3, 1), 2).block(0, 0, 2, 1)));
    const GKLSRep g = make_gkls(v, 2, gaussian_matrix(rng, 3, 3));
    const GKLSMinimal m = gkls_minimalize(g, 1e-9);
    EXPECT_EQ(m.g_min.stine.d_env, 2);
    EXPECT_LE(m.phi.norm(), 1e-12);
    EXPECT_LE(isometry_defect(m.p.adjoint()), 1e-12);
    EXPECT_LE(action_distance(g, m.g_min), 1e-12);
}

TEST(GklsMinimalize, PaddedEnvironmentDropsOne) {
    Rng rng(6);
    const GKLSRep g0 = gkls_minimalize(make_gkls(gaussian_matrix(rng, 6, 3), 2, gaussian_matrix(rng, 3, 3)), 1e-9).g_min;
    const CMatrix pad = haar_isometry(rng, g0.stine.d_env + 1, g0.stine.d_env);
    const GKLSRep g = make_gkls(kron(identity(3), pad) * g0.stine.v, g0.stine.d_env + 1, g0.k);
    const GKLSMinimal m = gkls_minimalize(g, 1e-9);
    EXPECT_EQ(m.g_min.stine.d_env, g0.stine.d_env);
    EXPECT_LE(action_distance(g, m.g_min), 1e-10);
}

TEST(GklsGauge, RecoversForwardConstruction) {
    for (int t = 0; t < 5; ++t) {
        Rng rng(10 + t);
        const GKLSRep g1 = gkls_minimalize(make_gkls(gaussian_matrix(rng, 9, 3), 3, gaussian_matrix(rng, 3, 3)), 1e-9).g_min;
        const int e1 = g1.stine.d_env, e2 = e1 + t % 2;
        const CMatrix w0 = haar_isometry(rng, e2, e1);
        const CVector psi0 = gaussian_vector(rng, e2);
        const double mu0 = rng.normal();
        const CMatrix v2 = kron(identity(3), w0) * g1.stine.v + kron(identity(3), CMatrix(psi0));
        const CMatrix k2 = g1.k + kron(identity(3), CMatrix(psi0.adjoint() * w0)) * g1.stine.v +
                           (0.5 * psi0.squaredNorm() + kI * mu0) * identity(3);
        const GKLSRep g2 = make_gkls(v2, e2, k2);
        const GKLSGauge gg = gkls_gauge(g1, g2, 1e-9);
        EXPECT_LE((gg.w - w0).norm(), 1e-8);
        EXPECT_LE((gg.psi - psi0).norm(), 1e-8);
        EXPECT_NEAR(gg.mu, mu0, 1e-8);
    }
}

TEST(GklsGauge, TrivialCases) {
    Rng rng(20);
    const GKLSRep g = gkls_minimalize(make_gkls(gaussian_matrix(rng, 6, 3), 2, gaussian_matrix(rng, 3, 3)), 1e-9).g_min;
    const GKLSGauge same = gkls_gauge(g, g, 1e-9);
    EXPECT_LE((same.w - identity(g.stine.d_env)).norm(), 1e-10);
    EXPECT_LE(same.psi.norm(), 1e-10);
    EXPECT_NEAR(same.mu, 0.0, 1e-10);
    const GKLSRep drift = make_gkls(g.stine.v, g.stine.d_env, g.k + kI * 0.7 * identity(3));
    const GKLSGauge gd = gkls_gauge(g, drift, 1e-9);
    EXPECT_LE(gd.psi.norm(), 1e-10);
    EXPECT_NEAR(gd.mu, 0.7, 1e-10);
}

TEST(GklsGauge, Errors) {
    Rng rng(21);
    const GKLSRep g = gkls_minimalize(make_gkls(gaussian_matrix(rng, 6, 3), 2, gaussian_matrix(rng, 3, 3)), 1e-9).g_min;
    const GKLSRep other = make_gkls(g.stine.v, g.stine.d_env, g.k + identity(3));
    try {
        gkls_gauge(g, other, 1e-9);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NotSameGenerator);
    }
    const GKLSRep padded = make_gkls(kron(identity(3), haar_isometry(rng, 3, 2)) * g.stine.v, 3, g.k);
    try {
        gkls_gauge(padded, g, 1e-9);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NotMinimal);
    }
}

TEST(InvariantSplit, PureIntertwiner) {
    Rng rng(30);
    const AtomicDecomposition dec = one_factor(2, 2);
    const CMatrix v = kron(identity(2), gaussian_matrix(rng, 4, 2));
    const GKLSRep g = make_gkls(v, 2, 0.5 * v.adjoint() * v);
    const InvariantSplit s = invariant_split(g, dec, Tolerances{});
    EXPECT_LE(s.a.norm(), 1e-12);
    EXPECT_LE((s.b - v).norm(), 1e-12);
    EXPECT_LE((s.b.adjoint() * s.a + 0.5 * s.b.adjoint() * s.b + s.k_alg + kI * s.h_comm - g.k).norm(), 1e-10);
}

TEST(InvariantSplit, FullMatrixAlgebraTwirlOracle) {
    Rng rng(31);
    const int d = 3, e = 2;
    const GKLSRep g = make_gkls(gaussian_matrix(rng, d * e, d), e, gaussian_matrix(rng, d, d));
    const InvariantSplit s = invariant_split(g, one_factor(d, 1), Tolerances{});
    CMatrix chi = CMatrix::Zero(e, 1);
    for (int a = 0; a < d; ++a) chi += g.stine.v.block(a * e, a, e, 1);
    chi /= static_cast<double>(d);
    EXPECT_LE((s.b - oracle::loop_kron(oracle::eye(d), chi)).norm(), 1e-12);
    EXPECT_LE((s.a + s.b - g.stine.v).norm(), 1e-12);
    EXPECT_LE((s.b.adjoint() * s.a + 0.5 * s.b.adjoint() * s.b + s.k_alg + kI * s.h_comm - g.k).norm(), 1e-10);
}

TEST(InvariantSplit, NullAlgebra) {
    Rng rng(32);
    AtomicDecomposition dec;
    dec.dim = 3;
    dec.d0 = 3;
    dec.u_alg = identity(3);
    const GKLSRep g = make_gkls(gaussian_matrix(rng, 6, 3), 2, gaussian_matrix(rng, 3, 3));
    const InvariantSplit s = invariant_split(g, dec, Tolerances{});
    EXPECT_LE((s.v0 - g.stine.v).norm(), 1e-13);
    EXPECT_LE((s.k0 - g.k).norm(), 1e-13);
    EXPECT_LE(s.a.norm() + s.b.norm() + s.k_alg.norm() + s.h_comm.norm(), 1e-13);
}

TEST(InvariantSplit, RejectsNonInvariant) {
    Rng rng(33);
    const GKLSRep g = make_gkls(gaussian_matrix(rng, 8, 4), 2, gaussian_matrix(rng, 4, 4));
    try {
        invariant_split(g, one_factor(2, 2), Tolerances{});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NotInvariant);
        EXPECT_GT(e.residual(), 1e-3);
    }
}

TEST(NormalForm, SamplerRoundTrip) {
    const std::vector<std::pair<int, std::vector<FactorDims>>> shapes{
        {0, {{2, 2}}}, {1, {{2, 2}}}, {2, {{2, 1}, {1, 2}}}, {1, {{1, 1}, {2, 1}, {1, 3}}}, {0, {{1, 2}, {1, 1}}}};
    for (std::size_t k = 0; k < shapes.size(); ++k) {
        const AtomicNormalForm nf = sample_nf(100 + k, shapes[k].first, shapes[k].second, 2 + k % 2);
        const GKLSRep g = reconstruct_from_normal_form(nf);
        EXPECT_TRUE(gkls_invariance_check(g, nf.dec, 1e-9).pass);
        const AtomicNormalForm back = atomic_normal_form(g, nf.dec, Tolerances{});
        EXPECT_LE(action_distance(g, reconstruct_from_normal_form(back)), 1e-8) << k;
        EXPECT_NO_THROW(validate(back, 1e-9));
    }
}

TEST(NormalForm, KOnlyFormHasNoDissipativeData) {
    Rng rng(40);
    NormalFormParams p;
    p.d0 = 1;
    p.factors = {{2, 1}, {1, 2}};
    p.k_only = true;
    const AtomicDecomposition dec = random_decomposition(rng, p.d0, p.factors);
    const AtomicNormalForm nf = random_normal_form(rng, dec, p);
    const GKLSRep g = reconstruct_from_normal_form(nf);
    const AtomicNormalForm back = atomic_normal_form(g, dec, Tolerances{});
    for (const auto& pb : back.pairs) EXPECT_LE(pb.a.norm(), 1e-12);
    for (const auto& f : back.factors) EXPECT_LE(f.b.norm(), 1e-12);
    const KOnlySplit ks = k_only_split(g.k, dec, Tolerances{});
    EXPECT_LE((ks.k_alg + kI * ks.h_comm + dec.null_projector().adjoint() * ks.k0 - g.k).norm(), 1e-10);
}

TEST(Reconstruct, ZeroFormGivesZeroGenerator) {
    AtomicNormalForm nf = sample_nf(41, 1, {{2, 1}});
    nf.v0.setZero();
    nf.k0.setZero();
    for (auto& f : nf.factors) {
        f.k_a.setZero();
        f.h_b.setZero();
        f.b.setZero();
    }
    for (auto& p : nf.pairs) p.a.setZero();
    const GKLSRep g = reconstruct_from_normal_form(nf);
    EXPECT_LE(g.stine.v.norm() + g.k.norm(), 0.0);
}

TEST(Reconstruct, BrokenOrthogonalityViolatesInvariance) {
    Rng rng(42);
    NormalFormParams p;
    p.factors = {{1, 1}, {1, 1}};
    p.d_env = 2;
    p.d_f = {1, 1, 1, 1};
    const AtomicDecomposition dec = random_decomposition(rng, 0, p.factors);
    AtomicNormalForm nf = random_normal_form(rng, dec, p);
    EXPECT_TRUE(gkls_invariance_check(reconstruct_from_normal_form(nf), dec, 1e-9).pass);
    nf.pair(0, 1).u = nf.pair(0, 0).u;
    const InvarianceReport r = gkls_invariance_check(reconstruct_from_normal_form(nf), dec, 1e-9);
    EXPECT_FALSE(r.pass);
    EXPECT_GT(r.max_residual, 1e-3);
}

TEST(ReduceMinimal, MinimalFormUnchanged) {
    const AtomicNormalForm nf = reduce_normal_form_minimal(sample_nf(50, 1, {{2, 1}, {1, 2}}), Tolerances{});
    ASSERT_TRUE(minimality_certificate(nf, 1e-9).minimal);
    const AtomicNormalForm again = reduce_normal_form_minimal(nf, Tolerances{});
    EXPECT_LE(normal_form_distance(nf, again, false), 1e-10);
}

TEST(ReduceMinimal, StripsPaddingIntoIntertwiner) {
    Rng rng(51);
    NormalFormParams p;
    p.factors = {{2, 1}};
    p.d_env = 3;
    p.d_f = {1};
    const AtomicDecomposition dec = random_decomposition(rng, 0, p.factors);
    AtomicNormalForm nf = reduce_normal_form_minimal(random_normal_form(rng, dec, p), Tolerances{});
    ASSERT_EQ(nf.pair(0, 0).d_f, 1);
    // Pad F with one dimension carrying only 1 (x) |chi>, and a fresh orthogonal column of U.
    PairBlock& pb = nf.pair(0, 0);
    const CMatrix q = haar_unitary(rng, 3);
    CMatrix u(3, 2);
    u.col(0) = pb.u.col(0);
    u.col(1) = ((identity(3) - pb.u * pb.u.adjoint()) * q.col(0)).normalized();
    CMatrix a = CMatrix::Zero(4, 2);
    const cplx chi(0.8, -0.3);
    for (int r = 0; r < 2; ++r) {
        a.row(r * 2) = pb.a.row(r);
        a(r * 2 + 1, r) = chi;
    }
    pb.d_f = 2;
    pb.u = u;
    pb.a = a;
    ASSERT_NO_THROW(validate(nf, 1e-9));
    const MinimalityCertificate before = minimality_certificate(nf, 1e-9);
    EXPECT_FALSE(before.minimal);
    const AtomicNormalForm red = reduce_normal_form_minimal(nf, Tolerances{});
    EXPECT_EQ(red.pair(0, 0).d_f, 1);
    EXPECT_TRUE(minimality_certificate(red, 1e-9).minimal);
    EXPECT_GT((red.factors[0].b - nf.factors[0].b).norm(), 0.1);
    EXPECT_LE(action_distance(reconstruct_from_normal_form(nf), reconstruct_from_normal_form(red)), 1e-8);
}

TEST(ReduceMinimal, DeadDimensionDrops) {
    Rng rng(52);
    NormalFormParams p;
    p.factors = {{1, 1}, {2, 1}};
    p.d_env = 4;
    p.d_f = {1, 1, 1, 1};
    const AtomicDecomposition dec = random_decomposition(rng, 0, p.factors);
    AtomicNormalForm nf = reduce_normal_form_minimal(random_normal_form(rng, dec, p), Tolerances{});
    PairBlock& pb = nf.pair(1, 0);
    ASSERT_EQ(pb.d_f, 1);
    CMatrix others(4, 0);
    for (int j = 0; j < 2; ++j) {
        const CMatrix& uj = nf.pair(1, j).u;
        CMatrix joined(4, others.cols() + uj.cols());
        joined << others, uj;
        others = joined;
    }
    CMatrix u(4, 2);
    u.col(0) = pb.u.col(0);
    u.col(1) = ((identity(4) - others * others.adjoint()) * gaussian_vector(rng, 4)).normalized();
    CMatrix a = CMatrix::Zero(4, 1);
    for (int r = 0; r < 2; ++r) a(r * 2, 0) = pb.a(r, 0);
    pb.d_f = 2;
    pb.u = u;
    pb.a = a;
    ASSERT_NO_THROW(validate(nf, 1e-9));
    const AtomicNormalForm red = reduce_normal_form_minimal(nf, Tolerances{});
    EXPECT_EQ(red.pair(1, 0).d_f, 1);
    EXPECT_LE(action_distance(reconstruct_from_normal_form(nf), reconstruct_from_normal_form(red)), 1e-10);
}

TEST(NormalFormGauge, RecoversRandomGauge) {
    for (int t = 0; t < 5; ++t) {
        Rng rng(60 + t);
        const AtomicNormalForm nf1 =
            reduce_normal_form_minimal(sample_nf(160 + t, t % 2, {{2, 1}, {1, 2}}, 3), Tolerances{});
        const GaugeData g0 = random_gauge(rng, nf1);
        const AtomicNormalForm nf2 = apply_gauge(nf1, g0);
        EXPECT_LE(action_distance(reconstruct_from_normal_form(nf1), reconstruct_from_normal_form(nf2)), 1e-10);
        const GaugeResult r = normal_form_gauge(nf1, nf2, Tolerances{}, GaugeMode::Full);
        EXPECT_LE(r.residual, 1e-8);
        for (std::size_t k = 0; k < g0.w.size(); ++k) EXPECT_LE((r.gauge.w[k] - g0.w[k]).norm(), 1e-8);
        for (int i = 0; i < g0.n; ++i) {
            EXPECT_LE((r.gauge.psi[i] - g0.psi[i]).norm(), 1e-8);
            EXPECT_NEAR(r.gauge.mu[i], g0.mu[i], 1e-8);
        }
    }
}

TEST(NormalFormGauge, IdentityAndScalarShift) {
    const AtomicNormalForm nf = reduce_normal_form_minimal(sample_nf(70, 0, {{2, 1}, {1, 1}}, 3), Tolerances{});
    const GaugeResult same = normal_form_gauge(nf, nf, Tolerances{}, GaugeMode::Full);
    for (int i = 0; i < same.gauge.n; ++i) {
        EXPECT_LE(same.gauge.psi[i].norm(), 1e-10);
        EXPECT_NEAR(same.gauge.mu[i], 0.0, 1e-10);
        for (int j = 0; j < same.gauge.n; ++j)
            EXPECT_LE((same.gauge.w_at(i, j) - identity(nf.pair(i, j).d_f)).norm(), 1e-10);
    }
    GaugeData shift;
    shift.n = nf.n();
    for (int i = 0; i < nf.n(); ++i) {
        for (int j = 0; j < nf.n(); ++j) shift.w.push_back(identity(nf.pair(i, j).d_f));
        shift.psi.push_back(CVector::Zero(nf.pair(i, i).d_f));
        shift.mu.push_back(i == 1 ? 0.3 : 0.0);
    }
    const GaugeResult r = normal_form_gauge(nf, apply_gauge(nf, shift), Tolerances{}, GaugeMode::Full);
    EXPECT_NEAR(r.gauge.mu[1], 0.3, 1e-10);
    EXPECT_NEAR(r.gauge.mu[0], 0.0, 1e-10);
    EXPECT_LE(r.gauge.psi[1].norm(), 1e-10);
}

TEST(NormalFormGauge, Transitivity) {
    Rng rng(71);
    const AtomicNormalForm nf1 = reduce_normal_form_minimal(sample_nf(171, 1, {{2, 1}, {1, 2}}, 3), Tolerances{});
    const AtomicNormalForm nf2 = apply_gauge(nf1, random_gauge(rng, nf1));
    const AtomicNormalForm nf3 = apply_gauge(nf2, random_gauge(rng, nf2));
    const GaugeData g12 = normal_form_gauge(nf1, nf2, Tolerances{}, GaugeMode::Full).gauge;
    const GaugeData g23 = normal_form_gauge(nf2, nf3, Tolerances{}, GaugeMode::Full).gauge;
    const GaugeData g13 = normal_form_gauge(nf1, nf3, Tolerances{}, GaugeMode::Full).gauge;
    for (std::size_t k = 0; k < g13.w.size(); ++k) EXPECT_LE((g23.w[k] * g12.w[k] - g13.w[k]).norm(), 1e-7);
}

TEST(NormalFormGauge, AlgebraOnlyMode) {
    Rng rng(72);
    const AtomicNormalForm nf1 = reduce_normal_form_minimal(sample_nf(172, 0, {{2, 1}, {1, 1}}, 3), Tolerances{});
    AtomicNormalForm nf2 = apply_gauge(nf1, random_gauge(rng, nf1));
    const GaugeResult r = normal_form_gauge(nf1, nf2, Tolerances{}, GaugeMode::AlgebraOnly);
    EXPECT_LE(r.residual, 1e-8);
}

TEST(NormalFormGauge, Errors) {
    const AtomicNormalForm nf1 = reduce_normal_form_minimal(sample_nf(73, 0, {{2, 1}}, 3), Tolerances{});
    AtomicNormalForm other = nf1;
    other.factors[0].k_a += identity(2);
    try {
        normal_form_gauge(nf1, other, Tolerances{}, GaugeMode::Full);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NotEquivalent);
    }
}

TEST(KOnlySplit, AlgebraElementHasCentralCommutantPart) {
    Rng rng(80);
    const AtomicDecomposition dec = random_decomposition(rng, 1, {{2, 1}, {1, 2}});
    const CMatrix k = algebra_element(dec, {gaussian_matrix(rng, 2, 2), gaussian_matrix(rng, 1, 1)});
    const KOnlySplit s = k_only_split(k, dec, Tolerances{});
    EXPECT_LE((s.k_alg + kI * s.h_comm - k).norm(), 1e-10);
    EXPECT_LE(s.k0.norm(), 1e-12);
    EXPECT_LE(membership_residual(s.k_alg, dec), 1e-9);
    // The commutant part of an algebra element is central: it is also in the algebra.
    EXPECT_LE(membership_residual(s.h_comm, dec), 1e-9);
    EXPECT_LE(hermitian_defect(s.h_comm), 1e-12);
}

TEST(KOnlySplit, ScalarAndNullCoupling) {
    Rng rng(81);
    const AtomicDecomposition dec = random_decomposition(rng, 1, {{2, 1}});
    const KOnlySplit s = k_only_split(kI * identity(3), dec, Tolerances{});
    EXPECT_LE((s.k_alg + kI * s.h_comm + dec.null_projector().adjoint() * s.k0 - kI * identity(3)).norm(), 1e-12);
    // K with a null-space row block: P0^dag K0 captures P0 K exactly.
    const CMatrix p0 = dec.null_projector();
    const CMatrix k = algebra_element(dec, {gaussian_matrix(rng, 2, 2)}) + p0.adjoint() * gaussian_matrix(rng, 1, 3);
    const KOnlySplit t = k_only_split(k, dec, Tolerances{});
    EXPECT_LE((t.k0 - p0 * k).norm(), 1e-13);
    EXPECT_LE((t.k_alg + kI * t.h_comm + p0.adjoint() * t.k0 - k).norm(), 1e-12);
}

TEST(KOnlySplit, RejectsNonInvariant) {
    Rng rng(82);
    const AtomicDecomposition dec = random_decomposition(rng, 0, {{2, 2}});
    try {
        k_only_split(gaussian_matrix(rng, 4, 4), dec, Tolerances{});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NotInvariant);
    }
}
