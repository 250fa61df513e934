#include "igkls/normal_form.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace igkls {

namespace {

double scale_of(const CMatrix& m) { return std::max(1.0, m.norm()); }

CMatrix pair_env(const CMatrix& v, int d, int e, const CVector& phi) {
    CMatrix out(d, v.cols());
    for (int a = 0; a < d; ++a) out.row(a) = phi.adjoint() * v.middleRows(a * e, e);
    return out;
}

CMatrix one_tensor(int d, const CVector& phi) {
    CMatrix out = CMatrix::Zero(d * phi.size(), d);
    for (int a = 0; a < d; ++a) out.block(a * phi.size(), a, phi.size(), 1) = phi;
    return out;
}

CMatrix frame_block(const CMatrix& x, const AtomicDecomposition& dec, int i) {
    const CMatrix p = dec.projector(i);
    return p * x * p.adjoint();
}

CMatrix lifted_b(const AtomicNormalForm& nf) {
    IntertwinerBlocks blocks;
    blocks.b0 = CMatrix::Zero(nf.dec.d0 * nf.d_env, nf.dec.d0);
    for (const auto& f : nf.factors) blocks.blocks.push_back(f.b);
    return assemble_intertwiner(blocks, nf.dec, nf.d_env, 1);
}

CMatrix lifted_a(const AtomicNormalForm& nf) {
    BlockFactorization bf;
    bf.d_env = nf.d_env;
    bf.n_a = bf.n_c = nf.n();
    bf.v0 = CMatrix::Zero(nf.dec.d0 * nf.d_env, nf.dec.dim);
    bf.pairs = nf.pairs;
    return reassemble(bf, nf.dec, nf.dec).v;
}

double rel_diff(const CMatrix& a, const CMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) return std::numeric_limits<double>::infinity();
    return (a - b).norm() / scale_of(a);
}

StinespringRep pair_rep(const AtomicNormalForm& nf, int i, int j) {
    const PairBlock& pb = nf.pair(i, j);
    return {nf.dec.factors[i].dim_a, nf.dec.factors[j].dim_a, pb.d_f, pb.a};
}

}  // namespace

InvarianceReport gkls_invariance_check(const GKLSRep& g, const AtomicDecomposition& dec, double tol) {
    validate(g);
    if (g.d != dec.dim) throw Error(ErrorKind::Shape, "gkls_invariance_check: dimension mismatch");
    InvarianceReport rep;
    const AlgebraBasis basis = algebra_basis(dec);
    for (int k = 0; k < basis.size(); ++k) {
        const CMatrix y = gkls_apply(g, basis.basis[k]);
        const double r = membership_residual(y, dec) / scale_of(y);
        if (rep.worst_index < 0 || r > rep.max_residual) {
            rep.max_residual = r;
            rep.worst_index = k;
        }
    }
    rep.pass = rep.max_residual <= tol;
    return rep;
}

InvariantSplit invariant_split(const GKLSRep& g, const AtomicDecomposition& dec, const Tolerances& tol) {
    const InvarianceReport inv = gkls_invariance_check(g, dec, tol.verify);
    if (!inv.pass)
        throw Error(ErrorKind::NotInvariant,
                    "generator leaves the algebra (basis element " + std::to_string(inv.worst_index) + ")",
                    inv.max_residual);
    const int d = g.d, e = g.stine.d_env;
    const CMatrix& v = g.stine.v;
    const CMatrix p0 = dec.null_projector();
    InvariantSplit s;
    s.v0 = kron(p0, identity(e)) * v;
    s.b = twirl_intertwiner(v, dec, e);
    s.a = v - kron(p0.adjoint(), identity(e)) * s.v0 - s.b;
    const CMatrix kappa = g.k - s.b.adjoint() * s.a - 0.5 * s.b.adjoint() * s.b;
    const CMatrix kc = twirl_to_commutant(kappa, dec);
    s.h_comm = (-kI / 2.0) * (kc - kc.adjoint());
    s.k_alg = kappa - p0.adjoint() * p0 * kappa - kI * s.h_comm;
    s.k0 = p0 * kappa;

    const double r_k = membership_residual(s.k_alg, dec) / scale_of(s.k_alg);
    if (r_k > tol.post())
        throw Error(ErrorKind::NotInvariant, "algebra part of K is not in the algebra", r_k);
    const StinespringRep arep{d, d, e, s.a};
    const InvarianceReport ra = cp_invariance_check(arep, dec, dec, tol.post());
    if (!ra.pass) throw Error(ErrorKind::NotInvariant, "dissipative part does not preserve the algebra", ra.max_residual);
    return s;
}

AtomicNormalForm atomic_normal_form(const GKLSRep& g, const AtomicDecomposition& dec, const Tolerances& tol) {
    const InvariantSplit s = invariant_split(g, dec, tol);
    const int d = g.d, e = g.stine.d_env;
    Tolerances inner = tol;
    inner.verify = tol.post();
    const BlockFactorization bf = atomic_block_factorize(StinespringRep{d, d, e, s.a}, dec, dec, inner);
    const IntertwinerBlocks bb = intertwiner_decompose(s.b, dec, e, 1, tol.post());

    AtomicNormalForm nf;
    nf.dec = dec;
    nf.d_env = e;
    nf.v0 = s.v0;
    nf.k0 = s.k0;
    for (int i = 0; i < dec.factor_count(); ++i) {
        const auto f = dec.factors[i];
        FactorData fd;
        fd.k_a = partial_trace(frame_block(s.k_alg, dec, i), f.dim_a, f.dim_b, Subsystem::B) / static_cast<double>(f.dim_b);
        const CMatrix h = partial_trace(frame_block(s.h_comm, dec, i), f.dim_a, f.dim_b, Subsystem::A) /
                          static_cast<double>(f.dim_a);
        fd.h_b = (h + h.adjoint()) / 2.0;
        fd.b = bb.blocks[i];
        nf.factors.push_back(std::move(fd));
    }
    nf.pairs = bf.pairs;

    const GKLSRep back = reconstruct_from_normal_form(nf);
    const double rv = (back.stine.v - g.stine.v).norm() / scale_of(g.stine.v);
    const double rk = (back.k - g.k).norm() / scale_of(g.k);
    if (std::max(rv, rk) > tol.post())
        throw Error(ErrorKind::FactorizationResidual, "normal form does not reconstruct the generator", std::max(rv, rk));
    return nf;
}

GKLSRep reconstruct_from_normal_form(const AtomicNormalForm& nf) {
    const AtomicDecomposition& dec = nf.dec;
    const int e = nf.d_env;
    if (static_cast<int>(nf.factors.size()) != nf.n() || static_cast<int>(nf.pairs.size()) != nf.n() * nf.n())
        throw Error(ErrorKind::Shape, "normal form block counts do not match the decomposition");
    const CMatrix p0 = dec.null_projector();
    const CMatrix a = lifted_a(nf);
    const CMatrix b = lifted_b(nf);
    CMatrix v = a + b;
    if (dec.d0 > 0) v += kron(p0.adjoint(), identity(e)) * nf.v0;
    std::vector<CMatrix> ka, hb;
    for (const auto& f : nf.factors) {
        ka.push_back(f.k_a);
        hb.push_back(f.h_b);
    }
    CMatrix k = b.adjoint() * a + 0.5 * b.adjoint() * b + algebra_element(dec, ka) + kI * commutant_element(dec, hb);
    if (dec.d0 > 0) k += p0.adjoint() * nf.k0;
    return make_gkls(v, e, k);
}

void validate(const AtomicNormalForm& nf, double tol) {
    validate_decomposition(nf.dec, tol);
    const int n = nf.n(), e = nf.d_env;
    if (static_cast<int>(nf.factors.size()) != n || static_cast<int>(nf.pairs.size()) != n * n)
        throw Error(ErrorKind::SchemaError, "normal form block counts do not match the decomposition");
    if (nf.v0.rows() != nf.dec.d0 * e || nf.v0.cols() != nf.dec.dim)
        throw Error(ErrorKind::SchemaError, "v0: shape must be (d0*d_env) x d");
    if (nf.k0.rows() != nf.dec.d0 || nf.k0.cols() != nf.dec.dim) throw Error(ErrorKind::SchemaError, "k0: shape must be d0 x d");
    for (int i = 0; i < n; ++i) {
        const auto f = nf.dec.factors[i];
        const FactorData& fd = nf.factors[i];
        const std::string tag = "factors[" + std::to_string(i) + "]";
        if (fd.k_a.rows() != f.dim_a || fd.k_a.cols() != f.dim_a) throw Error(ErrorKind::SchemaError, tag + ".k_a: shape");
        if (fd.h_b.rows() != f.dim_b || fd.h_b.cols() != f.dim_b) throw Error(ErrorKind::SchemaError, tag + ".h_b: shape");
        if (fd.b.rows() != f.dim_b * e || fd.b.cols() != f.dim_b) throw Error(ErrorKind::SchemaError, tag + ".b: shape");
        if (hermitian_defect(fd.h_b) > tol * scale_of(fd.h_b))
            throw Error(ErrorKind::InvariantError, tag + ".h_b: not self-adjoint", hermitian_defect(fd.h_b));
        for (int j = 0; j < n; ++j) {
            const PairBlock& pb = nf.pair(i, j);
            const auto g = nf.dec.factors[j];
            const std::string ptag = "pairs(" + std::to_string(i) + "," + std::to_string(j) + ")";
            if (pb.i != i || pb.j != j) throw Error(ErrorKind::SchemaError, ptag + ": index labels out of order");
            if (pb.a.rows() != f.dim_a * pb.d_f || pb.a.cols() != g.dim_a) throw Error(ErrorKind::SchemaError, ptag + ".a: shape");
            if (pb.u.rows() != f.dim_b * e || pb.u.cols() != pb.d_f * g.dim_b)
                throw Error(ErrorKind::SchemaError, ptag + ".u: shape");
            const double defect = isometry_defect(pb.u);
            if (defect > std::max(tol, 1e-9)) throw Error(ErrorKind::InvariantError, ptag + ".u: not an isometry", defect);
        }
    }
    BlockFactorization bf;
    bf.n_a = bf.n_c = n;
    bf.pairs = nf.pairs;
    const OrthogonalityReport orth = orthogonality_check(bf, std::max(tol, 1e-9));
    if (!orth.pass)
        throw Error(ErrorKind::InvariantError, "pairs: isometries of factor " + std::to_string(orth.worst_i) + " overlap",
                    orth.max_residual);
}

GKLSRep factor_generator(const AtomicNormalForm& nf, int i) {
    const PairBlock& pb = nf.pair(i, i);
    return make_gkls(pb.a, pb.d_f, nf.factors[i].k_a);
}

MinimalityCertificate minimality_certificate(const AtomicNormalForm& nf, double tol) {
    MinimalityCertificate cert;
    for (int i = 0; i < nf.n(); ++i)
        for (int j = 0; j < nf.n(); ++j) {
            const PairBlock& pb = nf.pair(i, j);
            int dim = 0;
            if (pb.d_f > 0) {
                if (i == j) {
                    const CMatrix comps = dissipative_components(factor_generator(nf, i));
                    dim = comps.cols() > 0 ? numeric_rank(comps, tol) : 0;
                } else {
                    dim = numeric_rank(environment_components(pair_rep(nf, i, j)), tol);
                }
            }
            cert.span_dim.push_back(dim);
            cert.d_f.push_back(pb.d_f);
            if (dim != pb.d_f) cert.minimal = false;
        }
    return cert;
}

AtomicNormalForm reduce_normal_form_minimal(const AtomicNormalForm& nf, const Tolerances& tol) {
    AtomicNormalForm out = nf;
    for (int i = 0; i < nf.n(); ++i) {
        const int db_i = nf.dec.factors[i].dim_b;
        for (int j = 0; j < nf.n(); ++j) {
            const PairBlock& old = nf.pair(i, j);
            PairBlock& pb = out.pair(i, j);
            if (old.d_f == 0) continue;
            const int db_j = nf.dec.factors[j].dim_b;
            if (i == j) {
                const GKLSMinimal gm = gkls_minimalize(factor_generator(nf, i), tol.rank);
                const CMatrix w = gm.p.adjoint();
                const CMatrix shift = old.u * kron(gm.phi, identity(db_i));
                const CMatrix g = nf.factors[i].b.adjoint() * shift;
                pb.d_f = gm.g_min.stine.d_env;
                pb.a = gm.g_min.stine.v;
                pb.u = old.u * kron(w, identity(db_i));
                out.factors[i].k_a = gm.g_min.k;
                out.factors[i].b = nf.factors[i].b + shift;
                out.factors[i].h_b = nf.factors[i].h_b - (kI / 2.0) * (g - g.adjoint());
            } else {
                const MinimalDilation md = minimal_stinespring(pair_rep(nf, i, j), tol.rank);
                pb.d_f = md.s_min.d_env;
                pb.a = md.s_min.v;
                pb.u = old.u * kron(md.w, identity(db_j));
            }
            if (pb.d_f == 0) {
                pb.a = CMatrix(0, nf.dec.factors[j].dim_a);
                pb.u = CMatrix(db_i * nf.d_env, 0);
            }
        }
    }
    const GKLSRep before = reconstruct_from_normal_form(nf);
    const GKLSRep after = reconstruct_from_normal_form(out);
    const double r = std::max(rel_diff(before.stine.v, after.stine.v), rel_diff(before.k, after.k));
    if (r > tol.post()) throw Error(ErrorKind::FactorizationResidual, "minimal reduction changed the generator", r);
    return out;
}

AtomicNormalForm apply_gauge(const AtomicNormalForm& nf, const GaugeData& gauge) {
    AtomicNormalForm out = nf;
    for (int i = 0; i < nf.n(); ++i) {
        const int da = nf.dec.factors[i].dim_a, db = nf.dec.factors[i].dim_b;
        for (int j = 0; j < nf.n(); ++j) {
            const PairBlock& old = nf.pair(i, j);
            PairBlock& pb = out.pair(i, j);
            const CMatrix& w = gauge.w_at(i, j);
            const int db_j = nf.dec.factors[j].dim_b;
            pb.d_f = static_cast<int>(w.rows());
            pb.u = old.d_f > 0 ? CMatrix(old.u * kron(w.adjoint(), identity(db_j)))
                               : CMatrix::Zero(db * nf.d_env, pb.d_f * db_j);
            if (old.d_f > 0)
                pb.a = kron(identity(da), w) * old.a;
            else
                pb.a = CMatrix::Zero(da * pb.d_f, nf.dec.factors[j].dim_a);
        }
        const CMatrix& w = gauge.w_at(i, i);
        const CVector& psi = gauge.psi.at(i);
        const double mu = gauge.mu.at(i);
        const PairBlock& old = nf.pair(i, i);
        if (psi.size() > 0) out.pair(i, i).a += one_tensor(da, psi);
        CMatrix ka = nf.factors[i].k_a + (0.5 * psi.squaredNorm()) * identity(da) + kI * mu * identity(da);
        CMatrix hb = nf.factors[i].h_b - mu * identity(db);
        CMatrix b = nf.factors[i].b;
        if (old.d_f > 0 && psi.size() > 0) {
            const CVector back = w.adjoint() * psi;
            ka += pair_env(old.a, da, old.d_f, back);
            const CMatrix shift = old.u * kron(back, identity(db));
            const CMatrix g = nf.factors[i].b.adjoint() * shift;
            b -= shift;
            hb += (kI / 2.0) * (g - g.adjoint());
        }
        out.factors[i].k_a = ka;
        out.factors[i].h_b = hb;
        out.factors[i].b = b;
    }
    return out;
}

double normal_form_distance(const AtomicNormalForm& a, const AtomicNormalForm& b, bool algebra_part_only) {
    if (a.n() != b.n()) return std::numeric_limits<double>::infinity();
    double worst = 0.0;
    for (int i = 0; i < a.n(); ++i) {
        worst = std::max(worst, rel_diff(a.factors[i].k_a, b.factors[i].k_a));
        if (!algebra_part_only) {
            worst = std::max(worst, rel_diff(a.factors[i].h_b, b.factors[i].h_b));
            worst = std::max(worst, rel_diff(a.factors[i].b, b.factors[i].b));
        }
        for (int j = 0; j < a.n(); ++j) {
            worst = std::max(worst, rel_diff(a.pair(i, j).a, b.pair(i, j).a));
            if (!algebra_part_only) worst = std::max(worst, rel_diff(a.pair(i, j).u, b.pair(i, j).u));
        }
    }
    if (!algebra_part_only) {
        worst = std::max(worst, rel_diff(a.v0, b.v0));
        worst = std::max(worst, rel_diff(a.k0, b.k0));
    }
    return worst;
}

GaugeResult normal_form_gauge(const AtomicNormalForm& nf1, const AtomicNormalForm& nf2, const Tolerances& tol,
                              GaugeMode mode) {
    if (nf1.dec.dim != nf2.dec.dim || nf1.dec.d0 != nf2.dec.d0 || nf1.dec.factors != nf2.dec.factors ||
        (nf1.dec.u_alg - nf2.dec.u_alg).norm() > tol.post() * std::sqrt(static_cast<double>(nf1.dec.dim)))
        throw Error(ErrorKind::NotEquivalent, "normal forms use different decompositions");
    if (!minimality_certificate(nf1, tol.rank).minimal) throw Error(ErrorKind::NotMinimal, "first normal form is not minimal");
    if (!minimality_certificate(nf2, tol.rank).minimal) throw Error(ErrorKind::NotMinimal, "second normal form is not minimal");

    const GKLSRep g1 = reconstruct_from_normal_form(nf1);
    const GKLSRep g2 = reconstruct_from_normal_form(nf2);
    if (mode == GaugeMode::Full) {
        const double r = std::max(rel_diff(g1.stine.v, g2.stine.v), rel_diff(g1.k, g2.k));
        if (r > tol.post()) throw Error(ErrorKind::NotEquivalent, "(V, K) pairs differ", r);
    } else {
        double r = 0.0;
        for (const auto& x : algebra_basis(nf1.dec).basis) {
            const CMatrix y1 = gkls_apply(g1, x);
            r = std::max(r, (y1 - gkls_apply(g2, x)).norm() / scale_of(y1));
        }
        if (r > tol.post()) throw Error(ErrorKind::NotEquivalent, "generators differ on the algebra", r);
    }

    GaugeResult res;
    GaugeData& gd = res.gauge;
    gd.n = nf1.n();
    std::vector<GKLSGauge> diag;
    for (int i = 0; i < gd.n; ++i)
        diag.push_back(gkls_gauge(factor_generator(nf1, i), factor_generator(nf2, i), tol.post()));
    for (int i = 0; i < gd.n; ++i) {
        for (int j = 0; j < gd.n; ++j)
            gd.w.push_back(i == j ? diag[i].w : stinespring_gauge(pair_rep(nf1, i, j), pair_rep(nf2, i, j), tol.post()));
        gd.psi.push_back(diag[i].psi);
        gd.mu.push_back(diag[i].mu);
    }
    res.residual = normal_form_distance(apply_gauge(nf1, gd), nf2, mode == GaugeMode::AlgebraOnly);
    if (res.residual > tol.post())
        throw Error(ErrorKind::NotEquivalent, "gauge does not map the first normal form onto the second", res.residual);
    return res;
}

KOnlySplit k_only_split(const CMatrix& k, const AtomicDecomposition& dec, const Tolerances& tol) {
    const int d = dec.dim;
    const GKLSRep g = make_gkls(CMatrix(0, d), 0, k);
    const InvarianceReport inv = gkls_invariance_check(g, dec, tol.verify);
    if (!inv.pass) throw Error(ErrorKind::NotInvariant, "generator leaves the algebra", inv.max_residual);
    const CMatrix p0 = dec.null_projector();
    const CMatrix kc = twirl_to_commutant(k, dec);
    KOnlySplit s;
    s.h_comm = (-kI / 2.0) * (kc - kc.adjoint());
    s.k_alg = k - p0.adjoint() * p0 * k - kI * s.h_comm;
    s.k0 = p0 * k;
    const double r = membership_residual(s.k_alg, dec) / scale_of(s.k_alg);
    if (r > tol.post()) throw Error(ErrorKind::NotInvariant, "algebra part of K is not in the algebra", r);
    return s;
}

}  // namespace igkls
