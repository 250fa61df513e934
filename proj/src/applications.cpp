#include "igkls/applications.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

namespace igkls {

namespace {

double scale_of(const CMatrix& m) { return std::max(1.0, m.norm()); }

CMatrix im_part(const CMatrix& x) { return (x - x.adjoint()) / (2.0 * kI); }

// Rows b * e + n of an operator with row index (b, n).
CMatrix env_row(const CMatrix& m, int db, int e, int n) {
    CMatrix out(db, m.cols());
    for (int b = 0; b < db; ++b) out.row(b) = m.row(b * e + n);
    return out;
}

CMatrix transfer_matrix(const std::vector<CMatrix>& left, const std::vector<CMatrix>& right_t) {
    const Eigen::Index n = left.front().rows() * right_t.front().rows();
    CMatrix m = CMatrix::Zero(n, n);
    for (std::size_t k = 0; k < left.size(); ++k) m += kron(left[k], right_t[k]);
    return m;
}

std::vector<CMatrix> fixed_basis(const CMatrix& transfer, int d, double tol) {
    const CMatrix shifted = transfer - identity(static_cast<int>(transfer.rows()));
    const CMatrix ns = null_space(shifted, tol, std::max(1.0, transfer.norm()));
    std::vector<CMatrix> out;
    for (Eigen::Index k = 0; k < ns.cols(); ++k) out.push_back(unvec(ns.col(k), d, d));
    return out;
}

std::vector<CMatrix> hermitian_parts(const std::vector<CMatrix>& xs) {
    std::vector<CMatrix> out;
    for (const auto& x : xs) {
        out.push_back((x + x.adjoint()) / 2.0);
        out.push_back((x - x.adjoint()) / (2.0 * kI));
    }
    return out;
}

struct SignedParts {
    CMatrix pos;
    CMatrix neg;
};

SignedParts signed_parts(const CMatrix& h) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es((h + h.adjoint()) / 2.0);
    const Eigen::VectorXd& ev = es.eigenvalues();
    Eigen::VectorXd p = ev.cwiseMax(0.0), n = (-ev).cwiseMax(0.0);
    const CMatrix& q = es.eigenvectors();
    return {q * p.cast<cplx>().asDiagonal() * q.adjoint(), q * n.cast<cplx>().asDiagonal() * q.adjoint()};
}

double min_eigenvalue(const CMatrix& h) {
    if (h.size() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<CMatrix> es((h + h.adjoint()) / 2.0, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

}  // namespace

GKLSRep semicausal_build(const CMatrix& a, const CMatrix& u, const CMatrix& b, const CMatrix& k_a, const CMatrix& h_b,
                         double tol) {
    const int da = static_cast<int>(k_a.rows()), db = static_cast<int>(h_b.rows());
    if (k_a.cols() != da || h_b.cols() != db || da == 0 || db == 0)
        throw Error(ErrorKind::Shape, "semicausal_build: k_a and h_b must be square");
    if (a.cols() != da || a.rows() % da != 0) throw Error(ErrorKind::Shape, "semicausal_build: a must be (dA*dF) x dA");
    const int f = static_cast<int>(a.rows()) / da;
    if (b.cols() != db || b.rows() % db != 0) throw Error(ErrorKind::Shape, "semicausal_build: b must be (dB*e) x dB");
    const int e = static_cast<int>(b.rows()) / db;
    if (u.rows() != db * e || u.cols() != f * db) throw Error(ErrorKind::Shape, "semicausal_build: u must be (dB*e) x (dF*dB)");
    if (isometry_defect(u) > tol * std::max(1.0, std::sqrt(static_cast<double>(u.cols()))))
        throw Error(ErrorKind::InvariantError, "semicausal_build: u is not an isometry", isometry_defect(u));
    if (hermitian_defect(h_b) > tol * scale_of(h_b))
        throw Error(ErrorKind::InvariantError, "semicausal_build: h_b is not self-adjoint", hermitian_defect(h_b));
    const CMatrix ia = identity(da), ib = identity(db);
    CMatrix v = kron(ia, b);
    CMatrix k = 0.5 * kron(ia, b.adjoint() * b) + kron(k_a, ib) + kI * kron(ia, h_b);
    if (f > 0) {
        const CMatrix lifted = kron(a, ib);
        v += kron(ia, u) * lifted;
        k += kron(ia, b.adjoint() * u) * lifted;
    }
    return make_gkls(v, e, k);
}

AtomicDecomposition semicausal_algebra(int d_a, int d_b) {
    AtomicDecomposition dec;
    dec.dim = d_a * d_b;
    dec.u_alg = identity(dec.dim);
    dec.d0 = 0;
    dec.factors = {{d_a, d_b}};
    return dec;
}

SemicausalReport semicausal_check(const GKLSRep& g, int d_a, int d_b, double tol) {
    if (g.d != d_a * d_b) throw Error(ErrorKind::Shape, "semicausal_check: d must equal d_a * d_b");
    SemicausalReport rep;
    rep.invariance_residual = gkls_invariance_check(g, semicausal_algebra(d_a, d_b), tol).max_residual;
    const CMatrix ib = identity(d_b);
    for (const auto& x : matrix_unit_basis(d_a)) {
        const CMatrix y = gkls_apply(g, kron(x, ib));
        const CMatrix reduced = partial_trace(y, d_a, d_b, Subsystem::B) / static_cast<double>(d_b);
        rep.semicausal_residual = std::max(rep.semicausal_residual, (y - kron(reduced, ib)).norm() / scale_of(y));
    }
    rep.pass = rep.invariance_residual <= tol && rep.semicausal_residual <= tol;
    return rep;
}

double dissipation_residual(const GKLSRep& g, const AtomicDecomposition& dec) {
    const AlgebraBasis basis = algebra_basis(dec);
    const CMatrix l1 = gkls_apply(g, identity(g.d));
    std::vector<CMatrix> lx, lxd;
    for (const auto& x : basis.basis) {
        lx.push_back(gkls_apply(g, x));
        lxd.push_back(gkls_apply(g, x.adjoint()));
    }
    double worst = 0.0;
    for (int p = 0; p < basis.size(); ++p)
        for (int q = 0; q < basis.size(); ++q) {
            const CMatrix& x = basis.basis[p];
            const CMatrix& y = basis.basis[q];
            const CMatrix t1 = x.adjoint() * lx[q];
            const CMatrix t2 = lxd[p] * y;
            const CMatrix r = gkls_apply(g, x.adjoint() * y) - t1 - t2 + x.adjoint() * l1 * y;
            worst = std::max(worst, r.norm() / std::max(1.0, t1.norm() + t2.norm()));
        }
    return worst;
}

DfsNormalForm dfs_verify_normal_form(const GKLSRep& g, const AtomicDecomposition& dec, const Tolerances& tol) {
    if (dec.d0 != 0) throw Error(ErrorKind::NotDecoherenceFree, "candidate algebra must be unital (d0 = 0)");
    const InvarianceReport inv = gkls_invariance_check(g, dec, tol.verify);
    if (!inv.pass) throw Error(ErrorKind::NotInvariant, "generator leaves the algebra", inv.max_residual);
    DfsNormalForm out;
    out.dissipation_residual = dissipation_residual(g, dec);
    if (out.dissipation_residual > tol.verify)
        throw Error(ErrorKind::NotDecoherenceFree, "dissipation form does not vanish on the algebra",
                    out.dissipation_residual);

    const AtomicNormalForm nf = atomic_normal_form(g, dec, tol);
    const int n = nf.n(), e = nf.d_env;
    out.d_env = e;
    out.beta.assign(static_cast<std::size_t>(e), std::vector<CMatrix>(static_cast<std::size_t>(n)));
    std::vector<CMatrix> ka, kb;
    for (int i = 0; i < n; ++i) {
        const auto f = dec.factors[i];
        for (int j = 0; j < n; ++j)
            if (i != j && nf.pair(i, j).d_f > 0)
                throw Error(ErrorKind::NotDecoherenceFree,
                            "off-diagonal block (" + std::to_string(i) + "," + std::to_string(j) + ") is nonzero",
                            nf.pair(i, j).a.norm());
        const PairBlock& pb = nf.pair(i, i);
        if (pb.d_f > 1) throw Error(ErrorKind::NotDecoherenceFree, "diagonal block has environment dimension above 1");
        CMatrix m = nf.factors[i].b;
        CMatrix cross = CMatrix::Zero(f.dim_b, f.dim_b);
        if (pb.d_f == 1) {
            cplx psi = 0.0;
            for (int a = 0; a < f.dim_a; ++a) psi += pb.a(a, a);
            psi /= static_cast<double>(f.dim_a);
            const double r = (pb.a - psi * identity(f.dim_a)).norm();
            if (r > tol.post() * scale_of(pb.a))
                throw Error(ErrorKind::NotDecoherenceFree, "diagonal block is not of the form 1 (x) psi", r);
            const CMatrix shift = psi * pb.u;
            m += shift;
            cross = nf.factors[i].b.adjoint() * shift;
        }
        for (int k = 0; k < e; ++k) out.beta[k][i] = env_row(m, f.dim_b, e, k);
        out.kappa_a.push_back(im_part(nf.factors[i].k_a));
        out.kappa_b.push_back(nf.factors[i].h_b + im_part(cross));
        ka.push_back(out.kappa_a.back());
        kb.push_back(out.kappa_b.back());
    }
    out.h_tilde = im_part(g.k);

    const KrausSet ks = stinespring_to_kraus(g.stine);
    for (int k = 0; k < e; ++k)
        out.kraus_residual = std::max(out.kraus_residual,
                                      (ks.ops[k] - commutant_element(dec, out.beta[k])).norm() / scale_of(ks.ops[k]));
    out.imag_residual =
        (out.h_tilde - algebra_element(dec, ka) - commutant_element(dec, kb)).norm() / scale_of(out.h_tilde);
    if (std::max(out.kraus_residual, out.imag_residual) > tol.post())
        throw Error(ErrorKind::NotDecoherenceFree, "normal form does not reproduce the Kraus operators",
                    std::max(out.kraus_residual, out.imag_residual));
    return out;
}

AbelianCoefficients maximal_abelian_coefficients(const KrausSet& k, const AtomicDecomposition& dec, const CMatrix& c,
                                                 const Tolerances& tol) {
    if (k.picture != Picture::Heisenberg) throw Error(ErrorKind::PictureMismatch, "expects a Heisenberg-picture Kraus set");
    if (dec.d0 != 0) throw Error(ErrorKind::NotMaximalAbelian, "algebra has a null part");
    for (const auto& f : dec.factors)
        if (f.dim_a != 1 || f.dim_b != 1) throw Error(ErrorKind::NotMaximalAbelian, "factors must all be (1,1)");
    const int d = dec.dim;
    if (k.d_in != d || k.d_out != d || c.rows() != d || c.cols() != d)
        throw Error(ErrorKind::Shape, "maximal_abelian_coefficients: dimension mismatch");
    const StinespringRep s = kraus_to_stinespring(k);
    const InvarianceReport inv = cp_invariance_check(s, dec, dec, tol.verify);
    if (!inv.pass) throw Error(ErrorKind::NotInvariant, "map leaves the algebra", inv.max_residual);
    const CMatrix& u = dec.u_alg;
    {
        const CMatrix y = u.adjoint() * c * u;
        const double off = (y - CMatrix(y.diagonal().asDiagonal())).norm();
        if (off > tol.verify * scale_of(c)) throw Error(ErrorKind::NotDiagonal, "c is not diagonal in the algebra frame", off);
    }

    // Eigenvalues of c, summed symmetrically so that c^dag gives exactly the conjugates.
    CVector cv(d);
    for (int i = 0; i < d; ++i) {
        cplx acc = 0.0;
        for (int a = 0; a < d; ++a) acc += (std::conj(u(a, i)) * u(a, i)) * c(a, a);
        for (int a = 0; a < d; ++a)
            for (int b = a + 1; b < d; ++b) {
                const cplx w_ab = std::conj(u(a, i)) * u(b, i);
                const cplx w_ba = std::conj(u(b, i)) * u(a, i);
                acc += w_ab * c(a, b) + w_ba * c(b, a);
            }
        cv(i) = acc;
    }

    const int e = s.d_env;
    const CMatrix vf = kron(u.adjoint(), identity(e)) * s.v * u;
    std::vector<std::vector<CVector>> psi(d, std::vector<CVector>(d));
    double pscale = 0.0;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            psi[i][j] = vf.block(i * e, j, e, 1);
            pscale = std::max(pscale, psi[i][j].norm());
        }

    AbelianCoefficients out;
    out.d_env = e;
    out.diag.assign(static_cast<std::size_t>(e) * e, CVector::Zero(d));
    for (int i = 0; i < d; ++i) {
        CMatrix ci = CMatrix::Zero(e, e);
        for (int j = 0; j < d; ++j) {
            const CVector& p = psi[i][j];
            const double n2 = p.squaredNorm();
            if (n2 <= (tol.rank * pscale) * (tol.rank * pscale) || n2 == 0.0) continue;
            const cplx diff = cv(i) - cv(j);
            for (int m = 0; m < e; ++m)
                for (int n = 0; n < e; ++n) ci(m, n) += diff * ((p(m) * std::conj(p(n))) / n2);
        }
        for (int m = 0; m < e; ++m)
            for (int n = 0; n < e; ++n) out.diag[static_cast<std::size_t>(m * e + n)](i) = ci(m, n);
    }
    for (const auto& dg : out.diag) out.c_mn.push_back(u * dg.asDiagonal() * u.adjoint());

    const KrausSet ks = stinespring_to_kraus(s);
    for (int m = 0; m < e; ++m) {
        CMatrix lhs = c * ks.ops[m] - ks.ops[m] * c;
        CMatrix rhs = CMatrix::Zero(d, d);
        for (int n = 0; n < e; ++n) rhs += out.c_mn[static_cast<std::size_t>(m * e + n)] * ks.ops[n];
        out.commutator_residual = std::max(out.commutator_residual, (lhs - rhs).norm() / scale_of(lhs));
    }
    if (out.commutator_residual > tol.post())
        throw Error(ErrorKind::NotInvariant, "coefficients do not reproduce the commutators", out.commutator_residual);
    return out;
}

KrausSet to_heisenberg(const KrausSet& k) {
    if (k.picture == Picture::Heisenberg) return k;
    KrausSet out;
    out.d_in = k.d_out;
    out.d_out = k.d_in;
    out.picture = Picture::Heisenberg;
    for (const auto& op : k.ops) out.ops.push_back(op.adjoint());
    return out;
}

KrausSet to_schrodinger(const KrausSet& k) {
    if (k.picture == Picture::Schrodinger) return k;
    KrausSet out;
    out.d_in = k.d_out;
    out.d_out = k.d_in;
    out.picture = Picture::Schrodinger;
    for (const auto& op : k.ops) out.ops.push_back(op.adjoint());
    return out;
}

CMatrix channel_apply(const KrausSet& k, const CMatrix& rho) {
    if (k.picture != Picture::Schrodinger) throw Error(ErrorKind::PictureMismatch, "expects a Schrodinger-picture Kraus set");
    return cp_apply(k, rho);
}

double trace_preservation_defect(const KrausSet& k) {
    CMatrix s = CMatrix::Zero(k.d_in, k.d_in);
    for (const auto& op : k.ops) s += op * op.adjoint();
    return (s - identity(k.d_in)).norm();
}

CMatrix fixed_point_state(const KrausSet& k, const Tolerances& tol) {
    if (k.picture != Picture::Schrodinger) throw Error(ErrorKind::PictureMismatch, "expects a Schrodinger-picture Kraus set");
    validate(k);
    if (k.d_in != k.d_out) throw Error(ErrorKind::Shape, "fixed_point_state: channel must map a space to itself");
    const int d = k.d_in;
    const double tp = trace_preservation_defect(k);
    if (tp > tol.verify * std::max(1.0, std::sqrt(static_cast<double>(d))))
        throw Error(ErrorKind::NotTracePreserving, "Kraus set is not trace preserving", tp);
    std::vector<CMatrix> left, right;
    for (const auto& op : k.ops) {
        left.push_back(op.adjoint());
        right.push_back(op.transpose());
    }
    auto check = [&](const CMatrix& rho) {
        return (channel_apply(k, rho) - rho).norm() <= tol.post() && min_eigenvalue(rho) >= -tol.post() &&
               std::abs(rho.trace() - 1.0) <= tol.post();
    };
    for (const auto& h : hermitian_parts(fixed_basis(transfer_matrix(left, right), d, tol.rank))) {
        const SignedParts sp = signed_parts(h);
        for (const CMatrix* part : {&sp.pos, &sp.neg}) {
            const double tr = part->trace().real();
            if (tr <= tol.rank * std::max(1.0, h.norm())) continue;
            CMatrix rho = *part / tr;
            rho = (rho + rho.adjoint()) / 2.0;
            if (check(rho)) return rho;
        }
    }
    CMatrix state = identity(d) / static_cast<double>(d);
    CMatrix avg = CMatrix::Zero(d, d);
    for (int n = 1; n <= 20000; ++n) {
        avg += state;
        state = channel_apply(k, state);
        if (n % 100 == 0) {
            CMatrix rho = avg / static_cast<double>(n);
            rho = (rho + rho.adjoint()) / 2.0;
            if (check(rho)) return rho;
        }
    }
    throw Error(ErrorKind::NoFixedState, "no verified fixed state found");
}

KoashiImotoResult koashi_imoto_decompose(const KrausSet& k, const Tolerances& tol, std::uint64_t seed) {
    if (k.picture != Picture::Schrodinger) throw Error(ErrorKind::PictureMismatch, "expects a Schrodinger-picture Kraus set");
    validate(k);
    if (k.d_in != k.d_out || k.ops.empty()) throw Error(ErrorKind::Shape, "koashi_imoto_decompose: channel must be square");
    const int d = k.d_in;
    const double tp = trace_preservation_defect(k);
    if (tp > tol.verify * std::max(1.0, std::sqrt(static_cast<double>(d))))
        throw Error(ErrorKind::NotTracePreserving, "Kraus set is not trace preserving", tp);

    KoashiImotoResult res;
    std::vector<CMatrix> left, right;
    for (const auto& op : k.ops) {
        left.push_back(op.adjoint());
        right.push_back(op.transpose());
    }
    const std::vector<CMatrix> fixed = fixed_basis(transfer_matrix(left, right), d, tol.rank);
    res.dim_fixed = static_cast<int>(fixed.size());
    if (fixed.empty()) throw Error(ErrorKind::NoFixedState, "channel has no fixed points");

    CMatrix rho_max = CMatrix::Zero(d, d);
    for (const auto& h : hermitian_parts(fixed)) {
        const SignedParts sp = signed_parts(h);
        rho_max += sp.pos + sp.neg;
    }
    Eigen::SelfAdjointEigenSolver<CMatrix> es((rho_max + rho_max.adjoint()) / 2.0);
    const double top = es.eigenvalues()(d - 1);
    int first = 0;
    while (first < d && es.eigenvalues()(first) <= tol.rank * top) ++first;
    const int s = d - first;
    res.q = es.eigenvectors().rightCols(s).adjoint();

    KrausSet compressed;
    compressed.d_in = compressed.d_out = s;
    compressed.picture = Picture::Schrodinger;
    for (const auto& op : k.ops) compressed.ops.push_back(res.q * op * res.q.adjoint());

    std::vector<CMatrix> dl, dr;
    for (const auto& op : compressed.ops) {
        dl.push_back(op);
        dr.push_back(op.conjugate());
    }
    const std::vector<CMatrix> dual_fixed = fixed_basis(transfer_matrix(dl, dr), s, tol.rank);
    res.dim_dual_fixed = static_cast<int>(dual_fixed.size());
    const AlgebraBasis alg = close_star_algebra(dual_fixed, true, tol.rank, s);
    {
        AlgebraBasis span;
        span.ambient_dim = s;
        const SubspaceBasis sb = [&] {
            std::vector<CVector> vs;
            for (const auto& x : dual_fixed) vs.push_back(vec(x));
            return orthonormalize_span(vs, s * s, tol.rank);
        }();
        for (int c = 0; c < sb.size(); ++c) span.basis.push_back(unvec(sb.vectors.col(c), s, s));
        for (const auto& x : alg.basis) res.closure_residual = std::max(res.closure_residual, membership_residual(x, span));
    }
    if (alg.size() != res.dim_dual_fixed)
        throw Error(ErrorKind::AlgebraClosureFailed,
                    "dual fixed points span " + std::to_string(res.dim_dual_fixed) + " dimensions, their algebra " +
                        std::to_string(alg.size()),
                    res.closure_residual);
    res.dec = atomic_decompose(alg, tol.verify, seed);

    const StinespringRep vhat = kraus_to_stinespring(to_heisenberg(compressed));
    res.d_env = vhat.d_env;
    const IntertwinerBlocks blocks =
        intertwiner_decompose(vhat.v, res.dec, vhat.d_env, 1, std::numeric_limits<double>::infinity());
    res.block_residual =
        (vhat.v - assemble_intertwiner(blocks, res.dec, vhat.d_env, 1)).norm() / scale_of(vhat.v);
    if (res.block_residual > tol.post())
        throw Error(ErrorKind::FactorizationResidual, "compressed dilation is not block diagonal", res.block_residual);

    for (int i = 0; i < res.dec.factor_count(); ++i) {
        const auto f = res.dec.factors[i];
        const CMatrix& vi = blocks.blocks[i];
        res.v.push_back(vi);
        KrausSet local;
        local.d_in = local.d_out = f.dim_b;
        local.picture = Picture::Schrodinger;
        for (int n = 0; n < vhat.d_env; ++n) local.ops.push_back(env_row(vi, f.dim_b, vhat.d_env, n).adjoint());
        res.sigma.push_back(fixed_point_state(local, tol));
    }

    int claimed = 0;
    for (int i = 0; i < res.dec.factor_count(); ++i) {
        const auto f = res.dec.factors[i];
        const int off = res.dec.offset(i);
        for (const auto& ea : matrix_unit_basis(f.dim_a)) {
            CMatrix y = CMatrix::Zero(s, s);
            y.block(off, off, f.size(), f.size()) = kron(ea, res.sigma[i]);
            const CMatrix x = res.q.adjoint() * res.dec.u_alg * y * res.dec.u_alg.adjoint() * res.q;
            res.fixed_residual = std::max(res.fixed_residual, (channel_apply(k, x) - x).norm() / scale_of(x));
            ++claimed;
        }
    }
    if (claimed != res.dim_fixed)
        throw Error(ErrorKind::FactorizationResidual, "fixed-point family has the wrong dimension");
    if (res.fixed_residual > tol.post())
        throw Error(ErrorKind::FactorizationResidual, "claimed fixed points are not fixed", res.fixed_residual);
    return res;
}

ProbeReport semigroup_invariance_probe(const GKLSRep& g, const AtomicDecomposition& dec, const std::vector<double>& times,
                                       double tol) {
    const int d = g.d;
    const CMatrix sup = superoperator(g);
    const AlgebraBasis basis = algebra_basis(dec);
    ProbeReport rep;
    for (double t : times) {
        const CMatrix flow = CMatrix(t * sup).exp();
        // Leakage is measured against the propagator norm: a growing flow amplifies rounding
        // in its fastest mode, so only errors relative to ||e^{tL}|| are meaningful.
        const CMatrix gram = flow.adjoint() * flow;
        const double top = Eigen::SelfAdjointEigenSolver<CMatrix>(gram, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
        const double scale = std::max(1.0, std::sqrt(std::max(top, 0.0)));
        double worst = 0.0;
        for (const auto& x : basis.basis) {
            const CMatrix y = unvec(flow * vec(x), d, d);
            worst = std::max(worst, membership_residual(y, dec) / (scale * x.norm()));
        }
        rep.times.push_back(t);
        rep.residuals.push_back(worst);
        rep.max_residual = std::max(rep.max_residual, worst);
    }
    rep.pass = rep.max_residual <= tol;
    return rep;
}

}  // namespace igkls
