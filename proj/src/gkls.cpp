#include "igkls/gkls.hpp"

#include <algorithm>
#include <cmath>

namespace igkls {

namespace {

double scale_of(const CMatrix& m) { return std::max(1.0, m.norm()); }

// (1 (x) <phi|) v for v of shape (d * e) x d.
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

// (1/d) sum_c (<c| (x) 1) r |c>
CVector diagonal_env_average(const CMatrix& r, int d, int e) {
    CVector out = CVector::Zero(e);
    for (int c = 0; c < d; ++c) out += r.block(c * e, c, e, 1);
    return out / static_cast<double>(d);
}

}  // namespace

void validate(const GKLSRep& g) {
    validate(g.stine);
    if (g.stine.d_in != g.d || g.stine.d_out != g.d || g.k.rows() != g.d || g.k.cols() != g.d)
        throw Error(ErrorKind::Shape, "GKLSRep: V and K must act on dimension d");
}

GKLSRep make_gkls(const CMatrix& v, int d_env, const CMatrix& k) {
    GKLSRep g;
    g.d = static_cast<int>(k.rows());
    g.stine = {g.d, g.d, d_env, v};
    g.k = k;
    validate(g);
    return g;
}

CMatrix gkls_apply(const GKLSRep& g, const CMatrix& x) {
    validate(g);
    if (x.rows() != g.d || x.cols() != g.d) throw Error(ErrorKind::Shape, "gkls_apply: dimension mismatch");
    return cp_apply(g.stine, x) - g.k.adjoint() * x - x * g.k;
}

CMatrix superoperator(const GKLSRep& g) {
    const int d = g.d;
    CMatrix out(d * d, d * d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) out.col(i * d + j) = vec(gkls_apply(g, matrix_unit(d, i, j)));
    return out;
}

double generator_distance(const GKLSRep& g1, const GKLSRep& g2) {
    if (g1.d != g2.d) throw Error(ErrorKind::Shape, "generator_distance: dimension mismatch");
    double worst = 0.0;
    for (const auto& e : matrix_unit_basis(g1.d)) {
        const CMatrix y = gkls_apply(g1, e);
        worst = std::max(worst, (y - gkls_apply(g2, e)).norm() / scale_of(y));
    }
    return worst;
}

CMatrix dissipative_components(const GKLSRep& g) {
    const int d = g.d, e = g.stine.d_env;
    const CMatrix& v = g.stine.v;
    CMatrix out(e, d * d - 1 > 0 ? d * d - 1 : 0);
    int col = 0;
    for (int c = 0; c < d; ++c)
        for (int k = 0; k < d; ++k) {
            if (c == k) continue;
            out.col(col++) = v.block(c * e, k, e, 1);
        }
    for (int c = 1; c < d; ++c) out.col(col++) = v.block(c * e, c, e, 1) - v.block(0, 0, e, 1);
    return out;
}

GKLSMinimal gkls_minimalize(const GKLSRep& g, double tol) {
    validate(g);
    const int d = g.d, e = g.stine.d_env;
    CMatrix q = CMatrix(e, 0);
    if (e > 0) {
        const CMatrix comps = dissipative_components(g);
        if (comps.cols() > 0) q = range_basis(comps, tol);
        if (q.cols() == 0) q = CMatrix(e, 0);
    }
    const int r = static_cast<int>(q.cols());
    GKLSMinimal out;
    out.p = q.adjoint();
    const CMatrix v_min = r > 0 ? CMatrix(kron(identity(d), out.p) * g.stine.v) : CMatrix(0, d);
    const CMatrix back = r > 0 ? CMatrix(kron(identity(d), q) * v_min) : CMatrix::Zero(d * e, d);
    out.phi = e > 0 ? diagonal_env_average(g.stine.v - back, d, e) : CVector(0);
    CMatrix k = g.k;
    if (e > 0) k -= pair_env(g.stine.v, d, e, out.phi) - 0.5 * out.phi.squaredNorm() * identity(d);
    out.g_min = make_gkls(v_min, r, k);
    return out;
}

GKLSGauge gkls_gauge(const GKLSRep& g1, const GKLSRep& g2, double tol) {
    validate(g1);
    validate(g2);
    const double diff = generator_distance(g1, g2);
    if (diff > tol) throw Error(ErrorKind::NotSameGenerator, "generators differ", diff);
    const int d = g1.d, e1 = g1.stine.d_env, e2 = g2.stine.d_env;
    GKLSGauge out;
    const CMatrix m1 = e1 > 0 ? dissipative_components(g1) : CMatrix(0, 0);
    if (e1 > 0 && (m1.cols() == 0 || numeric_rank(m1, tol) < e1))
        throw Error(ErrorKind::NotMinimal, "first generator representation is not minimal");
    if (e1 > 0) {
        out.w = dissipative_components(g2) * pinv(m1, tol);
        const double defect = isometry_defect(out.w);
        if (defect > std::max(1e-8, 10.0 * tol) * std::sqrt(static_cast<double>(e1)))
            throw Error(ErrorKind::NotSameGenerator, "environment gauge is not an isometry", defect);
    } else {
        out.w = CMatrix::Zero(e2, 0);
    }
    const CMatrix mapped = e1 > 0 ? CMatrix(kron(identity(d), out.w) * g1.stine.v) : CMatrix::Zero(d * e2, d);
    out.psi = e2 > 0 ? diagonal_env_average(g2.stine.v - mapped, d, e2) : CVector(0);
    CMatrix rest = g2.k - g1.k - 0.5 * out.psi.squaredNorm() * identity(d);
    if (e1 > 0 && e2 > 0) rest -= pair_env(g1.stine.v, d, e1, out.w.adjoint() * out.psi);
    out.mu = rest.trace().imag() / d;
    return out;
}

GKLSRep apply_gkls_gauge(const GKLSRep& g, const GKLSGauge& gauge) {
    const int d = g.d, e2 = static_cast<int>(gauge.w.rows());
    CMatrix v = one_tensor(d, gauge.psi);
    CMatrix k = g.k + (0.5 * gauge.psi.squaredNorm()) * identity(d) + kI * gauge.mu * identity(d);
    if (gauge.w.cols() > 0) {
        v += kron(identity(d), gauge.w) * g.stine.v;
        k += pair_env(g.stine.v, d, g.stine.d_env, gauge.w.adjoint() * gauge.psi);
    }
    return make_gkls(v, e2, k);
}

}  // namespace igkls
