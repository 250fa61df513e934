#include "igkls/cp_maps.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

namespace igkls {

namespace {

double scale_of(const CMatrix& m) { return std::max(1.0, m.norm()); }

std::string pair_label(int i, int j) { return "(" + std::to_string(i) + "," + std::to_string(j) + ")"; }

// Kraus operator n of a Stinespring operator: rows a * e + n.
CMatrix kraus_op(const StinespringRep& s, int n) {
    CMatrix op(s.d_in, s.d_out);
    for (int a = 0; a < s.d_in; ++a) op.row(a) = s.v.row(a * s.d_env + n);
    return op;
}

}  // namespace

void validate(const StinespringRep& s) {
    if (s.d_in < 0 || s.d_out < 0 || s.d_env < 0 || s.v.rows() != s.d_in * s.d_env || s.v.cols() != s.d_out)
        throw Error(ErrorKind::Shape, "StinespringRep: v must be (d_in*d_env) x d_out");
}

void validate(const KrausSet& k) {
    for (const auto& op : k.ops)
        if (op.rows() != k.d_in || op.cols() != k.d_out)
            throw Error(ErrorKind::Shape, "KrausSet: operator shape differs from d_in x d_out");
}

StinespringRep kraus_to_stinespring(const KrausSet& k) {
    validate(k);
    if (k.ops.empty()) throw Error(ErrorKind::Shape, "kraus_to_stinespring: empty operator list");
    StinespringRep s;
    s.d_in = k.d_in;
    s.d_out = k.d_out;
    s.d_env = static_cast<int>(k.ops.size());
    s.v = CMatrix::Zero(s.d_in * s.d_env, s.d_out);
    for (int n = 0; n < s.d_env; ++n)
        for (int a = 0; a < s.d_in; ++a) s.v.row(a * s.d_env + n) = k.ops[n].row(a);
    return s;
}

KrausSet stinespring_to_kraus(const StinespringRep& s) {
    validate(s);
    KrausSet k;
    k.d_in = s.d_in;
    k.d_out = s.d_out;
    for (int n = 0; n < s.d_env; ++n) k.ops.push_back(kraus_op(s, n));
    return k;
}

CMatrix cp_apply(const StinespringRep& s, const CMatrix& x) {
    validate(s);
    if (x.rows() != s.d_in || x.cols() != s.d_in) throw Error(ErrorKind::Shape, "cp_apply: input dimension mismatch");
    CMatrix out = CMatrix::Zero(s.d_out, s.d_out);
    for (int n = 0; n < s.d_env; ++n) {
        const CMatrix op = kraus_op(s, n);
        out += op.adjoint() * x * op;
    }
    return out;
}

CMatrix cp_apply(const KrausSet& k, const CMatrix& x) {
    validate(k);
    if (x.rows() != k.d_in || x.cols() != k.d_in) throw Error(ErrorKind::Shape, "cp_apply: input dimension mismatch");
    CMatrix out = CMatrix::Zero(k.d_out, k.d_out);
    for (const auto& op : k.ops) out += op.adjoint() * x * op;
    return out;
}

CMatrix choi(const StinespringRep& s) {
    CMatrix out = CMatrix::Zero(s.d_in * s.d_out, s.d_in * s.d_out);
    for (int k = 0; k < s.d_in; ++k)
        for (int l = 0; l < s.d_in; ++l)
            out.block(k * s.d_out, l * s.d_out, s.d_out, s.d_out) = cp_apply(s, matrix_unit(s.d_in, k, l));
    return out;
}

CMatrix choi(const KrausSet& k) { return choi(kraus_to_stinespring(k)); }

CMatrix environment_components(const StinespringRep& s) {
    validate(s);
    CMatrix out(s.d_env, s.d_in * s.d_out);
    for (int a = 0; a < s.d_in; ++a)
        for (int c = 0; c < s.d_out; ++c) out.col(a * s.d_out + c) = s.v.block(a * s.d_env, c, s.d_env, 1);
    return out;
}

MinimalDilation minimal_stinespring(const StinespringRep& s, double tol, double scale) {
    const CMatrix comps = environment_components(s);
    CMatrix q = s.d_env > 0 ? range_basis(comps, tol, scale) : CMatrix(0, 0);
    const int r = static_cast<int>(q.cols());
    if (r == 0) q = CMatrix(s.d_env, 0);
    MinimalDilation out;
    out.w = q;
    out.s_min.d_in = s.d_in;
    out.s_min.d_out = s.d_out;
    out.s_min.d_env = r;
    out.s_min.v = kron(identity(s.d_in), q.adjoint()) * s.v;
    if (r == 0) out.s_min.v = CMatrix(0, s.d_out);
    return out;
}

CMatrix stinespring_gauge(const StinespringRep& s1, const StinespringRep& s2, double tol) {
    validate(s1);
    validate(s2);
    if (s1.d_in != s2.d_in || s1.d_out != s2.d_out) throw Error(ErrorKind::Shape, "stinespring_gauge: map dimensions differ");
    double diff = 0.0;
    for (const auto& e : matrix_unit_basis(s1.d_in)) {
        const CMatrix y1 = cp_apply(s1, e);
        diff = std::max(diff, (y1 - cp_apply(s2, e)).norm() / scale_of(y1));
    }
    if (diff > tol) throw Error(ErrorKind::NotSameMap, "representations define different maps", diff);
    const CMatrix m1 = environment_components(s1);
    const CMatrix m2 = environment_components(s2);
    if (s1.d_env > 0 && numeric_rank(m1, tol) < s1.d_env)
        throw Error(ErrorKind::NotMinimal, "first representation is not minimal");
    if (s1.d_env == 0) return CMatrix::Zero(s2.d_env, 0);
    const CMatrix w = m2 * pinv(m1, tol);
    const double defect = isometry_defect(w);
    if (defect > std::max(1e-8, 10.0 * tol) * std::sqrt(static_cast<double>(s1.d_env)))
        throw Error(ErrorKind::NotSameMap, "gauge is not an isometry", defect);
    return w;
}

InvarianceReport cp_invariance_check(const StinespringRep& s, const AtomicDecomposition& dec_a,
                                     const AtomicDecomposition& dec_c, double tol) {
    validate(s);
    if (s.d_in != dec_a.dim || s.d_out != dec_c.dim) throw Error(ErrorKind::Shape, "cp_invariance_check: dimension mismatch");
    InvarianceReport rep;
    const AlgebraBasis basis = algebra_basis(dec_a);
    for (int k = 0; k < basis.size(); ++k) {
        const CMatrix y = cp_apply(s, basis.basis[k]);
        const double r = membership_residual(y, dec_c) / scale_of(y);
        if (rep.worst_index < 0 || r > rep.max_residual) {
            rep.max_residual = r;
            rep.worst_index = k;
        }
    }
    rep.pass = rep.max_residual <= tol;
    return rep;
}

CMatrix extract_block(const CMatrix& v, const AtomicDecomposition& dec_a, const AtomicDecomposition& dec_c, int e,
                      int i, int j) {
    const CMatrix pi = i < 0 ? dec_a.null_projector() : dec_a.projector(i);
    const CMatrix pj = j < 0 ? dec_c.null_projector() : dec_c.projector(j);
    return kron(pi, identity(e)) * v * pj.adjoint();
}

CMatrix semilocal_block(const PairBlock& p, int dim_a, int dim_d) {
    const CMatrix lifted = kron(p.a, identity(dim_d));
    const CMatrix ua = kron(identity(dim_a), p.u);
    if (ua.cols() == 0) return CMatrix::Zero(ua.rows(), lifted.cols());
    return ua * lifted;
}

BlockFactorization atomic_block_factorize(const StinespringRep& s, const AtomicDecomposition& dec_a,
                                          const AtomicDecomposition& dec_c, const Tolerances& tol) {
    const InvarianceReport inv = cp_invariance_check(s, dec_a, dec_c, tol.verify);
    if (!inv.pass)
        throw Error(ErrorKind::NotInvariant,
                    "map does not send the algebra into the target (basis element " + std::to_string(inv.worst_index) + ")",
                    inv.max_residual);
    const int e = s.d_env;
    const double vscale = scale_of(s.v);
    BlockFactorization bf;
    bf.d_env = e;
    bf.n_a = dec_a.factor_count();
    bf.n_c = dec_c.factor_count();
    bf.v0 = kron(dec_a.null_projector(), identity(e)) * s.v;

    for (int i = 0; i < bf.n_a; ++i) {
        if (dec_c.d0 > 0) {
            const double r = extract_block(s.v, dec_a, dec_c, e, i, -1).norm();
            if (r > tol.verify * vscale)
                throw Error(ErrorKind::FactorizationResidual, "block from the target null space is nonzero for factor " +
                                                                  std::to_string(i), r);
        }
        const int da = dec_a.factors[i].dim_a, db = dec_a.factors[i].dim_b;
        for (int j = 0; j < bf.n_c; ++j) {
            const int dc = dec_c.factors[j].dim_a, dd = dec_c.factors[j].dim_b;
            const CMatrix vij = extract_block(s.v, dec_a, dec_c, e, i, j);
            const int env = db * e;

            // Reference vector: first basis vector of the D slot.
            StinespringRep psi;
            psi.d_in = da;
            psi.d_out = dc;
            psi.d_env = env;
            psi.v = CMatrix(da * env, dc);
            for (int c = 0; c < dc; ++c) psi.v.col(c) = vij.col(c * dd);
            const MinimalDilation md = minimal_stinespring(psi, tol.rank, vscale);
            const int f = md.s_min.d_env;

            PairBlock pb;
            pb.i = i;
            pb.j = j;
            pb.d_f = f;
            pb.a = f > 0 ? md.s_min.v : CMatrix(0, dc);
            if (f == 0) {
                pb.u = CMatrix(env, 0);
            } else {
                const int n = da * dc * dd;
                CMatrix m(f * dd, n), target(env, n);
                int col = 0;
                for (int a = 0; a < da; ++a)
                    for (int c = 0; c < dc; ++c)
                        for (int dl = 0; dl < dd; ++dl) {
                            CVector alpha = CVector::Zero(f * dd);
                            for (int phi = 0; phi < f; ++phi) alpha(phi * dd + dl) = pb.a(a * f + phi, c);
                            m.col(col) = alpha;
                            target.col(col) = vij.block(a * env, c * dd + dl, env, 1);
                            ++col;
                        }
                CMatrix u = target * pinv(m, tol.rank);
                const double defect = isometry_defect(u);
                if (defect > 10.0 * tol.verify * std::sqrt(static_cast<double>(f * dd)))
                    throw Error(ErrorKind::FactorizationResidual, "block " + pair_label(i, j) + " has no isometric factor",
                                defect);
                pb.u = polar_isometry(u);
            }
            bf.pairs.push_back(std::move(pb));
        }
    }

    const OrthogonalityReport orth = orthogonality_check(bf, tol.verify);
    if (!orth.pass)
        throw Error(ErrorKind::FactorizationResidual,
                    "isometries of factor " + std::to_string(orth.worst_i) + " are not orthogonal", orth.max_residual);
    const double res = (s.v - reassemble(bf, dec_a, dec_c).v).norm();
    if (res > tol.post() * vscale)
        throw Error(ErrorKind::FactorizationResidual, "reassembly differs from the input", res);
    return bf;
}

StinespringRep reassemble(const BlockFactorization& bf, const AtomicDecomposition& dec_a,
                          const AtomicDecomposition& dec_c) {
    const int e = bf.d_env;
    StinespringRep s;
    s.d_in = dec_a.dim;
    s.d_out = dec_c.dim;
    s.d_env = e;
    s.v = CMatrix::Zero(dec_a.dim * e, dec_c.dim);
    if (dec_a.d0 > 0) s.v += kron(dec_a.null_projector().adjoint(), identity(e)) * bf.v0;
    for (int i = 0; i < bf.n_a; ++i) {
        const CMatrix lift = kron(dec_a.projector(i).adjoint(), identity(e));
        for (int j = 0; j < bf.n_c; ++j) {
            const PairBlock& pb = bf.pair(i, j);
            if (pb.d_f == 0) continue;
            s.v += lift * semilocal_block(pb, dec_a.factors[i].dim_a, dec_c.factors[j].dim_b) * dec_c.projector(j);
        }
    }
    return s;
}

OrthogonalityReport orthogonality_check(const BlockFactorization& bf, double tol) {
    OrthogonalityReport rep;
    for (int i = 0; i < bf.n_a; ++i)
        for (int k = 0; k < bf.n_c; ++k)
            for (int l = 0; l < bf.n_c; ++l) {
                const CMatrix& uk = bf.pair(i, k).u;
                const CMatrix& ul = bf.pair(i, l).u;
                if (uk.cols() == 0 || ul.cols() == 0) continue;
                CMatrix g = uk.adjoint() * ul;
                if (k == l) g -= identity(static_cast<int>(g.rows()));
                const double r = g.norm();
                if (r > rep.max_residual) {
                    rep.max_residual = r;
                    rep.worst_i = i;
                    rep.worst_k = k;
                    rep.worst_l = l;
                }
            }
    rep.pass = rep.max_residual <= tol;
    return rep;
}

}  // namespace igkls
