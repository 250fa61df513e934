#include "igkls/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <Eigen/Eigenvalues>

namespace igkls {

namespace {

CMatrix inverse_sqrt_psd(const CMatrix& s) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es((s + s.adjoint()) / 2.0);
    Eigen::VectorXd inv = es.eigenvalues().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
    return es.eigenvectors() * inv.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace

AtomicDecomposition random_decomposition(Rng& rng, int d0, const std::vector<FactorDims>& factors) {
    AtomicDecomposition dec;
    dec.d0 = d0;
    dec.factors = factors;
    dec.dim = d0;
    for (const auto& f : factors) dec.dim += f.size();
    dec.u_alg = haar_unitary(rng, dec.dim);
    return dec;
}

std::vector<int> feasible_block_dims(Rng& rng, const NormalFormParams& params) {
    const int n = static_cast<int>(params.factors.size());
    const int e = params.d_env;
    std::vector<int> df(static_cast<std::size_t>(n) * n, 0);
    if (params.k_only) return df;
    const bool explicit_dims = !params.d_f.empty();
    if (explicit_dims && static_cast<int>(params.d_f.size()) != n * n)
        throw Error(ErrorKind::Infeasible, "d_F must list n*n entries for n factors");
    for (int k = 0; k < n * n; ++k) df[k] = explicit_dims ? params.d_f[k] : rng.uniform_int(0, params.f_max);
    for (int i = 0; i < n; ++i) {
        const int cap = params.factors[i].dim_b * e;
        auto used = [&] {
            int u = 0;
            for (int j = 0; j < n; ++j) u += df[i * n + j] * params.factors[j].dim_b;
            return u;
        };
        if (explicit_dims && used() > cap)
            throw Error(ErrorKind::Infeasible, "factor " + std::to_string(i) + ": sum_j d_F_ij * dB_j = " +
                                                   std::to_string(used()) + " exceeds dB_i * d_env = " +
                                                   std::to_string(cap) + ", so the isometries cannot be jointly orthogonal");
        while (used() > cap) {
            int best = 0;
            for (int j = 1; j < n; ++j)
                if (df[i * n + j] * params.factors[j].dim_b > df[i * n + best] * params.factors[best].dim_b) best = j;
            --df[i * n + best];
        }
    }
    return df;
}

AtomicNormalForm random_normal_form(Rng& rng, const AtomicDecomposition& dec, const NormalFormParams& params) {
    const int n = dec.factor_count();
    const int e = params.k_only ? 0 : params.d_env;
    NormalFormParams p = params;
    p.factors = dec.factors;
    p.d_env = e;
    const std::vector<int> df = feasible_block_dims(rng, p);

    AtomicNormalForm nf;
    nf.dec = dec;
    nf.d_env = e;
    nf.v0 = params.k_only ? CMatrix::Zero(dec.d0 * e, dec.dim) : gaussian_matrix(rng, dec.d0 * e, dec.dim);
    nf.k0 = gaussian_matrix(rng, dec.d0, dec.dim);
    for (int i = 0; i < n; ++i) {
        const auto f = dec.factors[i];
        FactorData fd;
        fd.k_a = gaussian_matrix(rng, f.dim_a, f.dim_a);
        fd.h_b = random_hermitian(rng, f.dim_b);
        fd.b = (params.k_only || params.no_intertwiner) ? CMatrix::Zero(f.dim_b * e, f.dim_b)
                                                        : CMatrix(0.5 * gaussian_matrix(rng, f.dim_b * e, f.dim_b));
        nf.factors.push_back(std::move(fd));
    }
    for (int i = 0; i < n; ++i) {
        const auto fi = dec.factors[i];
        const CMatrix u = haar_unitary(rng, fi.dim_b * e);
        int col = 0;
        for (int j = 0; j < n; ++j) {
            const auto fj = dec.factors[j];
            PairBlock pb;
            pb.i = i;
            pb.j = j;
            pb.d_f = df[i * n + j];
            const int width = pb.d_f * fj.dim_b;
            pb.u = u.middleCols(col, width);
            col += width;
            pb.a = pb.d_f > 0 ? CMatrix(gaussian_matrix(rng, fi.dim_a * pb.d_f, fj.dim_a) /
                                        std::sqrt(static_cast<double>(fi.dim_a)))
                              : CMatrix(0, fj.dim_a);
            nf.pairs.push_back(std::move(pb));
        }
    }
    return nf;
}

SampledAlgebra random_algebra(Rng& rng, int d0, const std::vector<FactorDims>& factors) {
    SampledAlgebra out;
    out.truth = random_decomposition(rng, d0, factors);
    const AlgebraBasis plain = algebra_basis(out.truth);
    const int m = plain.size();
    const CMatrix mix = haar_unitary(rng, m);
    out.alg.ambient_dim = plain.ambient_dim;
    out.alg.contains_identity = plain.contains_identity;
    for (int k = 0; k < m; ++k) {
        CMatrix b = CMatrix::Zero(plain.ambient_dim, plain.ambient_dim);
        for (int l = 0; l < m; ++l) b += mix(l, k) * plain.basis[l];
        out.alg.basis.push_back(b);
    }
    return out;
}

BlockFactorization random_block_factorization(Rng& rng, const AtomicDecomposition& dec_a,
                                              const AtomicDecomposition& dec_c, int d_env, int f_max) {
    BlockFactorization bf;
    bf.d_env = d_env;
    bf.n_a = dec_a.factor_count();
    bf.n_c = dec_c.factor_count();
    bf.v0 = gaussian_matrix(rng, dec_a.d0 * d_env, dec_c.dim);
    for (int i = 0; i < bf.n_a; ++i) {
        const auto fi = dec_a.factors[i];
        const int cap = fi.dim_b * d_env;
        std::vector<int> df(static_cast<std::size_t>(bf.n_c));
        int used = 0;
        for (int j = 0; j < bf.n_c; ++j) {
            df[j] = rng.uniform_int(0, f_max);
            while (df[j] > 0 && used + df[j] * dec_c.factors[j].dim_b > cap) --df[j];
            used += df[j] * dec_c.factors[j].dim_b;
        }
        const CMatrix u = haar_unitary(rng, cap);
        int col = 0;
        for (int j = 0; j < bf.n_c; ++j) {
            const auto fj = dec_c.factors[j];
            PairBlock pb;
            pb.i = i;
            pb.j = j;
            pb.d_f = df[j];
            pb.u = u.middleCols(col, df[j] * fj.dim_b);
            col += df[j] * fj.dim_b;
            pb.a = df[j] > 0 ? CMatrix(gaussian_matrix(rng, fi.dim_a * df[j], fj.dim_a)) : CMatrix(0, fj.dim_a);
            bf.pairs.push_back(std::move(pb));
        }
    }
    return bf;
}

KrausSet random_tp_channel(Rng& rng, int d, int n_ops) {
    std::vector<CMatrix> ops;
    CMatrix s = CMatrix::Zero(d, d);
    for (int k = 0; k < n_ops; ++k) {
        ops.push_back(gaussian_matrix(rng, d, d));
        s += ops.back() * ops.back().adjoint();
    }
    const CMatrix norm = inverse_sqrt_psd(s);
    KrausSet out;
    out.d_in = out.d_out = d;
    out.picture = Picture::Schrodinger;
    for (auto& op : ops) out.ops.push_back(norm * op);
    return out;
}

SampledKoashiImoto random_koashi_imoto_channel(Rng& rng, const std::vector<FactorDims>& factors, int d_transient,
                                               int n_ops) {
    int s = 0;
    for (const auto& f : factors) s += f.size();
    const int d = s + d_transient;
    const CMatrix u = haar_unitary(rng, d);
    const CMatrix us = u.leftCols(s);

    // Kraus operators kappa with rho -> sum kappa rho kappa^dag, then stored as kappa^dag.
    std::vector<CMatrix> kappa(static_cast<std::size_t>(n_ops), CMatrix::Zero(s, s));
    int off = 0;
    for (const auto& f : factors) {
        // Random channel on B: kappa_n = sqrt-normalized Gaussians with sum kappa^dag kappa = 1.
        std::vector<CMatrix> local;
        CMatrix acc = CMatrix::Zero(f.dim_b, f.dim_b);
        for (int n = 0; n < n_ops; ++n) {
            local.push_back(gaussian_matrix(rng, f.dim_b, f.dim_b));
            acc += local.back().adjoint() * local.back();
        }
        const CMatrix norm = inverse_sqrt_psd(acc);
        for (int n = 0; n < n_ops; ++n)
            kappa[n].block(off, off, f.size(), f.size()) = kron(identity(f.dim_a), CMatrix(local[n] * norm));
        off += f.size();
    }
    SampledKoashiImoto out;
    out.factors = factors;
    out.d_transient = d_transient;
    out.channel.d_in = out.channel.d_out = d;
    out.channel.picture = Picture::Schrodinger;
    for (const auto& kp : kappa) out.channel.ops.push_back(CMatrix(us * kp * us.adjoint()).adjoint());
    if (d_transient > 0) {
        // Transient vectors are sent to a fixed random state on the support.
        CMatrix g = gaussian_matrix(rng, s, s);
        CMatrix tau = g * g.adjoint();
        tau /= tau.trace().real();
        Eigen::SelfAdjointEigenSolver<CMatrix> es(tau);
        for (int t = 0; t < d_transient; ++t)
            for (int m = 0; m < s; ++m) {
                const double w = std::max(es.eigenvalues()(m), 0.0);
                CMatrix kp = std::sqrt(w) * (us * es.eigenvectors().col(m)) * u.col(s + t).adjoint();
                out.channel.ops.push_back(kp.adjoint());
            }
    }
    return out;
}

}  // namespace igkls
