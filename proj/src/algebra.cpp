#include "igkls/algebra.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <Eigen/Eigenvalues>

#include "igkls/random.hpp"

namespace igkls {

int AtomicDecomposition::offset(int i) const {
    int off = d0;
    for (int k = 0; k < i; ++k) off += factors[k].size();
    return off;
}

CMatrix AtomicDecomposition::null_projector() const { return u_alg.leftCols(d0).adjoint(); }

CMatrix AtomicDecomposition::projector(int i) const {
    return u_alg.middleCols(offset(i), factors[i].size()).adjoint();
}

void validate_decomposition(const AtomicDecomposition& dec, double tol) {
    if (dec.u_alg.rows() != dec.dim || dec.u_alg.cols() != dec.dim)
        throw Error(ErrorKind::InvariantError, "u_alg: shape does not match ambient dimension");
    int total = dec.d0;
    for (const auto& f : dec.factors) {
        if (f.dim_a < 1 || f.dim_b < 1) throw Error(ErrorKind::InvariantError, "factors: dimensions must be positive");
        total += f.size();
    }
    if (dec.d0 < 0 || total != dec.dim)
        throw Error(ErrorKind::InvariantError, "factors: d0 + sum dA*dB differs from the ambient dimension");
    const double defect = isometry_defect(dec.u_alg);
    if (defect > tol * std::max(1.0, std::sqrt(static_cast<double>(dec.dim))))
        throw Error(ErrorKind::InvariantError, "u_alg: not unitary", defect);
}

namespace {

double hs_scale(const CMatrix& m) { return std::max(1.0, m.norm()); }

// Orthonormal span kept as vec'd columns, extended by residual SVD.
class SpanBuilder {
public:
    explicit SpanBuilder(int d) : d_(d), q_(d * d, 0) {}

    // Adds the new directions of the candidate columns; returns them.
    CMatrix extend(const CMatrix& cand, double tol) {
        if (cand.cols() == 0 || full()) return CMatrix(d_ * d_, 0);
        double scale = 0.0;
        for (Eigen::Index k = 0; k < cand.cols(); ++k) scale = std::max(scale, cand.col(k).norm());
        if (scale == 0.0) return CMatrix(d_ * d_, 0);
        CMatrix r = cand;
        if (q_.cols() > 0) {
            r -= q_ * (q_.adjoint() * r);
            r -= q_ * (q_.adjoint() * r);
        }
        CMatrix fresh = range_basis(r, tol, scale);
        if (fresh.cols() == 0) return CMatrix(d_ * d_, 0);
        if (q_.cols() > 0) fresh -= q_ * (q_.adjoint() * fresh);
        Eigen::HouseholderQR<CMatrix> qr(fresh);
        fresh = qr.householderQ() * CMatrix::Identity(fresh.rows(), fresh.cols());
        CMatrix grown(d_ * d_, q_.cols() + fresh.cols());
        grown << q_, fresh;
        q_ = std::move(grown);
        return fresh;
    }

    bool full() const { return q_.cols() >= d_ * d_; }
    const CMatrix& basis() const { return q_; }

private:
    int d_;
    CMatrix q_;
};

AlgebraBasis from_columns(const CMatrix& q, int d) {
    AlgebraBasis alg;
    alg.ambient_dim = d;
    for (Eigen::Index k = 0; k < q.cols(); ++k) alg.basis.push_back(unvec(q.col(k), d, d));
    return alg;
}

bool identity_member(const AlgebraBasis& alg, double tol) {
    const int d = alg.ambient_dim;
    return membership_residual(identity(d), alg) <= tol * std::sqrt(static_cast<double>(d)) * 10.0;
}

CMatrix random_element(const AlgebraBasis& alg, Rng& rng) {
    CMatrix x = CMatrix::Zero(alg.ambient_dim, alg.ambient_dim);
    for (const auto& b : alg.basis) x += rng.complex_normal() * b;
    return x;
}

CMatrix frame_op(const CMatrix& x, const AtomicDecomposition& dec) { return dec.u_alg.adjoint() * x * dec.u_alg; }

CMatrix frame_intertwiner(const CMatrix& v, const AtomicDecomposition& dec, int e_out, int e_in) {
    return kron(dec.u_alg.adjoint(), identity(e_out)) * v * kron(dec.u_alg, identity(e_in));
}

CMatrix unframe_intertwiner(const CMatrix& y, const AtomicDecomposition& dec, int e_out, int e_in) {
    return kron(dec.u_alg, identity(e_out)) * y * kron(dec.u_alg.adjoint(), identity(e_in));
}

// Fixes the phase of a vector so its largest-magnitude entry is real positive.
cplx phase_of_largest(const CVector& v) {
    Eigen::Index best = 0;
    double mag = -1.0;
    for (Eigen::Index k = 0; k < v.size(); ++k) {
        const double m = std::abs(v(k));
        if (m > mag * (1.0 + 1e-9)) {
            mag = m;
            best = k;
        }
    }
    if (mag <= 0.0) return 1.0;
    return std::conj(v(best)) / mag;
}

struct FactorFrame {
    FactorDims dims;
    CMatrix cols;  // d x (dim_a * dim_b)
    std::vector<std::pair<double, double>> fingerprint;
};

std::vector<std::pair<double, double>> fingerprint_of(const CMatrix& first, const CMatrix& cols, FactorDims f) {
    if (first.size() == 0) return {};
    CMatrix y = cols.adjoint() * first * cols;
    CMatrix xa = partial_trace(y, f.dim_a, f.dim_b, Subsystem::B) / static_cast<double>(f.dim_b);
    Eigen::ComplexEigenSolver<CMatrix> es(xa, false);
    std::vector<std::pair<double, double>> out;
    for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
        const cplx z = es.eigenvalues()(k);
        out.emplace_back(std::round(z.real() * 1e6) / 1e6, std::round(z.imag() * 1e6) / 1e6);
    }
    std::sort(out.begin(), out.end());
    return out;
}

// One attempt; returns false when spectral data is not generic enough.
bool try_decompose(const AlgebraBasis& alg, const CMatrix& supp, const CMatrix& h0, double tol, Rng& rng,
                   AtomicDecomposition& out) {
    const int d = alg.ambient_dim;
    const int s = static_cast<int>(supp.cols());
    std::vector<CMatrix> restricted;
    restricted.reserve(alg.basis.size());
    for (const auto& b : alg.basis) restricted.push_back(supp.adjoint() * b * supp);

    CMatrix g = CMatrix::Zero(s, s);
    CMatrix x = CMatrix::Zero(s, s);
    for (const auto& a : restricted) {
        g += rng.normal() * (a + a.adjoint()) + rng.normal() * kI * (a - a.adjoint());
        x += rng.complex_normal() * a;
    }
    Eigen::SelfAdjointEigenSolver<CMatrix> es((g + g.adjoint()) / 2.0);
    const Eigen::VectorXd& ev = es.eigenvalues();
    const double scale = std::max(std::abs(ev(0)), std::abs(ev(s - 1)));
    if (scale == 0.0) return false;
    const double spread = std::max(ev(s - 1) - ev(0), scale);

    // Eigenvalue clusters.
    std::vector<int> start{0};
    for (int k = 1; k < s; ++k) {
        const double gap = ev(k) - ev(k - 1);
        if (gap <= 1e-9 * spread) continue;
        if (gap < 1e-6 * spread) return false;
        start.push_back(k);
    }
    start.push_back(s);
    const int nc = static_cast<int>(start.size()) - 1;
    std::vector<CMatrix> spaces;
    for (int c = 0; c < nc; ++c) spaces.push_back(es.eigenvectors().middleCols(start[c], start[c + 1] - start[c]));

    // Clusters linked by a generic algebra element belong to one factor.
    const double xn = std::max(x.norm(), 1e-300);
    std::vector<int> parent(nc);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int k) {
        while (parent[k] != k) k = parent[k] = parent[parent[k]];
        return k;
    };
    for (int p = 0; p < nc; ++p)
        for (int q = 0; q < nc; ++q) {
            if (p == q) continue;
            const double link = (spaces[p].adjoint() * x * spaces[q]).norm() / xn;
            if (link > 1e-6) {
                parent[find(p)] = find(q);
            } else if (link > 1e-10) {
                return false;
            }
        }

    std::vector<std::vector<int>> groups;
    std::vector<int> group_of(nc, -1);
    for (int c = 0; c < nc; ++c) {
        const int r = find(c);
        if (group_of[r] < 0) {
            group_of[r] = static_cast<int>(groups.size());
            groups.emplace_back();
        }
        groups[group_of[r]].push_back(c);
    }

    std::vector<FactorFrame> frames;
    int dim_sum = 0;
    for (const auto& grp : groups) {
        const int db = static_cast<int>(spaces[grp[0]].cols());
        for (int c : grp)
            if (spaces[c].cols() != db) return false;
        const int da = static_cast<int>(grp.size());
        dim_sum += da * da;
        FactorFrame fr;
        fr.dims = {da, db};
        fr.cols = CMatrix(s, da * db);
        const CMatrix& q1 = spaces[grp[0]];
        fr.cols.leftCols(db) = q1;
        for (int a = 1; a < da; ++a) {
            const CMatrix& qa = spaces[grp[a]];
            CMatrix m = qa.adjoint() * x * q1;
            const double c = std::sqrt(m.squaredNorm() / db);
            if (c <= 1e-6 * xn) return false;
            m /= c;
            if (isometry_defect(m) > 1e-6) return false;
            fr.cols.middleCols(a * db, db) = qa * polar_isometry(m);
        }
        frames.push_back(std::move(fr));
    }
    if (dim_sum != alg.size()) return false;

    for (auto& fr : frames) {
        fr.cols = supp * fr.cols;
        const int da = fr.dims.dim_a, db = fr.dims.dim_b;
        for (int b = 0; b < db; ++b) {
            const cplx ph = phase_of_largest(fr.cols.col(b));
            for (int a = 0; a < da; ++a) fr.cols.col(a * db + b) *= ph;
        }
        for (int a = 1; a < da; ++a) {
            const cplx ph = phase_of_largest(fr.cols.col(a * db));
            for (int b = 0; b < db; ++b) fr.cols.col(a * db + b) *= ph;
        }
        fr.fingerprint = fingerprint_of(alg.basis.empty() ? CMatrix() : alg.basis[0], fr.cols, fr.dims);
    }
    std::stable_sort(frames.begin(), frames.end(), [](const FactorFrame& l, const FactorFrame& r) {
        if (l.dims.dim_a != r.dims.dim_a) return l.dims.dim_a < r.dims.dim_a;
        if (l.dims.dim_b != r.dims.dim_b) return l.dims.dim_b < r.dims.dim_b;
        return l.fingerprint < r.fingerprint;
    });

    out = AtomicDecomposition{};
    out.dim = d;
    out.d0 = static_cast<int>(h0.cols());
    out.u_alg = CMatrix(d, d);
    CMatrix h0f = h0;
    for (Eigen::Index k = 0; k < h0f.cols(); ++k) h0f.col(k) *= phase_of_largest(h0f.col(k));
    if (out.d0 > 0) out.u_alg.leftCols(out.d0) = h0f;
    int off = out.d0;
    for (const auto& fr : frames) {
        out.u_alg.middleCols(off, fr.dims.size()) = fr.cols;
        out.factors.push_back(fr.dims);
        off += fr.dims.size();
    }
    if (off != d) return false;
    if (isometry_defect(out.u_alg) > 1e-9 * std::sqrt(static_cast<double>(d))) return false;
    return decomposition_residual(out, alg) <= tol;
}

}  // namespace

double membership_residual(const CMatrix& x, const AlgebraBasis& alg) {
    if (x.rows() != alg.ambient_dim || x.cols() != alg.ambient_dim)
        throw Error(ErrorKind::Shape, "membership_residual: dimension mismatch");
    CMatrix r = x;
    for (const auto& b : alg.basis) r -= (b.adjoint() * x).trace() * b;
    return r.norm();
}

CMatrix project_to_algebra(const CMatrix& x, const AtomicDecomposition& dec) {
    if (x.rows() != dec.dim || x.cols() != dec.dim) throw Error(ErrorKind::Shape, "project_to_algebra: dimension mismatch");
    const CMatrix y = frame_op(x, dec);
    std::vector<CMatrix> blocks;
    for (int i = 0; i < dec.factor_count(); ++i) {
        const auto f = dec.factors[i];
        const int off = dec.offset(i);
        blocks.push_back(partial_trace(y.block(off, off, f.size(), f.size()), f.dim_a, f.dim_b, Subsystem::B) /
                         static_cast<double>(f.dim_b));
    }
    return algebra_element(dec, blocks);
}

double membership_residual(const CMatrix& x, const AtomicDecomposition& dec) {
    return (x - project_to_algebra(x, dec)).norm();
}

double closure_residual(const AlgebraBasis& alg) {
    double worst = 0.0;
    for (const auto& b : alg.basis) {
        worst = std::max(worst, membership_residual(b.adjoint(), alg));
        for (const auto& c : alg.basis) worst = std::max(worst, membership_residual(b * c, alg) / hs_scale(b * c));
    }
    return worst;
}

AlgebraBasis close_star_algebra(const std::vector<CMatrix>& generators, bool unital, double tol) {
    int d = -1;
    for (const auto& g : generators) {
        if (g.rows() != g.cols()) throw Error(ErrorKind::Shape, "close_star_algebra: generator is not square");
        if (d >= 0 && g.rows() != d) throw Error(ErrorKind::Shape, "close_star_algebra: generators differ in dimension");
        d = static_cast<int>(g.rows());
    }
    if (d < 0) {
        AlgebraBasis alg;
        if (unital) throw Error(ErrorKind::Shape, "close_star_algebra: empty generator list needs an ambient dimension");
        return alg;
    }
    return close_star_algebra(generators, unital, tol, d);
}

AlgebraBasis close_star_algebra(const std::vector<CMatrix>& generators, bool unital, double tol, int d) {
    std::vector<CMatrix> gens;
    for (const auto& g : generators) {
        if (g.rows() != d || g.cols() != d) throw Error(ErrorKind::Shape, "close_star_algebra: generator shape mismatch");
        const double n = g.norm();
        if (n == 0.0) continue;
        gens.push_back(g / n);
        gens.push_back(g.adjoint() / n);
    }
    SpanBuilder span(d);
    CMatrix seed(d * d, static_cast<Eigen::Index>(gens.size()) + (unital ? 1 : 0));
    for (std::size_t k = 0; k < gens.size(); ++k) seed.col(static_cast<Eigen::Index>(k)) = vec(gens[k]);
    if (unital) seed.col(seed.cols() - 1) = vec(identity(d));
    CMatrix frontier = span.extend(seed, tol);
    while (frontier.cols() > 0 && !span.full()) {
        CMatrix cand(d * d, static_cast<Eigen::Index>(gens.size()) * frontier.cols());
        Eigen::Index col = 0;
        for (Eigen::Index f = 0; f < frontier.cols(); ++f) {
            const CMatrix fm = unvec(frontier.col(f), d, d);
            for (const auto& g : gens) cand.col(col++) = vec(g * fm);
        }
        frontier = span.extend(cand, tol);
    }
    AlgebraBasis alg = from_columns(span.basis(), d);
    alg.contains_identity = unital || identity_member(alg, tol);
    return alg;
}

AlgebraBasis commutant(const AlgebraBasis& alg, double tol) {
    const int d = alg.ambient_dim;
    const CMatrix id = identity(d);
    CMatrix n = identity(d * d);
    auto restrict_by = [&](const CMatrix& b) {
        const double scale = 2.0 * b.norm();
        if (scale == 0.0 || n.cols() == 0) return;
        CMatrix super = kron(b, id) - kron(id, b.transpose());
        CMatrix m = super * n;
        CMatrix k = null_space(m, tol, scale);
        n = n * k;
    };
    Rng rng(0x5eed);
    if (!alg.basis.empty()) restrict_by(random_element(alg, rng));
    for (const auto& b : alg.basis) restrict_by(b);
    Eigen::HouseholderQR<CMatrix> qr(n);
    CMatrix q = qr.householderQ() * CMatrix::Identity(n.rows(), n.cols());
    AlgebraBasis out = from_columns(q, d);
    out.contains_identity = true;
    return out;
}

AtomicDecomposition atomic_decompose(const AlgebraBasis& alg, double tol, std::uint64_t seed) {
    const int d = alg.ambient_dim;
    for (const auto& b : alg.basis)
        if (b.rows() != d || b.cols() != d) throw Error(ErrorKind::Shape, "atomic_decompose: basis element shape");
    if (alg.basis.empty()) {
        AtomicDecomposition dec;
        dec.dim = d;
        dec.d0 = d;
        dec.u_alg = identity(d);
        return dec;
    }

    Rng rng(seed);
    {
        double worst = 0.0;
        for (const auto& b : alg.basis) worst = std::max(worst, membership_residual(b.adjoint(), alg));
        for (int t = 0; t < 3; ++t) {
            const CMatrix x = random_element(alg, rng);
            const CMatrix y = random_element(alg, rng);
            const CMatrix xy = x * y;
            worst = std::max(worst, membership_residual(xy, alg) / hs_scale(xy));
        }
        if (worst > std::max(tol, 1e-12) * 10.0)
            throw Error(ErrorKind::NotClosed, "basis is not closed under adjoint and product", worst);
    }

    CMatrix gram = CMatrix::Zero(d, d);
    for (const auto& b : alg.basis) gram += b.adjoint() * b;
    Eigen::SelfAdjointEigenSolver<CMatrix> es((gram + gram.adjoint()) / 2.0);
    const double top = es.eigenvalues()(d - 1);
    int d0 = 0;
    while (d0 < d && es.eigenvalues()(d0) <= tol * top) ++d0;
    const CMatrix h0 = es.eigenvectors().leftCols(d0);
    const CMatrix supp = es.eigenvectors().rightCols(d - d0);

    AtomicDecomposition dec;
    for (int attempt = 0; attempt < 8; ++attempt) {
        Rng trial = rng.fork(static_cast<std::uint64_t>(attempt));
        if (try_decompose(alg, supp, h0, tol, trial, dec)) return dec;
    }
    throw Error(ErrorKind::DecompositionFailed, "no generic spectral split found after 8 attempts");
}

double decomposition_residual(const AtomicDecomposition& dec, const AlgebraBasis& alg) {
    double worst = 0.0;
    for (const auto& b : alg.basis) {
        const CMatrix y = frame_op(b, dec);
        CMatrix expect = CMatrix::Zero(dec.dim, dec.dim);
        for (int i = 0; i < dec.factor_count(); ++i) {
            const auto f = dec.factors[i];
            const int off = dec.offset(i);
            const CMatrix blk = y.block(off, off, f.size(), f.size());
            expect.block(off, off, f.size(), f.size()) =
                kron(partial_trace(blk, f.dim_a, f.dim_b, Subsystem::B) / static_cast<double>(f.dim_b),
                     identity(f.dim_b));
        }
        worst = std::max(worst, (y - expect).norm() / hs_scale(b));
    }
    return worst;
}

AlgebraBasis algebra_basis(const AtomicDecomposition& dec) {
    AlgebraBasis alg;
    alg.ambient_dim = dec.dim;
    for (int i = 0; i < dec.factor_count(); ++i) {
        const auto f = dec.factors[i];
        const CMatrix p = dec.projector(i);
        const CMatrix unit_b = identity(f.dim_b) / std::sqrt(static_cast<double>(f.dim_b));
        for (int a = 0; a < f.dim_a; ++a)
            for (int c = 0; c < f.dim_a; ++c) alg.basis.push_back(p.adjoint() * kron(matrix_unit(f.dim_a, a, c), unit_b) * p);
    }
    alg.contains_identity = dec.d0 == 0;
    return alg;
}

CMatrix algebra_element(const AtomicDecomposition& dec, const std::vector<CMatrix>& blocks_a) {
    CMatrix y = CMatrix::Zero(dec.dim, dec.dim);
    for (int i = 0; i < dec.factor_count(); ++i) {
        const auto f = dec.factors[i];
        const int off = dec.offset(i);
        y.block(off, off, f.size(), f.size()) = kron(blocks_a.at(i), identity(f.dim_b));
    }
    return dec.u_alg * y * dec.u_alg.adjoint();
}

CMatrix commutant_element(const AtomicDecomposition& dec, const std::vector<CMatrix>& blocks_b) {
    CMatrix y = CMatrix::Zero(dec.dim, dec.dim);
    for (int i = 0; i < dec.factor_count(); ++i) {
        const auto f = dec.factors[i];
        const int off = dec.offset(i);
        y.block(off, off, f.size(), f.size()) = kron(identity(f.dim_a), blocks_b.at(i));
    }
    return dec.u_alg * y * dec.u_alg.adjoint();
}

CMatrix twirl_to_commutant(const CMatrix& x, const AtomicDecomposition& dec) {
    if (x.rows() != dec.dim || x.cols() != dec.dim) throw Error(ErrorKind::Shape, "twirl_to_commutant: dimension mismatch");
    const CMatrix y = frame_op(x, dec);
    std::vector<CMatrix> blocks;
    for (int i = 0; i < dec.factor_count(); ++i) {
        const auto f = dec.factors[i];
        const int off = dec.offset(i);
        blocks.push_back(partial_trace(y.block(off, off, f.size(), f.size()), f.dim_a, f.dim_b, Subsystem::A) /
                         static_cast<double>(f.dim_a));
    }
    return commutant_element(dec, blocks);
}

namespace {

IntertwinerBlocks blocks_of_frame(const CMatrix& y, const AtomicDecomposition& dec, int e_out, int e_in) {
    IntertwinerBlocks out;
    out.b0 = y.topLeftCorner(dec.d0 * e_out, dec.d0 * e_in);
    for (int i = 0; i < dec.factor_count(); ++i) {
        const auto f = dec.factors[i];
        const int off = dec.offset(i);
        const int ro = f.dim_b * e_out, ci = f.dim_b * e_in;
        CMatrix bi = CMatrix::Zero(ro, ci);
        for (int a = 0; a < f.dim_a; ++a) bi += y.block((off + a * f.dim_b) * e_out, (off + a * f.dim_b) * e_in, ro, ci);
        out.blocks.push_back(bi / static_cast<double>(f.dim_a));
    }
    return out;
}

CMatrix frame_of_blocks(const IntertwinerBlocks& blocks, const AtomicDecomposition& dec, int e_out, int e_in) {
    CMatrix y = CMatrix::Zero(dec.dim * e_out, dec.dim * e_in);
    if (dec.d0 > 0) y.topLeftCorner(dec.d0 * e_out, dec.d0 * e_in) = blocks.b0;
    for (int i = 0; i < dec.factor_count(); ++i) {
        const auto f = dec.factors[i];
        const int off = dec.offset(i);
        y.block(off * e_out, off * e_in, f.size() * e_out, f.size() * e_in) = kron(identity(f.dim_a), blocks.blocks.at(i));
    }
    return y;
}

}  // namespace

CMatrix twirl_intertwiner(const CMatrix& v, const AtomicDecomposition& dec, int e) {
    if (v.rows() != dec.dim * e || v.cols() != dec.dim)
        throw Error(ErrorKind::Shape, "twirl_intertwiner: v must be (d*e) x d");
    IntertwinerBlocks blocks = blocks_of_frame(frame_intertwiner(v, dec, e, 1), dec, e, 1);
    blocks.b0.setZero();
    return unframe_intertwiner(frame_of_blocks(blocks, dec, e, 1), dec, e, 1);
}

IntertwinerBlocks intertwiner_decompose(const CMatrix& b, const AtomicDecomposition& dec, int e_out, int e_in,
                                        double tol) {
    if (b.rows() != dec.dim * e_out || b.cols() != dec.dim * e_in)
        throw Error(ErrorKind::Shape, "intertwiner_decompose: shape mismatch");
    const CMatrix y = frame_intertwiner(b, dec, e_out, e_in);
    IntertwinerBlocks blocks = blocks_of_frame(y, dec, e_out, e_in);
    const double res = (y - frame_of_blocks(blocks, dec, e_out, e_in)).norm();
    if (res > tol * hs_scale(b))
        throw Error(ErrorKind::NotIntertwiner, "operator does not intertwine the algebra", res);
    return blocks;
}

CMatrix assemble_intertwiner(const IntertwinerBlocks& blocks, const AtomicDecomposition& dec, int e_out, int e_in) {
    return unframe_intertwiner(frame_of_blocks(blocks, dec, e_out, e_in), dec, e_out, e_in);
}

}  // namespace igkls
