#include "igkls/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace igkls {

const char* error_kind_name(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Shape: return "Shape";
        case ErrorKind::NotClosed: return "NotClosed";
        case ErrorKind::DecompositionFailed: return "DecompositionFailed";
        case ErrorKind::NotIntertwiner: return "NotIntertwiner";
        case ErrorKind::NotSameMap: return "NotSameMap";
        case ErrorKind::NotMinimal: return "NotMinimal";
        case ErrorKind::NotInvariant: return "NotInvariant";
        case ErrorKind::FactorizationResidual: return "FactorizationResidual";
        case ErrorKind::NotSameGenerator: return "NotSameGenerator";
        case ErrorKind::NotEquivalent: return "NotEquivalent";
        case ErrorKind::NotDecoherenceFree: return "NotDecoherenceFree";
        case ErrorKind::NotMaximalAbelian: return "NotMaximalAbelian";
        case ErrorKind::NotDiagonal: return "NotDiagonal";
        case ErrorKind::NotTracePreserving: return "NotTracePreserving";
        case ErrorKind::AlgebraClosureFailed: return "AlgebraClosureFailed";
        case ErrorKind::NoFixedState: return "NoFixedState";
        case ErrorKind::PictureMismatch: return "PictureMismatch";
        case ErrorKind::Infeasible: return "Infeasible";
        case ErrorKind::ParseError: return "ParseError";
        case ErrorKind::SchemaError: return "SchemaError";
        case ErrorKind::InvariantError: return "InvariantError";
    }
    return "Unknown";
}

bool is_verification_failure(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Shape:
        case ErrorKind::PictureMismatch:
        case ErrorKind::Infeasible:
        case ErrorKind::ParseError:
        case ErrorKind::SchemaError:
        case ErrorKind::InvariantError:
            return false;
        default:
            return true;
    }
}

CMatrix identity(int d) { return CMatrix::Identity(d, d); }

CMatrix zeros(int rows, int cols) { return CMatrix::Zero(rows, cols); }

CMatrix kron(const CMatrix& a, const CMatrix& b) {
    const Eigen::Index rb = b.rows(), cb = b.cols();
    CMatrix out(a.rows() * rb, a.cols() * cb);
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * rb, j * cb, rb, cb) = a(i, j) * b;
    return out;
}

CMatrix partial_trace(const CMatrix& m, int dim_a, int dim_b, Subsystem over) {
    const int n = dim_a * dim_b;
    if (m.rows() != n || m.cols() != n)
        throw Error(ErrorKind::Shape, "partial_trace: matrix is not (dim_a*dim_b) square");
    if (over == Subsystem::A) {
        CMatrix out = CMatrix::Zero(dim_b, dim_b);
        for (int a = 0; a < dim_a; ++a) out += m.block(a * dim_b, a * dim_b, dim_b, dim_b);
        return out;
    }
    CMatrix out(dim_a, dim_a);
    for (int a = 0; a < dim_a; ++a)
        for (int c = 0; c < dim_a; ++c) out(a, c) = m.block(a * dim_b, c * dim_b, dim_b, dim_b).trace();
    return out;
}

namespace {

struct Svd {
    CMatrix u;
    Eigen::VectorXd s;
    CMatrix v;
};

// BDCSVD in Eigen 3.4.0 occasionally returns a wrong factorization for matrices with
// clustered singular values. The result is checked and recomputed with JacobiSVD if needed.
template <int Options>
Svd checked_svd(const CMatrix& m) {
    Eigen::BDCSVD<CMatrix> bdc(m, Options);
    Svd out{bdc.matrixU(), bdc.singularValues(), bdc.matrixV()};
    const Eigen::Index k = out.s.size();
    const CMatrix back = out.u.leftCols(k) * out.s.cast<cplx>().asDiagonal() * out.v.leftCols(k).adjoint();
    const double cut = 1e-12 * std::sqrt(static_cast<double>(m.rows() + m.cols())) * std::max(m.norm(), 1e-300);
    if ((back - m).norm() <= cut) return out;
    Eigen::JacobiSVD<CMatrix> jac(m, Options);
    return {jac.matrixU(), jac.singularValues(), jac.matrixV()};
}

Svd full_svd(const CMatrix& m) { return checked_svd<Eigen::ComputeFullU | Eigen::ComputeFullV>(m); }
Svd thin_svd(const CMatrix& m) { return checked_svd<Eigen::ComputeThinU | Eigen::ComputeThinV>(m); }

int rank_of(const Eigen::VectorXd& s, double tol, double scale) {
    if (s.size() == 0) return 0;
    const double ref = scale >= 0.0 ? scale : s(0);
    const double cut = tol * ref;
    int r = 0;
    for (Eigen::Index k = 0; k < s.size(); ++k)
        if (s(k) > cut) ++r;
    return r;
}

}  // namespace

CMatrix range_basis(const CMatrix& m, double tol, double scale) {
    if (m.rows() == 0) return CMatrix(0, 0);
    if (m.cols() == 0) return CMatrix(m.rows(), 0);
    Svd svd = full_svd(m);
    const int r = rank_of(svd.s, tol, scale);
    return svd.u.leftCols(r);
}

CMatrix null_space(const CMatrix& m, double tol, double scale) {
    if (m.cols() == 0) return CMatrix(0, 0);
    if (m.rows() == 0) return identity(static_cast<int>(m.cols()));
    Svd svd = full_svd(m);
    const int r = rank_of(svd.s, tol, scale);
    return svd.v.rightCols(m.cols() - r);
}

int numeric_rank(const CMatrix& m, double tol) {
    if (m.size() == 0) return 0;
    return rank_of(thin_svd(m).s, tol, -1.0);
}

CMatrix pinv(const CMatrix& m, double tol) {
    if (m.size() == 0) return CMatrix::Zero(m.cols(), m.rows());
    const Svd svd = thin_svd(m);
    const int r = rank_of(svd.s, tol, -1.0);
    CMatrix out = CMatrix::Zero(m.cols(), m.rows());
    for (int k = 0; k < r; ++k) out += svd.v.col(k) * (1.0 / svd.s(k)) * svd.u.col(k).adjoint();
    return out;
}

CMatrix polar_isometry(const CMatrix& m) {
    if (m.size() == 0) return m;
    const Svd svd = thin_svd(m);
    return svd.u * svd.v.adjoint();
}

double isometry_defect(const CMatrix& m) {
    if (m.cols() == 0) return 0.0;
    return (m.adjoint() * m - identity(static_cast<int>(m.cols()))).norm();
}

double hermitian_defect(const CMatrix& m) { return (m - m.adjoint()).norm(); }

SubspaceBasis orthonormalize_columns(const CMatrix& m, double tol) {
    SubspaceBasis out;
    out.ambient_dim = static_cast<int>(m.rows());
    out.vectors = range_basis(m, tol);
    if (out.vectors.cols() == 0) out.vectors = CMatrix(m.rows(), 0);
    return out;
}

SubspaceBasis orthonormalize_span(std::span<const CVector> vectors, int ambient_dim, double tol) {
    CMatrix m(ambient_dim, static_cast<Eigen::Index>(vectors.size()));
    for (std::size_t k = 0; k < vectors.size(); ++k) {
        if (vectors[k].size() != ambient_dim)
            throw Error(ErrorKind::Shape, "orthonormalize_span: vectors differ in ambient dimension");
        m.col(static_cast<Eigen::Index>(k)) = vectors[k];
    }
    return orthonormalize_columns(m, tol);
}

double subspace_residual(const SubspaceBasis& basis, const CVector& v) {
    if (v.size() != basis.ambient_dim)
        throw Error(ErrorKind::Shape, "subspace_residual: ambient dimension mismatch");
    if (basis.size() == 0) return v.norm();
    return (v - basis.vectors * (basis.vectors.adjoint() * v)).norm();
}

CMatrix embed_support(const CMatrix& x, const CMatrix& p) {
    if (x.rows() != p.rows() || x.cols() != p.rows())
        throw Error(ErrorKind::Shape, "embed_support: x must be square on the range of p");
    return p.adjoint() * x * p;
}

CVector vec(const CMatrix& m) {
    CVector out(m.size());
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) out(i * m.cols() + j) = m(i, j);
    return out;
}

CMatrix unvec(const CVector& v, int rows, int cols) {
    CMatrix out(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) out(i, j) = v(i * cols + j);
    return out;
}

CMatrix matrix_unit(int d, int i, int j) {
    CMatrix e = CMatrix::Zero(d, d);
    e(i, j) = 1.0;
    return e;
}

std::vector<CMatrix> matrix_unit_basis(int d) {
    std::vector<CMatrix> out;
    out.reserve(static_cast<std::size_t>(d) * d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) out.push_back(matrix_unit(d, i, j));
    return out;
}

}  // namespace igkls
