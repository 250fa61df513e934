#pragma once

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "igkls/errors.hpp"

namespace igkls {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

inline constexpr cplx kI{0.0, 1.0};

struct Tolerances {
    double rank = 1e-9;
    double verify = 1e-9;
    // Threshold for postconditions of multi-step constructions.
    double post() const { return 10.0 * verify; }
};

enum class Subsystem { A, B };

struct SubspaceBasis {
    int ambient_dim = 0;
    CMatrix vectors;  // ambient_dim x count, orthonormal columns

    int size() const { return static_cast<int>(vectors.cols()); }
};

CMatrix identity(int d);
CMatrix zeros(int rows, int cols);

CMatrix kron(const CMatrix& a, const CMatrix& b);

CMatrix partial_trace(const CMatrix& m, int dim_a, int dim_b, Subsystem over);

SubspaceBasis orthonormalize_span(std::span<const CVector> vectors, int ambient_dim, double tol);
// Columns of m are the spanning vectors.
SubspaceBasis orthonormalize_columns(const CMatrix& m, double tol);

double subspace_residual(const SubspaceBasis& basis, const CVector& v);

CMatrix embed_support(const CMatrix& x, const CMatrix& p);

// Orthonormal basis of the column space; rank counts singular values > tol * scale,
// where scale defaults to the largest singular value.
CMatrix range_basis(const CMatrix& m, double tol, double scale = -1.0);
// Orthonormal basis of the null space, same rank rule.
CMatrix null_space(const CMatrix& m, double tol, double scale = -1.0);
int numeric_rank(const CMatrix& m, double tol);
CMatrix pinv(const CMatrix& m, double tol);
// Nearest isometry (U V^dag from the thin SVD).
CMatrix polar_isometry(const CMatrix& m);

double isometry_defect(const CMatrix& m);
double hermitian_defect(const CMatrix& m);

// Row-major vectorization: vec(X)[i*cols + j] = X(i, j).
CVector vec(const CMatrix& m);
CMatrix unvec(const CVector& v, int rows, int cols);

CMatrix matrix_unit(int d, int i, int j);
std::vector<CMatrix> matrix_unit_basis(int d);

}  // namespace igkls
