#pragma once

#include <cstdint>
#include <vector>

#include "igkls/linalg.hpp"

namespace igkls {

struct AlgebraBasis {
    int ambient_dim = 0;
    std::vector<CMatrix> basis;  // Hilbert-Schmidt orthonormal
    bool contains_identity = false;

    int size() const { return static_cast<int>(basis.size()); }
};

struct FactorDims {
    int dim_a = 1;
    int dim_b = 1;

    int size() const { return dim_a * dim_b; }
    friend bool operator==(const FactorDims&, const FactorDims&) = default;
};

// x = u_alg (0_{d0} + sum_i X_i (x) 1_{B_i}) u_alg^dag for every x in the algebra.
// Columns of u_alg: the null space first, then each factor with index a * dim_b + b.
struct AtomicDecomposition {
    int dim = 0;
    CMatrix u_alg;
    int d0 = 0;
    std::vector<FactorDims> factors;

    int factor_count() const { return static_cast<int>(factors.size()); }
    int offset(int i) const;
    // Coisometry onto the null part (d0 x dim).
    CMatrix null_projector() const;
    // Coisometry onto factor i (dim_a * dim_b x dim).
    CMatrix projector(int i) const;
};

AlgebraBasis close_star_algebra(const std::vector<CMatrix>& generators, bool unital, double tol);
// Variant with an explicit ambient dimension, needed when the generator list is empty.
AlgebraBasis close_star_algebra(const std::vector<CMatrix>& generators, bool unital, double tol, int dim);
AlgebraBasis commutant(const AlgebraBasis& alg, double tol = 1e-9);
AtomicDecomposition atomic_decompose(const AlgebraBasis& alg, double tol, std::uint64_t seed);

double membership_residual(const CMatrix& x, const AlgebraBasis& alg);
// Same distance computed in the decomposition frame (orthogonal projection onto the block pattern).
double membership_residual(const CMatrix& x, const AtomicDecomposition& dec);
CMatrix project_to_algebra(const CMatrix& x, const AtomicDecomposition& dec);

CMatrix twirl_to_commutant(const CMatrix& x, const AtomicDecomposition& dec);
CMatrix twirl_intertwiner(const CMatrix& v, const AtomicDecomposition& dec, int e);

struct IntertwinerBlocks {
    CMatrix b0;                  // (d0 * e_out) x (d0 * e_in)
    std::vector<CMatrix> blocks;  // (dim_b * e_out) x (dim_b * e_in) per factor
};

IntertwinerBlocks intertwiner_decompose(const CMatrix& b, const AtomicDecomposition& dec, int e_out, int e_in,
                                        double tol = 1e-9);
CMatrix assemble_intertwiner(const IntertwinerBlocks& blocks, const AtomicDecomposition& dec, int e_out, int e_in);

// Orthonormal basis of the algebra described by a decomposition.
AlgebraBasis algebra_basis(const AtomicDecomposition& dec);
// Embeds block data (X_i on A_i per factor) as an algebra element.
CMatrix algebra_element(const AtomicDecomposition& dec, const std::vector<CMatrix>& blocks_a);
// Embeds block data (Y_i on B_i per factor) as a commutant element with zero null block.
CMatrix commutant_element(const AtomicDecomposition& dec, const std::vector<CMatrix>& blocks_b);

// Largest off-pattern residual of the algebra's basis in the decomposition frame.
double decomposition_residual(const AtomicDecomposition& dec, const AlgebraBasis& alg);
// Largest adjoint or product closure residual over all basis pairs.
double closure_residual(const AlgebraBasis& alg);

void validate_decomposition(const AtomicDecomposition& dec, double tol);

}  // namespace igkls
