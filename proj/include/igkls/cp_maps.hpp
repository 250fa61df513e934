#pragma once

#include <vector>

#include "igkls/algebra.hpp"

namespace igkls {

enum class Picture { Heisenberg, Schrodinger };

// Phi(X) = v^dag (X (x) 1_env) v, with v of shape (d_in * d_env) x d_out and
// row index a * d_env + e.
struct StinespringRep {
    int d_in = 0;
    int d_out = 0;
    int d_env = 0;
    CMatrix v;
};

// ops act as sum op^dag Y op. With the Schrodinger tag Y is a state on C^{d_in}.
struct KrausSet {
    int d_in = 0;
    int d_out = 0;
    std::vector<CMatrix> ops;
    Picture picture = Picture::Heisenberg;
};

struct PairBlock {
    int i = 0;
    int j = 0;
    int d_f = 0;
    CMatrix a;  // (dA_i * d_f) x dC_j
    CMatrix u;  // (dB_i * d_env) x (d_f * dD_j), isometry
};

struct BlockFactorization {
    int d_env = 0;
    int n_a = 0;
    int n_c = 0;
    CMatrix v0;                    // (d0_A * d_env) x d_out
    std::vector<PairBlock> pairs;  // row-major over (i, j)

    const PairBlock& pair(int i, int j) const { return pairs.at(static_cast<std::size_t>(i * n_c + j)); }
    PairBlock& pair(int i, int j) { return pairs.at(static_cast<std::size_t>(i * n_c + j)); }
};

struct MinimalDilation {
    StinespringRep s_min;
    CMatrix w;  // d_env x d_env_min isometry, (1 (x) w) v_min = v
};

struct InvarianceReport {
    double max_residual = 0.0;
    int worst_index = -1;
    bool pass = true;
};

struct OrthogonalityReport {
    double max_residual = 0.0;
    int worst_i = -1;
    int worst_k = -1;
    int worst_l = -1;
    bool pass = true;
};

void validate(const StinespringRep& s);
void validate(const KrausSet& k);

StinespringRep kraus_to_stinespring(const KrausSet& k);
KrausSet stinespring_to_kraus(const StinespringRep& s);

CMatrix cp_apply(const StinespringRep& s, const CMatrix& x);
CMatrix cp_apply(const KrausSet& k, const CMatrix& x);

CMatrix choi(const StinespringRep& s);
CMatrix choi(const KrausSet& k);

// Columns are the environment components (<a| (x) 1) v |c>, ordered a * d_out + c.
CMatrix environment_components(const StinespringRep& s);

// scale: absolute reference for the rank cut (default: largest singular value).
MinimalDilation minimal_stinespring(const StinespringRep& s, double tol, double scale = -1.0);
CMatrix stinespring_gauge(const StinespringRep& s1, const StinespringRep& s2, double tol);

InvarianceReport cp_invariance_check(const StinespringRep& s, const AtomicDecomposition& dec_a,
                                     const AtomicDecomposition& dec_c, double tol);

BlockFactorization atomic_block_factorize(const StinespringRep& s, const AtomicDecomposition& dec_a,
                                          const AtomicDecomposition& dec_c, const Tolerances& tol);
StinespringRep reassemble(const BlockFactorization& bf, const AtomicDecomposition& dec_a,
                          const AtomicDecomposition& dec_c);
OrthogonalityReport orthogonality_check(const BlockFactorization& bf, double tol);

// (P_i (x) 1_env) v P_j^dag in the decomposition frames.
CMatrix extract_block(const CMatrix& v, const AtomicDecomposition& dec_a, const AtomicDecomposition& dec_c, int e,
                      int i, int j);
// (1_A (x) u)(a (x) 1_D)
CMatrix semilocal_block(const PairBlock& p, int dim_a, int dim_d);

}  // namespace igkls
