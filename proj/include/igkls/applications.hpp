#pragma once

#include <cstdint>
#include <vector>

#include "igkls/normal_form.hpp"

namespace igkls {

GKLSRep semicausal_build(const CMatrix& a, const CMatrix& u, const CMatrix& b, const CMatrix& k_a, const CMatrix& h_b,
                         double tol = 1e-9);

struct SemicausalReport {
    double invariance_residual = 0.0;
    double semicausal_residual = 0.0;
    bool pass = true;
};

SemicausalReport semicausal_check(const GKLSRep& g, int d_a, int d_b, double tol);
// Decomposition of L(H_A) (x) 1_B on C^{d_a} (x) C^{d_b}.
AtomicDecomposition semicausal_algebra(int d_a, int d_b);

struct DfsNormalForm {
    int d_env = 0;
    std::vector<std::vector<CMatrix>> beta;  // beta[n][i], dB_i x dB_i
    std::vector<CMatrix> kappa_a;
    std::vector<CMatrix> kappa_b;
    CMatrix h_tilde;  // Im(K)
    double dissipation_residual = 0.0;
    double kraus_residual = 0.0;
    double imag_residual = 0.0;
};

// Largest relative residual of L(X^dag Y) - X^dag L(Y) - L(X^dag) Y + X^dag L(1) Y over algebra basis pairs.
double dissipation_residual(const GKLSRep& g, const AtomicDecomposition& dec);
DfsNormalForm dfs_verify_normal_form(const GKLSRep& g, const AtomicDecomposition& dec, const Tolerances& tol);

struct AbelianCoefficients {
    int d_env = 0;
    // Diagonal of c_mn in the decomposition frame, index m * d_env + n.
    std::vector<CVector> diag;
    std::vector<CMatrix> c_mn;
    double commutator_residual = 0.0;
};

AbelianCoefficients maximal_abelian_coefficients(const KrausSet& k, const AtomicDecomposition& dec, const CMatrix& c,
                                                 const Tolerances& tol);

// Heisenberg dual of a Schrodinger-tagged set and back (adjoints the operators).
KrausSet to_heisenberg(const KrausSet& k);
KrausSet to_schrodinger(const KrausSet& k);
// T(rho) for a Schrodinger-tagged set.
CMatrix channel_apply(const KrausSet& k, const CMatrix& rho);
double trace_preservation_defect(const KrausSet& k);

CMatrix fixed_point_state(const KrausSet& k, const Tolerances& tol);

struct KoashiImotoResult {
    CMatrix q;  // support coisometry, s x d
    AtomicDecomposition dec;
    std::vector<CMatrix> v;      // dB_i * d_env x dB_i isometries
    std::vector<CMatrix> sigma;  // dB_i x dB_i states
    int d_env = 0;
    int dim_fixed = 0;
    int dim_dual_fixed = 0;
    double closure_residual = 0.0;
    double block_residual = 0.0;
    double fixed_residual = 0.0;
};

KoashiImotoResult koashi_imoto_decompose(const KrausSet& k, const Tolerances& tol, std::uint64_t seed = 0);

struct ProbeReport {
    std::vector<double> times;
    std::vector<double> residuals;
    double max_residual = 0.0;
    bool pass = true;
};

// Residual of e^{tL}(X) against the algebra over an orthonormal basis, relative to max(1, ||e^{tL}||_2).
ProbeReport semigroup_invariance_probe(const GKLSRep& g, const AtomicDecomposition& dec, const std::vector<double>& times,
                                       double tol);

}  // namespace igkls
