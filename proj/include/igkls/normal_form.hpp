#pragma once

#include <vector>

#include "igkls/gkls.hpp"

namespace igkls {

struct InvariantSplit {
    CMatrix v0;      // (d0 * e) x d
    CMatrix a;       // (d * e) x d
    CMatrix b;       // (d * e) x d, intertwiner
    CMatrix k_alg;   // in the algebra
    CMatrix h_comm;  // self-adjoint, in the commutant, zero on the null part
    CMatrix k0;      // d0 x d
};

struct FactorData {
    CMatrix k_a;  // dA x dA
    CMatrix h_b;  // dB x dB, self-adjoint
    CMatrix b;    // (dB * e) x dB
};

struct AtomicNormalForm {
    AtomicDecomposition dec;
    int d_env = 0;
    CMatrix v0;  // (d0 * e) x d
    CMatrix k0;  // d0 x d
    std::vector<FactorData> factors;
    std::vector<PairBlock> pairs;  // row-major over (i, j); a: (dA_i * f) x dA_j, u: (dB_i * e) x (f * dB_j)

    int n() const { return dec.factor_count(); }
    const PairBlock& pair(int i, int j) const { return pairs.at(static_cast<std::size_t>(i * n() + j)); }
    PairBlock& pair(int i, int j) { return pairs.at(static_cast<std::size_t>(i * n() + j)); }
};

struct GaugeData {
    int n = 0;
    std::vector<CMatrix> w;  // row-major over (i, j); w_ij maps F_ij to F~_ij
    std::vector<CVector> psi;
    std::vector<double> mu;

    const CMatrix& w_at(int i, int j) const { return w.at(static_cast<std::size_t>(i * n + j)); }
};

enum class GaugeMode { AlgebraOnly, Full };

struct GaugeResult {
    GaugeData gauge;
    double residual = 0.0;
};

struct KOnlySplit {
    CMatrix k_alg;
    CMatrix h_comm;
    CMatrix k0;
};

struct MinimalityCertificate {
    // Span dimension reached versus d_F for each pair, row-major.
    std::vector<int> span_dim;
    std::vector<int> d_f;
    bool minimal = true;
};

// Relative membership residual of L(X) for the worst algebra basis element.
InvarianceReport gkls_invariance_check(const GKLSRep& g, const AtomicDecomposition& dec, double tol);

InvariantSplit invariant_split(const GKLSRep& g, const AtomicDecomposition& dec, const Tolerances& tol);
AtomicNormalForm atomic_normal_form(const GKLSRep& g, const AtomicDecomposition& dec, const Tolerances& tol);
GKLSRep reconstruct_from_normal_form(const AtomicNormalForm& nf);
void validate(const AtomicNormalForm& nf, double tol);

// Generator on L(A_i) given by the diagonal pair block and K_{A_i}.
GKLSRep factor_generator(const AtomicNormalForm& nf, int i);
MinimalityCertificate minimality_certificate(const AtomicNormalForm& nf, double tol);

AtomicNormalForm reduce_normal_form_minimal(const AtomicNormalForm& nf, const Tolerances& tol);
AtomicNormalForm apply_gauge(const AtomicNormalForm& nf, const GaugeData& gauge);
GaugeResult normal_form_gauge(const AtomicNormalForm& nf1, const AtomicNormalForm& nf2, const Tolerances& tol,
                              GaugeMode mode);
// Largest componentwise difference between two normal forms on the same decomposition.
double normal_form_distance(const AtomicNormalForm& a, const AtomicNormalForm& b, bool algebra_part_only);

KOnlySplit k_only_split(const CMatrix& k, const AtomicDecomposition& dec, const Tolerances& tol);

}  // namespace igkls
