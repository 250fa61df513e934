#pragma once

#include <vector>

#include "igkls/applications.hpp"
#include "igkls/random.hpp"

namespace igkls {

struct NormalFormParams {
    int d0 = 0;
    std::vector<FactorDims> factors;
    int d_env = 2;
    int f_max = 2;
    // Explicit d_F matrix (row-major, n x n); empty means random in [0, f_max].
    std::vector<int> d_f;
    // All dissipative data zero: V = 0, K = K_A + i H + P0^dag K0.
    bool k_only = false;
    // B_i = 0; used for invariant CP maps.
    bool no_intertwiner = false;
};

AtomicDecomposition random_decomposition(Rng& rng, int d0, const std::vector<FactorDims>& factors);
// Throws Infeasible when explicit d_F values cannot fit into joint isometries.
std::vector<int> feasible_block_dims(Rng& rng, const NormalFormParams& params);
AtomicNormalForm random_normal_form(Rng& rng, const AtomicDecomposition& dec, const NormalFormParams& params);

struct SampledAlgebra {
    AlgebraBasis alg;
    AtomicDecomposition truth;
};

// Algebra of a random decomposition with its basis scrambled by a Haar unitary.
SampledAlgebra random_algebra(Rng& rng, int d0, const std::vector<FactorDims>& factors);

// Invariant CP map between two decompositions, built from random block data.
BlockFactorization random_block_factorization(Rng& rng, const AtomicDecomposition& dec_a,
                                              const AtomicDecomposition& dec_c, int d_env, int f_max);

// Generic trace-preserving channel, Schrodinger tag.
KrausSet random_tp_channel(Rng& rng, int d, int n_ops);

struct SampledKoashiImoto {
    KrausSet channel;
    std::vector<FactorDims> factors;
    int d_transient = 0;
};

// Channel acting as identity on each A_i, a random channel on each B_i, and sending a
// transient subspace into the support.
SampledKoashiImoto random_koashi_imoto_channel(Rng& rng, const std::vector<FactorDims>& factors, int d_transient,
                                               int n_ops);

}  // namespace igkls
