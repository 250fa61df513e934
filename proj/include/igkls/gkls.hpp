#pragma once

#include "igkls/cp_maps.hpp"

namespace igkls {

// L(X) = V^dag (X (x) 1) V - K^dag X - X K
struct GKLSRep {
    int d = 0;
    StinespringRep stine;
    CMatrix k;
};

struct GKLSMinimal {
    GKLSRep g_min;
    CMatrix p;    // d_env_min x d_env coisometry onto the minimal environment
    CVector phi;  // removed intertwiner part, length d_env
};

struct GKLSGauge {
    CMatrix w;    // d_env2 x d_env1 isometry
    CVector psi;  // length d_env2
    double mu = 0.0;
};

void validate(const GKLSRep& g);

GKLSRep make_gkls(const CMatrix& v, int d_env, const CMatrix& k);

CMatrix gkls_apply(const GKLSRep& g, const CMatrix& x);
// d^2 x d^2 matrix of L acting on row-major vec(X).
CMatrix superoperator(const GKLSRep& g);
// Largest relative difference of two generators over matrix units.
double generator_distance(const GKLSRep& g1, const GKLSRep& g2);

// Spanning set of the environment space reached by pi(X)|psi>:
// v_cd for c != d and v_cc - v_00.
CMatrix dissipative_components(const GKLSRep& g);

GKLSMinimal gkls_minimalize(const GKLSRep& g, double tol);
GKLSGauge gkls_gauge(const GKLSRep& g1, const GKLSRep& g2, double tol);
// Forward transform: V' = (1 (x) w)V + 1 (x) psi, K' = K + (1 (x) <psi|w)V + |psi|^2/2 + i mu.
GKLSRep apply_gkls_gauge(const GKLSRep& g, const GKLSGauge& gauge);

}  // namespace igkls
