#pragma once

#include <cstdint>

#include "igkls/linalg.hpp"

namespace igkls {

// Counter-based 64-bit generator: output k is mix(seed + k * 0x9E3779B97F4A7C15)
// with the splitmix64 finalizer. Normals use Box-Muller (cosine branch, two
// uniforms per normal) so the call order is fixed.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t next_u64();
    // Uniform in [0, 1) with 53 random bits.
    double uniform();
    double normal();
    // Real and imaginary parts independent N(0, 1/2).
    cplx complex_normal();
    int uniform_int(int lo, int hi);  // inclusive range

    // Independent stream derived from this generator's seed and a tag.
    Rng fork(std::uint64_t tag) const;

    std::uint64_t seed() const { return seed_; }
    std::uint64_t counter() const { return counter_; }

private:
    std::uint64_t seed_;
    std::uint64_t counter_ = 0;
};

std::uint64_t splitmix64_mix(std::uint64_t z);

CMatrix gaussian_matrix(Rng& rng, int rows, int cols);
CVector gaussian_vector(Rng& rng, int n);
CMatrix random_hermitian(Rng& rng, int d);
CMatrix haar_unitary(Rng& rng, int d);
// rows x cols isometry (rows >= cols): leading columns of a Haar unitary.
CMatrix haar_isometry(Rng& rng, int rows, int cols);

}  // namespace igkls
