#include "igkls/random.hpp"

#include <cmath>
#include <numbers>

namespace igkls {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t splitmix64_mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::uint64_t Rng::next_u64() {
    ++counter_;
    return splitmix64_mix(seed_ + counter_ * kGolden);
}

double Rng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double Rng::normal() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

cplx Rng::complex_normal() {
    const double re = normal();
    const double im = normal();
    return {re * std::numbers::sqrt2 / 2.0, im * std::numbers::sqrt2 / 2.0};
}

int Rng::uniform_int(int lo, int hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo + 1);
    return lo + static_cast<int>(next_u64() % span);
}

Rng Rng::fork(std::uint64_t tag) const { return Rng(splitmix64_mix(seed_ ^ splitmix64_mix(tag + kGolden))); }

CMatrix gaussian_matrix(Rng& rng, int rows, int cols) {
    CMatrix m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = rng.complex_normal();
    return m;
}

CVector gaussian_vector(Rng& rng, int n) {
    CVector v(n);
    for (int i = 0; i < n; ++i) v(i) = rng.complex_normal();
    return v;
}

CMatrix random_hermitian(Rng& rng, int d) {
    CMatrix g = gaussian_matrix(rng, d, d);
    return (g + g.adjoint()) / 2.0;
}

CMatrix haar_unitary(Rng& rng, int d) {
    if (d == 0) return CMatrix(0, 0);
    CMatrix z = gaussian_matrix(rng, d, d);
    Eigen::HouseholderQR<CMatrix> qr(z);
    CMatrix q = qr.householderQ();
    CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int k = 0; k < d; ++k) {
        const double mag = std::abs(r(k, k));
        if (mag > 0.0) q.col(k) *= r(k, k) / mag;
    }
    return q;
}

CMatrix haar_isometry(Rng& rng, int rows, int cols) {
    if (cols == 0) return CMatrix(rows, 0);
    return haar_unitary(rng, rows).leftCols(cols);
}

}  // namespace igkls
