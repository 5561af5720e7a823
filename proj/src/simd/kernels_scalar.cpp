#include "rubbernet/simd/kernels.hpp"

#include <cmath>

namespace rubbernet::simd {

namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
    // Four interleaved partial sums, combined pairwise: same association as
    // the 4-lane AVX2 variant.
    double s[4] = {0.0, 0.0, 0.0, 0.0};
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        s[0] += a[i] * b[i];
        s[1] += a[i + 1] * b[i + 1];
        s[2] += a[i + 2] * b[i + 2];
        s[3] += a[i + 3] * b[i + 3];
    }
    double tail = 0.0;
    for (; i < n; ++i) {
        tail += a[i] * b[i];
    }
    return ((s[0] + s[2]) + (s[1] + s[3])) + tail;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        y[i] += a * x[i];
    }
}

void edge_stretch_scalar(int dim, const double* pos, const int* first, const int* second,
                         const double* inv_rest, std::size_t n, double* r) {
    const auto d = static_cast<std::size_t>(dim);
    for (std::size_t k = 0; k < n; ++k) {
        const double* p = pos + static_cast<std::size_t>(first[k]) * d;
        const double* q = pos + static_cast<std::size_t>(second[k]) * d;
        double s = 0.0;
        for (std::size_t c = 0; c < d; ++c) {
            const double diff = p[c] - q[c];
            s += diff * diff;
        }
        r[k] = std::sqrt(s) * inv_rest[k];
    }
}

void quadratic_pair_scalar(const double* r, double stiffness, std::size_t n, double* energy,
                           double* dwdr) {
    for (std::size_t k = 0; k < n; ++k) {
        energy[k] = stiffness * r[k] * r[k];
        dwdr[k] = 2.0 * stiffness * r[k];
    }
}

void inv_langevin_series_scalar(const double* rho, std::size_t n, double* x, double* dx) {
    constexpr double c1 = 3.0;
    constexpr double c3 = 9.0 / 5.0;
    constexpr double c5 = 297.0 / 175.0;
    constexpr double c7 = 1539.0 / 875.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double p = rho[k];
        const double p2 = p * p;
        x[k] = p * (c1 + p2 * (c3 + p2 * (c5 + p2 * c7)));
        dx[k] = c1 + p2 * (3.0 * c3 + p2 * (5.0 * c5 + p2 * (7.0 * c7)));
    }
}

}  // namespace

const Kernels& scalar_kernels() {
    static const Kernels k{dot_scalar, axpy_scalar, edge_stretch_scalar, quadratic_pair_scalar,
                           inv_langevin_series_scalar};
    return k;
}

}  // namespace rubbernet::simd
