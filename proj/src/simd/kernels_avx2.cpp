// AVX2 variants. This translation unit is compiled with -mavx2 and is only
// entered after the dispatcher has confirmed CPU support. Operation order
// matches the scalar kernels lane for lane, so results are bit-identical
// (FP contraction is disabled project-wide).

#include "rubbernet/simd/kernels.hpp"

#include <immintrin.h>

#include <cmath>

namespace rubbernet::simd {

namespace {

double dot_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    }
    double tail = 0.0;
    for (; i < n; ++i) {
        tail += a[i] * b[i];
    }
    // (s0 + s2) + (s1 + s3)
    const __m128d lo = _mm256_castpd256_pd128(acc);
    const __m128d hi = _mm256_extractf128_pd(acc, 1);
    const __m128d pair = _mm_add_pd(lo, hi);
    const double s = _mm_cvtsd_f64(pair) + _mm_cvtsd_f64(_mm_unpackhi_pd(pair, pair));
    return s + tail;
}

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d vy = _mm256_loadu_pd(y + i);
        _mm256_storeu_pd(y + i, _mm256_add_pd(vy, _mm256_mul_pd(va, _mm256_loadu_pd(x + i))));
    }
    for (; i < n; ++i) {
        y[i] += a * x[i];
    }
}

void edge_stretch_avx2(int dim, const double* pos, const int* first, const int* second,
                       const double* inv_rest, std::size_t n, double* r) {
    const __m128i vdim = _mm_set1_epi32(dim);
    std::size_t k = 0;
    for (; k + 4 <= n; k += 4) {
        const __m128i ip = _mm_mullo_epi32(_mm_loadu_si128(reinterpret_cast<const __m128i*>(first + k)), vdim);
        const __m128i iq = _mm_mullo_epi32(_mm_loadu_si128(reinterpret_cast<const __m128i*>(second + k)), vdim);
        __m256d s = _mm256_setzero_pd();
        for (int c = 0; c < dim; ++c) {
            const __m128i off = _mm_set1_epi32(c);
            const __m256d p = _mm256_i32gather_pd(pos, _mm_add_epi32(ip, off), 8);
            const __m256d q = _mm256_i32gather_pd(pos, _mm_add_epi32(iq, off), 8);
            const __m256d diff = _mm256_sub_pd(p, q);
            s = _mm256_add_pd(s, _mm256_mul_pd(diff, diff));
        }
        _mm256_storeu_pd(r + k, _mm256_mul_pd(_mm256_sqrt_pd(s), _mm256_loadu_pd(inv_rest + k)));
    }
    if (k < n) {
        scalar_kernels().edge_stretch(dim, pos, first + k, second + k, inv_rest + k, n - k, r + k);
    }
}

void quadratic_pair_avx2(const double* r, double stiffness, std::size_t n, double* energy,
                         double* dwdr) {
    const __m256d vk = _mm256_set1_pd(stiffness);
    const __m256d v2k = _mm256_set1_pd(2.0 * stiffness);
    std::size_t k = 0;
    for (; k + 4 <= n; k += 4) {
        const __m256d vr = _mm256_loadu_pd(r + k);
        _mm256_storeu_pd(energy + k, _mm256_mul_pd(_mm256_mul_pd(vk, vr), vr));
        _mm256_storeu_pd(dwdr + k, _mm256_mul_pd(v2k, vr));
    }
    if (k < n) {
        scalar_kernels().quadratic_pair(r + k, stiffness, n - k, energy + k, dwdr + k);
    }
}

void inv_langevin_series_avx2(const double* rho, std::size_t n, double* x, double* dx) {
    const __m256d c1 = _mm256_set1_pd(3.0);
    const __m256d c3 = _mm256_set1_pd(9.0 / 5.0);
    const __m256d c5 = _mm256_set1_pd(297.0 / 175.0);
    const __m256d c7 = _mm256_set1_pd(1539.0 / 875.0);
    const __m256d d3 = _mm256_set1_pd(3.0 * (9.0 / 5.0));
    const __m256d d5 = _mm256_set1_pd(5.0 * (297.0 / 175.0));
    const __m256d d7 = _mm256_set1_pd(7.0 * (1539.0 / 875.0));
    std::size_t k = 0;
    for (; k + 4 <= n; k += 4) {
        const __m256d p = _mm256_loadu_pd(rho + k);
        const __m256d p2 = _mm256_mul_pd(p, p);
        __m256d v = _mm256_add_pd(c5, _mm256_mul_pd(p2, c7));
        v = _mm256_add_pd(c3, _mm256_mul_pd(p2, v));
        v = _mm256_add_pd(c1, _mm256_mul_pd(p2, v));
        _mm256_storeu_pd(x + k, _mm256_mul_pd(p, v));
        __m256d w = _mm256_add_pd(d5, _mm256_mul_pd(p2, d7));
        w = _mm256_add_pd(d3, _mm256_mul_pd(p2, w));
        w = _mm256_add_pd(c1, _mm256_mul_pd(p2, w));
        _mm256_storeu_pd(dx + k, w);
    }
    if (k < n) {
        scalar_kernels().inv_langevin_series(rho + k, n - k, x + k, dx + k);
    }
}

}  // namespace

const Kernels& avx2_kernels() {
    static const Kernels k{dot_avx2, axpy_avx2, edge_stretch_avx2, quadratic_pair_avx2,
                           inv_langevin_series_avx2};
    return k;
}

}  // namespace rubbernet::simd
