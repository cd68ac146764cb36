// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.

#include <immintrin.h>

#include <cmath>

#include "piafit/kernels.hpp"

namespace piafit::kernels {

namespace {

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

// Cubic bands: one 4-wide product per row, four rows reduced together.
void gather_w4(const BandView& B, const double* x, double* out) {
    const double* v = B.values;
    std::size_t j = 0;
    for (; j + 4 <= B.rows; j += 4) {
        const __m256d p0 = _mm256_mul_pd(_mm256_loadu_pd(v + 4 * j), _mm256_loadu_pd(x + B.first[j]));
        const __m256d p1 = _mm256_mul_pd(_mm256_loadu_pd(v + 4 * j + 4), _mm256_loadu_pd(x + B.first[j + 1]));
        const __m256d p2 = _mm256_mul_pd(_mm256_loadu_pd(v + 4 * j + 8), _mm256_loadu_pd(x + B.first[j + 2]));
        const __m256d p3 = _mm256_mul_pd(_mm256_loadu_pd(v + 4 * j + 12), _mm256_loadu_pd(x + B.first[j + 3]));
        const __m256d h01 = _mm256_hadd_pd(p0, p1);
        const __m256d h23 = _mm256_hadd_pd(p2, p3);
        const __m256d lo = _mm256_permute2f128_pd(h01, h23, 0x20);
        const __m256d hi = _mm256_permute2f128_pd(h01, h23, 0x31);
        _mm256_storeu_pd(out + j, _mm256_add_pd(lo, hi));
    }
    for (; j < B.rows; ++j)
        out[j] = hsum(_mm256_mul_pd(_mm256_loadu_pd(v + 4 * j), _mm256_loadu_pd(x + B.first[j])));
}

void gather_any(const BandView& B, const double* x, double* out) {
    const std::size_t w = B.width;
    for (std::size_t j = 0; j < B.rows; ++j) {
        const double* v = B.values + j * w;
        const double* xs = x + B.first[j];
        __m256d acc = _mm256_setzero_pd();
        std::size_t k = 0;
        for (; k + 4 <= w; k += 4) acc = _mm256_fmadd_pd(_mm256_loadu_pd(v + k), _mm256_loadu_pd(xs + k), acc);
        double s = hsum(acc);
        for (; k < w; ++k) s += v[k] * xs[k];
        out[j] = s;
    }
}

void band_gather(const BandView& B, const double* x, double* out) {
    if (B.width == 4)
        gather_w4(B, x, out);
    else
        gather_any(B, x, out);
}

void band_scatter(const BandView& B, const double* y, double* out) {
    const std::size_t w = B.width;
    if (w == 4) {
        for (std::size_t j = 0; j < B.rows; ++j) {
            double* os = out + B.first[j];
            const __m256d r = _mm256_fmadd_pd(_mm256_loadu_pd(B.values + 4 * j), _mm256_set1_pd(y[j]),
                                              _mm256_loadu_pd(os));
            _mm256_storeu_pd(os, r);
        }
        return;
    }
    for (std::size_t j = 0; j < B.rows; ++j) {
        const double* v = B.values + j * w;
        double* os = out + B.first[j];
        const __m256d yj = _mm256_set1_pd(y[j]);
        std::size_t k = 0;
        for (; k + 4 <= w; k += 4)
            _mm256_storeu_pd(os + k, _mm256_fmadd_pd(_mm256_loadu_pd(v + k), yj, _mm256_loadu_pd(os + k)));
        for (; k < w; ++k) os[k] += v[k] * y[j];
    }
}

void axpy(std::size_t n, double a, const double* x, double* y) {
    const __m256d av = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    for (; i < n; ++i) y[i] += a * x[i];
}

void difference(std::size_t n, const double* q, const double* z, double* r) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) _mm256_storeu_pd(r + i, _mm256_sub_pd(_mm256_loadu_pd(q + i), _mm256_loadu_pd(z + i)));
    for (; i < n; ++i) r[i] = q[i] - z[i];
}

void memory_update(std::size_t n, double keep, double* lam, double corr, const double* g, double w, const double* r) {
    const __m256d kv = _mm256_set1_pd(keep);
    const __m256d cv = _mm256_set1_pd(corr);
    const __m256d wv = _mm256_set1_pd(w);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d acc = _mm256_mul_pd(wv, _mm256_loadu_pd(r + i));
        acc = _mm256_fmadd_pd(cv, _mm256_loadu_pd(g + i), acc);
        acc = _mm256_fmadd_pd(kv, _mm256_loadu_pd(lam + i), acc);
        _mm256_storeu_pd(lam + i, acc);
    }
    for (; i < n; ++i) lam[i] = keep * lam[i] + corr * g[i] + w * r[i];
}

double sum_squares(std::size_t n, const double* x) {
    __m256d a0 = _mm256_setzero_pd();
    __m256d a1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256d x0 = _mm256_loadu_pd(x + i);
        const __m256d x1 = _mm256_loadu_pd(x + i + 4);
        a0 = _mm256_fmadd_pd(x0, x0, a0);
        a1 = _mm256_fmadd_pd(x1, x1, a1);
    }
    for (; i + 4 <= n; i += 4) {
        const __m256d x0 = _mm256_loadu_pd(x + i);
        a0 = _mm256_fmadd_pd(x0, x0, a0);
    }
    double s = hsum(_mm256_add_pd(a0, a1));
    for (; i < n; ++i) s += x[i] * x[i];
    return s;
}

double max_abs(std::size_t n, const double* x) {
    const __m256d sign = _mm256_set1_pd(-0.0);
    __m256d m = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) m = _mm256_max_pd(m, _mm256_andnot_pd(sign, _mm256_loadu_pd(x + i)));
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, m);
    double r = std::fmax(std::fmax(lanes[0], lanes[1]), std::fmax(lanes[2], lanes[3]));
    for (; i < n; ++i) r = std::fmax(r, std::fabs(x[i]));
    return r;
}

constexpr KernelTable kAvx2{
    "avx2", band_gather, band_scatter, axpy, difference, memory_update, sum_squares, max_abs,
};

}  // namespace

const KernelTable* avx2_table() { return &kAvx2; }

}  // namespace piafit::kernels
