#include <cmath>

#include "piafit/kernels.hpp"

namespace piafit::kernels {

namespace {

void band_gather(const BandView& B, const double* x, double* out) {
    for (std::size_t j = 0; j < B.rows; ++j) {
        const double* v = B.values + j * B.width;
        const double* xs = x + B.first[j];
        double s = 0.0;
        for (std::size_t k = 0; k < B.width; ++k) s += v[k] * xs[k];
        out[j] = s;
    }
}

void band_scatter(const BandView& B, const double* y, double* out) {
    for (std::size_t j = 0; j < B.rows; ++j) {
        const double* v = B.values + j * B.width;
        double* os = out + B.first[j];
        const double yj = y[j];
        for (std::size_t k = 0; k < B.width; ++k) os[k] += v[k] * yj;
    }
}

void axpy(std::size_t n, double a, const double* x, double* y) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void difference(std::size_t n, const double* q, const double* z, double* r) {
    for (std::size_t i = 0; i < n; ++i) r[i] = q[i] - z[i];
}

void memory_update(std::size_t n, double keep, double* lam, double corr, const double* g, double w, const double* r) {
    for (std::size_t i = 0; i < n; ++i) lam[i] = keep * lam[i] + corr * g[i] + w * r[i];
}

double sum_squares(std::size_t n, const double* x) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i] * x[i];
    return s;
}

double max_abs(std::size_t n, const double* x) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) m = std::fmax(m, std::fabs(x[i]));
    return m;
}

constexpr KernelTable kScalar{
    "scalar", band_gather, band_scatter, axpy, difference, memory_update, sum_squares, max_abs,
};

}  // namespace

const KernelTable& scalar_table() { return kScalar; }

}  // namespace piafit::kernels
