#include "piafit/dense.hpp"

#include <algorithm>
#include <cmath>

#include "piafit/errors.hpp"

namespace piafit {

DenseMatrix DenseMatrix::identity(std::size_t n) {
    DenseMatrix I(n, n);
    for (std::size_t i = 0; i < n; ++i) I(i, i) = 1.0;
    return I;
}

double scaled_shifted_determinant(const DenseMatrix& A, std::complex<double> lambda) {
    using cd = std::complex<double>;
    const std::size_t n = A.rows();
    if (A.cols() != n) throw ConfigError("determinant of a non-square matrix");
    std::vector<cd> M(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        double scale = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            cd v = A(i, j);
            if (i == j) v -= lambda;
            M[i * n + j] = v;
            scale = std::max(scale, std::abs(v));
        }
        if (scale == 0.0) return 0.0;
        for (std::size_t j = 0; j < n; ++j) M[i * n + j] /= scale;
    }

    double det = 1.0;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        double best = std::abs(M[k * n + k]);
        for (std::size_t i = k + 1; i < n; ++i) {
            const double v = std::abs(M[i * n + k]);
            if (v > best) {
                best = v;
                piv = i;
            }
        }
        if (best == 0.0) return 0.0;
        if (piv != k)
            for (std::size_t j = 0; j < n; ++j) std::swap(M[k * n + j], M[piv * n + j]);
        const cd pivot = M[k * n + k];
        det *= std::abs(pivot);
        for (std::size_t i = k + 1; i < n; ++i) {
            const cd f = M[i * n + k] / pivot;
            if (f == cd{}) continue;
            for (std::size_t j = k + 1; j < n; ++j) M[i * n + j] -= f * M[k * n + j];
        }
    }
    return det;
}

}  // namespace piafit
