#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace piafit {

/// Row-major dense matrix for small diagnostic and factorization work.
class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

    static DenseMatrix identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
    std::span<const double> raw() const { return data_; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// |det(D (A - lambda I))| where D scales every row of A - lambda I to unit
/// max-norm. LU with partial pivoting in complex arithmetic.
double scaled_shifted_determinant(const DenseMatrix& A, std::complex<double> lambda);

}  // namespace piafit
