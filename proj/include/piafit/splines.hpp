#pragma once

// B-spline bases on clamped knot vectors: basis evaluation, knot placement,
// collocation matrices and curve/surface evaluation.
//
// Indices are 0-based throughout: basis function i is the i-th column of the
// collocation matrix and multiplies control point i.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "piafit/points.hpp"

namespace piafit {

/// Clamped knot vector over [0, 1]: the first and last knots are repeated
/// degree+1 times.
class KnotVector {
public:
    KnotVector(int degree, std::vector<double> knots);

    int degree() const { return degree_; }
    /// Number of basis functions n = #knots - degree - 1.
    std::size_t basis_count() const { return knots_.size() - static_cast<std::size_t>(degree_) - 1; }
    std::span<const double> knots() const { return knots_; }
    /// Knots strictly between the clamped ends.
    std::span<const double> internal_knots() const;

    /// Index s with knots[s] <= t < knots[s+1], degree <= s < n; t == 1 maps
    /// to the last non-empty span.
    std::size_t find_span(double t) const;

    friend bool operator==(const KnotVector&, const KnotVector&) = default;

private:
    int degree_;
    std::vector<double> knots_;
};

/// Strictly increasing parameters t_1 < ... < t_m in [0, 1].
class ParameterList {
public:
    ParameterList() = default;
    explicit ParameterList(std::vector<double> values);

    std::size_t size() const { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }
    std::span<const double> values() const { return values_; }

private:
    std::vector<double> values_;
};

struct BasisTerm {
    std::size_t index;
    double value;
};

/// Nonzero basis values B_i(t). Throws DomainError for t outside [0, 1].
std::vector<BasisTerm> eval_basis(const KnotVector& kv, double t);

/// All degree+1 basis values on the span containing t (zeros included).
/// Writes them to out[0..degree] and returns the index of the first one.
std::size_t eval_basis_band(const KnotVector& kv, double t, std::span<double> out);

/// Basis values and derivatives up to `order` on the span containing t.
/// Row k of `values` (stride degree+1) holds the k-th derivatives.
struct BasisDerivatives {
    std::size_t first = 0;
    std::size_t width = 0;
    std::vector<double> values;

    double at(std::size_t order, std::size_t k) const { return values[order * width + k]; }
};
BasisDerivatives eval_basis_derivatives(const KnotVector& kv, double t, int order);

/// Clamped knot vector with n - p - 1 internal knots placed by parameter
/// averaging so every basis function has a parameter in its support:
/// d = m/(n-p), i = floor(j d), a = j d - i, u_{p+j} = (1-a) t_i + a t_{i+1}
/// (1-based t). Throws ConfigError unless p < n <= m.
KnotVector make_knots(const ParameterList& params, std::size_t n, int degree);

/// Sparse m × n matrix of B_i(t_j). Every row stores the degree+1 values of
/// one contiguous band starting at column first(j).
class CollocationMatrix {
public:
    CollocationMatrix() = default;
    CollocationMatrix(std::size_t rows, std::size_t cols, std::size_t width);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t width() const { return width_; }

    std::size_t first(std::size_t j) const { return first_[j]; }
    std::span<const double> row(std::size_t j) const { return {values_.data() + j * width_, width_}; }
    std::span<double> row(std::size_t j) { return {values_.data() + j * width_, width_}; }
    void set_first(std::size_t j, std::size_t f) { first_[j] = f; }

    /// Entry (j, i), zero outside the band.
    double operator()(std::size_t j, std::size_t i) const;

    std::span<const std::size_t> firsts() const { return first_; }
    std::span<const double> values() const { return values_; }

    /// Dense row-major copy; diagnostics and tests only.
    std::vector<double> to_dense() const;

    /// Copy with column `col` duplicated: values of basis `col` appear in
    /// columns col and col+1. The result is no longer banded with constant
    /// width; the band widens by one.
    CollocationMatrix with_duplicated_column(std::size_t col) const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::size_t width_ = 0;
    std::vector<std::size_t> first_;
    std::vector<double> values_;
};

CollocationMatrix collocate(const KnotVector& kv, const ParameterList& params);

/// C(t) = sum_i B_i(t) P_i.
Point eval_curve(const PointSet& ctrl, const KnotVector& kv, double t);

/// S(t, s) = sum_i sum_j phi_i(t) psi_j(s) P_ij with net rows along t.
Point eval_surface(const PointGrid& net, const KnotVector& kv_u, const KnotVector& kv_v, double t, double s);

struct CurvatureSample {
    double t;
    Point position;
    /// Empty where |C'(t)| < 1e-12.
    std::optional<double> curvature;
};

/// k samples at t = i/(k-1) with curvature |C' x C''| / |C'|^3 from analytic
/// basis derivatives (the planar formula for 2D curves). Requires degree >= 2.
std::vector<CurvatureSample> curvature_samples(const PointSet& ctrl, const KnotVector& kv, std::size_t k);

}  // namespace piafit
