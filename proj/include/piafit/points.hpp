#pragma once

#include <array>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace piafit {

inline constexpr std::size_t kMaxDim = 3;

/// A point in 2- or 3-space.
class Point {
public:
    Point() = default;
    explicit Point(std::size_t dim);
    Point(std::initializer_list<double> coords);

    std::size_t dim() const { return dim_; }
    double& operator[](std::size_t c) { return x_[c]; }
    double operator[](std::size_t c) const { return x_[c]; }

    double norm() const;
    friend Point operator-(const Point& a, const Point& b);
    friend bool operator==(const Point& a, const Point& b);

private:
    std::array<double, kMaxDim> x_{};
    std::size_t dim_ = 0;
};

/// Ordered list of d-dimensional points (data Q, control P or auxiliary
/// Λ points). Storage is coordinate-major: all x values, then all y values,
/// and so on, so each coordinate is one contiguous column.
class PointSet {
public:
    PointSet() = default;
    PointSet(std::size_t count, std::size_t dim);
    static PointSet from_points(std::span<const Point> pts);

    std::size_t size() const { return count_; }
    std::size_t dim() const { return dim_; }
    bool empty() const { return count_ == 0; }

    std::span<double> coord(std::size_t c) { return {data_.data() + c * count_, count_}; }
    std::span<const double> coord(std::size_t c) const { return {data_.data() + c * count_, count_}; }

    double& at(std::size_t i, std::size_t c) { return data_[c * count_ + i]; }
    double at(std::size_t i, std::size_t c) const { return data_[c * count_ + i]; }

    Point point(std::size_t i) const;
    void set_point(std::size_t i, const Point& p);

    std::span<double> raw() { return data_; }
    std::span<const double> raw() const { return data_; }

    bool all_finite() const;
    friend bool operator==(const PointSet&, const PointSet&) = default;

private:
    std::vector<double> data_;
    std::size_t count_ = 0;
    std::size_t dim_ = 0;
};

/// Rectangular rows × cols grid of d-dimensional points. Each coordinate is a
/// row-major rows × cols block.
class PointGrid {
public:
    PointGrid() = default;
    PointGrid(std::size_t rows, std::size_t cols, std::size_t dim);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t dim() const { return dim_; }
    std::size_t size() const { return rows_ * cols_; }

    std::span<double> coord(std::size_t c) { return {data_.data() + c * size(), size()}; }
    std::span<const double> coord(std::size_t c) const { return {data_.data() + c * size(), size()}; }

    double& at(std::size_t i, std::size_t j, std::size_t c) { return data_[c * size() + i * cols_ + j]; }
    double at(std::size_t i, std::size_t j, std::size_t c) const { return data_[c * size() + i * cols_ + j]; }

    Point point(std::size_t i, std::size_t j) const;
    void set_point(std::size_t i, std::size_t j, const Point& p);

    /// Points Q(i, 0..cols-1).
    PointSet row(std::size_t i) const;
    /// Points Q(0..rows-1, j).
    PointSet column(std::size_t j) const;

    std::span<double> raw() { return data_; }
    std::span<const double> raw() const { return data_; }

    bool all_finite() const;
    friend bool operator==(const PointGrid&, const PointGrid&) = default;

private:
    std::vector<double> data_;
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::size_t dim_ = 0;
};

}  // namespace piafit
