#include "piafit/points.hpp"

#include <algorithm>
#include <cmath>

#include "piafit/errors.hpp"

namespace piafit {

Point::Point(std::size_t dim) : dim_(dim) {
    if (dim == 0 || dim > kMaxDim) throw ConfigError("point dimension must be 1..3");
}

Point::Point(std::initializer_list<double> coords) : dim_(coords.size()) {
    if (dim_ == 0 || dim_ > kMaxDim) throw ConfigError("point dimension must be 1..3");
    std::copy(coords.begin(), coords.end(), x_.begin());
}

double Point::norm() const {
    double s = 0.0;
    for (std::size_t c = 0; c < dim_; ++c) s += x_[c] * x_[c];
    return std::sqrt(s);
}

Point operator-(const Point& a, const Point& b) {
    if (a.dim_ != b.dim_) throw ConfigError("point dimension mismatch");
    Point r(a.dim_);
    for (std::size_t c = 0; c < a.dim_; ++c) r.x_[c] = a.x_[c] - b.x_[c];
    return r;
}

bool operator==(const Point& a, const Point& b) {
    if (a.dim_ != b.dim_) return false;
    for (std::size_t c = 0; c < a.dim_; ++c)
        if (a.x_[c] != b.x_[c]) return false;
    return true;
}

PointSet::PointSet(std::size_t count, std::size_t dim) : data_(count * dim, 0.0), count_(count), dim_(dim) {
    if (dim == 0 || dim > kMaxDim) throw ConfigError("point dimension must be 1..3");
}

PointSet PointSet::from_points(std::span<const Point> pts) {
    if (pts.empty()) throw ConfigError("empty point list");
    PointSet set(pts.size(), pts.front().dim());
    for (std::size_t i = 0; i < pts.size(); ++i) set.set_point(i, pts[i]);
    return set;
}

Point PointSet::point(std::size_t i) const {
    Point p(dim_);
    for (std::size_t c = 0; c < dim_; ++c) p[c] = at(i, c);
    return p;
}

void PointSet::set_point(std::size_t i, const Point& p) {
    if (p.dim() != dim_) throw ConfigError("point dimension mismatch");
    for (std::size_t c = 0; c < dim_; ++c) at(i, c) = p[c];
}

bool PointSet::all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

PointGrid::PointGrid(std::size_t rows, std::size_t cols, std::size_t dim)
    : data_(rows * cols * dim, 0.0), rows_(rows), cols_(cols), dim_(dim) {
    if (dim == 0 || dim > kMaxDim) throw ConfigError("point dimension must be 1..3");
}

Point PointGrid::point(std::size_t i, std::size_t j) const {
    Point p(dim_);
    for (std::size_t c = 0; c < dim_; ++c) p[c] = at(i, j, c);
    return p;
}

void PointGrid::set_point(std::size_t i, std::size_t j, const Point& p) {
    if (p.dim() != dim_) throw ConfigError("point dimension mismatch");
    for (std::size_t c = 0; c < dim_; ++c) at(i, j, c) = p[c];
}

PointSet PointGrid::row(std::size_t i) const {
    PointSet s(cols_, dim_);
    for (std::size_t j = 0; j < cols_; ++j)
        for (std::size_t c = 0; c < dim_; ++c) s.at(j, c) = at(i, j, c);
    return s;
}

PointSet PointGrid::column(std::size_t j) const {
    PointSet s(rows_, dim_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t c = 0; c < dim_; ++c) s.at(i, c) = at(i, j, c);
    return s;
}

bool PointGrid::all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace piafit
