#include "piafit/params.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "piafit/errors.hpp"

namespace piafit {

namespace {

double distance(const PointSet& pts, std::size_t a, std::size_t b) {
    double s = 0.0;
    for (std::size_t c = 0; c < pts.dim(); ++c) {
        const double d = pts.at(b, c) - pts.at(a, c);
        s += d * d;
    }
    return std::sqrt(s);
}

// Accumulated chord lengths normalized to [0, 1]. Returns false when the
// total length is zero.
bool accumulated_chord(const PointSet& pts, std::vector<double>& out) {
    const std::size_t m = pts.size();
    out.assign(m, 0.0);
    for (std::size_t j = 1; j < m; ++j) out[j] = out[j - 1] + distance(pts, j - 1, j);
    const double total = out.back();
    if (!(total > 0.0) || !std::isfinite(total)) return false;
    for (std::size_t j = 1; j + 1 < m; ++j) out[j] /= total;
    out.back() = 1.0;
    return true;
}

}  // namespace

ParameterList chord_params(const PointSet& data) {
    if (data.size() < 2) throw ConfigError("chord parameterization needs at least 2 points");
    if (!data.all_finite()) throw DegenerateInputError("data contains non-finite coordinates");
    for (std::size_t j = 1; j < data.size(); ++j) {
        if (distance(data, j - 1, j) == 0.0)
            throw DegenerateInputError("zero chord between points " + std::to_string(j - 1) + " and " +
                                       std::to_string(j));
    }
    std::vector<double> t;
    accumulated_chord(data, t);
    return ParameterList(std::move(t));
}

SurfaceParams grid_params(const PointGrid& data) {
    const std::size_t rows = data.rows();
    const std::size_t cols = data.cols();
    if (rows < 2 || cols < 2) throw ConfigError("grid parameterization needs at least a 2x2 grid");
    if (!data.all_finite()) throw DegenerateInputError("grid contains non-finite coordinates");

    std::vector<double> u(rows, 0.0);
    std::vector<double> v(cols, 0.0);
    std::vector<double> t;
    for (std::size_t j = 0; j < cols; ++j) {
        if (!accumulated_chord(data.column(j), t))
            throw DegenerateInputError("grid column " + std::to_string(j) + " has zero length");
        for (std::size_t i = 0; i < rows; ++i) u[i] += t[i];
    }
    for (std::size_t i = 0; i < rows; ++i) {
        if (!accumulated_chord(data.row(i), t))
            throw DegenerateInputError("grid row " + std::to_string(i) + " has zero length");
        for (std::size_t j = 0; j < cols; ++j) v[j] += t[j];
    }
    for (auto& x : u) x /= static_cast<double>(cols);
    for (auto& x : v) x /= static_cast<double>(rows);
    u.front() = 0.0;
    u.back() = 1.0;
    v.front() = 0.0;
    v.back() = 1.0;
    return {ParameterList(std::move(u)), ParameterList(std::move(v))};
}

}  // namespace piafit
