#pragma once

// Shared fixtures for the test programs: independent reference
// implementations (recursive basis, dense products) and random problems.

#include <cmath>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "piafit/io.hpp"
#include "piafit/iterate.hpp"
#include "piafit/spectral.hpp"
#include "piafit/splines.hpp"

namespace testing_support {

using piafit::CollocationMatrix;
using piafit::KnotVector;

// Textbook recursion with the convention that the last basis function is 1
// at t = 1.
inline double cox_de_boor(const std::vector<double>& u, int i, int p, double t) {
    if (p == 0) {
        if (t == u.back()) {
            // half-open intervals leave t = 1 uncovered; give it to the last
            // non-empty interval
            int last = static_cast<int>(u.size()) - 2;
            while (last > 0 && u[last] == u[last + 1]) --last;
            return i == last ? 1.0 : 0.0;
        }
        return (u[i] <= t && t < u[i + 1]) ? 1.0 : 0.0;
    }
    double left = 0.0, right = 0.0;
    const double d1 = u[i + p] - u[i];
    const double d2 = u[i + p + 1] - u[i + 1];
    if (d1 > 0.0) left = (t - u[i]) / d1 * cox_de_boor(u, i, p - 1, t);
    if (d2 > 0.0) right = (u[i + p + 1] - t) / d2 * cox_de_boor(u, i + 1, p - 1, t);
    return left + right;
}

inline std::vector<double> knots_of(const KnotVector& kv) { return {kv.knots().begin(), kv.knots().end()}; }

inline Eigen::MatrixXd dense(const CollocationMatrix& B) {
    Eigen::MatrixXd M(B.rows(), B.cols());
    for (std::size_t j = 0; j < B.rows(); ++j)
        for (std::size_t i = 0; i < B.cols(); ++i) M(j, i) = B(j, i);
    return M;
}

inline Eigen::MatrixXd to_eigen(const piafit::PointSet& p) {
    Eigen::MatrixXd M(p.size(), p.dim());
    for (std::size_t i = 0; i < p.size(); ++i)
        for (std::size_t c = 0; c < p.dim(); ++c) M(i, c) = p.at(i, c);
    return M;
}

inline piafit::PointSet from_eigen(const Eigen::MatrixXd& M) {
    piafit::PointSet p(M.rows(), M.cols());
    for (Eigen::Index i = 0; i < M.rows(); ++i)
        for (Eigen::Index c = 0; c < M.cols(); ++c) p.at(i, c) = M(i, c);
    return p;
}

// Coordinate c of a grid as a rows x cols matrix.
inline Eigen::MatrixXd grid_coord(const piafit::PointGrid& g, std::size_t c) {
    Eigen::MatrixXd M(g.rows(), g.cols());
    for (std::size_t i = 0; i < g.rows(); ++i)
        for (std::size_t j = 0; j < g.cols(); ++j) M(i, j) = g.at(i, j, c);
    return M;
}

inline double max_abs_diff(const piafit::PointSet& a, const piafit::PointSet& b) {
    double d = 0.0;
    for (std::size_t k = 0; k < a.raw().size(); ++k) d = std::max(d, std::fabs(a.raw()[k] - b.raw()[k]));
    return d;
}

inline double max_abs_diff(const piafit::PointGrid& a, const piafit::PointGrid& b) {
    double d = 0.0;
    for (std::size_t k = 0; k < a.raw().size(); ++k) d = std::max(d, std::fabs(a.raw()[k] - b.raw()[k]));
    return d;
}

inline double max_abs(const piafit::PointSet& a) {
    double d = 0.0;
    for (double v : a.raw()) d = std::max(d, std::fabs(v));
    return d;
}

inline double max_abs(const piafit::PointGrid& a) {
    double d = 0.0;
    for (double v : a.raw()) d = std::max(d, std::fabs(v));
    return d;
}

// ||B^T B P - B^T Q||_F through dense products.
inline double normal_residual(const CollocationMatrix& B, const piafit::PointSet& P, const piafit::PointSet& Q) {
    const Eigen::MatrixXd D = dense(B);
    return (D.transpose() * (D * to_eigen(P) - to_eigen(Q))).norm();
}

inline double normal_residual(const piafit::SurfaceProblem& p, const piafit::PointGrid& P) {
    const Eigen::MatrixXd Bu = dense(p.basis_u), Bv = dense(p.basis_v);
    double sq = 0.0;
    for (std::size_t c = 0; c < P.dim(); ++c) {
        const Eigen::MatrixXd R = Bu * grid_coord(P, c) * Bv.transpose() - grid_coord(p.data, c);
        sq += (Bu.transpose() * R * Bv).squaredNorm();
    }
    return std::sqrt(sq);
}

// Random curve problem: m uniform points in [-1,1]^dim, n cubic control points.
inline piafit::CurveProblem random_curve_problem(std::uint64_t seed, std::size_t m, std::size_t n, int degree = 3,
                                                 std::size_t dim = 2) {
    return piafit::make_curve_problem(piafit::io::gen_curve_example("random", m, seed, dim), n, degree);
}

// The same data fitted with column `col` of the collocation matrix repeated.
inline piafit::CurveProblem duplicated_column_problem(const piafit::CurveProblem& base, std::size_t col) {
    CollocationMatrix B = base.basis.with_duplicated_column(col);
    const piafit::OptimalWeights opt = piafit::optimal_weights(piafit::extreme_singular_values(B));
    return piafit::CurveProblem{base.data, std::move(B), std::nullopt, base.params, opt.weights};
}

inline piafit::io::UniformSource rng(std::uint64_t seed) { return piafit::io::UniformSource(seed); }

inline std::size_t uniform_count(piafit::io::UniformSource& r, std::size_t lo, std::size_t hi) {
    return lo + static_cast<std::size_t>(r.next() * static_cast<double>(hi - lo + 1));
}

}  // namespace testing_support
