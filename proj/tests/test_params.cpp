#include <gtest/gtest.h>

#include <cmath>

#include "piafit/errors.hpp"
#include "piafit/io.hpp"
#include "piafit/params.hpp"
#include "support.hpp"

using namespace piafit;

TEST(ChordParams, ThreeFourFive) {
    const auto t = chord_params(PointSet::from_points(std::vector<Point>{{0, 0}, {3, 0}, {3, 4}}));
    ASSERT_EQ(t.size(), 3u);
    EXPECT_EQ(t[0], 0.0);
    EXPECT_DOUBLE_EQ(t[1], 3.0 / 7.0);  // chords 3 and 4
    EXPECT_EQ(t[2], 1.0);
}

TEST(ChordParams, EquallySpacedCollinear) {
    PointSet pts(9, 3);
    for (std::size_t i = 0; i < 9; ++i) pts.set_point(i, {1.0 + 2.0 * i, -1.0 * i, 0.5 * i});
    const auto t = chord_params(pts);
    for (std::size_t i = 0; i < 9; ++i) EXPECT_NEAR(t[i], i / 8.0, 1e-15);
}

TEST(ChordParams, PolarExample) {
    const auto t = chord_params(io::gen_curve_example("polar-sin4", 501));
    ASSERT_EQ(t.size(), 501u);
    EXPECT_EQ(t[0], 0.0);
    EXPECT_EQ(t[500], 1.0);
    for (std::size_t i = 1; i < t.size(); ++i) EXPECT_LT(t[i - 1], t[i]);
}

TEST(ChordParams, RepeatedPointIsDegenerate) {
    const auto pts = PointSet::from_points(std::vector<Point>{{0, 0}, {1, 1}, {1, 1}, {2, 0}});
    try {
        chord_params(pts);
        FAIL() << "expected DegenerateInputError";
    } catch (const DegenerateInputError& e) {
        EXPECT_NE(std::string(e.what()).find('1'), std::string::npos);
    }
}

TEST(ChordParams, TooFewPoints) {
    EXPECT_THROW(chord_params(PointSet(1, 2)), std::invalid_argument);
}

TEST(ChordParams, RigidAndScaleInvariant) {
    auto r = testing_support::rng(21);
    for (int trial = 0; trial < 20; ++trial) {
        const PointSet pts = io::gen_curve_example("random", 30, 100 + trial, 2);
        const double a = r.uniform(0, 6.3), s = r.uniform(0.1, 10), dx = r.uniform(-5, 5), dy = r.uniform(-5, 5);
        PointSet moved(pts.size(), 2);
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const double x = pts.at(i, 0), y = pts.at(i, 1);
            moved.at(i, 0) = s * (std::cos(a) * x - std::sin(a) * y) + dx;
            moved.at(i, 1) = s * (std::sin(a) * x + std::cos(a) * y) + dy;
        }
        const auto t1 = chord_params(pts), t2 = chord_params(moved);
        for (std::size_t i = 0; i < t1.size(); ++i) EXPECT_NEAR(t1[i], t2[i], 1e-13);
    }
}

TEST(GridParams, BilinearPatchIsUniform) {
    PointGrid g(5, 7, 3);
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 7; ++j) g.set_point(i, j, {2.0 * j, 3.0 * i, 0.0});
    const SurfaceParams sp = grid_params(g);
    for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(sp.u[i], i / 4.0, 1e-15);
    for (std::size_t j = 0; j < 7; ++j) EXPECT_NEAR(sp.v[j], j / 6.0, 1e-15);
}

TEST(GridParams, TwoByTwo) {
    PointGrid g(2, 2, 3);
    g.set_point(0, 0, {0, 0, 0});
    g.set_point(0, 1, {1, 0, 0.3});
    g.set_point(1, 0, {0, 1, -0.2});
    g.set_point(1, 1, {1, 1, 0});
    const SurfaceParams sp = grid_params(g);
    EXPECT_EQ(std::vector<double>(sp.u.values().begin(), sp.u.values().end()), (std::vector<double>{0, 1}));
    EXPECT_EQ(std::vector<double>(sp.v.values().begin(), sp.v.values().end()), (std::vector<double>{0, 1}));
}

TEST(GridParams, FaceLikeIncreasing) {
    const PointGrid g = io::gen_grid_example("face-like", 9, 9);
    const SurfaceParams sp = grid_params(g);
    for (std::size_t i = 1; i < 9; ++i) {
        EXPECT_LT(sp.u[i - 1], sp.u[i]);
        EXPECT_LT(sp.v[i - 1], sp.v[i]);
    }
}

TEST(GridParams, AveragesStayWithinColumnRange) {
    const PointGrid g = io::gen_grid_example("face-like", 11, 8);
    const SurfaceParams sp = grid_params(g);
    // u averages the chord parameters of the column curves Q(., j)
    for (std::size_t i = 0; i < g.rows(); ++i) {
        double lo = 1.0, hi = 0.0;
        for (std::size_t j = 0; j < g.cols(); ++j) {
            const auto t = chord_params(g.column(j));
            lo = std::min(lo, t[i]);
            hi = std::max(hi, t[i]);
        }
        EXPECT_GE(sp.u[i], lo - 1e-15);
        EXPECT_LE(sp.u[i], hi + 1e-15);
    }
    for (std::size_t j = 0; j < g.cols(); ++j) {
        double lo = 1.0, hi = 0.0;
        for (std::size_t i = 0; i < g.rows(); ++i) {
            const auto t = chord_params(g.row(i));
            lo = std::min(lo, t[j]);
            hi = std::max(hi, t[j]);
        }
        EXPECT_GE(sp.v[j], lo - 1e-15);
        EXPECT_LE(sp.v[j], hi + 1e-15);
    }
}

TEST(GridParams, DegenerateColumnNamed) {
    PointGrid g(3, 3, 3);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) g.set_point(i, j, {1.0 * j, j == 2 ? 0.0 : 1.0 * i, 0.0});
    try {
        grid_params(g);
        FAIL() << "expected DegenerateInputError";
    } catch (const DegenerateInputError& e) {
        EXPECT_NE(std::string(e.what()).find("column 2"), std::string::npos) << e.what();
    }
}
