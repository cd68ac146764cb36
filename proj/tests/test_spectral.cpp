#include <gtest/gtest.h>

#include <cmath>
#include <complex>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "piafit/errors.hpp"
#include "piafit/spectral.hpp"
#include "support.hpp"

using namespace piafit;
using testing_support::dense;

namespace {

CollocationMatrix hat_3x2() { return collocate(KnotVector(1, {0, 0, 1, 1}), ParameterList({0.0, 0.5, 1.0})); }

CollocationMatrix identity_collocation(std::size_t n) {
    std::vector<double> u{0.0};
    std::vector<double> t;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = static_cast<double>(i) / static_cast<double>(n - 1);
        u.push_back(x);
        t.push_back(x);
    }
    u.push_back(1.0);
    return collocate(KnotVector(1, u), ParameterList(t));
}

Eigen::VectorXd eigen_singulars(const CollocationMatrix& B) {
    return Eigen::JacobiSVD<Eigen::MatrixXd>(dense(B)).singularValues();
}

}  // namespace

TEST(Singular, HatExample) {
    const SpectralSummary s = extreme_singular_values(hat_3x2());
    EXPECT_EQ(s.rank, 2u);
    EXPECT_NEAR(s.sigma_max, std::sqrt(1.5), 1e-15);
    EXPECT_NEAR(s.sigma_min, 1.0, 1e-15);
    EXPECT_EQ(s.tolerance, 1e-10);
}

TEST(Singular, IdenticalColumnsLoseOneRank) {
    const CollocationMatrix B = testing_support::random_curve_problem(3, 30, 8).basis;
    for (std::size_t col : {0u, 3u, 7u}) {
        const SpectralSummary s = extreme_singular_values(B.with_duplicated_column(col));
        EXPECT_EQ(s.rank, 8u) << "column " << col;
        EXPECT_EQ(s.singular_values.size(), 9u);
        EXPECT_LT(s.singular_values.back(), 1e-12 * s.sigma_max);
    }
}

TEST(Singular, Identity) {
    const CollocationMatrix B = identity_collocation(6);
    const auto d = B.to_dense();
    for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t j = 0; j < 6; ++j) ASSERT_EQ(d[i * 6 + j], i == j ? 1.0 : 0.0);
    const SpectralSummary s = extreme_singular_values(B);
    EXPECT_EQ(s.rank, 6u);
    EXPECT_NEAR(s.sigma_max, 1.0, 1e-15);
    EXPECT_NEAR(s.sigma_min, 1.0, 1e-15);
}

TEST(Singular, MatchesEigenSvd) {
    auto r = testing_support::rng(9);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t m = testing_support::uniform_count(r, 10, 200);
        const std::size_t n = testing_support::uniform_count(r, 4, std::min<std::size_t>(m, 40));
        const CollocationMatrix B = testing_support::random_curve_problem(1000 + trial, m, n).basis;
        const SpectralSummary s = extreme_singular_values(B);
        const Eigen::VectorXd ref = eigen_singulars(B);
        ASSERT_EQ(s.singular_values.size(), static_cast<std::size_t>(ref.size()));
        for (Eigen::Index i = 0; i < ref.size(); ++i) EXPECT_NEAR(s.singular_values[i], ref(i), 1e-13 * ref(0));
        EXPECT_EQ(s.rank, n);
        EXPECT_NEAR(s.sigma_min, ref(ref.size() - 1), 1e-10 * ref(ref.size() - 1));
    }
}

TEST(Singular, PowerIterationAgrees) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const CollocationMatrix B = testing_support::random_curve_problem(seed, 120, 15).basis;
        EXPECT_NEAR(power_sigma_max(B), extreme_singular_values(B).sigma_max, 1e-10);
    }
}

TEST(Singular, GramEigenvaluesMatchByHand) {
    // B^T B = [[1.25, 0.25], [0.25, 1.25]] -> eigenvalues 1.5 and 1
    const SpectralSummary s = extreme_singular_values(hat_3x2());
    EXPECT_NEAR(s.singular_values[0] * s.singular_values[0], 1.5, 1e-10 * 1.5);
    EXPECT_NEAR(s.singular_values[1] * s.singular_values[1], 1.0, 1e-10);
}

TEST(Kronecker, ProductsOfSingularValues) {
    const SpectralSummary a = extreme_singular_values(hat_3x2());
    const SpectralSummary b = extreme_singular_values(identity_collocation(3));
    const SpectralSummary k = kronecker_summary(a, b);
    EXPECT_EQ(k.rank, 6u);
    EXPECT_NEAR(k.sigma_max, std::sqrt(1.5), 1e-15);
    EXPECT_NEAR(k.sigma_min, 1.0, 1e-15);
    EXPECT_EQ(k.singular_values.size(), 6u);
}

TEST(Weights, EqualSingularValues) {
    const OptimalWeights o = optimal_weights(1.0, 1.0);
    EXPECT_EQ(o.weights.omega, 1.0);
    EXPECT_EQ(o.weights.gamma, 1.0);
    EXPECT_EQ(o.weights.upsilon, 1.0);
    EXPECT_EQ(o.mlspia_radius, 0.0);
}

TEST(Weights, ThreeAndOne) {
    const OptimalWeights o = optimal_weights(3.0, 1.0);
    EXPECT_DOUBLE_EQ(o.weights.omega, 0.75);
    EXPECT_DOUBLE_EQ(o.weights.gamma, 0.75);
    EXPECT_DOUBLE_EQ(o.weights.upsilon, 1.0 / 3.0);
    EXPECT_DOUBLE_EQ(o.mlspia_radius, 0.5);
    EXPECT_DOUBLE_EQ(*o.weights.mu, 0.2);
    EXPECT_DOUBLE_EQ(o.lspia_radius, 0.8);
}

TEST(Weights, Surface) {
    SpectralSummary one{1, 1.0, 1.0, {1.0}};
    const OptimalWeights a = optimal_weights_surface(one, one);
    EXPECT_EQ(a.weights.omega, 1.0);
    EXPECT_EQ(a.weights.upsilon, 1.0);
    EXPECT_EQ(a.mlspia_radius, 0.0);
    SpectralSummary two{2, 2.0, 1.0, {2.0, 1.0}};
    const OptimalWeights b = optimal_weights_surface(two, two);
    EXPECT_DOUBLE_EQ(b.weights.omega, 16.0 / 25.0);
    EXPECT_DOUBLE_EQ(b.weights.gamma, 16.0 / 25.0);
    EXPECT_DOUBLE_EQ(b.weights.upsilon, 0.25);
    EXPECT_DOUBLE_EQ(b.mlspia_radius, 0.6);
}

TEST(Weights, RejectsNonPositive) {
    EXPECT_THROW(optimal_weights(0.0, 0.0), std::invalid_argument);
    EXPECT_THROW(optimal_weights(1.0, -1.0), std::invalid_argument);
}

TEST(Validate, Examples) {
    EXPECT_TRUE(validate_weights({1.0, 0.5, 1.0, std::nullopt}, 1.0));
    EXPECT_TRUE(validate_weights({1.0, 1.49, 1.0, std::nullopt}, 1.0));
    EXPECT_FALSE(validate_weights({1.0, 1.5, 1.0, std::nullopt}, 1.0));
    EXPECT_FALSE(validate_weights({1.0, 0.0, 1.0, std::nullopt}, 1.0));
    for (double g : {-1.0, 0.5, 1.0, 3.0}) {
        const WeightCheck c = validate_weights({2.0, g, 0.1, std::nullopt}, 1.0);
        EXPECT_FALSE(c);
        EXPECT_NE(c.reason.find("omega < 2"), std::string::npos);
    }
    EXPECT_FALSE(validate_weights({1.0, 0.5, 0.0, std::nullopt}, 1.0));
}

TEST(Validate, OptimalWeightsAlwaysInside) {
    auto r = testing_support::rng(77);
    for (int i = 0; i < 1000; ++i) {
        const double s1 = std::exp(r.uniform(-3, 3));
        const double sr = s1 * r.uniform(1e-3, 1.0);
        const OptimalWeights o = optimal_weights(s1, sr);
        EXPECT_TRUE(validate_weights(o.weights, s1)) << s1 << " " << sr << ": " << validate_weights(o.weights, s1).reason;
    }
}

TEST(Radius, Dominance) {
    auto r = testing_support::rng(78);
    for (int i = 0; i < 1000; ++i) {
        const double s1 = std::exp(r.uniform(-3, 3));
        const double sr = s1 * r.uniform(1e-4, 1.0);
        const OptimalWeights o = optimal_weights(s1, sr);
        EXPECT_LE(o.mlspia_radius, o.lspia_radius);
        EXPECT_LT(theoretical_radius(o.weights, std::vector<double>{s1, sr}), 1.0);
    }
}

TEST(Radius, DiscriminantNonPositiveAtOptimum) {
    for (double ratio : {1.0, 0.9, 0.5, 0.1, 0.01}) {
        const double s1 = 2.0, sr = s1 * ratio;
        const WeightSet w = optimal_weights(s1, sr).weights;
        for (int k = 0; k <= 200; ++k) {
            const double s = sr + (s1 - sr) * k / 200.0;
            const double s2 = s * s;
            const double b = w.gamma * w.upsilon * s2 - (2.0 - w.omega);
            const double c = s2 * w.upsilon * (w.omega - w.gamma) + 1.0 - w.omega;
            EXPECT_LE(b * b - 4.0 * c, 1e-12);
        }
    }
}

TEST(Radius, OptimalClosedForm) {
    for (auto [s1, sr] : {std::pair{3.0, 1.0}, std::pair{1.7, 0.2}, std::pair{1.0, 1.0}, std::pair{5.0, 4.99}}) {
        const OptimalWeights o = optimal_weights(s1, sr);
        EXPECT_NEAR(theoretical_radius(o.weights, std::vector<double>{s1, sr}), o.mlspia_radius, 1e-12);
    }
}

TEST(Radius, ExactAnnihilation) {
    EXPECT_NEAR(theoretical_radius({1.0, 1.0, 1.0, std::nullopt}, std::vector<double>{1.0}), 0.0, 1e-15);
}

TEST(Radius, MatchesExtendedPrecisionRoots) {
    auto r = testing_support::rng(79);
    for (int i = 0; i < 500; ++i) {
        const double s1 = r.uniform(0.5, 2.0);
        WeightSet w{r.uniform(0.05, 1.95), 0.0, r.uniform(0.05, 3.0), std::nullopt};
        const double s2u = s1 * s1 * w.upsilon;
        const double lo = w.omega - w.omega / s2u, hi = w.omega / 2 - (w.omega - 2) / s2u;
        if (!(lo < hi)) continue;  // empty region for this omega, upsilon
        w.gamma = lo + (hi - lo) * r.uniform(0.01, 0.99);
        std::vector<double> sig{s1};
        for (int k = 0; k < 4; ++k) sig.push_back(s1 * r.uniform(0.05, 1.0));
        long double best = std::fabs(1.0L - w.omega);
        for (double s : sig) {
            const long double S = static_cast<long double>(s) * s;
            const long double b = w.gamma * (long double)w.upsilon * S - (2.0L - w.omega);
            const long double c = S * w.upsilon * ((long double)w.omega - w.gamma) + 1.0L - w.omega;
            const long double disc = b * b - 4 * c;
            if (disc < 0) {
                best = std::max(best, std::sqrt(c));
            } else {
                const long double sq = std::sqrt(disc);
                best = std::max({best, std::fabs((-b + sq) / 2), std::fabs((-b - sq) / 2)});
            }
        }
        // near-double roots lose about half the digits to the square root
        EXPECT_NEAR(theoretical_radius(w, sig), static_cast<double>(best), 1e-7);
        EXPECT_LT(theoretical_radius(w, sig), 1.0);
    }
}

TEST(IterationMatrix, ZeroWeights) {
    const CollocationMatrix B = hat_3x2();
    const DenseMatrix H = iteration_matrix(B, {1.0, 0.0, 0.0, std::nullopt});
    ASSERT_EQ(H.rows(), 5u);
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 5; ++j) {
            double expected = 0.0;
            if (i < 3 && j >= 3) expected = -B(i, j - 3);
            if (i >= 3 && j >= 3) expected = i == j ? 1.0 : 0.0;
            EXPECT_EQ(H(i, j), expected) << i << "," << j;
        }
}

TEST(IterationMatrix, TopLeftSymmetric) {
    const CollocationMatrix B = testing_support::random_curve_problem(4, 20, 6).basis;
    const DenseMatrix H = iteration_matrix(B, optimal_weights(extreme_singular_values(B)).weights);
    for (std::size_t i = 0; i < 20; ++i)
        for (std::size_t j = 0; j < 20; ++j) EXPECT_DOUBLE_EQ(H(i, j), H(j, i));
}

TEST(IterationMatrix, MatchesDenseFormula) {
    const CollocationMatrix B = testing_support::random_curve_problem(8, 12, 5).basis;
    const WeightSet w{0.7, 0.4, 0.9, std::nullopt};
    const DenseMatrix H = iteration_matrix(B, w);
    const Eigen::MatrixXd D = dense(B);
    Eigen::MatrixXd ref(17, 17);
    ref.topLeftCorner(12, 12) = (1 - w.omega) * Eigen::MatrixXd::Identity(12, 12) - w.gamma * w.upsilon * D * D.transpose();
    ref.topRightCorner(12, 5) = -w.omega * D;
    ref.bottomLeftCorner(5, 12) = w.upsilon * D.transpose();
    ref.bottomRightCorner(5, 5) = Eigen::MatrixXd::Identity(5, 5);
    for (int i = 0; i < 17; ++i)
        for (int j = 0; j < 17; ++j) EXPECT_NEAR(H(i, j), ref(i, j), 1e-15);
}

TEST(IterationMatrix, PredictedEigenvaluesAreEigenvalues) {
    auto r = testing_support::rng(80);
    for (int trial = 0; trial < 20; ++trial) {
        const CollocationMatrix B = testing_support::random_curve_problem(200 + trial, 10, 4).basis;
        const SpectralSummary s = extreme_singular_values(B);
        WeightSet w = optimal_weights(s).weights;
        if (trial % 2) {
            w.omega = r.uniform(0.1, 1.9);
            w.upsilon = r.uniform(0.1, 2.0);
            const double s2u = s.sigma_max * s.sigma_max * w.upsilon;
            const double lo = w.omega - w.omega / s2u, hi = w.omega / 2 - (w.omega - 2) / s2u;
            w.gamma = lo + (hi - lo) * r.uniform(0.05, 0.95);
        }
        const DenseMatrix H = iteration_matrix(B, w);
        const auto lambdas = predicted_eigenvalues(w, s.singular_values, 10, 4);
        ASSERT_EQ(lambdas.size(), 14u);
        for (const auto& l : lambdas) EXPECT_LE(scaled_shifted_determinant(H, l), 1e-8) << l;

        // the spectral radius of H restricted away from the unit eigenvalue
        Eigen::MatrixXd E(14, 14);
        for (int i = 0; i < 14; ++i)
            for (int j = 0; j < 14; ++j) E(i, j) = H(i, j);
        const Eigen::VectorXcd ev = Eigen::EigenSolver<Eigen::MatrixXd>(E).eigenvalues();
        double rho = 0.0;
        for (const auto& e : ev) rho = std::max(rho, std::abs(e));
        EXPECT_NEAR(rho, theoretical_radius(w, s.singular_values), 1e-6);
    }
}

TEST(IterationMatrix, RankDeficientHasUnitEigenvalues) {
    const CollocationMatrix B = testing_support::random_curve_problem(5, 10, 4).basis.with_duplicated_column(1);
    const SpectralSummary s = extreme_singular_values(B);
    ASSERT_EQ(s.rank, 4u);
    const WeightSet w = optimal_weights(s).weights;
    const auto lambdas = predicted_eigenvalues(w, std::span(s.singular_values).first(s.rank), 10, 5);
    ASSERT_EQ(lambdas.size(), 15u);
    EXPECT_EQ(std::count(lambdas.begin(), lambdas.end(), std::complex<double>(1.0, 0.0)), 1);
    const DenseMatrix H = iteration_matrix(B, w);
    for (const auto& l : lambdas) EXPECT_LE(scaled_shifted_determinant(H, l), 1e-8);
}

TEST(IterationMatrix, SizeCap) {
    const CollocationMatrix B = testing_support::random_curve_problem(6, 480, 30).basis;
    EXPECT_THROW(iteration_matrix(B, {1.0, 0.5, 1.0, std::nullopt}), ConfigError);
}

TEST(Determinant, MatchesEigen) {
    auto r = testing_support::rng(81);
    DenseMatrix A(6, 6);
    Eigen::MatrixXcd E(6, 6);
    const std::complex<double> lambda(0.3, -0.2);
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) A(i, j) = r.uniform(-1, 1);
    for (int i = 0; i < 6; ++i) {
        double scale = 0.0;
        for (int j = 0; j < 6; ++j) {
            E(i, j) = A(i, j) - (i == j ? lambda : 0.0);
            scale = std::max(scale, std::abs(E(i, j)));
        }
        E.row(i) /= scale;
    }
    EXPECT_NEAR(scaled_shifted_determinant(A, lambda), std::abs(E.determinant()), 1e-13);
}

TEST(MinNorm, MatchesPseudoInverse) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto p = testing_support::random_curve_problem(300 + seed, 40, 9);
        const CollocationMatrix B = seed % 2 ? p.basis.with_duplicated_column(seed % 9) : p.basis;
        DenseMatrix rhs(40, 2);
        for (std::size_t j = 0; j < 40; ++j)
            for (std::size_t c = 0; c < 2; ++c) rhs(j, c) = p.data.at(j, c);
        const LeastSquaresSolution x = min_norm_solve(B, rhs);
        const Eigen::MatrixXd D = dense(B);
        const Eigen::MatrixXd ref = D.completeOrthogonalDecomposition().pseudoInverse() * testing_support::to_eigen(p.data);
        EXPECT_EQ(x.rank, 9u);
        for (std::size_t i = 0; i < B.cols(); ++i)
            for (std::size_t c = 0; c < 2; ++c) EXPECT_NEAR(x.x(i, c), ref(i, c), 1e-10);
    }
}
