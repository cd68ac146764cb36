#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "piafit/errors.hpp"
#include "piafit/iterate.hpp"
#include "piafit/kernels.hpp"
#include "support.hpp"

using namespace piafit;
namespace k = piafit::kernels;

namespace {

std::vector<double> random_vector(std::size_t n, std::uint64_t seed) {
    auto r = testing_support::rng(seed);
    std::vector<double> v(n);
    for (double& x : v) x = r.uniform(-1, 1);
    return v;
}

CollocationMatrix random_band(std::uint64_t seed, std::size_t m, std::size_t n, int degree) {
    return testing_support::random_curve_problem(seed, m, n, degree).basis;
}

// Restores the default table after a test that switches it.
struct KernelGuard {
    const k::KernelTable* saved = &k::active();
    ~KernelGuard() { k::select(saved == &k::scalar_table() ? k::Isa::scalar : k::Isa::avx2); }
};

bool have_avx2() { return k::cpu_supports(k::Isa::avx2); }

void expect_close(const std::vector<double>& a, const std::vector<double>& b, double tol) {
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], tol * (1.0 + std::fabs(b[i]))) << "index " << i;
}

}  // namespace

TEST(ScalarKernels, GatherScatterMatchDense) {
    const CollocationMatrix B = random_band(1, 40, 9, 3);
    const Eigen::MatrixXd D = testing_support::dense(B);
    const auto x = random_vector(9, 2), y = random_vector(40, 3);
    const k::KernelTable& s = k::scalar_table();
    std::vector<double> bx(40), bty(9, 0.0);
    s.band_gather(k::band_view(B), x.data(), bx.data());
    s.band_scatter(k::band_view(B), y.data(), bty.data());
    const Eigen::VectorXd rx = D * Eigen::Map<const Eigen::VectorXd>(x.data(), 9);
    const Eigen::VectorXd ry = D.transpose() * Eigen::Map<const Eigen::VectorXd>(y.data(), 40);
    for (int i = 0; i < 40; ++i) EXPECT_NEAR(bx[i], rx(i), 1e-15);
    for (int i = 0; i < 9; ++i) EXPECT_NEAR(bty[i], ry(i), 1e-14);
}

TEST(ScalarKernels, Elementwise) {
    const k::KernelTable& s = k::scalar_table();
    std::vector<double> x{1, -2, 3}, y{0.5, 0.5, 0.5}, r(3);
    s.axpy(3, 2.0, x.data(), y.data());
    EXPECT_EQ(y, (std::vector<double>{2.5, -3.5, 6.5}));
    s.difference(3, y.data(), x.data(), r.data());
    EXPECT_EQ(r, (std::vector<double>{1.5, -1.5, 3.5}));
    std::vector<double> lam{1, 1, 1};
    s.memory_update(3, 0.5, lam.data(), -1.0, x.data(), 2.0, r.data());
    EXPECT_EQ(lam, (std::vector<double>{0.5 - 1 + 3, 0.5 + 2 - 3, 0.5 - 3 + 7}));
    EXPECT_EQ(s.sum_squares(3, x.data()), 14.0);
    EXPECT_EQ(s.max_abs(3, x.data()), 3.0);
    EXPECT_EQ(s.sum_squares(0, x.data()), 0.0);
}

TEST(KernelWrappers, SizeChecks) {
    const CollocationMatrix B = random_band(4, 10, 5, 3);
    std::vector<double> a(5), b(10), c(4);
    EXPECT_THROW(k::gather(B, c, b), ConfigError);
    EXPECT_THROW(k::scatter_add(B, c, a), ConfigError);
    EXPECT_THROW(k::axpy(1.0, a, b), ConfigError);
    EXPECT_THROW(k::difference(a, a, b), ConfigError);
}

TEST(KernelDispatch, ScalarAlwaysSelectable) {
    KernelGuard g;
    EXPECT_TRUE(k::select(k::Isa::scalar));
    EXPECT_EQ(k::active_name(), std::string_view(k::scalar_table().name));
}

TEST(KernelDispatch, Avx2SelectableWhenSupported) {
    KernelGuard g;
    EXPECT_EQ(k::select(k::Isa::avx2), have_avx2());
}

class Avx2Equivalence : public ::testing::TestWithParam<int> {
protected:
    void SetUp() override {
        if (!have_avx2()) GTEST_SKIP() << "AVX2 kernels not available on this build/CPU";
        avx = k::avx2_table();
    }
    const k::KernelTable* avx = nullptr;
};

TEST_P(Avx2Equivalence, BandKernels) {
    const int degree = GetParam();
    const k::KernelTable& s = k::scalar_table();
    for (std::size_t m : {std::size_t(5), std::size_t(17), std::size_t(64), std::size_t(333)}) {
        if (m < static_cast<std::size_t>(degree) + 1) continue;
        const std::size_t n = std::max<std::size_t>(degree + 1, m / 3);
        const CollocationMatrix B = random_band(m + degree, m, n, degree);
        const auto x = random_vector(n, m), y = random_vector(m, m + 1);
        std::vector<double> g1(m), g2(m), s1(n, 0.25), s2(n, 0.25);
        s.band_gather(k::band_view(B), x.data(), g1.data());
        avx->band_gather(k::band_view(B), x.data(), g2.data());
        s.band_scatter(k::band_view(B), y.data(), s1.data());
        avx->band_scatter(k::band_view(B), y.data(), s2.data());
        expect_close(g2, g1, 1e-15);
        expect_close(s2, s1, 1e-14);
    }
}

TEST_P(Avx2Equivalence, DuplicatedColumnBand) {
    const int degree = GetParam();
    const CollocationMatrix B = random_band(99, 50, 12, degree).with_duplicated_column(4);
    const auto x = random_vector(B.cols(), 5), y = random_vector(B.rows(), 6);
    std::vector<double> g1(B.rows()), g2(B.rows()), s1(B.cols(), 0.0), s2(B.cols(), 0.0);
    k::scalar_table().band_gather(k::band_view(B), x.data(), g1.data());
    avx->band_gather(k::band_view(B), x.data(), g2.data());
    k::scalar_table().band_scatter(k::band_view(B), y.data(), s1.data());
    avx->band_scatter(k::band_view(B), y.data(), s2.data());
    expect_close(g2, g1, 1e-15);
    expect_close(s2, s1, 1e-14);
}

INSTANTIATE_TEST_SUITE_P(Degrees, Avx2Equivalence, ::testing::Values(1, 2, 3, 4, 5, 7));

TEST(Avx2Elementwise, MatchesScalar) {
    if (!have_avx2()) GTEST_SKIP() << "AVX2 kernels not available on this build/CPU";
    const k::KernelTable& s = k::scalar_table();
    const k::KernelTable& a = *k::avx2_table();
    for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 8u, 15u, 16u, 17u, 1000u, 1001u}) {
        const auto x = random_vector(n, n + 10), z = random_vector(n, n + 11), r0 = random_vector(n, n + 12);
        std::vector<double> y1 = z, y2 = z;
        s.axpy(n, -0.7, x.data(), y1.data());
        a.axpy(n, -0.7, x.data(), y2.data());
        expect_close(y2, y1, 1e-15);

        std::vector<double> d1(n), d2(n);
        s.difference(n, x.data(), z.data(), d1.data());
        a.difference(n, x.data(), z.data(), d2.data());
        EXPECT_EQ(d1, d2);

        std::vector<double> l1 = r0, l2 = r0;
        s.memory_update(n, 0.4, l1.data(), -0.3, x.data(), 0.6, z.data());
        a.memory_update(n, 0.4, l2.data(), -0.3, x.data(), 0.6, z.data());
        expect_close(l2, l1, 1e-15);

        const double q1 = s.sum_squares(n, x.data()), q2 = a.sum_squares(n, x.data());
        EXPECT_NEAR(q2, q1, 1e-13 * (1.0 + q1));
        EXPECT_EQ(s.max_abs(n, x.data()), a.max_abs(n, x.data()));
    }
}

TEST(Avx2Runs, SameIterationCountsAsScalar) {
    if (!have_avx2()) GTEST_SKIP() << "AVX2 kernels not available on this build/CPU";
    KernelGuard g;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const CurveProblem p = testing_support::random_curve_problem(500 + seed, 200, 25);
        k::select(k::Isa::scalar);
        const CurveRun a = run(p, Method::mlspia, InitStrategy::II);
        k::select(k::Isa::avx2);
        const CurveRun b = run(p, Method::mlspia, InitStrategy::II);
        EXPECT_EQ(a.iterations, b.iterations);
        EXPECT_LT(testing_support::max_abs_diff(a.control, b.control), 1e-9);
    }
}
