#pragma once

// Singular values of collocation matrices, weight selection for the
// memory-augmented iteration and its baseline, the convergence region and
// the closed-form spectral radius of the iteration matrix.

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "piafit/dense.hpp"
#include "piafit/splines.hpp"

namespace piafit {

inline constexpr double kDefaultRankTolerance = 1e-10;

struct SpectralSummary {
    std::size_t rank = 0;
    double sigma_max = 0.0;
    double sigma_min = 0.0;  ///< smallest singular value above the rank cut
    std::vector<double> singular_values;  ///< all n values, descending
    double tolerance = kDefaultRankTolerance;  ///< relative to sigma_max
};

/// Singular values of B, its numerical rank (count of sigma > tol * sigma_1)
/// and the extreme retained values. B is reduced to an n × n triangle by
/// row-wise Givens rotations and the triangle is diagonalized by one-sided
/// Jacobi, so small singular values keep absolute accuracy near
/// eps * sigma_1. Throws NumericalError when Jacobi fails to converge.
SpectralSummary extreme_singular_values(const CollocationMatrix& B, double tol = kDefaultRankTolerance);

/// sigma_1 by power iteration on B^T B applied as B^T (B x); the Gram matrix
/// is never formed.
double power_sigma_max(const CollocationMatrix& B, double rel_tol = 1e-14, std::size_t max_iter = 200000);

/// Summary of B1 ⊗ B2: singular values are all products sigma_i * mu_j.
SpectralSummary kronecker_summary(const SpectralSummary& su, const SpectralSummary& sv);

/// omega, gamma, upsilon for the memory iteration; mu for the baseline.
struct WeightSet {
    double omega = 1.0;
    double gamma = 0.0;
    double upsilon = 1.0;
    std::optional<double> mu;
};

struct OptimalWeights {
    WeightSet weights;
    double mlspia_radius = 0.0;  ///< (s1 - sr) / (s1 + sr)
    double lspia_radius = 0.0;   ///< (s1^2 - sr^2) / (s1^2 + sr^2)
};

/// omega = gamma = 4 s1 sr / (s1 + sr)^2, upsilon = 1 / (s1 sr),
/// mu = 2 / (s1^2 + sr^2).
OptimalWeights optimal_weights(double sigma_max, double sigma_min);
OptimalWeights optimal_weights(const SpectralSummary& s);
/// Same formulas with s1 -> sigma_1 mu_1 and sr -> sigma_r mu_s.
OptimalWeights optimal_weights_surface(const SpectralSummary& su, const SpectralSummary& sv);

struct WeightCheck {
    bool valid = false;
    std::string reason;
    explicit operator bool() const { return valid; }
};

/// Convergence region: 0 < omega < 2, upsilon > 0 and
/// omega - omega/(s1^2 upsilon) < gamma < omega/2 - (omega - 2)/(s1^2 upsilon).
/// For surfaces pass sigma_1 mu_1.
WeightCheck validate_weights(const WeightSet& w, double sigma_max);

/// Roots of lambda^2 + (gamma upsilon s^2 - (2 - omega)) lambda + s^2 upsilon (omega - gamma) + 1 - omega.
/// A discriminant within rounding of zero yields a double root.
std::pair<std::complex<double>, std::complex<double>> eigen_quadratic_roots(const WeightSet& w, double sigma);

/// max(|1 - omega|, max_i max |roots for sigma_i|).
double theoretical_radius(const WeightSet& w, std::span<const double> singulars);

/// Every eigenvalue of the (m+n) × (m+n) iteration matrix predicted from the
/// singular values: 1 - omega (m - r times), two quadratic roots per sigma_i,
/// and 1 (n - r times).
std::vector<std::complex<double>> predicted_eigenvalues(const WeightSet& w, std::span<const double> singulars,
                                                        std::size_t m, std::size_t n);

inline constexpr std::size_t kIterationMatrixCap = 500;

/// H = [[(1-omega) I - gamma upsilon B B^T, -omega B], [upsilon B^T, I]],
/// dense. Refuses m + n > 500.
DenseMatrix iteration_matrix(const CollocationMatrix& B, const WeightSet& w);

/// Minimum-norm least-squares solution X (n × k) of B X ≈ rhs (m × k),
/// truncating singular values at tol * sigma_1.
struct LeastSquaresSolution {
    DenseMatrix x;
    std::size_t rank = 0;
};
LeastSquaresSolution min_norm_solve(const CollocationMatrix& B, const DenseMatrix& rhs,
                                    double tol = kDefaultRankTolerance);

}  // namespace piafit
