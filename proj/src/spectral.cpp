#include "piafit/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "piafit/errors.hpp"
#include "piafit/kernels.hpp"

namespace piafit {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Upper triangle R (n × n, row-major) with Q^T [B | rhs] = [R | c; 0 | *].
struct Triangle {
    std::size_t n = 0;
    std::size_t k = 0;
    std::vector<double> R;
    std::vector<double> c;  // n × k
};

Triangle triangularize(const CollocationMatrix& B, const DenseMatrix* rhs) {
    Triangle T;
    T.n = B.cols();
    T.k = rhs ? rhs->cols() : 0;
    const std::size_t n = T.n;
    const std::size_t k = T.k;
    T.R.assign(n * n, 0.0);
    T.c.assign(n * k, 0.0);
    std::vector<std::size_t> row_end(n, 0);  // 0 marks an untouched row
    std::vector<double> a(n, 0.0);
    std::vector<double> b(k, 0.0);

    for (std::size_t j = 0; j < B.rows(); ++j) {
        const std::size_t lo = B.first(j);
        std::size_t hi = lo + B.width();
        const auto vals = B.row(j);
        std::copy(vals.begin(), vals.end(), a.begin() + static_cast<std::ptrdiff_t>(lo));
        if (rhs)
            for (std::size_t q = 0; q < k; ++q) b[q] = (*rhs)(j, q);

        for (std::size_t col = lo; col < hi; ++col) {
            const double ak = a[col];
            if (ak == 0.0) continue;
            double* Rrow = T.R.data() + col * n;
            double* crow = T.c.data() + col * k;
            if (row_end[col] == 0) {
                for (std::size_t jj = col; jj < hi; ++jj) {
                    Rrow[jj] = a[jj];
                    a[jj] = 0.0;
                }
                for (std::size_t q = 0; q < k; ++q) crow[q] = b[q];
                row_end[col] = hi;
                break;
            }
            const double rkk = Rrow[col];
            const double r = std::hypot(rkk, ak);
            const double cs = rkk / r;
            const double sn = ak / r;
            const std::size_t end = std::max(row_end[col], hi);
            for (std::size_t jj = col; jj < end; ++jj) {
                const double x = Rrow[jj];
                const double y = a[jj];
                Rrow[jj] = cs * x + sn * y;
                a[jj] = -sn * x + cs * y;
            }
            a[col] = 0.0;
            for (std::size_t q = 0; q < k; ++q) {
                const double x = crow[q];
                const double y = b[q];
                crow[q] = cs * x + sn * y;
                b[q] = -sn * x + cs * y;
            }
            row_end[col] = end;
            hi = end;
        }
        std::fill(a.begin() + static_cast<std::ptrdiff_t>(lo), a.end(), 0.0);
    }
    return T;
}

// One-sided Jacobi on the columns of R: R V = U diag(sigma). Columns of
// `work` end up as sigma_i u_i.
struct JacobiSvd {
    std::vector<double> sigma;  // unsorted
    std::vector<double> work;   // column-major n × n
    std::vector<double> V;      // column-major n × n
};

JacobiSvd one_sided_jacobi(const Triangle& T) {
    const std::size_t n = T.n;
    JacobiSvd out;
    out.work.assign(n * n, 0.0);
    out.V.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) out.work[j * n + i] = T.R[i * n + j];
    for (std::size_t i = 0; i < n; ++i) out.V[i * n + i] = 1.0;
    // columns below eps * ||R||_F are numerically zero; rotating them only
    // stirs roundoff and never settles
    double frob2 = 0.0;
    for (double v : out.work) frob2 += v * v;
    const double negligible = kEps * kEps * frob2;
    // the computed inner product carries about n ulps of noise
    const double orth_tol = static_cast<double>(std::max<std::size_t>(n, 4)) * kEps;

    constexpr int kMaxSweeps = 80;
    bool converged = false;
    for (int sweep = 0; sweep < kMaxSweeps && !converged; ++sweep) {
        converged = true;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            double* ap = out.work.data() + p * n;
            for (std::size_t q = p + 1; q < n; ++q) {
                double* aq = out.work.data() + q * n;
                double alpha = 0.0, beta = 0.0, gamma = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    alpha += ap[i] * ap[i];
                    beta += aq[i] * aq[i];
                    gamma += ap[i] * aq[i];
                }
                if (gamma == 0.0 || std::fabs(gamma) <= orth_tol * std::sqrt(alpha * beta)) continue;
                if (alpha <= negligible || beta <= negligible) continue;
                converged = false;
                const double zeta = (beta - alpha) / (2.0 * gamma);
                const double t = std::copysign(1.0, zeta) / (std::fabs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double cs = 1.0 / std::sqrt(1.0 + t * t);
                const double sn = cs * t;
                for (std::size_t i = 0; i < n; ++i) {
                    const double x = ap[i];
                    const double y = aq[i];
                    ap[i] = cs * x - sn * y;
                    aq[i] = sn * x + cs * y;
                }
                double* vp = out.V.data() + p * n;
                double* vq = out.V.data() + q * n;
                for (std::size_t i = 0; i < n; ++i) {
                    const double x = vp[i];
                    const double y = vq[i];
                    vp[i] = cs * x - sn * y;
                    vq[i] = sn * x + cs * y;
                }
            }
        }
    }
    if (!converged) {
        std::ostringstream msg;
        msg << "one-sided Jacobi did not converge in " << kMaxSweeps << " sweeps (n = " << n << ")";
        throw NumericalError(msg.str());
    }
    out.sigma.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double* col = out.work.data() + j * n;
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += col[i] * col[i];
        out.sigma[j] = std::sqrt(s);
    }
    return out;
}

void require_positive(double s1, double sr) {
    if (!(sr > 0.0) || !(s1 >= sr) || !std::isfinite(s1))
        throw ConfigError("singular values must satisfy sigma_1 >= sigma_r > 0");
}

}  // namespace

SpectralSummary extreme_singular_values(const CollocationMatrix& B, double tol) {
    if (!(tol > 0.0)) throw ConfigError("rank tolerance must be positive");
    if (B.rows() == 0 || B.cols() == 0) throw ConfigError("empty collocation matrix");
    const Triangle T = triangularize(B, nullptr);
    JacobiSvd svd = one_sided_jacobi(T);

    SpectralSummary s;
    s.singular_values = std::move(svd.sigma);
    std::sort(s.singular_values.begin(), s.singular_values.end(), std::greater<>());
    s.tolerance = tol;
    s.sigma_max = s.singular_values.front();
    if (!(s.sigma_max > 0.0)) throw ConfigError("collocation matrix is zero");
    const double cut = tol * s.sigma_max;
    s.rank = static_cast<std::size_t>(
        std::count_if(s.singular_values.begin(), s.singular_values.end(), [cut](double v) { return v > cut; }));
    s.sigma_min = s.singular_values[s.rank - 1];
    return s;
}

double power_sigma_max(const CollocationMatrix& B, double rel_tol, std::size_t max_iter) {
    const std::size_t n = B.cols();
    std::vector<double> x(n, 1.0 / std::sqrt(static_cast<double>(n)));
    std::vector<double> y(B.rows());
    std::vector<double> z(n);
    double lambda = 0.0;
    for (std::size_t it = 0; it < max_iter; ++it) {
        kernels::gather(B, x, y);
        std::fill(z.begin(), z.end(), 0.0);
        kernels::scatter_add(B, y, z);
        const double rq = std::inner_product(x.begin(), x.end(), z.begin(), 0.0);
        const double norm = std::sqrt(kernels::sum_squares(z));
        if (!(norm > 0.0)) throw NumericalError("power iteration hit the null space");
        for (std::size_t i = 0; i < n; ++i) x[i] = z[i] / norm;
        if (it > 0 && std::fabs(rq - lambda) <= rel_tol * rq) return std::sqrt(rq);
        lambda = rq;
    }
    throw NumericalError("power iteration did not converge in " + std::to_string(max_iter) + " steps");
}

SpectralSummary kronecker_summary(const SpectralSummary& su, const SpectralSummary& sv) {
    SpectralSummary s;
    s.tolerance = std::max(su.tolerance, sv.tolerance);
    for (double a : su.singular_values)
        for (double b : sv.singular_values) s.singular_values.push_back(a * b);
    std::sort(s.singular_values.begin(), s.singular_values.end(), std::greater<>());
    s.rank = su.rank * sv.rank;
    s.sigma_max = su.sigma_max * sv.sigma_max;
    s.sigma_min = su.sigma_min * sv.sigma_min;
    return s;
}

OptimalWeights optimal_weights(double s1, double sr) {
    require_positive(s1, sr);
    OptimalWeights o;
    const double sum = s1 + sr;
    o.weights.omega = 4.0 * s1 * sr / (sum * sum);
    o.weights.gamma = o.weights.omega;
    o.weights.upsilon = 1.0 / (s1 * sr);
    const double s1sq = s1 * s1;
    const double srsq = sr * sr;
    o.weights.mu = 2.0 / (s1sq + srsq);
    o.mlspia_radius = (s1 - sr) / sum;
    o.lspia_radius = (s1sq - srsq) / (s1sq + srsq);
    return o;
}

OptimalWeights optimal_weights(const SpectralSummary& s) { return optimal_weights(s.sigma_max, s.sigma_min); }

OptimalWeights optimal_weights_surface(const SpectralSummary& su, const SpectralSummary& sv) {
    return optimal_weights(su.sigma_max * sv.sigma_max, su.sigma_min * sv.sigma_min);
}

WeightCheck validate_weights(const WeightSet& w, double sigma_max) {
    auto fail = [](std::string why) { return WeightCheck{false, std::move(why)}; };
    if (!(sigma_max > 0.0)) return fail("sigma_1 must be positive");
    if (!std::isfinite(w.omega) || !std::isfinite(w.gamma) || !std::isfinite(w.upsilon))
        return fail("weights must be finite");
    if (!(w.omega > 0.0 && w.omega < 2.0)) return fail("requires 0 < omega < 2");
    if (!(w.upsilon > 0.0)) return fail("requires upsilon > 0");
    const double s2u = sigma_max * sigma_max * w.upsilon;
    const double lower = w.omega - w.omega / s2u;
    const double upper = w.omega / 2.0 - (w.omega - 2.0) / s2u;
    if (!(w.gamma > lower)) {
        std::ostringstream msg;
        msg << "requires gamma > omega - omega/(sigma_1^2 upsilon) = " << lower;
        return fail(msg.str());
    }
    if (!(w.gamma < upper)) {
        std::ostringstream msg;
        msg << "requires gamma < omega/2 - (omega-2)/(sigma_1^2 upsilon) = " << upper;
        return fail(msg.str());
    }
    return {true, "weights inside the convergence region"};
}

std::pair<std::complex<double>, std::complex<double>> eigen_quadratic_roots(const WeightSet& w, double sigma) {
    const double s2 = sigma * sigma;
    const double b = w.gamma * w.upsilon * s2 - (2.0 - w.omega);
    const double c = s2 * w.upsilon * (w.omega - w.gamma) + 1.0 - w.omega;
    const double disc = b * b - 4.0 * c;
    // b and c come from cancelling O(1) terms, so their absolute error scales
    // with those terms rather than with b and c themselves
    const double b_scale = std::fabs(w.gamma * w.upsilon * s2) + 2.0 + std::fabs(w.omega);
    const double c_scale = std::fabs(s2 * w.upsilon * (w.omega - w.gamma)) + 1.0 + std::fabs(w.omega);
    const double noise = 64.0 * kEps * (std::fabs(b) * b_scale + 4.0 * c_scale);
    if (disc < -noise) {
        const double im = std::sqrt(-disc) / 2.0;
        return {{-b / 2.0, im}, {-b / 2.0, -im}};
    }
    if (disc <= noise) return {{-b / 2.0, 0.0}, {-b / 2.0, 0.0}};
    const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
    const double r1 = q;
    const double r2 = q != 0.0 ? c / q : 0.0;
    return {{r1, 0.0}, {r2, 0.0}};
}

double theoretical_radius(const WeightSet& w, std::span<const double> singulars) {
    double rho = std::fabs(1.0 - w.omega);
    for (double s : singulars) {
        const auto [r1, r2] = eigen_quadratic_roots(w, s);
        if (r1.imag() != 0.0) {
            // conjugate pair: |lambda|^2 = lambda * conj(lambda) = constant term
            const double c = s * s * w.upsilon * (w.omega - w.gamma) + 1.0 - w.omega;
            rho = std::max(rho, std::sqrt(c));
        } else {
            rho = std::max({rho, std::fabs(r1.real()), std::fabs(r2.real())});
        }
    }
    return rho;
}

std::vector<std::complex<double>> predicted_eigenvalues(const WeightSet& w, std::span<const double> singulars,
                                                        std::size_t m, std::size_t n) {
    const std::size_t r = singulars.size();
    if (r > n || n > m) throw ConfigError("predicted_eigenvalues needs rank <= n <= m");
    std::vector<std::complex<double>> eig;
    eig.reserve(m + n);
    eig.insert(eig.end(), m - r, {1.0 - w.omega, 0.0});
    for (double s : singulars) {
        const auto [r1, r2] = eigen_quadratic_roots(w, s);
        eig.push_back(r1);
        eig.push_back(r2);
    }
    eig.insert(eig.end(), n - r, {1.0, 0.0});
    return eig;
}

DenseMatrix iteration_matrix(const CollocationMatrix& B, const WeightSet& w) {
    const std::size_t m = B.rows();
    const std::size_t n = B.cols();
    if (m + n > kIterationMatrixCap)
        throw ConfigError("iteration matrix of size " + std::to_string(m + n) + " exceeds the diagnostic cap of " +
                          std::to_string(kIterationMatrixCap));
    const std::vector<double> Bd = B.to_dense();
    DenseMatrix H(m + n, m + n);
    const double gu = w.gamma * w.upsilon;
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            double bbt = 0.0;
            for (std::size_t k = 0; k < n; ++k) bbt += Bd[i * n + k] * Bd[j * n + k];
            H(i, j) = (i == j ? 1.0 - w.omega : 0.0) - gu * bbt;
        }
        for (std::size_t k = 0; k < n; ++k) {
            H(i, m + k) = -w.omega * Bd[i * n + k];
            H(m + k, i) = w.upsilon * Bd[i * n + k];
        }
    }
    for (std::size_t k = 0; k < n; ++k) H(m + k, m + k) = 1.0;
    return H;
}

LeastSquaresSolution min_norm_solve(const CollocationMatrix& B, const DenseMatrix& rhs, double tol) {
    if (rhs.rows() != B.rows()) throw ConfigError("right-hand side has the wrong number of rows");
    const Triangle T = triangularize(B, &rhs);
    const JacobiSvd svd = one_sided_jacobi(T);
    const std::size_t n = T.n;
    const std::size_t k = T.k;
    const double smax = *std::max_element(svd.sigma.begin(), svd.sigma.end());
    LeastSquaresSolution out{DenseMatrix(n, k), 0};
    if (!(smax > 0.0)) return out;
    const double cut = tol * smax;
    for (std::size_t j = 0; j < n; ++j) {
        const double s = svd.sigma[j];
        if (!(s > cut)) continue;
        ++out.rank;
        const double* su = svd.work.data() + j * n;  // sigma_j u_j
        const double* v = svd.V.data() + j * n;
        for (std::size_t q = 0; q < k; ++q) {
            double proj = 0.0;
            for (std::size_t i = 0; i < n; ++i) proj += su[i] * T.c[i * k + q];
            const double coef = proj / (s * s);
            for (std::size_t i = 0; i < n; ++i) out.x(i, q) += coef * v[i];
        }
    }
    return out;
}

}  // namespace piafit
