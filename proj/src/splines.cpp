#include "piafit/splines.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "piafit/errors.hpp"

namespace piafit {

KnotVector::KnotVector(int degree, std::vector<double> knots) : degree_(degree), knots_(std::move(knots)) {
    if (degree_ < 1) throw ConfigError("degree must be at least 1");
    const auto p1 = static_cast<std::size_t>(degree_) + 1;
    if (knots_.size() < 2 * p1) throw ConfigError("knot vector too short for degree " + std::to_string(degree_));
    if (!std::is_sorted(knots_.begin(), knots_.end())) throw ConfigError("knots must be nondecreasing");
    if (knots_.front() != 0.0 || knots_.back() != 1.0) throw ConfigError("knots must span [0, 1]");
    for (std::size_t i = 0; i < p1; ++i) {
        if (knots_[i] != knots_.front() || knots_[knots_.size() - 1 - i] != knots_.back())
            throw ConfigError("knot vector must be clamped");
    }
    for (std::size_t i = p1; i + p1 < knots_.size(); ++i) {
        if (knots_[i] <= 0.0 || knots_[i] >= 1.0) throw ConfigError("internal knots must lie in (0, 1)");
    }
}

std::span<const double> KnotVector::internal_knots() const {
    const auto p1 = static_cast<std::size_t>(degree_) + 1;
    return std::span<const double>(knots_).subspan(p1, knots_.size() - 2 * p1);
}

std::size_t KnotVector::find_span(double t) const {
    const auto p = static_cast<std::size_t>(degree_);
    const std::size_t n = basis_count();
    if (t >= knots_[n]) return n - 1;
    // first knot in [p+1, n] strictly greater than t
    auto it = std::upper_bound(knots_.begin() + static_cast<std::ptrdiff_t>(p) + 1,
                               knots_.begin() + static_cast<std::ptrdiff_t>(n), t);
    return static_cast<std::size_t>(it - knots_.begin()) - 1;
}

ParameterList::ParameterList(std::vector<double> values) : values_(std::move(values)) {
    for (std::size_t i = 0; i < values_.size(); ++i) {
        const double v = values_[i];
        if (!(v >= 0.0 && v <= 1.0)) throw DomainError("parameter " + std::to_string(i) + " outside [0, 1]");
        if (i > 0 && !(values_[i - 1] < v))
            throw DegenerateInputError("parameters must be strictly increasing (index " + std::to_string(i) + ")");
    }
}

namespace {

void check_domain(double t) {
    if (!(t >= 0.0 && t <= 1.0)) throw DomainError("parameter t = " + std::to_string(t) + " outside [0, 1]");
}

// Triangular recurrence for the p+1 nonzero basis values on `span`.
void basis_on_span(std::span<const double> U, std::size_t span, int p, double t, std::span<double> N) {
    double left[16];
    double right[16];
    N[0] = 1.0;
    for (int j = 1; j <= p; ++j) {
        left[j] = t - U[span + 1 - static_cast<std::size_t>(j)];
        right[j] = U[span + static_cast<std::size_t>(j)] - t;
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
            const double tmp = N[r] / (right[r + 1] + left[j - r]);
            N[r] = saved + right[r + 1] * tmp;
            saved = left[j - r] * tmp;
        }
        N[j] = saved;
    }
}

}  // namespace

std::size_t eval_basis_band(const KnotVector& kv, double t, std::span<double> out) {
    check_domain(t);
    const int p = kv.degree();
    if (p > 15) throw ConfigError("degree above 15 not supported");
    if (out.size() < static_cast<std::size_t>(p) + 1) throw ConfigError("basis output buffer too small");
    const std::size_t span = kv.find_span(t);
    basis_on_span(kv.knots(), span, p, t, out);
    return span - static_cast<std::size_t>(p);
}

std::vector<BasisTerm> eval_basis(const KnotVector& kv, double t) {
    std::vector<double> band(static_cast<std::size_t>(kv.degree()) + 1);
    const std::size_t first = eval_basis_band(kv, t, band);
    std::vector<BasisTerm> terms;
    for (std::size_t k = 0; k < band.size(); ++k)
        if (band[k] != 0.0) terms.push_back({first + k, band[k]});
    return terms;
}

BasisDerivatives eval_basis_derivatives(const KnotVector& kv, double t, int order) {
    check_domain(t);
    const int p = kv.degree();
    if (p > 15) throw ConfigError("degree above 15 not supported");
    if (order < 0) throw ConfigError("derivative order must be nonnegative");
    const auto U = kv.knots();
    const std::size_t span = kv.find_span(t);
    const auto w = static_cast<std::size_t>(p) + 1;

    // ndu: basis values (upper triangle incl. diagonal) and knot differences (lower).
    std::vector<double> ndu(w * w);
    auto NDU = [&](std::size_t r, std::size_t c) -> double& { return ndu[r * w + c]; };
    double left[16];
    double right[16];
    NDU(0, 0) = 1.0;
    for (std::size_t j = 1; j <= static_cast<std::size_t>(p); ++j) {
        left[j] = t - U[span + 1 - j];
        right[j] = U[span + j] - t;
        double saved = 0.0;
        for (std::size_t r = 0; r < j; ++r) {
            NDU(j, r) = right[r + 1] + left[j - r];
            const double tmp = NDU(r, j - 1) / NDU(j, r);
            NDU(r, j) = saved + right[r + 1] * tmp;
            saved = left[j - r] * tmp;
        }
        NDU(j, j) = saved;
    }

    const auto nd = static_cast<std::size_t>(order);
    BasisDerivatives out;
    out.first = span - static_cast<std::size_t>(p);
    out.width = w;
    out.values.assign((nd + 1) * w, 0.0);
    for (std::size_t j = 0; j < w; ++j) out.values[j] = NDU(j, static_cast<std::size_t>(p));

    std::vector<double> a(2 * w);
    for (int r = 0; r <= p; ++r) {
        int s1 = 0;
        int s2 = 1;
        std::fill(a.begin(), a.end(), 0.0);
        auto A = [&](int row, int col) -> double& { return a[static_cast<std::size_t>(row) * w + static_cast<std::size_t>(col)]; };
        A(0, 0) = 1.0;
        for (int k = 1; k <= order && k <= p; ++k) {
            double d = 0.0;
            const int rk = r - k;
            const int pk = p - k;
            if (r >= k) {
                A(s2, 0) = A(s1, 0) / NDU(static_cast<std::size_t>(pk + 1), static_cast<std::size_t>(rk));
                d = A(s2, 0) * NDU(static_cast<std::size_t>(rk), static_cast<std::size_t>(pk));
            }
            const int j1 = rk >= -1 ? 1 : -rk;
            const int j2 = (r - 1 <= pk) ? k - 1 : p - r;
            for (int j = j1; j <= j2; ++j) {
                A(s2, j) = (A(s1, j) - A(s1, j - 1)) / NDU(static_cast<std::size_t>(pk + 1), static_cast<std::size_t>(rk + j));
                d += A(s2, j) * NDU(static_cast<std::size_t>(rk + j), static_cast<std::size_t>(pk));
            }
            if (r <= pk) {
                A(s2, k) = -A(s1, k - 1) / NDU(static_cast<std::size_t>(pk + 1), static_cast<std::size_t>(r));
                d += A(s2, k) * NDU(static_cast<std::size_t>(r), static_cast<std::size_t>(pk));
            }
            out.values[static_cast<std::size_t>(k) * w + static_cast<std::size_t>(r)] = d;
            std::swap(s1, s2);
        }
    }
    double factor = p;
    for (int k = 1; k <= order && k <= p; ++k) {
        for (std::size_t j = 0; j < w; ++j) out.values[static_cast<std::size_t>(k) * w + j] *= factor;
        factor *= (p - k);
    }
    return out;
}

KnotVector make_knots(const ParameterList& params, std::size_t n, int degree) {
    if (degree < 1) throw ConfigError("degree must be at least 1");
    const auto p = static_cast<std::size_t>(degree);
    const std::size_t m = params.size();
    if (n <= p) throw ConfigError("control count n = " + std::to_string(n) + " must exceed degree " + std::to_string(p));
    if (m < n) throw ConfigError("need at least n = " + std::to_string(n) + " parameters, got " + std::to_string(m));

    std::vector<double> knots(n + p + 1, 0.0);
    std::fill(knots.end() - static_cast<std::ptrdiff_t>(p) - 1, knots.end(), 1.0);
    // j*d = j*m/(n-p) split exactly into integer part i and fraction a.
    const std::size_t denom = n - p;
    for (std::size_t j = 1; j < n - p; ++j) {
        const std::size_t num = j * m;
        const std::size_t i = num / denom;
        const double a = static_cast<double>(num - i * denom) / static_cast<double>(denom);
        knots[p + j] = (1.0 - a) * params[i - 1] + a * params[i];
    }
    return KnotVector(degree, std::move(knots));
}

CollocationMatrix::CollocationMatrix(std::size_t rows, std::size_t cols, std::size_t width)
    : rows_(rows), cols_(cols), width_(width), first_(rows, 0), values_(rows * width, 0.0) {
    if (width == 0 || width > cols) throw ConfigError("band width must be in [1, cols]");
}

double CollocationMatrix::operator()(std::size_t j, std::size_t i) const {
    const std::size_t f = first_[j];
    if (i < f || i >= f + width_) return 0.0;
    return values_[j * width_ + (i - f)];
}

std::vector<double> CollocationMatrix::to_dense() const {
    std::vector<double> dense(rows_ * cols_, 0.0);
    for (std::size_t j = 0; j < rows_; ++j)
        for (std::size_t k = 0; k < width_; ++k) dense[j * cols_ + first_[j] + k] += values_[j * width_ + k];
    return dense;
}

CollocationMatrix CollocationMatrix::with_duplicated_column(std::size_t col) const {
    if (col >= cols_) throw ConfigError("column index out of range");
    CollocationMatrix out(rows_, cols_ + 1, width_ + 1);
    for (std::size_t j = 0; j < rows_; ++j) {
        const std::size_t f = first_[j];
        const auto src = row(j);
        auto dst = out.row(j);
        if (f + width_ <= col) {
            out.first_[j] = f;
            std::copy(src.begin(), src.end(), dst.begin());
        } else if (f > col) {
            out.first_[j] = f;  // leading zero pad, values shifted right by one column
            std::copy(src.begin(), src.end(), dst.begin() + 1);
        } else {
            out.first_[j] = f;
            const std::size_t at = col - f;
            std::size_t o = 0;
            for (std::size_t k = 0; k < width_; ++k) {
                dst[o++] = src[k];
                if (k == at) dst[o++] = src[k];
            }
        }
    }
    return out;
}

CollocationMatrix collocate(const KnotVector& kv, const ParameterList& params) {
    const std::size_t w = static_cast<std::size_t>(kv.degree()) + 1;
    CollocationMatrix B(params.size(), kv.basis_count(), w);
    for (std::size_t j = 0; j < params.size(); ++j) B.set_first(j, eval_basis_band(kv, params[j], B.row(j)));
    return B;
}

Point eval_curve(const PointSet& ctrl, const KnotVector& kv, double t) {
    if (ctrl.size() != kv.basis_count())
        throw ConfigError("control point count " + std::to_string(ctrl.size()) + " does not match basis count " +
                          std::to_string(kv.basis_count()));
    double band[16];
    const std::size_t w = static_cast<std::size_t>(kv.degree()) + 1;
    const std::size_t first = eval_basis_band(kv, t, {band, w});
    Point out(ctrl.dim());
    for (std::size_t c = 0; c < ctrl.dim(); ++c) {
        const auto x = ctrl.coord(c);
        double s = 0.0;
        for (std::size_t k = 0; k < w; ++k) s += band[k] * x[first + k];
        out[c] = s;
    }
    return out;
}

Point eval_surface(const PointGrid& net, const KnotVector& kv_u, const KnotVector& kv_v, double t, double s) {
    if (net.rows() != kv_u.basis_count() || net.cols() != kv_v.basis_count())
        throw ConfigError("control net dimensions do not match the bases");
    double bu[16];
    double bv[16];
    const std::size_t wu = static_cast<std::size_t>(kv_u.degree()) + 1;
    const std::size_t wv = static_cast<std::size_t>(kv_v.degree()) + 1;
    const std::size_t fu = eval_basis_band(kv_u, t, {bu, wu});
    const std::size_t fv = eval_basis_band(kv_v, s, {bv, wv});
    Point out(net.dim());
    for (std::size_t c = 0; c < net.dim(); ++c) {
        double sum = 0.0;
        for (std::size_t a = 0; a < wu; ++a) {
            double inner = 0.0;
            for (std::size_t b = 0; b < wv; ++b) inner += bv[b] * net.at(fu + a, fv + b, c);
            sum += bu[a] * inner;
        }
        out[c] = sum;
    }
    return out;
}

std::vector<CurvatureSample> curvature_samples(const PointSet& ctrl, const KnotVector& kv, std::size_t k) {
    if (kv.degree() < 2) throw ConfigError("curvature needs degree >= 2");
    if (k < 2) throw ConfigError("need at least 2 curvature samples");
    if (ctrl.size() != kv.basis_count()) throw ConfigError("control point count does not match basis count");
    const std::size_t dim = ctrl.dim();
    std::vector<CurvatureSample> out;
    out.reserve(k);
    for (std::size_t s = 0; s < k; ++s) {
        const double t = static_cast<double>(s) / static_cast<double>(k - 1);
        const BasisDerivatives d = eval_basis_derivatives(kv, t, 2);
        std::array<double, 3> pos{}, d1{}, d2{};
        for (std::size_t c = 0; c < dim; ++c) {
            const auto x = ctrl.coord(c);
            for (std::size_t j = 0; j < d.width; ++j) {
                pos[c] += d.at(0, j) * x[d.first + j];
                d1[c] += d.at(1, j) * x[d.first + j];
                d2[c] += d.at(2, j) * x[d.first + j];
            }
        }
        Point position(dim);
        for (std::size_t c = 0; c < dim; ++c) position[c] = pos[c];

        const double speed = std::sqrt(d1[0] * d1[0] + d1[1] * d1[1] + d1[2] * d1[2]);
        std::optional<double> kappa;
        if (speed >= 1e-12) {
            const double cx = d1[1] * d2[2] - d1[2] * d2[1];
            const double cy = d1[2] * d2[0] - d1[0] * d2[2];
            const double cz = d1[0] * d2[1] - d1[1] * d2[0];
            kappa = std::sqrt(cx * cx + cy * cy + cz * cz) / (speed * speed * speed);
        }
        out.push_back({t, position, kappa});
    }
    return out;
}

}  // namespace piafit
