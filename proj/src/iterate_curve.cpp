#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>
#include <string>

#include "piafit/errors.hpp"
#include "piafit/iterate.hpp"
#include "piafit/kernels.hpp"

namespace piafit {

const char* to_string(Method m) { return m == Method::mlspia ? "mlspia" : "lspia"; }

const char* to_string(RunStatus s) {
    switch (s) {
        case RunStatus::converged: return "converged";
        case RunStatus::max_iterations: return "max_iterations";
        case RunStatus::diverged: return "diverged";
    }
    return "unknown";
}

const char* to_string(InitStrategy s) { return s == InitStrategy::I ? "I" : "II"; }

CurveProblem make_curve_problem(PointSet data, std::size_t n, int degree) {
    ParameterList params = chord_params(data);
    KnotVector knots = make_knots(params, n, degree);
    CollocationMatrix basis = collocate(knots, params);
    const OptimalWeights opt = optimal_weights(extreme_singular_values(basis));
    return CurveProblem{std::move(data), std::move(basis), std::move(knots), std::move(params), opt.weights};
}

std::vector<std::size_t> strategy_ii_indices(std::size_t m, std::size_t n) {
    if (n < 2) throw ConfigError("strategy II needs at least 2 control points");
    if (n > m) throw ConfigError("strategy II needs n <= m");
    std::vector<std::size_t> idx(n);
    idx.front() = 0;
    for (std::size_t i = 2; i < n; ++i) idx[i - 1] = (m * (i - 1)) / (n - 1);  // floor(m(i-1)/(n-1)) + 1, 0-based
    idx.back() = m - 1;
    return idx;
}

namespace {

void check_problem(const CurveProblem& p) {
    if (p.data.size() != p.basis.rows())
        throw ConfigError("data count " + std::to_string(p.data.size()) + " does not match collocation rows " +
                          std::to_string(p.basis.rows()));
    if (p.data.empty()) throw ConfigError("no data points");
}

void check_state(const CurveProblem& p, const PointSet& control, const PointSet& lambda) {
    if (control.size() != p.basis.cols() || control.dim() != p.data.dim())
        throw ConfigError("control points do not match the problem");
    if (lambda.size() != p.basis.rows() || lambda.dim() != p.data.dim())
        throw ConfigError("auxiliary points do not match the problem");
}

// Scratch buffers for one curve iteration; coordinate-major like PointSet.
struct CurveWork {
    PointSet bp;        // B P, then B T
    PointSet residual;  // Q - B P
    PointSet grad;      // B^T residual
    PointSet t;         // B^T Lambda

    CurveWork(std::size_t m, std::size_t n, std::size_t d) : bp(m, d), residual(m, d), grad(n, d), t(n, d) {}
};

// residual = Q - B P, grad = B^T residual; returns ||grad||_F.
double residual_and_error(const CurveProblem& p, const PointSet& control, CurveWork& w) {
    double sq = 0.0;
    for (std::size_t c = 0; c < p.data.dim(); ++c) {
        kernels::gather(p.basis, control.coord(c), w.bp.coord(c));
        kernels::difference(p.data.coord(c), w.bp.coord(c), w.residual.coord(c));
        auto g = w.grad.coord(c);
        std::fill(g.begin(), g.end(), 0.0);
        kernels::scatter_add(p.basis, w.residual.coord(c), g);
        sq += kernels::sum_squares(g);
    }
    return std::sqrt(sq);
}

double max_point_norm(const PointSet& v) {
    double best = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        double s = 0.0;
        for (std::size_t c = 0; c < v.dim(); ++c) s += v.at(i, c) * v.at(i, c);
        best = std::max(best, s);
    }
    return std::sqrt(best);
}

// Memory step on (lambda, control) given a fresh residual in w. Returns
// the max control-point displacement.
double advance_mlspia(const CurveProblem& p, PointSet& lambda, PointSet& control, CurveWork& w) {
    const WeightSet& wt = p.weights;
    for (std::size_t c = 0; c < p.data.dim(); ++c) {
        auto t = w.t.coord(c);
        std::fill(t.begin(), t.end(), 0.0);
        kernels::scatter_add(p.basis, lambda.coord(c), t);
        kernels::gather(p.basis, t, w.bp.coord(c));
        kernels::memory_update(1.0 - wt.omega, lambda.coord(c), -wt.gamma * wt.upsilon, w.bp.coord(c), wt.omega,
                               w.residual.coord(c));
        kernels::axpy(wt.upsilon, t, control.coord(c));
    }
    return std::fabs(wt.upsilon) * max_point_norm(w.t);
}

double advance_lspia(const CurveProblem& p, PointSet& control, CurveWork& w) {
    const double mu = *p.weights.mu;
    for (std::size_t c = 0; c < p.data.dim(); ++c) kernels::axpy(mu, w.grad.coord(c), control.coord(c));
    return std::fabs(mu) * max_point_norm(w.grad);
}

double require_mu(const WeightSet& w) {
    if (!w.mu || !(*w.mu > 0.0)) throw ConfigError("baseline iteration needs a positive mu");
    return *w.mu;
}

}  // namespace

IterationState init_state(const CurveProblem& p, InitStrategy strategy) {
    check_problem(p);
    const std::size_t m = p.data.size();
    const std::size_t n = p.basis.cols();
    const std::size_t d = p.data.dim();
    IterationState s{PointSet(m, d), PointSet(n, d), 0, std::nullopt, std::nullopt};
    const double omega = p.weights.omega;
    if (strategy == InitStrategy::I) {
        for (std::size_t c = 0; c < d; ++c) {
            auto lam = s.lambda.coord(c);
            const auto q = p.data.coord(c);
            for (std::size_t j = 0; j < m; ++j) lam[j] = omega * q[j];
        }
        return s;
    }
    const auto idx = strategy_ii_indices(m, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t c = 0; c < d; ++c) s.control.at(i, c) = p.data.at(idx[i], c);
    CurveWork w(m, n, d);
    residual_and_error(p, s.control, w);
    for (std::size_t c = 0; c < d; ++c) {
        auto lam = s.lambda.coord(c);
        const auto r = w.residual.coord(c);
        for (std::size_t j = 0; j < m; ++j) lam[j] = omega * r[j];
    }
    return s;
}

IterationState init_state_custom(const CurveProblem& p, PointSet control, PointSet lambda) {
    check_problem(p);
    check_state(p, control, lambda);
    return IterationState{std::move(lambda), std::move(control), 0, std::nullopt, std::nullopt};
}

PointSet lspia_step(const CurveProblem& p, const PointSet& control) {
    check_problem(p);
    require_mu(p.weights);
    if (control.size() != p.basis.cols() || control.dim() != p.data.dim())
        throw ConfigError("control points do not match the problem");
    CurveWork w(p.data.size(), p.basis.cols(), p.data.dim());
    residual_and_error(p, control, w);
    PointSet next = control;
    advance_lspia(p, next, w);
    return next;
}

IterationState mlspia_step(const CurveProblem& p, const IterationState& s) {
    check_problem(p);
    check_state(p, s.control, s.lambda);
    CurveWork w(p.data.size(), p.basis.cols(), p.data.dim());
    const double e = residual_and_error(p, s.control, w);
    IterationState next{s.lambda, s.control, s.k + 1, std::nullopt, std::nullopt};
    advance_mlspia(p, next.lambda, next.control, w);
    if (!next.lambda.all_finite() || !next.control.all_finite()) {
        std::ostringstream msg;
        msg << "non-finite iterate at step " << next.k << " (E_" << s.k << " = " << e << ")";
        throw DivergenceError(msg.str());
    }
    return next;
}

IterationState mlspia_step_per_point(const CurveProblem& p, const IterationState& s) {
    check_problem(p);
    check_state(p, s.control, s.lambda);
    const std::size_t m = p.data.size();
    const std::size_t n = p.basis.cols();
    const std::size_t d = p.data.dim();
    const CollocationMatrix& B = p.basis;
    const WeightSet& w = p.weights;

    // delta_i^k = upsilon sum_j B_i(t_j) (Q_j - C^k(t_j))
    PointSet small_delta(n, d);
    for (std::size_t j = 0; j < m; ++j) {
        for (std::size_t c = 0; c < d; ++c) {
            double ck = 0.0;
            for (std::size_t i = 0; i < n; ++i) ck += B(j, i) * s.control.at(i, c);
            const double diff = p.data.at(j, c) - ck;
            for (std::size_t i = 0; i < n; ++i) small_delta.at(i, c) += w.upsilon * B(j, i) * diff;
        }
    }

    PointSet delta(n, d);
    if (s.k == 0) {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t c = 0; c < d; ++c) {
                double sum = 0.0;
                for (std::size_t j = 0; j < m; ++j) sum += B(j, i) * s.lambda.at(j, c);
                delta.at(i, c) = w.upsilon * sum;
            }
    } else {
        if (!s.delta_prev || !s.small_delta_prev)
            throw ConfigError("per-point step at k > 0 needs the previous Delta and delta");
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t c = 0; c < d; ++c)
                delta.at(i, c) = (1.0 - w.omega) * s.delta_prev->at(i, c) + w.gamma * small_delta.at(i, c) +
                                 (w.omega - w.gamma) * s.small_delta_prev->at(i, c);
    }

    IterationState next{s.lambda, s.control, s.k + 1, std::nullopt, std::nullopt};
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t c = 0; c < d; ++c) next.control.at(i, c) += delta.at(i, c);
    if (!next.control.all_finite()) throw DivergenceError("non-finite iterate at step " + std::to_string(next.k));
    next.delta_prev = std::move(delta);
    next.small_delta_prev = std::move(small_delta);
    return next;
}

double error_E(const CurveProblem& p, const PointSet& control) {
    check_problem(p);
    if (control.size() != p.basis.cols() || control.dim() != p.data.dim())
        throw ConfigError("control points do not match the problem");
    CurveWork w(p.data.size(), p.basis.cols(), p.data.dim());
    return residual_and_error(p, control, w);
}

CurveRun run(const CurveProblem& p, Method method, InitStrategy strategy) {
    return run(p, method, init_state(p, strategy));
}

CurveRun run(const CurveProblem& p, Method method, IterationState initial) {
    check_problem(p);
    check_state(p, initial.control, initial.lambda);
    if (method == Method::lspia) require_mu(p.weights);
    if (!(p.tolerance > 0.0)) throw ConfigError("tolerance must be positive");

    using clock = std::chrono::steady_clock;
    const auto start = clock::now();
    CurveWork w(p.data.size(), p.basis.cols(), p.data.dim());
    PointSet lambda = std::move(initial.lambda);
    PointSet control = std::move(initial.control);

    CurveRun out;
    double e0 = 0.0;
    double last_step = 0.0;
    for (std::size_t k = 0;; ++k) {
        const double e = residual_and_error(p, control, w);
        const double elapsed = std::chrono::duration<double>(clock::now() - start).count();
        out.history.push_back({k, e, last_step, elapsed});
        if (k == 0) e0 = e;
        out.iterations = k;
        out.final_error = e;
        if (!std::isfinite(e) || e > 1e12 * std::max(e0, 1.0)) {
            out.status = RunStatus::diverged;
            break;
        }
        if (e < p.tolerance) {
            out.status = RunStatus::converged;
            break;
        }
        if (k >= p.max_iterations) {
            out.status = RunStatus::max_iterations;
            break;
        }
        last_step = method == Method::mlspia ? advance_mlspia(p, lambda, control, w) : advance_lspia(p, control, w);
    }
    out.control = std::move(control);
    out.seconds = std::chrono::duration<double>(clock::now() - start).count();
    return out;
}

PointSet direct_ls(const CurveProblem& p) {
    check_problem(p);
    const std::size_t m = p.data.size();
    const std::size_t d = p.data.dim();
    DenseMatrix rhs(m, d);
    for (std::size_t j = 0; j < m; ++j)
        for (std::size_t c = 0; c < d; ++c) rhs(j, c) = p.data.at(j, c);
    const LeastSquaresSolution sol = min_norm_solve(p.basis, rhs);
    PointSet out(p.basis.cols(), d);
    for (std::size_t i = 0; i < out.size(); ++i)
        for (std::size_t c = 0; c < d; ++c) out.at(i, c) = sol.x(i, c);
    return out;
}

double max_deviation(const FittedCurve& a, const FittedCurve& b, std::size_t samples) {
    if (!(a.knots == b.knots)) throw ConfigError("curves use different knot vectors");
    if (a.control.size() != b.control.size() || a.control.dim() != b.control.dim())
        throw ConfigError("curves have different control point layouts");
    if (samples < 2) throw ConfigError("need at least 2 samples");
    double best = 0.0;
    for (std::size_t s = 0; s < samples; ++s) {
        const double t = static_cast<double>(s) / static_cast<double>(samples - 1);
        best = std::max(best, (eval_curve(a.control, a.knots, t) - eval_curve(b.control, b.knots, t)).norm());
    }
    return best;
}

}  // namespace piafit
