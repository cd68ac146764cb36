#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>
#include <string>

#include "piafit/errors.hpp"
#include "piafit/iterate.hpp"
#include "piafit/kernels.hpp"

namespace piafit {

SurfaceProblem make_surface_problem(PointGrid data, std::size_t n_u, std::size_t n_v, int degree) {
    const SurfaceParams params = grid_params(data);
    KnotVector ku = make_knots(params.u, n_u, degree);
    KnotVector kv = make_knots(params.v, n_v, degree);
    CollocationMatrix bu = collocate(ku, params.u);
    CollocationMatrix bv = collocate(kv, params.v);
    const OptimalWeights opt = optimal_weights_surface(extreme_singular_values(bu), extreme_singular_values(bv));
    return SurfaceProblem{std::move(data), std::move(bu), std::move(bv), std::move(ku), std::move(kv), opt.weights};
}

namespace {

void check_problem(const SurfaceProblem& p) {
    if (p.data.rows() != p.basis_u.rows() || p.data.cols() != p.basis_v.rows())
        throw ConfigError("data grid does not match the collocation matrices");
    if (p.data.size() == 0) throw ConfigError("empty data grid");
}

void check_control(const SurfaceProblem& p, const PointGrid& control) {
    if (control.rows() != p.basis_u.cols() || control.cols() != p.basis_v.cols() || control.dim() != p.data.dim())
        throw ConfigError("control net does not match the problem");
}

void check_lambda(const SurfaceProblem& p, const PointGrid& lambda) {
    if (lambda.rows() != p.data.rows() || lambda.cols() != p.data.cols() || lambda.dim() != p.data.dim())
        throw ConfigError("auxiliary grid does not match the problem");
}

// Grid matrices are row-major blocks of one coordinate.
struct GridOps {
    const CollocationMatrix& bu;  // m1 × n1
    const CollocationMatrix& bv;  // m2 × n2
    std::vector<double> scratch;  // max(n1 × m2, m1 × n2)

    GridOps(const CollocationMatrix& u, const CollocationMatrix& v)
        : bu(u), bv(v), scratch(std::max(u.cols() * v.rows(), u.rows() * v.cols())) {}

    // out (m1 × m2) = Bu X Bv^T, X is n1 × n2.
    void apply(std::span<const double> X, std::span<double> out) {
        const std::size_t n1 = bu.cols(), n2 = bv.cols(), m1 = bu.rows(), m2 = bv.rows();
        std::span<double> W(scratch.data(), n1 * m2);
        for (std::size_t a = 0; a < n1; ++a) kernels::gather(bv, X.subspan(a * n2, n2), W.subspan(a * m2, m2));
        std::fill(out.begin(), out.end(), 0.0);
        for (std::size_t h = 0; h < m1; ++h) {
            const auto vals = bu.row(h);
            const std::size_t f = bu.first(h);
            auto dst = out.subspan(h * m2, m2);
            for (std::size_t k = 0; k < vals.size(); ++k)
                if (vals[k] != 0.0) kernels::axpy(vals[k], W.subspan((f + k) * m2, m2), dst);
        }
    }

    // out (n1 × n2) = Bu^T Y Bv, Y is m1 × m2.
    void apply_transpose(std::span<const double> Y, std::span<double> out) {
        const std::size_t n2 = bv.cols(), m1 = bu.rows(), m2 = bv.rows();
        std::span<double> V(scratch.data(), m1 * n2);
        std::fill(V.begin(), V.end(), 0.0);
        for (std::size_t h = 0; h < m1; ++h) kernels::scatter_add(bv, Y.subspan(h * m2, m2), V.subspan(h * n2, n2));
        std::fill(out.begin(), out.end(), 0.0);
        for (std::size_t h = 0; h < m1; ++h) {
            const auto vals = bu.row(h);
            const std::size_t f = bu.first(h);
            const auto src = V.subspan(h * n2, n2);
            for (std::size_t k = 0; k < vals.size(); ++k)
                if (vals[k] != 0.0) kernels::axpy(vals[k], src, out.subspan((f + k) * n2, n2));
        }
    }
};

struct SurfaceWork {
    GridOps ops;
    PointGrid bp;        // B P, then B T
    PointGrid residual;  // Q - B P
    PointGrid grad;      // B^T residual
    PointGrid t;         // B^T Lambda

    explicit SurfaceWork(const SurfaceProblem& p)
        : ops(p.basis_u, p.basis_v),
          bp(p.data.rows(), p.data.cols(), p.data.dim()),
          residual(p.data.rows(), p.data.cols(), p.data.dim()),
          grad(p.basis_u.cols(), p.basis_v.cols(), p.data.dim()),
          t(p.basis_u.cols(), p.basis_v.cols(), p.data.dim()) {}
};

double residual_and_error(const SurfaceProblem& p, const PointGrid& control, SurfaceWork& w) {
    double sq = 0.0;
    for (std::size_t c = 0; c < p.data.dim(); ++c) {
        w.ops.apply(control.coord(c), w.bp.coord(c));
        kernels::difference(p.data.coord(c), w.bp.coord(c), w.residual.coord(c));
        w.ops.apply_transpose(w.residual.coord(c), w.grad.coord(c));
        sq += kernels::sum_squares(w.grad.coord(c));
    }
    return std::sqrt(sq);
}

double max_point_norm(const PointGrid& g) {
    double best = 0.0;
    for (std::size_t i = 0; i < g.rows(); ++i)
        for (std::size_t j = 0; j < g.cols(); ++j) {
            double s = 0.0;
            for (std::size_t c = 0; c < g.dim(); ++c) s += g.at(i, j, c) * g.at(i, j, c);
            best = std::max(best, s);
        }
    return std::sqrt(best);
}

double advance_mlspia(const SurfaceProblem& p, PointGrid& lambda, PointGrid& control, SurfaceWork& w) {
    const WeightSet& wt = p.weights;
    for (std::size_t c = 0; c < p.data.dim(); ++c) {
        w.ops.apply_transpose(lambda.coord(c), w.t.coord(c));
        w.ops.apply(w.t.coord(c), w.bp.coord(c));
        kernels::memory_update(1.0 - wt.omega, lambda.coord(c), -wt.gamma * wt.upsilon, w.bp.coord(c), wt.omega,
                               w.residual.coord(c));
        kernels::axpy(wt.upsilon, w.t.coord(c), control.coord(c));
    }
    return std::fabs(wt.upsilon) * max_point_norm(w.t);
}

double advance_lspia(const SurfaceProblem& p, PointGrid& control, SurfaceWork& w) {
    const double mu = *p.weights.mu;
    for (std::size_t c = 0; c < p.data.dim(); ++c) kernels::axpy(mu, w.grad.coord(c), control.coord(c));
    return std::fabs(mu) * max_point_norm(w.grad);
}

void require_mu(const WeightSet& w) {
    if (!w.mu || !(*w.mu > 0.0)) throw ConfigError("baseline iteration needs a positive mu");
}

}  // namespace

SurfaceState init_state(const SurfaceProblem& p, InitStrategy strategy) {
    check_problem(p);
    const std::size_t m1 = p.data.rows(), m2 = p.data.cols(), d = p.data.dim();
    const std::size_t n1 = p.basis_u.cols(), n2 = p.basis_v.cols();
    SurfaceState s{PointGrid(m1, m2, d), PointGrid(n1, n2, d), 0, std::nullopt, std::nullopt};
    const double omega = p.weights.omega;
    if (strategy == InitStrategy::I) {
        for (std::size_t c = 0; c < d; ++c) {
            const auto q = p.data.coord(c);
            auto lam = s.lambda.coord(c);
            for (std::size_t i = 0; i < q.size(); ++i) lam[i] = omega * q[i];
        }
        return s;
    }
    const auto iu = strategy_ii_indices(m1, n1);
    const auto iv = strategy_ii_indices(m2, n2);
    for (std::size_t a = 0; a < n1; ++a)
        for (std::size_t b = 0; b < n2; ++b)
            for (std::size_t c = 0; c < d; ++c) s.control.at(a, b, c) = p.data.at(iu[a], iv[b], c);
    SurfaceWork w(p);
    residual_and_error(p, s.control, w);
    for (std::size_t c = 0; c < d; ++c) {
        const auto r = w.residual.coord(c);
        auto lam = s.lambda.coord(c);
        for (std::size_t i = 0; i < r.size(); ++i) lam[i] = omega * r[i];
    }
    return s;
}

SurfaceState init_state_custom(const SurfaceProblem& p, PointGrid control, PointGrid lambda) {
    check_problem(p);
    check_control(p, control);
    check_lambda(p, lambda);
    return SurfaceState{std::move(lambda), std::move(control), 0, std::nullopt, std::nullopt};
}

PointGrid lspia_surface_step(const SurfaceProblem& p, const PointGrid& control) {
    check_problem(p);
    check_control(p, control);
    require_mu(p.weights);
    SurfaceWork w(p);
    residual_and_error(p, control, w);
    PointGrid next = control;
    advance_lspia(p, next, w);
    return next;
}

SurfaceState mlspia_surface_step(const SurfaceProblem& p, const SurfaceState& s) {
    check_problem(p);
    check_control(p, s.control);
    check_lambda(p, s.lambda);
    SurfaceWork w(p);
    const double e = residual_and_error(p, s.control, w);
    SurfaceState next{s.lambda, s.control, s.k + 1, std::nullopt, std::nullopt};
    advance_mlspia(p, next.lambda, next.control, w);
    if (!next.lambda.all_finite() || !next.control.all_finite()) {
        std::ostringstream msg;
        msg << "non-finite iterate at step " << next.k << " (E_" << s.k << " = " << e << ")";
        throw DivergenceError(msg.str());
    }
    return next;
}

SurfaceState mlspia_surface_step_per_entry(const SurfaceProblem& p, const SurfaceState& s) {
    check_problem(p);
    check_control(p, s.control);
    check_lambda(p, s.lambda);
    const std::size_t m1 = p.data.rows(), m2 = p.data.cols(), d = p.data.dim();
    const std::size_t n1 = p.basis_u.cols(), n2 = p.basis_v.cols();
    const CollocationMatrix& phi = p.basis_u;
    const CollocationMatrix& psi = p.basis_v;
    const WeightSet& w = p.weights;

    // surface values C^k(t_h, s_l)
    PointGrid ck(m1, m2, d);
    for (std::size_t h = 0; h < m1; ++h)
        for (std::size_t l = 0; l < m2; ++l)
            for (std::size_t c = 0; c < d; ++c) {
                double sum = 0.0;
                for (std::size_t i1 = 0; i1 < n1; ++i1)
                    for (std::size_t j1 = 0; j1 < n2; ++j1) sum += phi(h, i1) * psi(l, j1) * s.control.at(i1, j1, c);
                ck.at(h, l, c) = sum;
            }

    PointGrid small_delta(n1, n2, d);
    PointGrid delta(n1, n2, d);
    for (std::size_t i = 0; i < n1; ++i)
        for (std::size_t j = 0; j < n2; ++j)
            for (std::size_t c = 0; c < d; ++c) {
                double sd = 0.0;
                double d0 = 0.0;
                for (std::size_t h = 0; h < m1; ++h)
                    for (std::size_t l = 0; l < m2; ++l) {
                        const double basis = phi(h, i) * psi(l, j);
                        sd += basis * (p.data.at(h, l, c) - ck.at(h, l, c));
                        if (s.k == 0) d0 += basis * s.lambda.at(h, l, c);
                    }
                small_delta.at(i, j, c) = w.upsilon * sd;
                if (s.k == 0) delta.at(i, j, c) = w.upsilon * d0;
            }

    if (s.k > 0) {
        if (!s.delta_prev || !s.small_delta_prev)
            throw ConfigError("per-entry step at k > 0 needs the previous Delta and delta");
        for (std::size_t i = 0; i < n1; ++i)
            for (std::size_t j = 0; j < n2; ++j)
                for (std::size_t c = 0; c < d; ++c)
                    delta.at(i, j, c) = (1.0 - w.omega) * s.delta_prev->at(i, j, c) +
                                        w.gamma * small_delta.at(i, j, c) +
                                        (w.omega - w.gamma) * s.small_delta_prev->at(i, j, c);
    }

    SurfaceState next{s.lambda, s.control, s.k + 1, std::nullopt, std::nullopt};
    for (std::size_t i = 0; i < n1; ++i)
        for (std::size_t j = 0; j < n2; ++j)
            for (std::size_t c = 0; c < d; ++c) next.control.at(i, j, c) += delta.at(i, j, c);
    if (!next.control.all_finite()) throw DivergenceError("non-finite iterate at step " + std::to_string(next.k));
    next.delta_prev = std::move(delta);
    next.small_delta_prev = std::move(small_delta);
    return next;
}

double error_E(const SurfaceProblem& p, const PointGrid& control) {
    check_problem(p);
    check_control(p, control);
    SurfaceWork w(p);
    return residual_and_error(p, control, w);
}

SurfaceRun run(const SurfaceProblem& p, Method method, InitStrategy strategy) {
    return run(p, method, init_state(p, strategy));
}

SurfaceRun run(const SurfaceProblem& p, Method method, SurfaceState initial) {
    check_problem(p);
    check_control(p, initial.control);
    check_lambda(p, initial.lambda);
    if (method == Method::lspia) require_mu(p.weights);
    if (!(p.tolerance > 0.0)) throw ConfigError("tolerance must be positive");

    using clock = std::chrono::steady_clock;
    const auto start = clock::now();
    SurfaceWork w(p);
    PointGrid lambda = std::move(initial.lambda);
    PointGrid control = std::move(initial.control);

    SurfaceRun out;
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

PointGrid direct_ls(const SurfaceProblem& p) {
    check_problem(p);
    const std::size_t m1 = p.data.rows(), m2 = p.data.cols(), d = p.data.dim();
    const std::size_t n1 = p.basis_u.cols(), n2 = p.basis_v.cols();
    // Y = Bu^+ Q, columns (l, c) for all coordinates at once
    DenseMatrix q(m1, m2 * d);
    for (std::size_t h = 0; h < m1; ++h)
        for (std::size_t l = 0; l < m2; ++l)
            for (std::size_t c = 0; c < d; ++c) q(h, l * d + c) = p.data.at(h, l, c);
    const LeastSquaresSolution y = min_norm_solve(p.basis_u, q);  // n1 × (m2 d)
    // X^T = Bv^+ Y^T
    DenseMatrix yt(m2, n1 * d);
    for (std::size_t a = 0; a < n1; ++a)
        for (std::size_t l = 0; l < m2; ++l)
            for (std::size_t c = 0; c < d; ++c) yt(l, a * d + c) = y.x(a, l * d + c);
    const LeastSquaresSolution xt = min_norm_solve(p.basis_v, yt);  // n2 × (n1 d)
    PointGrid out(n1, n2, d);
    for (std::size_t a = 0; a < n1; ++a)
        for (std::size_t b = 0; b < n2; ++b)
            for (std::size_t c = 0; c < d; ++c) out.at(a, b, c) = xt.x(b, a * d + c);
    return out;
}

double max_deviation(const FittedSurface& a, const FittedSurface& b, std::size_t samples) {
    if (!(a.knots_u == b.knots_u) || !(a.knots_v == b.knots_v)) throw ConfigError("surfaces use different knot vectors");
    if (a.control.rows() != b.control.rows() || a.control.cols() != b.control.cols() ||
        a.control.dim() != b.control.dim())
        throw ConfigError("surfaces have different control net layouts");
    if (samples < 2) throw ConfigError("need at least 2 samples");
    double best = 0.0;
    for (std::size_t i = 0; i < samples; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(samples - 1);
        for (std::size_t j = 0; j < samples; ++j) {
            const double s = static_cast<double>(j) / static_cast<double>(samples - 1);
            const Point pa = eval_surface(a.control, a.knots_u, a.knots_v, t, s);
            const Point pb = eval_surface(b.control, b.knots_u, b.knots_v, t, s);
            best = std::max(best, (pa - pb).norm());
        }
    }
    return best;
}

}  // namespace piafit
