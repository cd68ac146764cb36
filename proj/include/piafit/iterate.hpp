#pragma once

// Progressive-iterative least-squares fitting of B-spline curves and
// tensor-product surfaces.
//
// Memory iteration (matrix form, per coordinate):
//   Lambda <- (1 - omega) Lambda - gamma upsilon B (B^T Lambda) + omega (Q - B P)
//   P      <- P + upsilon B^T Lambda
// Baseline iteration:
//   P <- P + mu B^T (Q - B P)
// Surfaces replace B X by B1 X B2^T and B^T Y by B1^T Y B2; the Kronecker
// product is never formed.

#include <chrono>
#include <cstddef>
#include <optional>
#include <vector>

#include "piafit/params.hpp"
#include "piafit/points.hpp"
#include "piafit/spectral.hpp"
#include "piafit/splines.hpp"

namespace piafit {

inline constexpr double kDefaultTolerance = 1e-7;
inline constexpr std::size_t kDefaultMaxIterations = 100000;

enum class InitStrategy { I, II };
enum class Method { mlspia, lspia };
enum class RunStatus { converged, max_iterations, diverged };

const char* to_string(Method m);
const char* to_string(RunStatus s);
const char* to_string(InitStrategy s);

struct CurveProblem {
    PointSet data;
    CollocationMatrix basis;
    /// Absent for problems built directly from a collocation matrix.
    std::optional<KnotVector> knots;
    ParameterList params;
    WeightSet weights;
    double tolerance = kDefaultTolerance;
    std::size_t max_iterations = kDefaultMaxIterations;
};

/// Chord parameters, averaged knots and collocation for n control points of
/// the given degree, with optimal weights (including mu) from the spectrum.
CurveProblem make_curve_problem(PointSet data, std::size_t n, int degree = 3);

struct SurfaceProblem {
    PointGrid data;
    CollocationMatrix basis_u;  ///< rows × n_u, along the first grid index
    CollocationMatrix basis_v;  ///< cols × n_v
    std::optional<KnotVector> knots_u;
    std::optional<KnotVector> knots_v;
    WeightSet weights;
    double tolerance = kDefaultTolerance;
    std::size_t max_iterations = kDefaultMaxIterations;
};

SurfaceProblem make_surface_problem(PointGrid data, std::size_t n_u, std::size_t n_v, int degree = 3);

/// Lambda over data points, P over control points, step counter k. The
/// per-point formulation also carries Delta^{k-1} and delta^{k-1}.
struct IterationState {
    PointSet lambda;
    PointSet control;
    std::size_t k = 0;
    std::optional<PointSet> delta_prev;
    std::optional<PointSet> small_delta_prev;
};

struct SurfaceState {
    PointGrid lambda;
    PointGrid control;
    std::size_t k = 0;
    std::optional<PointGrid> delta_prev;
    std::optional<PointGrid> small_delta_prev;
};

/// 0-based data indices of strategy II control points: f(1) = 1,
/// f(i) = floor(m (i-1)/(n-1)) + 1 for 1 < i < n, and f(n) = m (1-based).
std::vector<std::size_t> strategy_ii_indices(std::size_t m, std::size_t n);

/// I: P = 0, Lambda = omega Q. II: P from strategy_ii_indices,
/// Lambda = omega (Q - B P).
IterationState init_state(const CurveProblem& p, InitStrategy strategy);
IterationState init_state_custom(const CurveProblem& p, PointSet control, PointSet lambda);
SurfaceState init_state(const SurfaceProblem& p, InitStrategy strategy);
SurfaceState init_state_custom(const SurfaceProblem& p, PointGrid control, PointGrid lambda);

/// P + mu B^T (Q - B P). Requires weights.mu > 0.
PointSet lspia_step(const CurveProblem& p, const PointSet& control);
PointGrid lspia_surface_step(const SurfaceProblem& p, const PointGrid& control);

/// One memory step in matrix form. Throws DivergenceError on non-finite output.
IterationState mlspia_step(const CurveProblem& p, const IterationState& s);
SurfaceState mlspia_surface_step(const SurfaceProblem& p, const SurfaceState& s);

/// Reference per-point formulation:
///   Delta^0 = upsilon sum_j B_i(t_j) Lambda^0_j
///   Delta^k = (1 - omega) Delta^{k-1} + gamma delta^k + (omega - gamma) delta^{k-1}
///   delta^k = upsilon sum_j B_i(t_j) (Q_j - C^k(t_j))
///   P^{k+1} = P^k + Delta^k
/// Evaluated by explicit summation; Lambda is only read at k = 0.
IterationState mlspia_step_per_point(const CurveProblem& p, const IterationState& s);
/// Per-entry surface formulation by direct quadruple summation (small grids).
SurfaceState mlspia_surface_step_per_entry(const SurfaceProblem& p, const SurfaceState& s);

/// E = ||B^T (B P - Q)||_F over all coordinates.
double error_E(const CurveProblem& p, const PointSet& control);
double error_E(const SurfaceProblem& p, const PointGrid& control);

struct ConvergenceRecord {
    std::size_t k = 0;
    double error = 0.0;         ///< E_k
    double max_step = 0.0;      ///< max_i |P_i^k - P_i^{k-1}|, 0 at k = 0
    double elapsed_seconds = 0.0;
};

template <class Net>
struct RunResult {
    Net control;
    std::vector<ConvergenceRecord> history;
    RunStatus status = RunStatus::max_iterations;
    std::size_t iterations = 0;
    double final_error = 0.0;
    double seconds = 0.0;
};

using CurveRun = RunResult<PointSet>;
using SurfaceRun = RunResult<PointGrid>;

/// Iterate until E_k < tolerance, max_iterations, or divergence
/// (E_k non-finite or above 1e12 max(E_0, 1)).
CurveRun run(const CurveProblem& p, Method method, InitStrategy strategy);
CurveRun run(const CurveProblem& p, Method method, IterationState initial);
SurfaceRun run(const SurfaceProblem& p, Method method, InitStrategy strategy);
SurfaceRun run(const SurfaceProblem& p, Method method, SurfaceState initial);

/// Minimum-norm least-squares control points (pseudo-inverse below the
/// default rank tolerance).
PointSet direct_ls(const CurveProblem& p);
PointGrid direct_ls(const SurfaceProblem& p);

struct FittedCurve {
    KnotVector knots;
    PointSet control;
};

struct FittedSurface {
    KnotVector knots_u;
    KnotVector knots_v;
    PointGrid control;
};

/// Max distance between two curves over `samples` uniform parameters.
/// Throws ConfigError when the knot vectors differ.
double max_deviation(const FittedCurve& a, const FittedCurve& b, std::size_t samples = 4096);
/// Over a samples × samples parameter grid.
double max_deviation(const FittedSurface& a, const FittedSurface& b, std::size_t samples = 256);

}  // namespace piafit
