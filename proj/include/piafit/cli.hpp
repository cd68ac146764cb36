#pragma once

// Commands behind the pia-fit tool. Each command writes its artifacts into
// the configured output directory and returns a JSON report plus the
// process exit code: 0 converged, 2 iteration limit, 3 diverged, 1 usage or
// configuration error.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "piafit/io.hpp"
#include "piafit/iterate.hpp"

namespace piafit::cli {

enum class Mode { fit_curve, fit_surface, compare, analyze, table1, generate };

Mode parse_mode(std::string_view name);
const char* to_string(Mode m);

inline constexpr int kExitConverged = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitMaxIterations = 2;
inline constexpr int kExitDiverged = 3;

struct RunConfig {
    Mode mode = Mode::fit_curve;
    // data: a file, or a named synthetic example
    std::optional<std::string> input;
    io::DataFormat format = io::DataFormat::csv;
    std::optional<std::string> example;
    std::size_t size = 501;     ///< m, or rows for grid examples
    std::size_t size_v = 0;     ///< cols for grid examples, 0 means = size
    std::uint64_t seed = 0;

    int degree = 3;
    std::size_t ctrl = 0;       ///< n for curves
    std::size_t ctrl_u = 0;
    std::size_t ctrl_v = 0;

    bool manual_weights = false;
    double omega = 0.0;
    double gamma = 0.0;
    double upsilon = 0.0;
    std::optional<double> mu;
    Method method = Method::mlspia;  ///< fit commands only

    InitStrategy init = InitStrategy::II;
    double tolerance = kDefaultTolerance;
    std::size_t max_iterations = kDefaultMaxIterations;
    std::size_t samples = 200;
    std::size_t timing_runs = 10;  ///< 0 disables timing
    std::string out_dir = ".";
};

/// Throws ConfigError for non-positive counts or tolerance and missing data.
void validate(const RunConfig& c);

nlohmann::json to_json(const RunConfig& c);
RunConfig config_from_json(const nlohmann::json& j);

/// Fit outcome as written to report.json. Timing is absent when timing_runs
/// is 0, which makes reports byte-identical across reruns.
struct FitReport {
    RunConfig config;
    bool surface = false;
    std::vector<SpectralSummary> spectra;  ///< one per parametric direction
    WeightSet weights;
    Method method = Method::mlspia;
    RunStatus status = RunStatus::max_iterations;
    std::size_t iterations = 0;
    double final_error = 0.0;
    std::vector<ConvergenceRecord> history;  ///< elapsed_seconds not stored
    io::PointData control;
    double max_deviation_vs_ls = 0.0;
    std::optional<double> wall_seconds;
    std::optional<double> cpu_seconds_mean;
};

nlohmann::json to_json(const FitReport& r);
FitReport report_from_json(const nlohmann::json& j);

struct CommandResult {
    int exit_code = kExitConverged;
    nlohmann::json report;
};

int exit_code_for(RunStatus s);

/// Curve or surface data described by the config.
io::PointData load_data(const RunConfig& c);

/// fit-curve / fit-surface: report.json, control_points.csv, samples.csv,
/// history.csv and (curves) curvature.csv.
CommandResult cmd_fit(const RunConfig& c);
/// Both methods on one problem: compare.json plus each method's history.
CommandResult cmd_compare(const RunConfig& c);
/// Spectrum, weights, predicted radii, and eigenvalue checks of the assembled
/// iteration matrix when m + n <= 500: analyze.json.
CommandResult cmd_analyze(const RunConfig& c);
/// Strategy I and II step counts for n in {m/12, m/10, m/8, m/6, m/4, m/2,
/// 2m/3}: table1.json and table1.csv.
CommandResult cmd_table1(const RunConfig& c);
/// Writes the example points as CSV (curves) or grid JSON.
CommandResult cmd_generate(const RunConfig& c);

CommandResult dispatch(const RunConfig& c);

std::vector<std::size_t> table1_counts(std::size_t m);

}  // namespace piafit::cli
