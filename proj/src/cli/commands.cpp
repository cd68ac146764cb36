#include "piafit/cli.hpp"

#include <algorithm>
#include <cmath>
#include <ctime>

#include "piafit/errors.hpp"
#include "piafit/params.hpp"
#include "piafit/spectral.hpp"

namespace piafit::cli {

using nlohmann::json;
namespace fs = std::filesystem;

Mode parse_mode(std::string_view name) {
    if (name == "fit-curve") return Mode::fit_curve;
    if (name == "fit-surface") return Mode::fit_surface;
    if (name == "compare") return Mode::compare;
    if (name == "analyze") return Mode::analyze;
    if (name == "table1") return Mode::table1;
    if (name == "generate") return Mode::generate;
    throw ConfigError("unknown mode '" + std::string(name) + "'");
}

const char* to_string(Mode m) {
    switch (m) {
        case Mode::fit_curve: return "fit-curve";
        case Mode::fit_surface: return "fit-surface";
        case Mode::compare: return "compare";
        case Mode::analyze: return "analyze";
        case Mode::table1: return "table1";
        case Mode::generate: return "generate";
    }
    return "unknown";
}

namespace {

InitStrategy parse_init(std::string_view s) {
    if (s == "I") return InitStrategy::I;
    if (s == "II") return InitStrategy::II;
    throw ConfigError("unknown init strategy '" + std::string(s) + "' (expected I or II)");
}

Method parse_method(std::string_view s) {
    if (s == "mlspia") return Method::mlspia;
    if (s == "lspia") return Method::lspia;
    throw ConfigError("unknown method '" + std::string(s) + "'");
}

RunStatus parse_status(std::string_view s) {
    if (s == "converged") return RunStatus::converged;
    if (s == "max_iterations") return RunStatus::max_iterations;
    if (s == "diverged") return RunStatus::diverged;
    throw ConfigError("unknown status '" + std::string(s) + "'");
}

}  // namespace

void validate(const RunConfig& c) {
    if (c.input && c.example) throw ConfigError("give either an input file or an example, not both");
    if (!c.input && !c.example) throw ConfigError("no data: give --input or --example");
    if (c.degree < 1) throw ConfigError("degree must be at least 1");
    if (!(c.tolerance > 0.0) || !std::isfinite(c.tolerance)) throw ConfigError("tolerance must be positive");
    if (c.max_iterations == 0) throw ConfigError("max iterations must be positive");
    if (c.samples < 2) throw ConfigError("samples must be at least 2");
    if (c.example && c.size == 0) throw ConfigError("example size must be positive");
    const bool fits = c.mode == Mode::fit_curve || c.mode == Mode::fit_surface || c.mode == Mode::compare ||
                      c.mode == Mode::analyze;
    if (fits) {
        const bool surface = c.mode == Mode::fit_surface || (c.example && io::is_grid_example(*c.example)) ||
                             (c.input && c.format == io::DataFormat::json);
        if (surface) {
            if ((c.ctrl_u == 0 && c.ctrl == 0) || (c.ctrl_v == 0 && c.ctrl == 0))
                throw ConfigError("control counts must be positive (--ctrl-u/--ctrl-v)");
        } else if (c.ctrl == 0) {
            throw ConfigError("control count must be positive (--ctrl)");
        }
    }
}

json to_json(const RunConfig& c) {
    json j{{"mode", to_string(c.mode)},
           {"format", io::to_string(c.format)},
           {"size", c.size},
           {"size_v", c.size_v},
           {"seed", c.seed},
           {"degree", c.degree},
           {"ctrl", c.ctrl},
           {"ctrl_u", c.ctrl_u},
           {"ctrl_v", c.ctrl_v},
           {"weights", c.manual_weights ? "manual" : "optimal"},
           {"method", to_string(c.method)},
           {"init", to_string(c.init)},
           {"tol", c.tolerance},
           {"max_iters", c.max_iterations},
           {"samples", c.samples},
           {"timing_runs", c.timing_runs},
           {"out_dir", c.out_dir}};
    j["input"] = c.input ? json(*c.input) : json(nullptr);
    j["example"] = c.example ? json(*c.example) : json(nullptr);
    if (c.manual_weights) {
        j["omega"] = c.omega;
        j["gamma"] = c.gamma;
        j["upsilon"] = c.upsilon;
    }
    j["mu"] = c.mu ? json(*c.mu) : json(nullptr);
    return j;
}

RunConfig config_from_json(const json& j) {
    try {
        RunConfig c;
        c.mode = parse_mode(j.at("mode").get<std::string>());
        c.format = io::parse_format(j.at("format").get<std::string>());
        if (!j.at("input").is_null()) c.input = j.at("input").get<std::string>();
        if (!j.at("example").is_null()) c.example = j.at("example").get<std::string>();
        c.size = j.at("size").get<std::size_t>();
        c.size_v = j.at("size_v").get<std::size_t>();
        c.seed = j.at("seed").get<std::uint64_t>();
        c.degree = j.at("degree").get<int>();
        c.ctrl = j.at("ctrl").get<std::size_t>();
        c.ctrl_u = j.at("ctrl_u").get<std::size_t>();
        c.ctrl_v = j.at("ctrl_v").get<std::size_t>();
        c.manual_weights = j.at("weights").get<std::string>() == "manual";
        if (c.manual_weights) {
            c.omega = j.at("omega").get<double>();
            c.gamma = j.at("gamma").get<double>();
            c.upsilon = j.at("upsilon").get<double>();
        }
        if (!j.at("mu").is_null()) c.mu = j.at("mu").get<double>();
        c.method = parse_method(j.at("method").get<std::string>());
        c.init = parse_init(j.at("init").get<std::string>());
        c.tolerance = j.at("tol").get<double>();
        c.max_iterations = j.at("max_iters").get<std::size_t>();
        c.samples = j.at("samples").get<std::size_t>();
        c.timing_runs = j.at("timing_runs").get<std::size_t>();
        c.out_dir = j.at("out_dir").get<std::string>();
        return c;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad config: ") + e.what());
    }
}

namespace {

json spectrum_json(const SpectralSummary& s) {
    return json{{"rank", s.rank},
                {"sigma_max", s.sigma_max},
                {"sigma_min", s.sigma_min},
                {"tolerance", s.tolerance},
                {"singular_values", s.singular_values}};
}

SpectralSummary spectrum_from_json(const json& j) {
    SpectralSummary s;
    s.rank = j.at("rank").get<std::size_t>();
    s.sigma_max = j.at("sigma_max").get<double>();
    s.sigma_min = j.at("sigma_min").get<double>();
    s.tolerance = j.at("tolerance").get<double>();
    s.singular_values = j.at("singular_values").get<std::vector<double>>();
    return s;
}

json weights_json(const WeightSet& w) {
    json j{{"omega", w.omega}, {"gamma", w.gamma}, {"upsilon", w.upsilon}};
    j["mu"] = w.mu ? json(*w.mu) : json(nullptr);
    return j;
}

WeightSet weights_from_json(const json& j) {
    WeightSet w;
    w.omega = j.at("omega").get<double>();
    w.gamma = j.at("gamma").get<double>();
    w.upsilon = j.at("upsilon").get<double>();
    if (!j.at("mu").is_null()) w.mu = j.at("mu").get<double>();
    return w;
}

json points_json(const PointSet& p) {
    json a = json::array();
    for (std::size_t i = 0; i < p.size(); ++i) {
        json q = json::array();
        for (std::size_t c = 0; c < p.dim(); ++c) q.push_back(p.at(i, c));
        a.push_back(std::move(q));
    }
    return a;
}

json grid_points_json(const PointGrid& g) {
    json a = json::array();
    for (std::size_t i = 0; i < g.rows(); ++i)
        for (std::size_t j = 0; j < g.cols(); ++j) {
            json q = json::array();
            for (std::size_t c = 0; c < g.dim(); ++c) q.push_back(g.at(i, j, c));
            a.push_back(std::move(q));
        }
    return a;
}

json history_json(const std::vector<ConvergenceRecord>& h) {
    json a = json::array();
    for (const auto& r : h) a.push_back(json{r.k, r.error, r.max_step});
    return a;
}

}  // namespace

json to_json(const FitReport& r) {
    json j{{"config", to_json(r.config)},
           {"kind", r.surface ? "surface" : "curve"},
           {"method", to_string(r.method)},
           {"weights", weights_json(r.weights)},
           {"status", to_string(r.status)},
           {"iterations", r.iterations},
           {"final_error", r.final_error},
           {"max_deviation_vs_ls", r.max_deviation_vs_ls},
           {"history_columns", {"k", "E_k", "max_step"}},
           {"history", history_json(r.history)}};
    json spectra = json::array();
    for (const auto& s : r.spectra) spectra.push_back(spectrum_json(s));
    j["spectra"] = std::move(spectra);
    if (r.surface) {
        const auto& g = std::get<PointGrid>(r.control);
        j["control"] = json{{"rows", g.rows()}, {"cols", g.cols()}, {"points", grid_points_json(g)}};
    } else {
        j["control"] = json{{"points", points_json(std::get<PointSet>(r.control))}};
    }
    if (r.wall_seconds || r.cpu_seconds_mean) {
        json t = json::object();
        if (r.wall_seconds) t["wall_seconds"] = *r.wall_seconds;
        if (r.cpu_seconds_mean) t["cpu_seconds_mean"] = *r.cpu_seconds_mean;
        t["runs"] = r.config.timing_runs;
        j["timing"] = std::move(t);
    }
    return j;
}

FitReport report_from_json(const json& j) {
    try {
        FitReport r;
        r.config = config_from_json(j.at("config"));
        r.surface = j.at("kind").get<std::string>() == "surface";
        r.method = parse_method(j.at("method").get<std::string>());
        r.weights = weights_from_json(j.at("weights"));
        r.status = parse_status(j.at("status").get<std::string>());
        r.iterations = j.at("iterations").get<std::size_t>();
        r.final_error = j.at("final_error").get<double>();
        r.max_deviation_vs_ls = j.at("max_deviation_vs_ls").get<double>();
        for (const auto& h : j.at("history"))
            r.history.push_back({h.at(0).get<std::size_t>(), h.at(1).get<double>(), h.at(2).get<double>(), 0.0});
        for (const auto& s : j.at("spectra")) r.spectra.push_back(spectrum_from_json(s));
        const json& ctrl = j.at("control");
        const json& pts = ctrl.at("points");
        const std::size_t dim = pts.empty() ? 0 : pts.at(0).size();
        if (r.surface) {
            PointGrid g(ctrl.at("rows").get<std::size_t>(), ctrl.at("cols").get<std::size_t>(), dim);
            if (pts.size() != g.size()) throw ConfigError("control grid size mismatch");
            for (std::size_t k = 0; k < pts.size(); ++k)
                for (std::size_t c = 0; c < dim; ++c) g.at(k / g.cols(), k % g.cols(), c) = pts[k].at(c).get<double>();
            r.control = std::move(g);
        } else {
            PointSet p(pts.size(), dim);
            for (std::size_t k = 0; k < pts.size(); ++k)
                for (std::size_t c = 0; c < dim; ++c) p.at(k, c) = pts[k].at(c).get<double>();
            r.control = std::move(p);
        }
        if (j.contains("timing")) {
            const json& t = j.at("timing");
            if (t.contains("wall_seconds")) r.wall_seconds = t.at("wall_seconds").get<double>();
            if (t.contains("cpu_seconds_mean")) r.cpu_seconds_mean = t.at("cpu_seconds_mean").get<double>();
        }
        return r;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad report: ") + e.what());
    }
}

int exit_code_for(RunStatus s) {
    switch (s) {
        case RunStatus::converged: return kExitConverged;
        case RunStatus::max_iterations: return kExitMaxIterations;
        case RunStatus::diverged: return kExitDiverged;
    }
    return kExitUsage;
}

io::PointData load_data(const RunConfig& c) {
    if (c.input) return io::load_points(*c.input, c.format);
    if (!c.example) throw ConfigError("no data: give --input or --example");
    const std::string& name = *c.example;
    const bool grid = io::is_grid_example(name) || (name == "random" && c.mode == Mode::fit_surface);
    if (grid) return io::gen_grid_example(name, c.size, c.size_v ? c.size_v : c.size, c.seed);
    return io::gen_curve_example(name, c.size, c.seed);
}

namespace {

PointSet curve_data(const RunConfig& c) {
    io::PointData d = load_data(c);
    if (auto* p = std::get_if<PointSet>(&d)) return std::move(*p);
    throw ConfigError("this command needs curve data (points CSV)");
}

PointGrid grid_data(const RunConfig& c) {
    io::PointData d = load_data(c);
    if (auto* g = std::get_if<PointGrid>(&d)) return std::move(*g);
    throw ConfigError("this command needs grid data (grid JSON)");
}

bool wants_surface(const RunConfig& c) {
    if (c.mode == Mode::fit_surface) return true;
    if (c.mode == Mode::fit_curve) return false;
    if (c.input) return c.format == io::DataFormat::json;
    return c.example && io::is_grid_example(*c.example);
}

struct CurveSetup {
    CurveProblem problem;
    SpectralSummary spectrum;
    OptimalWeights optimal;
};

struct SurfaceSetup {
    SurfaceProblem problem;
    SpectralSummary spectrum_u;
    SpectralSummary spectrum_v;
    OptimalWeights optimal;
};

WeightSet chosen_weights(const RunConfig& c, const OptimalWeights& opt) {
    if (!c.manual_weights) {
        WeightSet w = opt.weights;
        if (c.mu) w.mu = *c.mu;
        return w;
    }
    WeightSet w{c.omega, c.gamma, c.upsilon, c.mu ? c.mu : opt.weights.mu};
    return w;
}

// Manual weights are checked against the convergence region before any step.
void check_weights(const RunConfig& c, const WeightSet& w, double sigma_max, Method method) {
    if (method == Method::mlspia) {
        if (!c.manual_weights) return;
        const WeightCheck chk = validate_weights(w, sigma_max);
        if (!chk) throw ConfigError("refusing to iterate: weights outside the convergence region (" + chk.reason + ")");
    } else {
        const double limit = 2.0 / (sigma_max * sigma_max);
        if (!w.mu || !(*w.mu > 0.0) || !(*w.mu < limit))
            throw ConfigError("refusing to iterate: mu must lie in (0, 2/sigma_1^2) = (0, " + io::format_double(limit) + ")");
    }
}

CurveSetup curve_setup(const RunConfig& c) {
    PointSet data = curve_data(c);
    if (c.ctrl > data.size()) throw ConfigError("more control points than data points");
    CurveProblem p = make_curve_problem(std::move(data), c.ctrl, c.degree);
    SpectralSummary s = extreme_singular_values(p.basis);
    OptimalWeights opt = optimal_weights(s);
    p.weights = chosen_weights(c, opt);
    p.tolerance = c.tolerance;
    p.max_iterations = c.max_iterations;
    return {std::move(p), std::move(s), opt};
}

std::size_t ctrl_u(const RunConfig& c) { return c.ctrl_u ? c.ctrl_u : c.ctrl; }
std::size_t ctrl_v(const RunConfig& c) { return c.ctrl_v ? c.ctrl_v : c.ctrl; }

SurfaceSetup surface_setup(const RunConfig& c) {
    PointGrid data = grid_data(c);
    SurfaceProblem p = make_surface_problem(std::move(data), ctrl_u(c), ctrl_v(c), c.degree);
    SpectralSummary su = extreme_singular_values(p.basis_u);
    SpectralSummary sv = extreme_singular_values(p.basis_v);
    OptimalWeights opt = optimal_weights_surface(su, sv);
    p.weights = chosen_weights(c, opt);
    p.tolerance = c.tolerance;
    p.max_iterations = c.max_iterations;
    return {std::move(p), std::move(su), std::move(sv), opt};
}

template <class Problem>
std::optional<double> mean_cpu_seconds(const RunConfig& c, const Problem& p, Method m) {
    if (c.timing_runs == 0) return std::nullopt;
    double total = 0.0;
    for (std::size_t r = 0; r < c.timing_runs; ++r) {
        const std::clock_t start = std::clock();
        (void)run(p, m, c.init);
        total += static_cast<double>(std::clock() - start) / CLOCKS_PER_SEC;
    }
    return total / static_cast<double>(c.timing_runs);
}

fs::path out_dir(const RunConfig& c) {
    fs::path dir(c.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output directory " + dir.string() + ": " + ec.message());
    return dir;
}

std::string history_csv(const std::vector<ConvergenceRecord>& h) {
    std::string out = "k,E_k\n";
    for (const auto& r : h) out += std::to_string(r.k) + "," + io::format_double(r.error) + "\n";
    return out;
}

std::string curve_samples_csv(const PointSet& ctrl, const KnotVector& kv, std::size_t k) {
    std::string out = ctrl.dim() == 3 ? "t,x,y,z\n" : "t,x,y\n";
    for (std::size_t i = 0; i < k; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(k - 1);
        const Point p = eval_curve(ctrl, kv, t);
        out += io::format_double(t);
        for (std::size_t c = 0; c < p.dim(); ++c) out += "," + io::format_double(p[c]);
        out += "\n";
    }
    return out;
}

std::string curvature_csv(const PointSet& ctrl, const KnotVector& kv, std::size_t k) {
    std::string out = ctrl.dim() == 3 ? "t,x,y,z,curvature\n" : "t,x,y,curvature\n";
    for (const auto& s : curvature_samples(ctrl, kv, k)) {
        out += io::format_double(s.t);
        for (std::size_t c = 0; c < s.position.dim(); ++c) out += "," + io::format_double(s.position[c]);
        out += ",";
        if (s.curvature) out += io::format_double(*s.curvature);
        out += "\n";
    }
    return out;
}

std::string surface_samples_csv(const PointGrid& net, const KnotVector& ku, const KnotVector& kv, std::size_t k) {
    std::string out = "t,s,x,y,z\n";
    for (std::size_t i = 0; i < k; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(k - 1);
        for (std::size_t j = 0; j < k; ++j) {
            const double s = static_cast<double>(j) / static_cast<double>(k - 1);
            const Point p = eval_surface(net, ku, kv, t, s);
            out += io::format_double(t) + "," + io::format_double(s);
            for (std::size_t c = 0; c < p.dim(); ++c) out += "," + io::format_double(p[c]);
            out += "\n";
        }
    }
    return out;
}

std::vector<ConvergenceRecord> without_elapsed(std::vector<ConvergenceRecord> h) {
    for (auto& r : h) r.elapsed_seconds = 0.0;
    return h;
}

CommandResult fit_curve(const RunConfig& c) {
    CurveSetup s = curve_setup(c);
    const CurveProblem& p = s.problem;
    check_weights(c, p.weights, s.spectrum.sigma_max, c.method);

    const CurveRun result = run(p, c.method, c.init);
    FitReport rep;
    rep.config = c;
    rep.spectra = {s.spectrum};
    rep.weights = p.weights;
    rep.method = c.method;
    rep.status = result.status;
    rep.iterations = result.iterations;
    rep.final_error = result.final_error;
    rep.history = without_elapsed(result.history);
    rep.control = result.control;
    const KnotVector& kv = *p.knots;
    if (result.status != RunStatus::diverged)
        rep.max_deviation_vs_ls = max_deviation(FittedCurve{kv, result.control}, FittedCurve{kv, direct_ls(p)});
    else
        rep.max_deviation_vs_ls = std::numeric_limits<double>::infinity();
    if (c.timing_runs > 0) {
        rep.wall_seconds = result.seconds;
        rep.cpu_seconds_mean = mean_cpu_seconds(c, p, c.method);
    }

    const fs::path dir = out_dir(c);
    json j = to_json(rep);
    if (!std::isfinite(rep.max_deviation_vs_ls)) j["max_deviation_vs_ls"] = nullptr;
    io::write_file_atomic(dir / "control_points.csv", io::points_csv(result.control));
    io::write_file_atomic(dir / "history.csv", history_csv(result.history));
    if (result.control.all_finite()) {
        io::write_file_atomic(dir / "samples.csv", curve_samples_csv(result.control, kv, c.samples));
        if (kv.degree() >= 2) io::write_file_atomic(dir / "curvature.csv", curvature_csv(result.control, kv, c.samples));
    }
    io::write_file_atomic(dir / "report.json", j.dump(2) + "\n");
    return {exit_code_for(result.status), std::move(j)};
}

CommandResult fit_surface(const RunConfig& c) {
    SurfaceSetup s = surface_setup(c);
    const SurfaceProblem& p = s.problem;
    check_weights(c, p.weights, s.spectrum_u.sigma_max * s.spectrum_v.sigma_max, c.method);

    const SurfaceRun result = run(p, c.method, c.init);
    FitReport rep;
    rep.config = c;
    rep.surface = true;
    rep.spectra = {s.spectrum_u, s.spectrum_v};
    rep.weights = p.weights;
    rep.method = c.method;
    rep.status = result.status;
    rep.iterations = result.iterations;
    rep.final_error = result.final_error;
    rep.history = without_elapsed(result.history);
    rep.control = result.control;
    const KnotVector& ku = *p.knots_u;
    const KnotVector& kv = *p.knots_v;
    if (result.status != RunStatus::diverged)
        rep.max_deviation_vs_ls =
            max_deviation(FittedSurface{ku, kv, result.control}, FittedSurface{ku, kv, direct_ls(p)});
    else
        rep.max_deviation_vs_ls = std::numeric_limits<double>::infinity();
    if (c.timing_runs > 0) {
        rep.wall_seconds = result.seconds;
        rep.cpu_seconds_mean = mean_cpu_seconds(c, p, c.method);
    }

    const fs::path dir = out_dir(c);
    json j = to_json(rep);
    if (!std::isfinite(rep.max_deviation_vs_ls)) j["max_deviation_vs_ls"] = nullptr;
    io::write_file_atomic(dir / "control_points.csv", io::grid_points_csv(result.control));
    io::write_file_atomic(dir / "history.csv", history_csv(result.history));
    if (result.control.all_finite())
        io::write_file_atomic(dir / "samples.csv", surface_samples_csv(result.control, ku, kv, c.samples));
    io::write_file_atomic(dir / "report.json", j.dump(2) + "\n");
    return {exit_code_for(result.status), std::move(j)};
}

json method_json(const RunConfig& c, Method m, RunStatus status, std::size_t iterations, double error,
                 std::optional<double> cpu, double dev_ls) {
    json j{{"method", to_string(m)},
           {"status", to_string(status)},
           {"iterations", iterations},
           {"final_error", error},
           {"max_deviation_vs_ls", dev_ls}};
    if (c.timing_runs > 0 && cpu) j["cpu_seconds_mean"] = *cpu;
    return j;
}

}  // namespace

CommandResult cmd_fit(const RunConfig& c) {
    validate(c);
    return wants_surface(c) ? fit_surface(c) : fit_curve(c);
}

CommandResult cmd_compare(const RunConfig& c) {
    validate(c);
    const fs::path dir = out_dir(c);
    json rep{{"config", to_json(c)}};
    int code = kExitConverged;
    if (wants_surface(c)) {
        SurfaceSetup s = surface_setup(c);
        const SurfaceProblem& p = s.problem;
        const double s1 = s.spectrum_u.sigma_max * s.spectrum_v.sigma_max;
        check_weights(c, p.weights, s1, Method::mlspia);
        check_weights(c, p.weights, s1, Method::lspia);
        const SurfaceRun ml = run(p, Method::mlspia, c.init);
        const SurfaceRun ls = run(p, Method::lspia, c.init);
        const FittedSurface lsq{*p.knots_u, *p.knots_v, direct_ls(p)};
        const FittedSurface a{*p.knots_u, *p.knots_v, ml.control};
        const FittedSurface b{*p.knots_u, *p.knots_v, ls.control};
        rep["kind"] = "surface";
        rep["weights"] = weights_json(p.weights);
        rep["mlspia"] = method_json(c, Method::mlspia, ml.status, ml.iterations, ml.final_error,
                                    mean_cpu_seconds(c, p, Method::mlspia), max_deviation(a, lsq));
        rep["lspia"] = method_json(c, Method::lspia, ls.status, ls.iterations, ls.final_error,
                                   mean_cpu_seconds(c, p, Method::lspia), max_deviation(b, lsq));
        rep["max_deviation"] = max_deviation(a, b);
        io::write_file_atomic(dir / "history_mlspia.csv", history_csv(ml.history));
        io::write_file_atomic(dir / "history_lspia.csv", history_csv(ls.history));
        code = std::max(exit_code_for(ml.status), exit_code_for(ls.status));
    } else {
        CurveSetup s = curve_setup(c);
        const CurveProblem& p = s.problem;
        check_weights(c, p.weights, s.spectrum.sigma_max, Method::mlspia);
        check_weights(c, p.weights, s.spectrum.sigma_max, Method::lspia);
        const CurveRun ml = run(p, Method::mlspia, c.init);
        const CurveRun ls = run(p, Method::lspia, c.init);
        const FittedCurve lsq{*p.knots, direct_ls(p)};
        const FittedCurve a{*p.knots, ml.control};
        const FittedCurve b{*p.knots, ls.control};
        rep["kind"] = "curve";
        rep["weights"] = weights_json(p.weights);
        rep["mlspia"] = method_json(c, Method::mlspia, ml.status, ml.iterations, ml.final_error,
                                    mean_cpu_seconds(c, p, Method::mlspia), max_deviation(a, lsq));
        rep["lspia"] = method_json(c, Method::lspia, ls.status, ls.iterations, ls.final_error,
                                   mean_cpu_seconds(c, p, Method::lspia), max_deviation(b, lsq));
        rep["max_deviation"] = max_deviation(a, b);
        io::write_file_atomic(dir / "history_mlspia.csv", history_csv(ml.history));
        io::write_file_atomic(dir / "history_lspia.csv", history_csv(ls.history));
        code = std::max(exit_code_for(ml.status), exit_code_for(ls.status));
    }
    io::write_file_atomic(dir / "compare.json", rep.dump(2) + "\n");
    return {code, std::move(rep)};
}

CommandResult cmd_analyze(const RunConfig& c) {
    validate(c);
    json rep{{"config", to_json(c)}};
    if (wants_surface(c)) {
        SurfaceSetup s = surface_setup(c);
        const SpectralSummary k = kronecker_summary(s.spectrum_u, s.spectrum_v);
        rep["kind"] = "surface";
        rep["spectrum_u"] = spectrum_json(s.spectrum_u);
        rep["spectrum_v"] = spectrum_json(s.spectrum_v);
        rep["sigma_max"] = k.sigma_max;
        rep["sigma_min"] = k.sigma_min;
        rep["rank"] = k.rank;
        rep["n"] = s.problem.basis_u.cols() * s.problem.basis_v.cols();
        rep["optimal_weights"] = weights_json(s.optimal.weights);
        rep["mlspia_radius"] = s.optimal.mlspia_radius;
        rep["lspia_radius"] = s.optimal.lspia_radius;
        rep["theoretical_radius"] = theoretical_radius(s.optimal.weights, k.singular_values);
        rep["h_verification"] = json{{"performed", false},
                                     {"note", "the surface iteration matrix is never assembled"}};
    } else {
        CurveSetup s = curve_setup(c);
        const CollocationMatrix& B = s.problem.basis;
        const WeightSet& w = s.optimal.weights;
        rep["kind"] = "curve";
        rep["m"] = B.rows();
        rep["n"] = B.cols();
        rep["spectrum"] = spectrum_json(s.spectrum);
        rep["sigma_max"] = s.spectrum.sigma_max;
        rep["sigma_min"] = s.spectrum.sigma_min;
        rep["rank"] = s.spectrum.rank;
        rep["rank_tolerance"] = s.spectrum.tolerance;
        rep["power_sigma_max"] = power_sigma_max(B);
        rep["optimal_weights"] = weights_json(w);
        rep["mlspia_radius"] = s.optimal.mlspia_radius;
        rep["lspia_radius"] = s.optimal.lspia_radius;
        rep["theoretical_radius"] = theoretical_radius(w, s.spectrum.singular_values);
        const std::size_t size = B.rows() + B.cols();
        if (size <= kIterationMatrixCap) {
            const DenseMatrix H = iteration_matrix(B, w);
            const auto lambdas = predicted_eigenvalues(w, s.spectrum.singular_values, B.rows(), B.cols());
            double worst = 0.0;
            for (const auto& l : lambdas) worst = std::max(worst, scaled_shifted_determinant(H, l));
            rep["h_verification"] = json{{"performed", true},
                                         {"size", size},
                                         {"eigenvalues_checked", lambdas.size()},
                                         {"max_scaled_determinant", worst}};
        } else {
            rep["h_verification"] =
                json{{"performed", false},
                     {"note", "m + n = " + std::to_string(size) + " exceeds the cap of " +
                                  std::to_string(kIterationMatrixCap) + "; H not assembled"}};
        }
    }
    io::write_file_atomic(out_dir(c) / "analyze.json", rep.dump(2) + "\n");
    return {kExitConverged, std::move(rep)};
}

std::vector<std::size_t> table1_counts(std::size_t m) {
    return {m / 12, m / 10, m / 8, m / 6, m / 4, m / 2, 2 * m / 3};
}

CommandResult cmd_table1(const RunConfig& c) {
    if (!c.input && !c.example) throw ConfigError("no data: give --input or --example");
    RunConfig base = c;
    base.mode = Mode::table1;
    const PointSet data = curve_data(base);
    const std::size_t m = data.size();
    json rows = json::array();
    std::string csv = "n,strategy_I,strategy_II\n";
    int code = kExitConverged;
    for (std::size_t n : table1_counts(m)) {
        if (n <= static_cast<std::size_t>(c.degree) || n > m) continue;
        CurveProblem p = make_curve_problem(data, n, c.degree);
        p.tolerance = c.tolerance;
        p.max_iterations = c.max_iterations;
        const CurveRun r1 = run(p, Method::mlspia, InitStrategy::I);
        const CurveRun r2 = run(p, Method::mlspia, InitStrategy::II);
        rows.push_back(json{{"n", n},
                            {"strategy_I", r1.iterations},
                            {"strategy_II", r2.iterations},
                            {"status_I", to_string(r1.status)},
                            {"status_II", to_string(r2.status)}});
        csv += std::to_string(n) + "," + std::to_string(r1.iterations) + "," + std::to_string(r2.iterations) + "\n";
        code = std::max({code, exit_code_for(r1.status), exit_code_for(r2.status)});
    }
    json rep{{"config", to_json(base)}, {"m", m}, {"rows", std::move(rows)}};
    const fs::path dir = out_dir(c);
    io::write_file_atomic(dir / "table1.csv", csv);
    io::write_file_atomic(dir / "table1.json", rep.dump(2) + "\n");
    return {code, std::move(rep)};
}

CommandResult cmd_generate(const RunConfig& c) {
    if (!c.example) throw ConfigError("generate needs --example");
    const io::PointData d = load_data(c);
    const fs::path dir = out_dir(c);
    json rep{{"config", to_json(c)}};
    if (const auto* p = std::get_if<PointSet>(&d)) {
        const fs::path file = dir / (*c.example + ".csv");
        io::write_file_atomic(file, io::points_csv(*p));
        rep["file"] = file.string();
        rep["points"] = p->size();
    } else {
        const auto& g = std::get<PointGrid>(d);
        const fs::path file = dir / (*c.example + ".json");
        io::write_file_atomic(file, io::grid_json(g));
        rep["file"] = file.string();
        rep["rows"] = g.rows();
        rep["cols"] = g.cols();
    }
    return {kExitConverged, std::move(rep)};
}

CommandResult dispatch(const RunConfig& c) {
    switch (c.mode) {
        case Mode::fit_curve:
        case Mode::fit_surface: return cmd_fit(c);
        case Mode::compare: return cmd_compare(c);
        case Mode::analyze: return cmd_analyze(c);
        case Mode::table1: return cmd_table1(c);
        case Mode::generate: return cmd_generate(c);
    }
    throw ConfigError("unknown mode");
}

}  // namespace piafit::cli
