// pia-fit: least-squares B-spline fitting by progressive iteration.

#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "piafit/cli.hpp"
#include "piafit/errors.hpp"
#include "piafit/io.hpp"
#include "piafit/kernels.hpp"

using piafit::cli::Mode;
using piafit::cli::RunConfig;

namespace {

struct Flags {
    std::string input, format = "csv", example, weights = "optimal", init = "II", method = "mlspia", out_dir = ".";
    std::string config, kernels;
    std::size_t size = 501, size_v = 0, ctrl = 0, ctrl_u = 0, ctrl_v = 0, samples = 200, timing_runs = 10;
    std::size_t max_iters = piafit::kDefaultMaxIterations;
    std::uint64_t seed = 0;
    int degree = 3;
    double omega = 0, gamma = 0, upsilon = 0, mu = 0, tol = piafit::kDefaultTolerance;
};

void add_options(CLI::App* sub, Flags& f) {
    sub->add_option("--input", f.input, "points CSV or grid JSON file");
    sub->add_option("--format", f.format, "input format")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--example", f.example, "synthetic data set instead of --input")
        ->check(CLI::IsMember(piafit::io::example_names()));
    sub->add_option("--size", f.size, "example size m (rows for grids)");
    sub->add_option("--size-v", f.size_v, "example grid columns (default: --size)");
    sub->add_option("--seed", f.seed, "seed for random examples");
    sub->add_option("--degree", f.degree, "spline degree");
    sub->add_option("--ctrl", f.ctrl, "control point count n");
    sub->add_option("--ctrl-u", f.ctrl_u, "control count along grid rows");
    sub->add_option("--ctrl-v", f.ctrl_v, "control count along grid columns");
    sub->add_option("--weights", f.weights, "optimal or manual")->check(CLI::IsMember({"optimal", "manual"}));
    sub->add_option("--omega", f.omega);
    sub->add_option("--gamma", f.gamma);
    sub->add_option("--upsilon", f.upsilon);
    sub->add_option("--mu", f.mu, "baseline step size");
    sub->add_option("--method", f.method, "mlspia or lspia (fit commands)")
        ->check(CLI::IsMember({"mlspia", "lspia"}));
    sub->add_option("--init", f.init, "initial strategy I or II")->check(CLI::IsMember({"I", "II"}));
    sub->add_option("--tol", f.tol, "stop when E_k < tol");
    sub->add_option("--max-iters", f.max_iters);
    sub->add_option("--samples", f.samples, "curve samples (per direction for surfaces)");
    sub->add_option("--timing-runs", f.timing_runs, "timed repetitions for the mean CPU time, 0 to skip");
    sub->add_option("--out-dir", f.out_dir);
    sub->add_option("--config", f.config, "start from the config echoed in a report JSON");
    sub->add_option("--kernels", f.kernels, "force scalar or avx2 kernels")->check(CLI::IsMember({"scalar", "avx2"}));
}

bool given(const CLI::App* sub, const char* name) { return sub->count(name) > 0; }

RunConfig build_config(const CLI::App* sub, const Flags& f, Mode mode) {
    RunConfig c;
    if (given(sub, "--config")) {
        const auto doc = nlohmann::json::parse(piafit::io::read_file(f.config));
        c = piafit::cli::config_from_json(doc.contains("config") ? doc.at("config") : doc);
    }
    c.mode = mode;
    if (given(sub, "--input")) {
        c.input = f.input;
        c.example.reset();
    }
    if (given(sub, "--example")) {
        c.example = f.example;
        c.input.reset();
    }
    if (given(sub, "--format")) c.format = piafit::io::parse_format(f.format);
    if (given(sub, "--size")) c.size = f.size;
    if (given(sub, "--size-v")) c.size_v = f.size_v;
    if (given(sub, "--seed")) c.seed = f.seed;
    if (given(sub, "--degree")) c.degree = f.degree;
    if (given(sub, "--ctrl")) c.ctrl = f.ctrl;
    if (given(sub, "--ctrl-u")) c.ctrl_u = f.ctrl_u;
    if (given(sub, "--ctrl-v")) c.ctrl_v = f.ctrl_v;
    if (given(sub, "--weights")) c.manual_weights = f.weights == "manual";
    if (given(sub, "--omega")) c.omega = f.omega;
    if (given(sub, "--gamma")) c.gamma = f.gamma;
    if (given(sub, "--upsilon")) c.upsilon = f.upsilon;
    if (given(sub, "--mu")) c.mu = f.mu;
    if (given(sub, "--method")) c.method = f.method == "lspia" ? piafit::Method::lspia : piafit::Method::mlspia;
    if (given(sub, "--init")) c.init = f.init == "I" ? piafit::InitStrategy::I : piafit::InitStrategy::II;
    if (given(sub, "--tol")) c.tolerance = f.tol;
    if (given(sub, "--max-iters")) c.max_iterations = f.max_iters;
    if (given(sub, "--samples")) c.samples = f.samples;
    if (given(sub, "--timing-runs")) c.timing_runs = f.timing_runs;
    if (given(sub, "--out-dir")) c.out_dir = f.out_dir;
    if (c.manual_weights && !(given(sub, "--omega") && given(sub, "--gamma") && given(sub, "--upsilon")) &&
        !given(sub, "--config"))
        throw piafit::ConfigError("--weights manual needs --omega, --gamma and --upsilon");
    return c;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Least-squares B-spline curve and surface fitting by progressive iteration"};
    app.require_subcommand(1);
    Flags flags;
    const std::map<std::string, Mode> modes{{"fit-curve", Mode::fit_curve}, {"fit-surface", Mode::fit_surface},
                                            {"compare", Mode::compare},     {"analyze", Mode::analyze},
                                            {"table1", Mode::table1},       {"generate", Mode::generate}};
    std::vector<CLI::App*> subs;
    for (const auto& [name, mode] : modes) {
        auto* sub = app.add_subcommand(name);
        add_options(sub, flags);
        subs.push_back(sub);
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : piafit::cli::kExitUsage;
    }

    try {
        for (auto* sub : subs) {
            if (!sub->parsed()) continue;
            if (given(sub, "--kernels") &&
                !piafit::kernels::select(flags.kernels == "avx2" ? piafit::kernels::Isa::avx2
                                                                 : piafit::kernels::Isa::scalar))
                std::cerr << "pia-fit: " << flags.kernels << " kernels unavailable, using "
                          << piafit::kernels::active_name() << "\n";
            const RunConfig cfg = build_config(sub, flags, modes.at(sub->get_name()));
            const auto result = piafit::cli::dispatch(cfg);
            nlohmann::json summary = result.report;
            summary.erase("history");
            summary.erase("control");
            summary.erase("spectra");
            summary.erase("spectrum");
            std::cout << summary.dump(2) << "\n";
            return result.exit_code;
        }
    } catch (const std::exception& e) {
        std::cerr << "pia-fit: " << e.what() << "\n";
        return piafit::cli::kExitUsage;
    }
    return piafit::cli::kExitUsage;
}
