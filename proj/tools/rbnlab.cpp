// Command-line front end: experiment kinds, path generation, occupation
// utilities, sewing demos, and parameter sweeps.
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rbnlab/harness.hpp"
#include "rbnlab/occupation.hpp"
#include "rbnlab/sample_path.hpp"
#include "rbnlab/sewing.hpp"
#include "rbnlab/spde.hpp"

namespace {

using namespace rbnlab;

struct CommonOpts {
    std::string config_file;
    std::string out;
    std::vector<std::string> sets;
    int jobs = 0;
    bool override_inadmissible = false;
};

ExperimentConfig build_config(const CommonOpts& opts, const std::string& kind) {
    ExperimentConfig cfg;
    if (!opts.config_file.empty()) cfg = ExperimentConfig::from_file(opts.config_file);
    cfg.kind = kind;
    for (const auto& kv : opts.sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("--set expects key=value, got '" + kv + "'");
        cfg.apply_key(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (!opts.out.empty()) cfg.out_dir = opts.out;
    if (opts.jobs > 0) cfg.jobs = opts.jobs;
    if (opts.override_inadmissible) cfg.override_inadmissible = true;
    return cfg;
}

int run_kind(const CommonOpts& opts, const std::string& kind) {
    const auto cfg = build_config(opts, kind);
    const auto report = run(cfg);
    print_report(report);
    return report.mandatory_pass() ? 0 : 1;
}

void attach_common(CLI::App* sc, CommonOpts& opts) {
    sc->add_option("--config", opts.config_file, "experiment config file (key = value lines)");
    sc->add_option("--out", opts.out, "output directory (default $RBNLAB_OUT or ./out)");
    sc->add_option("--set", opts.sets, "override a config key, e.g. --set H=0.3")
        ->take_all();
    sc->add_option("--jobs", opts.jobs, "worker threads");
    sc->add_flag("--override-inadmissible", opts.override_inadmissible,
                 "run even when (H, p, gamma0) violates the standing assumptions");
}

std::filesystem::path ensure_out(const std::string& out) {
    std::filesystem::path dir = out.empty() ? "out" : out;
    std::filesystem::create_directories(dir);
    return dir;
}

int cmd_paths_gen(std::size_t n, double T, double H, std::uint64_t seed, std::uint64_t stream,
                  const std::string& out_file) {
    const auto path = generate_fbm(n, T, H, seed, {false, stream});
    std::ofstream f(out_file);
    if (!f) throw std::runtime_error("cannot open '" + out_file + "' for writing");
    f.precision(17);
    f << "t,w\n";
    for (std::size_t j = 0; j <= n; ++j) f << path.time(j) << "," << path.values[j] << "\n";

    nlohmann::json side;
    side["n_steps"] = n;
    side["horizon"] = T;
    side["hurst"] = H;
    side["seed"] = seed;
    side["stream"] = stream;
    side["cholesky_fallback"] = path.cholesky_fallback;
    side["terminal"] = path.values.back();
    std::ofstream(out_file + ".json") << side.dump(2) << "\n";
    std::cout << "wrote " << out_file << " (terminal " << path.values.back() << ")\n";
    return 0;
}

int cmd_occ_localtime(std::size_t n, double T, double H, std::uint64_t seed, std::size_t bins,
                      const std::string& out) {
    const auto path = generate_fbm(n, T, H, seed, {false, 0});
    const auto grid = SpatialGrid::covering(path, bins, 0.5);
    const auto slice = local_time(path, grid, n, Smoothing::histogram());
    const auto dir = ensure_out(out);
    std::ofstream f(dir / "localtime.csv");
    f.precision(17);
    f << "x,L\n";
    double mass = 0.0;
    for (std::size_t i = 0; i < grid.n_bins; ++i) {
        f << grid.center(i) << "," << slice.values[i] << "\n";
        mass += slice.values[i] * grid.dx();
    }
    std::cout << "local time at t = " << T << ": mass " << mass << " (target " << T << ")\n"
              << "wrote " << (dir / "localtime.csv").string() << "\n";
    return 0;
}

int cmd_occ_avgfield(std::size_t n, double T, double H, std::uint64_t seed, std::size_t bins,
                     const std::string& f_name, const std::string& out) {
    const auto path = generate_fbm(n, T, H, seed, {false, 0});
    const auto grid = SpatialGrid::covering(path, bins, 0.5);
    std::function<double(double)> f;
    if (f_name == "one") f = [](double) { return 1.0; };
    else if (f_name == "cos") f = [](double x) { return std::cos(x); };
    else if (f_name == "gauss") f = [](double x) { return std::exp(-x * x); };
    else throw std::invalid_argument("unknown test function '" + f_name + "'");

    const auto field = averaged_field(path, f, 0, n, grid, AveragingMethod::convolution);
    const auto dir = ensure_out(out);
    std::ofstream file(dir / "avgfield.csv");
    file.precision(17);
    file << "x,Tf\n";
    for (std::size_t i = 0; i < grid.n_bins; ++i)
        file << grid.center(i) << "," << field.values[i] << "\n";

    const auto chk = occupation_formula_check(path, f, grid, n);
    std::cout << "occupation identity at x = 0: direct " << chk.direct << ", via local time "
              << chk.via_local_time << ", rel error " << chk.rel_error << "\n"
              << "wrote " << (dir / "avgfield.csv").string() << "\n";
    return chk.rel_error < 1e-3 ? 0 : 1;
}

int cmd_occ_region(double H, double p, double gamma0, bool has_gamma0, const std::string& out) {
    const auto exps = regularity_exponents(H, p);
    const auto chk = assumption_check(H, p, has_gamma0 ? gamma0 : 0.75);
    nlohmann::json j;
    j["H"] = H;
    j["p"] = p;
    j["H_bound"] = chk.H_bound;
    j["gamma0_bound"] = chk.gamma0_bound;
    j["lambda_max"] = exps.lambda_max;
    if (has_gamma0) {
        j["gamma0"] = gamma0;
        j["admissible"] = chk.admissible;
    }
    auto table = nlohmann::json::array();
    if (exps.lambda_max > 0.0)
        for (int i = 0; i <= 50; ++i) {
            const double lam = exps.lambda_max * i / 50.0;
            table.push_back({{"lambda", lam}, {"gamma_max", exps.gamma_max(lam)}});
        }
    j["profile"] = table;

    const auto dir = ensure_out(out);
    std::ofstream(dir / "region.json") << j.dump(2) << "\n";
    std::ofstream csv(dir / "region.csv");
    csv.precision(17);
    csv << "lambda,gamma_max\n";
    for (const auto& row : table)
        csv << row["lambda"].get<double>() << "," << row["gamma_max"].get<double>() << "\n";
    std::cout << j.dump(2) << "\n";
    return 0;
}

int cmd_sew_demo(const std::string& which, const std::string& out) {
    const auto dir = ensure_out(out);
    auto emit = [&](const std::string& name, const SewValue& sv, double target, double tol) {
        std::ofstream f(dir / ("sew-" + name + ".csv"));
        f.precision(17);
        f << "level,gap\n";
        for (std::size_t l = 0; l < sv.gaps.size(); ++l) f << l + 1 << "," << sv.gaps[l] << "\n";
        const bool ok = std::abs(sv.value - target) <= tol;
        std::cout << (ok ? "[PASS] " : "[FAIL] ") << name << "  value=" << sv.value
                  << " target=" << target << " tol=" << tol << "\n";
        return ok;
    };

    bool all = true;
    if (which == "additive" || which == "all") {
        Germ g = [](double s, double t) { return t * t - s * s; };
        all = emit("additive", sew_value(g, 0.0, 1.0, {16, 1e-14, 3}), 1.0, 1e-12) && all;
    }
    if (which == "riemann" || which == "all") {
        Germ g = [](double s, double t) { return s * (t - s); };
        all = emit("riemann", sew_value(g, 0.0, 1.0, {16, 1e-12, 3}), 0.5, 1e-8) && all;
    }
    if (which == "volterra" || which == "all") {
        Germ unit = [](double s, double t) { return t - s; };
        SewOptions opts;
        opts.max_level = 18;
        all = emit("volterra", volterra_sew(unit, 0.5, 0.0, 1.0, opts), 2.0, 1e-4) && all;
    }
    if (which == "young-fbm" || which == "all") {
        const auto w = generate_fbm(1 << 12, 1.0, 0.8, 777, {false, 0});
        Germ g = [&w](double s, double t) {
            const auto i = static_cast<std::size_t>(std::llround(s / w.dt()));
            const auto j = static_cast<std::size_t>(std::llround(t / w.dt()));
            return w.values[i] * (w.values[j] - w.values[i]);
        };
        double trapezoid = 0.0;
        for (std::size_t j = 0; j < w.n_steps; ++j)
            trapezoid += 0.5 * (w.values[j] + w.values[j + 1]) * (w.values[j + 1] - w.values[j]);
        all = emit("young-fbm", sew_value(g, 0.0, 1.0, {12, 1e-12, 3}), trapezoid,
                   1e-2 * std::abs(trapezoid)) &&
              all;
    }
    return all ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"pathwise regularization-by-noise laboratory"};
    app.require_subcommand(1);
    int exit_code = 0;

    static const std::vector<std::string> kinds{
        "localtime", "region",  "sew-demo", "schauder", "spde-run",   "isometry",
        "apriori",   "cauchy",  "martingale", "identification", "volterra", "full-suite"};
    std::vector<CommonOpts> kind_opts(kinds.size() + 2);

    for (std::size_t i = 0; i < kinds.size(); ++i) {
        auto* sc = app.add_subcommand(kinds[i], "run the '" + kinds[i] + "' experiment");
        attach_common(sc, kind_opts[i]);
        const std::string kind = kinds[i];
        CommonOpts* o = &kind_opts[i];
        sc->callback([&exit_code, o, kind] { exit_code = run_kind(*o, kind); });
    }

    // paths: harness kind plus a raw generator
    auto* paths = app.add_subcommand("paths", "fractional path checks and generation");
    attach_common(paths, kind_opts[kinds.size()]);
    struct {
        std::size_t n = 1024;
        double T = 1.0, H = 0.5;
        std::uint64_t seed = 12345, stream = 0;
        std::string out_file = "paths-w.csv";
    } gen_opts;
    auto* gen = paths->add_subcommand("gen", "generate one path as CSV plus a JSON sidecar");
    gen->add_option("--n", gen_opts.n, "number of time steps");
    gen->add_option("--T", gen_opts.T, "horizon");
    gen->add_option("--H", gen_opts.H, "Hurst parameter");
    gen->add_option("--seed", gen_opts.seed, "seed");
    gen->add_option("--stream", gen_opts.stream, "independent stream index");
    gen->add_option("--out", gen_opts.out_file, "output CSV file");
    {
        CommonOpts* o = &kind_opts[kinds.size()];
        paths->callback([&exit_code, o, gen, &gen_opts] {
            if (gen->parsed())
                exit_code = cmd_paths_gen(gen_opts.n, gen_opts.T, gen_opts.H, gen_opts.seed,
                                          gen_opts.stream, gen_opts.out_file);
            else
                exit_code = run_kind(*o, "paths");
        });
    }

    // occ: occupation-measure utilities on a single generated path
    auto* occ = app.add_subcommand("occ", "occupation measure and local time utilities");
    occ->require_subcommand(1);
    struct {
        std::size_t n = 1 << 14;
        double T = 1.0, H = 0.3;
        std::uint64_t seed = 777;
        std::size_t bins = 512;
        std::string f = "gauss";
        std::string out;
        double p = 2.0, gamma0 = 0.0;
    } oo;
    auto* olt = occ->add_subcommand("localtime", "local time of one path at the horizon");
    auto* oav = occ->add_subcommand("avgfield", "averaged field (T^w f)(x) over [0, T]");
    auto* org = occ->add_subcommand("region", "admissible exponent region for (H, p)");
    for (auto* sc : {olt, oav}) {
        sc->add_option("--n", oo.n, "time steps");
        sc->add_option("--T", oo.T, "horizon");
        sc->add_option("--H", oo.H, "Hurst parameter");
        sc->add_option("--seed", oo.seed, "seed");
        sc->add_option("--bins", oo.bins, "spatial bins");
        sc->add_option("--out", oo.out, "output directory");
    }
    oav->add_option("--f", oo.f, "test function: one|cos|gauss");
    org->add_option("--H", oo.H, "Hurst parameter")->required();
    org->add_option("--p", oo.p, "integrability exponent of Sigma^2")->required();
    auto* g0opt = org->add_option("--gamma0", oo.gamma0, "target base regularity");
    org->add_option("--out", oo.out, "output directory");
    olt->callback([&] { exit_code = cmd_occ_localtime(oo.n, oo.T, oo.H, oo.seed, oo.bins, oo.out); });
    oav->callback(
        [&] { exit_code = cmd_occ_avgfield(oo.n, oo.T, oo.H, oo.seed, oo.bins, oo.f, oo.out); });
    org->callback([&, g0opt] {
        exit_code = cmd_occ_region(oo.H, oo.p, oo.gamma0, g0opt->count() > 0, oo.out);
    });

    // sew demo
    auto* sew = app.add_subcommand("sew", "sewing-limit demos with known values");
    sew->require_subcommand(1);
    struct {
        std::string which = "all";
        std::string out;
    } so;
    auto* demo = sew->add_subcommand("demo", "run one or all demo germs");
    demo->add_option("--case", so.which, "additive|riemann|volterra|young-fbm|all");
    demo->add_option("--out", so.out, "output directory");
    demo->callback([&] { exit_code = cmd_sew_demo(so.which, so.out); });

    // sweep
    auto* sw = app.add_subcommand("sweep", "run one kind along an axis of values");
    CommonOpts& sw_opts = kind_opts[kinds.size() + 1];
    struct {
        std::string kind = "region";
        std::string axis;
        std::string values;
    } sv;
    sw->add_option("--kind", sv.kind, "experiment kind to repeat");
    sw->add_option("--axis", sv.axis, "config field to vary")->required();
    sw->add_option("--values", sv.values, "comma-separated axis values")->required();
    attach_common(sw, sw_opts);
    sw->callback([&] {
        auto cfg = build_config(sw_opts, sv.kind);
        std::vector<double> vals;
        std::stringstream ss(sv.values);
        std::string tok;
        while (std::getline(ss, tok, ',')) vals.push_back(std::stod(tok));
        const auto reports = sweep(cfg, sv.axis, vals);
        bool ok = true;
        for (std::size_t i = 0; i < reports.size(); ++i) {
            std::cout << "=== " << sv.axis << " = " << vals[i] << " ===\n";
            print_report(reports[i]);
            ok = ok && reports[i].mandatory_pass();
        }
        exit_code = ok ? 0 : 1;
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return exit_code;
}
