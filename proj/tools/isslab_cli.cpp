// isslab command line: run scenarios, simulate single systems, sweep and
// falsify, and recheck written reports.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "isslab/config.hpp"
#include "isslab/csv.hpp"
#include "isslab/discretization.hpp"
#include "isslab/errors.hpp"
#include "isslab/random.hpp"
#include "isslab/experiments.hpp"
#include "isslab/semigroup.hpp"

namespace ex = isslab::experiments;
namespace disc = isslab::discretization;
namespace sg = isslab::semigroup;

namespace {

struct Common {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<double> dt;
    std::optional<std::size_t> n;
    std::string out;
};

void add_common(CLI::App* app, Common& c) {
    app->add_option("--config", c.config_path, "JSON config file (defaults are built in)");
    app->add_option("--seed", c.seed, "base seed for every random stream");
    app->add_option("--dt", c.dt, "time step for every scenario");
    app->add_option("--n", c.n, "grid size for every scenario");
    app->add_option("--out", c.out, "output directory");
}

isslab::config::Config load(const Common& c) {
    auto cfg = c.config_path.empty() ? isslab::config::Config{} : isslab::config::load_config(c.config_path);
    isslab::config::apply_overrides(cfg, c.seed, c.dt, c.n);
    if (!c.out.empty()) cfg.output_dir = c.out;
    return cfg;
}

void print_result(const ex::ScenarioResult& r) {
    std::printf("%-22s %s  (%.2f s)\n", r.name.c_str(), r.passed ? "PASS" : (r.error.empty() ? "FAIL" : "ERROR"),
                r.seconds);
    if (!r.error.empty()) std::printf("    error: %s\n", r.error.c_str());
    for (const auto& c : r.checks)
        std::printf("    [%s] %s: %s\n", c.passed ? "ok" : "!!", c.name.c_str(), c.detail.c_str());
    for (const auto& w : r.warnings) std::printf("    warning: %s\n", w.c_str());
}

int cmd_run_all(const Common& common, const std::vector<std::string>& only, bool strict) {
    ex::RunOptions opts;
    opts.config = load(common);
    opts.out_dir = opts.config.output_dir;
    const auto all = ex::run_all(opts, only);
    for (const auto& r : all.results) print_result(r);
    std::printf("summary: %s\n", all.summary_path.string().c_str());
    return all.exit_code(strict);
}

struct SimulateArgs {
    std::string system = "reaction_diffusion";
    double L = 1.0;
    double c = 1.0;
    double amplitude = 1.0;
    double hold = 0.05;
    double t_end = 5.0;
    std::size_t dump_every = 0;
};

int cmd_simulate(const Common& common, const SimulateArgs& a) {
    const auto cfg = load(common);
    const std::size_t n = common.n.value_or(200);
    const double dt = common.dt.value_or(1e-3);

    disc::EvolutionSystem sys = [&] {
        if (a.system == "reaction_diffusion") {
            auto s = disc::build_dirichlet_laplacian(n, a.L, 0.0, a.c);
            s.C = disc::build_saturated_bilinearity(s.grid);
            return s;
        }
        if (a.system == "bilinear_heat") {
            auto s = disc::build_dirichlet_laplacian(n, a.L, 0.0, 1.0);
            s.C = disc::build_multiplicative_bilinearity(s.grid);
            return s;
        }
        if (a.system == "heat") {
            auto s = disc::build_dirichlet_laplacian(n, a.L, 0.0, a.c);
            s.B = disc::LinearOperator::diagonal(Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n)));
            return s;
        }
        throw isslab::PreconditionError("unknown system '" + a.system + "' (reaction_diffusion, bilinear_heat, heat)");
    }();

    const ex::PiecewiseConstantField field(n, a.hold, a.t_end, a.amplitude, isslab::derive_seed(cfg.seed, 1));
    const Eigen::VectorXd x0 = ex::random_sine_combination(sys.grid, 5, 1.5, isslab::derive_seed(cfg.seed, 2));
    sg::IntegrateOptions iopt;
    iopt.keep_states = a.dump_every > 0;
    const auto tr = sg::integrate_mild(sys, x0, [&field](double t) { return field(t); }, a.t_end, dt, iopt);

    const std::filesystem::path dir = cfg.output_dir;
    std::filesystem::create_directories(dir);
    const auto path = dir / ("simulate_" + a.system + ".csv");
    std::ofstream os(path, std::ios::binary);
    sg::write_trajectory_csv(os, tr);
    std::printf("%zu steps, final |x| = %.6g%s -> %s\n", tr.size(), tr.state_norms.back(),
                tr.blow_up ? " (blow-up)" : "", path.string().c_str());
    if (a.dump_every > 0) {
        const auto dump = dir / ("simulate_" + a.system + "_states.csv");
        std::ofstream ds(dump, std::ios::binary);
        sg::write_state_dump_csv(ds, tr, sys.grid, a.dump_every);
        std::printf("state dump -> %s\n", dump.string().c_str());
    }
    return 0;
}

int cmd_certify(const Common& common, const std::string& scenario) {
    ex::RunOptions opts;
    opts.config = load(common);
    opts.out_dir = opts.config.output_dir;
    const auto r = ex::run_scenario(scenario, opts);
    print_result(r);
    return r.passed ? 0 : 1;
}

int cmd_sweep(const Common& common, double c_from, double c_to, std::size_t count) {
    const auto cfg = load(common);
    const auto& ic = cfg.bilinear_instability;
    auto sys = disc::build_dirichlet_laplacian(ic.n, ic.L, 0.0, 1.0);
    sys.C = disc::build_multiplicative_bilinearity(sys.grid);
    const sg::SemigroupCache cache(sys.A);
    const double mu1 = -cache.eigenvalues().maxCoeff();
    Eigen::VectorXd x0 = ex::random_sine_combination(sys.grid, 1, 1.0, cfg.seed);
    sg::IntegrateOptions iopt;
    iopt.keep_states = false;

    isslab::csv::Writer w(std::cout);
    w.row({"c", "fitted_rate", "c_minus_mu1"});
    for (std::size_t i = 0; i < count; ++i) {
        const double c = count == 1 ? c_from : c_from + (c_to - c_from) * static_cast<double>(i) / (count - 1);
        const auto tr = sg::integrate_mild(sys, cache, x0, ex::constant_input(Eigen::VectorXd::Constant(ic.n, c)),
                                           ic.t_end, ic.dt, iopt);
        w.field(c).field(ex::fit_growth_rate(tr.times, tr.state_norms).rate).field(c - mu1);
        w.end_row();
    }
    return 0;
}

int cmd_falsify(const Common& common, const std::vector<double>& gains, double b) {
    const auto cfg = load(common);
    const auto& lc = cfg.linear_unbounded;
    const std::size_t n = common.n.value_or(lc.n == 0 ? 10000 : lc.n);
    const disc::Grid1D grid(n, 1.5707963267948966);
    isslab::csv::Writer w(std::cout);
    w.row({"a", "b", "c", "witness_time", "breakpoint", "grid_resolved", "n", "h"});
    for (const auto& r : ex::falsification_table(gains, lc.c_multipliers, b, grid)) {
        w.field(r.a).field(r.b).field(r.c).field(r.witness_time).field(r.breakpoint).field(r.grid_resolved);
        w.field(r.n).field(r.h);
        w.end_row();
    }
    return 0;
}

int cmd_report(const std::string& dir) {
    const auto checks = ex::recheck_reports(dir);
    bool ok = true;
    for (const auto& c : checks) {
        std::printf("%-50s recorded=%s recomputed=%s %s\n", c.file.c_str(), std::string(ex::to_string(c.recorded)).c_str(),
                    std::string(ex::to_string(c.recomputed)).c_str(), c.consistent() ? "ok" : "MISMATCH");
        ok = ok && c.consistent();
    }
    std::printf("%zu reports rechecked\n", checks.size());
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Numerical checks of ISS / iISS estimates for semilinear parabolic systems"};
    app.require_subcommand(1);

    Common common;
    std::vector<std::string> only;
    bool strict = false;
    auto* run_all = app.add_subcommand("run-all", "run every registered scenario and write the report");
    add_common(run_all, common);
    run_all->add_option("--scenario", only, "run only the named scenario (repeatable)");
    run_all->add_flag("--strict", strict, "fail when any scenario emits a warning");

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "integrate one system with a random input and write norms");
    add_common(simulate, common);
    simulate->add_option("--system", sim.system, "reaction_diffusion | bilinear_heat | heat");
    simulate->add_option("--L", sim.L, "domain length");
    simulate->add_option("--c", sim.c, "diffusivity");
    simulate->add_option("--amplitude", sim.amplitude, "input amplitude");
    simulate->add_option("--hold", sim.hold, "input hold time");
    simulate->add_option("--t-end", sim.t_end, "horizon");
    simulate->add_option("--dump-every", sim.dump_every, "write every k-th state (0: none)");

    std::string scenario;
    auto* certify = app.add_subcommand("certify", "run the checks of one scenario");
    add_common(certify, common);
    certify->add_option("--scenario", scenario, "scenario name")->required();
    certify->add_flag("--strict", strict, "accepted for symmetry with run-all");

    double c_from = 0.0, c_to = 15.0;
    std::size_t count = 16;
    auto* sweep = app.add_subcommand("sweep", "growth rate of x' = x'' + c x over a range of c (CSV to stdout)");
    add_common(sweep, common);
    sweep->add_option("--from", c_from, "first c");
    sweep->add_option("--to", c_to, "last c");
    sweep->add_option("--count", count, "number of values")->check(CLI::PositiveNumber);

    std::vector<double> gains{1.0, 10.0, 100.0};
    double b = 1.0;
    auto* falsify = app.add_subcommand("falsify", "witness table against linear gains a r (CSV to stdout)");
    add_common(falsify, common);
    falsify->add_option("--gain", gains, "gain slopes a");
    falsify->add_option("--b", b, "input sup-norm");

    std::string report_dir = "results";
    auto* report = app.add_subcommand("report", "recompute every bound report classification from its CSV");
    report->add_option("dir", report_dir, "results directory");

    auto* defaults = app.add_subcommand("default-config", "print the built-in config as JSON");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run_all) return cmd_run_all(common, only, strict);
        if (*simulate) return cmd_simulate(common, sim);
        if (*certify) return cmd_certify(common, scenario);
        if (*sweep) return cmd_sweep(common, c_from, c_to, count);
        if (*falsify) return cmd_falsify(common, gains, b);
        if (*report) return cmd_report(report_dir);
        if (*defaults) {
            std::cout << isslab::config::default_config_json() << "\n";
            return 0;
        }
    } catch (const isslab::ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 4;
    }
    return 0;
}
