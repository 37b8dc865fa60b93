// Acceptance run: executes every scenario with the default configuration,
// prints one PASS/FAIL line per criterion and exits nonzero on any failure.
// Formula-level claims are recomputed here from the emitted CSVs rather than
// trusted from the scenario verdicts.

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "isslab/config.hpp"
#include "isslab/csv.hpp"
#include "isslab/experiments.hpp"

namespace ex = isslab::experiments;
namespace csv = isslab::csv;
namespace fs = std::filesystem;

namespace {

struct Line {
    int id;
    std::string name;
    bool passed;
    std::string detail;
};

const ex::ScenarioResult& scenario(const ex::RunAllResult& run, const std::string& name) {
    for (const auto& r : run.results)
        if (r.name == name) return r;
    throw std::runtime_error("scenario missing from run: " + name);
}

// All named checks exist and passed; collects their details.
bool checks_pass(const ex::ScenarioResult& r, const std::vector<std::string>& names, std::string& detail) {
    bool ok = r.error.empty();
    if (!r.error.empty()) detail += "error: " + r.error + "; ";
    for (const auto& n : names) {
        const auto* c = r.find(n);
        if (!c) {
            detail += n + " missing; ";
            ok = false;
            continue;
        }
        ok = ok && c->passed;
        detail += n + " " + (c->passed ? "ok" : "FAILED") + " (" + c->detail + "); ";
    }
    return ok;
}

std::map<std::string, std::size_t> csv_hashes(const fs::path& dir) {
    std::map<std::string, std::size_t> out;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (!e.is_regular_file() || e.path().extension() != ".csv") continue;
        std::ifstream is(e.path(), std::ios::binary);
        std::stringstream ss;
        ss << is.rdbuf();
        out[fs::relative(e.path(), dir).generic_string()] = std::hash<std::string>{}(ss.str());
    }
    return out;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"acceptance run"};
    std::string out = "acceptance_run";
    std::string config_path;
    app.add_option("--out", out, "scratch directory for the two runs");
    app.add_option("--config", config_path, "config file (defaults when omitted)");
    CLI11_PARSE(app, argc, argv);

    ex::RunOptions opts;
    opts.config = config_path.empty() ? isslab::config::Config{} : isslab::config::load_config(config_path);
    const fs::path root = out;
    fs::remove_all(root);

    opts.out_dir = root / "run_a";
    const auto run = ex::run_all(opts);
    opts.out_dir = root / "run_b";
    const auto rerun = ex::run_all(opts);
    const fs::path a = root / "run_a";

    std::vector<Line> lines;
    auto add = [&](int id, std::string name, const std::function<bool(std::string&)>& body) {
        std::string detail;
        bool ok = false;
        try {
            ok = body(detail);
        } catch (const std::exception& e) {
            detail += std::string("exception: ") + e.what();
        }
        lines.push_back({id, std::move(name), ok, detail});
    };

    add(1, "lyapunov_residual", [&](std::string& d) {
        // residual <= 1e-10 n and lambda_min(P) > 0, recomputed from the table
        const auto t = csv::read_file((a / "lyapunov_family/residuals.csv").string());
        const auto cf = csv::column(t, "family"), cr = csv::column(t, "residual"), cn = csv::column(t, "n"),
                   ck = csv::column(t, "lambda_min_P");
        std::size_t lap = 0, sym = 0, bad = 0;
        for (std::size_t i = 1; i < t.size(); ++i) {
            if (t[i][cf] == "dirichlet_laplacian") ++lap;
            else if (t[i][cf] == "random_symmetric") ++sym;
            else continue;
            const double res = csv::parse_number(t[i][cr]);
            const double n = csv::parse_number(t[i][cn]);
            if (!(res <= 1e-10 * n) || !(csv::parse_number(t[i][ck]) > 0.0)) ++bad;
        }
        d = std::to_string(lap) + " Laplacians, " + std::to_string(sym) + " random symmetric, " +
            std::to_string(bad) + " failing (residual <= 1e-10 n, lambda_min > 0)";
        return lap == 3 && sym == 20 && bad == 0;
    });

    add(2, "spectral_threshold", [&](std::string& d) {
        const auto t = csv::read_file((a / "bilinear_instability/growth_rates.csv").string());
        const auto crole = csv::column(t, "role"), cc = csv::column(t, "c"), cmu = csv::column(t, "mu1"),
                   cfit = csv::column(t, "fitted_rate");
        std::size_t configured = 0, within = 0;
        double below = NAN, at = NAN, above = NAN, mu1 = NAN, worst = 0.0;
        for (std::size_t i = 1; i < t.size(); ++i) {
            const double c = csv::parse_number(t[i][cc]);
            mu1 = csv::parse_number(t[i][cmu]);
            const double fit = csv::parse_number(t[i][cfit]);
            if (t[i][crole] == "configured") {
                ++configured;
                const double rel = std::abs(fit - (c - mu1)) / std::abs(c - mu1);
                worst = std::max(worst, rel);
                if (rel <= 0.05) ++within;
            } else if (t[i][crole] == "below_critical") below = fit;
            else if (t[i][crole] == "critical") at = fit;
            else if (t[i][crole] == "above_critical") above = fit;
        }
        const bool flip = below < 0.0 && above > 0.0 && std::abs(at) < 0.05 * 1e-3 * mu1;
        d = std::to_string(within) + "/" + std::to_string(configured) + " rates within 5% of c - mu1 (worst " +
            fmt(worst) + "); rates around mu1 = " + fmt(mu1) + ": " + fmt(below) + ", " + fmt(at) + ", " + fmt(above);
        return configured == 5 && within == configured && flip;
    });

    add(3, "iiss_dissipation", [&](std::string& d) {
        return checks_pass(scenario(run, "reaction_diffusion"), {"iiss_L0p5", "iiss_L1", "iiss_L2"}, d);
    });

    add(4, "iss_below_unit_length", [&](std::string& d) {
        bool ok = checks_pass(scenario(run, "reaction_diffusion"), {"iss_L0p5", "iss_L0p9"}, d);
        const auto t = csv::read_file((a / "reaction_diffusion/coefficient_table.csv").string());
        const auto cl = csv::column(t, "L"), cw = csv::column(t, "w"), cv = csv::column(t, "coefficient");
        double prev = 0.0;
        std::size_t exact = 0;
        for (std::size_t i = 1; i < t.size(); ++i) {
            const double L = csv::parse_number(t[i][cl]), w = csv::parse_number(t[i][cw]);
            const double v = csv::parse_number(t[i][cv]);
            if (v == 1.0 / (4.0 * (1.0 - L) * w)) ++exact;
            ok = ok && v > prev;
            prev = v;
        }
        ok = ok && exact + 1 == t.size() && t.size() >= 3;
        d += std::to_string(exact) + "/" + std::to_string(t.size() - 1) + " table rows equal 1/(4(1-L)w) exactly";
        return ok;
    });

    add(5, "bilinear_iiss_bound", [&](std::string& d) {
        return checks_pass(scenario(run, "bilinear_bound"), {"iiss_gain_domination", "step_majorant_domination"}, d);
    });

    add(6, "linear_unbounded", [&](std::string& d) {
        bool ok = checks_pass(scenario(run, "linear_unbounded"), {"witness_for_every_gain"}, d);
        const auto t = csv::read_file((a / "linear_unbounded/response.csv").string());
        const auto cb = csv::column(t, "b"), cc = csv::column(t, "c"), ct = csv::column(t, "t"),
                   cs = csv::column(t, "simulated_sup");
        double worst = 0.0;
        for (std::size_t i = 1; i < t.size(); ++i) {
            const double b = csv::parse_number(t[i][cb]), c = csv::parse_number(t[i][cc]);
            const double expected = b * c * (1.0 - std::exp(-csv::parse_number(t[i][ct])));
            worst = std::max(worst, std::abs(csv::parse_number(t[i][cs]) - expected) / expected);
        }
        ok = ok && t.size() == 1 + 2 * 3 * 3 && worst <= 0.01;
        d += "sup-norm vs b c (1 - e^-t): worst relative error " + fmt(worst) + " over " +
             std::to_string(t.size() - 1) + " samples (tolerance 0.01)";
        return ok;
    });

    add(7, "lp_iss", [&](std::string& d) {
        return checks_pass(scenario(run, "lp_iss"),
                           {"bound_p1_random", "bound_p2_random", "bound_p1_zero_input", "bound_p1_impulse"}, d);
    });

    add(8, "integrator_order", [&](std::string& d) {
        return checks_pass(scenario(run, "integrator_order"), {"richardson_ratio"}, d);
    });

    add(9, "comparison_functions", [&](std::string& d) {
        return checks_pass(scenario(run, "comparison_functions"),
                           {"constructed_gains_pass_class_checks", "weak_triangle", "round_trip_verdicts",
                            "transformations_match_closed_form"},
                           d);
    });

    add(10, "determinism", [&](std::string& d) {
        const auto ha = csv_hashes(a);
        const auto hb = csv_hashes(root / "run_b");
        std::size_t differ = 0;
        for (const auto& [file, h] : ha) {
            auto it = hb.find(file);
            if (it == hb.end() || it->second != h) ++differ;
        }
        std::size_t inconsistent = 0;
        const auto rechecks = ex::recheck_reports(a);
        for (const auto& r : rechecks)
            if (!r.consistent()) ++inconsistent;
        d = std::to_string(ha.size()) + " CSVs hashed, " + std::to_string(differ) + " differ between runs; " +
            std::to_string(rechecks.size()) + " bound reports rechecked, " + std::to_string(inconsistent) +
            " inconsistent";
        return !ha.empty() && ha.size() == hb.size() && differ == 0 && inconsistent == 0;
    });

    bool all = true;
    for (const auto& l : lines) {
        std::printf("[%s] criterion %2d %-24s %s\n", l.passed ? "PASS" : "FAIL", l.id, l.name.c_str(), l.detail.c_str());
        all = all && l.passed;
    }
    double slowest = 0.0;
    std::string slowest_name;
    for (const auto& r : run.results)
        if (r.seconds > slowest) {
            slowest = r.seconds;
            slowest_name = r.name;
        }
    std::printf("slowest scenario: %s %.1f s; every scenario %s\n", slowest_name.c_str(), slowest,
                run.all_passed() ? "passed" : "did NOT pass");
    std::printf("%s\n", all ? "ACCEPTANCE PASSED" : "ACCEPTANCE FAILED");
    return all ? 0 : 1;
}
