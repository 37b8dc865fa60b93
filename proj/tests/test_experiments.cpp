#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "isslab/config.hpp"
#include "isslab/csv.hpp"
#include "isslab/errors.hpp"
#include "isslab/experiments.hpp"

using namespace isslab;
using namespace isslab::experiments;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const char* env = std::getenv("ISSLAB_TMP");
    const fs::path base = env ? fs::path(env) : fs::temp_directory_path() / "isslab_tests";
    const fs::path dir = base / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

}  // namespace

// --- config -----------------------------------------------------------------

TEST(Config, DefaultJsonRoundTrips) {
    const auto cfg = config::parse_config(config::default_config_json());
    const config::Config ref;
    EXPECT_EQ(cfg.seed, ref.seed);
    EXPECT_EQ(cfg.reaction_diffusion.lengths, ref.reaction_diffusion.lengths);
    EXPECT_EQ(cfg.bilinear_instability.levels, ref.bilinear_instability.levels);
    EXPECT_EQ(cfg.lp_iss.p, ref.lp_iss.p);
    EXPECT_EQ(config::default_config_json(), config::default_config_json());
}

TEST(Config, PartialFileKeepsDefaults) {
    const auto cfg = config::parse_config(R"({"seed": 7, "scenarios": {"lp_iss": {"trajectories": 3}}})");
    EXPECT_EQ(cfg.seed, 7u);
    EXPECT_EQ(cfg.lp_iss.trajectories, 3u);
    EXPECT_EQ(cfg.lp_iss.n, 200u);
}

TEST(Config, PiStringsAccepted) {
    const auto cfg = config::parse_config(R"({"scenarios": {"bilinear_instability": {"levels": ["pi^2", 1]}}})");
    ASSERT_EQ(cfg.bilinear_instability.levels.size(), 2u);
    EXPECT_NEAR(cfg.bilinear_instability.levels[0], 9.869604401089358, 1e-15);
}

TEST(Config, UnknownKeyNamed) {
    try {
        config::parse_config(R"({"scenarios": {"lp_iss": {"pp": 2}}})", "x.json");
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("scenarios.lp_iss.pp: unknown key"), std::string::npos);
    }
}

TEST(Config, SyntaxErrorNamesSource) {
    try {
        config::parse_config("{\"seed\": ", "broken.json");
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("config parse error in broken.json"), std::string::npos);
    }
}

TEST(Config, ValidationRejectsNonsense) {
    EXPECT_THROW(config::parse_config(R"({"scenarios": {"lp_iss": {"dt": -1}}})"), ConfigError);
    EXPECT_THROW(config::parse_config(R"({"scenarios": {"reaction_diffusion": {"lengths": []}}})"), ConfigError);
}

TEST(Config, OverridesReachEveryScenario) {
    config::Config cfg;
    config::apply_overrides(cfg, 99u, 5e-4, 64u);
    EXPECT_EQ(cfg.seed, 99u);
    EXPECT_EQ(cfg.reaction_diffusion.dt, 5e-4);
    EXPECT_EQ(cfg.lp_iss.n, 64u);
    EXPECT_EQ(cfg.integrator_order.n, 64u);
}

// --- csv --------------------------------------------------------------------

TEST(Csv, QuotingFollowsRfc4180) {
    EXPECT_EQ(csv::quote("plain"), "plain");
    EXPECT_EQ(csv::quote("a,b"), "\"a,b\"");
    EXPECT_EQ(csv::quote("say \"hi\""), "\"say \"\"hi\"\"\"");
    std::ostringstream os;
    csv::Writer w(os);
    w.row({"x", "note"});
    w.row({"1", "line one\nline two, with \"quotes\""});
    std::istringstream is(os.str());
    const auto t = csv::read(is);
    ASSERT_EQ(t.size(), 2u);
    EXPECT_EQ(t[1][1], "line one\nline two, with \"quotes\"");
    EXPECT_EQ(csv::column(t, "note"), 1u);
    EXPECT_THROW(csv::column(t, "missing"), Error);
}

TEST(Csv, NumbersRoundTrip) {
    for (double v : std::initializer_list<double>{0.1, -1e-300, 3.141592653589793, 1e300, double(INFINITY), -double(INFINITY)})
        EXPECT_EQ(csv::parse_number(csv::number(v)), v);
    EXPECT_TRUE(std::isnan(csv::parse_number(csv::number(NAN))));
}

// --- signals ----------------------------------------------------------------

TEST(Signals, PiecewiseConstantIgnoresStepSize) {
    const PiecewiseConstantField f(8, 0.05, 1.0, 2.0, 42);
    for (int k = 0; k < 20; ++k) {
        // t = k * hold reached by different step counts lands in the same interval.
        const Eigen::VectorXd a = f(k * 50 * 1e-3);
        const Eigen::VectorXd b = f(k * 100 * 5e-4);
        EXPECT_EQ((a - b).norm(), 0.0);
        EXPECT_EQ((f(k * 0.05 + 0.049) - a).norm(), 0.0);
        EXPECT_LE(a.cwiseAbs().maxCoeff(), 2.0);
    }
    EXPECT_NE((f(0.0) - f(0.05)).norm(), 0.0);
    const PiecewiseConstantField g(8, 0.05, 1.0, 2.0, 42);
    EXPECT_EQ((f(0.33) - g(0.33)).norm(), 0.0);
}

TEST(Signals, SineCombinationVanishesAtBoundary) {
    const discretization::Grid1D grid(99, 1.0);
    const auto x = random_sine_combination(grid, 5, 1.5, 3);
    EXPECT_LT(std::abs(x[0]), 0.5);
    EXPECT_LE(x.cwiseAbs().maxCoeff(), 7.5);
}

// --- reports ----------------------------------------------------------------

TEST(BoundReport, ClassificationAndRecheck) {
    const auto dir = scratch("bound_report");
    BoundReport ok;
    ok.name = "ok";
    ok.add_trajectory({0, 1, 2}, {1, 0.5, 0.2}, {1, 1, 1}, {1, 1, 1}, false, 1);
    ok.finalize();
    EXPECT_EQ(ok.classification, Classification::Dominates);

    BoundReport bad;
    bad.name = "bad";
    // Violation in the middle of a long run survives decimation.
    std::vector<double> t(500), r(500, 0.1), b(500, 1.0);
    for (int i = 0; i < 500; ++i) t[i] = i;
    r[257] = 2.0;
    bad.add_trajectory(t, r, b, b, false, 50);
    bad.finalize();
    EXPECT_EQ(bad.classification, Classification::Violated);
    EXPECT_EQ(bad.violations, 1u);
    EXPECT_LT(bad.rows.size(), 500u);

    BoundReport boom;
    boom.name = "boom";
    boom.add_trajectory({0, 1}, {1, 2}, {1, 1}, {1, 1}, true);
    boom.finalize();
    EXPECT_EQ(boom.classification, Classification::BlowUp);

    for (const auto* rep : {&ok, &bad, &boom}) write_bound_report(dir, *rep);
    const auto checks = recheck_reports(dir);
    ASSERT_EQ(checks.size(), 3u);
    for (const auto& c : checks) EXPECT_TRUE(c.consistent()) << c.file;
}

TEST(BoundReport, TamperedCsvIsDetected) {
    const auto dir = scratch("tampered");
    BoundReport rep;
    rep.name = "r";
    rep.add_trajectory({0, 1}, {0.5, 0.5}, {1, 1}, {1, 1}, false, 1);
    rep.finalize();
    write_bound_report(dir, rep);
    std::ofstream(dir / "r.csv", std::ios::app) << "0,2,2,5,1,1,false,true\n";
    const auto checks = recheck_reports(dir);
    ASSERT_EQ(checks.size(), 1u);
    EXPECT_FALSE(checks[0].consistent());
    EXPECT_EQ(checks[0].recomputed, Classification::Violated);
}

TEST(ClassificationNames, RoundTrip) {
    for (auto c : {Classification::Dominates, Classification::Violated, Classification::BlowUp})
        EXPECT_EQ(parse_classification(to_string(c)), c);
    EXPECT_THROW(parse_classification("maybe"), Error);
}

// --- helpers ----------------------------------------------------------------

TEST(GrowthFit, RecoversExponent) {
    std::vector<double> t, y;
    for (int i = 0; i <= 300; ++i) {
        t.push_back(0.01 * i);
        y.push_back(3.0 * std::exp(-1.7 * t.back()) + (i < 50 ? 1.0 : 0.0));
    }
    const auto fit = fit_growth_rate(t, y);
    EXPECT_NEAR(fit.rate, -1.7, 1e-10);
    EXPECT_NEAR(fit.t_from, 2.0, 1e-12);
    EXPECT_THROW(fit_growth_rate({0, 1}, {1, 1}), PreconditionError);
}

TEST(IssCoefficient, Examples) {
    EXPECT_NEAR(iss_coefficient(0.9, 1.0), 2.5, 1e-12);
    EXPECT_NEAR(iss_coefficient(0.99, 1.0), 25.0, 1e-10);
    EXPECT_THROW(iss_coefficient(1.0, 1.0), PreconditionError);
    EXPECT_THROW(iss_coefficient(2.0, 1.0), PreconditionError);
    double prev = 0.0;
    for (double L : {0.1, 0.5, 0.9, 0.99, 0.999}) {
        EXPECT_GT(iss_coefficient(L, 2.0), prev);
        prev = iss_coefficient(L, 2.0);
    }
}

TEST(Falsification, WitnessFormulaAndMonotonicity) {
    const discretization::Grid1D grid(1000, 1.5707963267948966);
    const auto rows = falsification_table({1.0, 10.0}, {1.0, 2.0, 4.0}, 1.0, grid);
    ASSERT_EQ(rows.size(), 6u);
    for (const auto& r : rows) {
        EXPECT_NEAR(r.witness_time, std::log(r.c / (r.c - r.a)), 1e-15);
        // b c (1 - e^{-t}) reaches gamma(b) = a b exactly at the witness time.
        EXPECT_NEAR(r.b * r.c * (1.0 - std::exp(-r.witness_time)), r.a * r.b, 1e-12 * r.a);
        EXPECT_EQ(r.n, 1000u);
    }
    EXPECT_GT(rows[0].witness_time, rows[1].witness_time);
    EXPECT_GT(rows[1].witness_time, rows[2].witness_time);
    EXPECT_TRUE(rows[0].grid_resolved);    // c = 2
    EXPECT_FALSE(rows[5].grid_resolved);   // c = 41
}

TEST(Falsification, ResolvingGridIsMinimal) {
    for (double c : {1.0, 2.0, 3.0}) {
        const std::size_t n = resolving_grid_size(c);
        const double brk = std::atan(std::pow(c, 8.0));
        const discretization::Grid1D g(n, 1.5707963267948966);
        EXPECT_GE(g.node(n - 1), brk);
        if (n > 1) {
            const discretization::Grid1D coarse(n - 1, 1.5707963267948966);
            EXPECT_LT(coarse.node(n - 2), brk);
        }
    }
}

// --- plumbing ---------------------------------------------------------------

TEST(RunAll, FilterRunsOnlyNamedScenario) {
    RunOptions opts;
    opts.write_outputs = false;
    const auto all = run_all(opts, {"lyapunov_family"});
    ASSERT_EQ(all.results.size(), 1u);
    EXPECT_EQ(all.results[0].name, "lyapunov_family");
    EXPECT_TRUE(all.all_passed());
    EXPECT_EQ(all.exit_code(true), 0);
    EXPECT_THROW(run_all(opts, {"nope"}), PreconditionError);
}

TEST(RunAll, ScenarioErrorsBecomeFailures) {
    RunOptions opts;
    opts.write_outputs = false;
    opts.config.linear_unbounded.max_auto_n = 10;
    const auto all = run_all(opts, {"linear_unbounded"});
    ASSERT_EQ(all.results.size(), 1u);
    EXPECT_FALSE(all.results[0].passed);
    EXPECT_FALSE(all.results[0].error.empty());
    EXPECT_NE(all.exit_code(false), 0);
}

TEST(RunAll, StrictModeFailsOnWarnings) {
    RunAllResult r;
    r.results.push_back(ScenarioResult{});
    r.results[0].passed = true;
    r.results[0].warnings.push_back("something odd");
    EXPECT_EQ(r.exit_code(false), 0);
    EXPECT_NE(r.exit_code(true), 0);
}

TEST(RunAll, WritesSummaryAndPlots) {
    RunOptions opts;
    opts.out_dir = scratch("summary");
    opts.config.lp_iss.trajectories = 2;
    opts.config.lp_iss.t_end = 0.5;
    const auto all = run_all(opts, {"lp_iss"});
    EXPECT_TRUE(all.all_passed());
    EXPECT_TRUE(fs::exists(opts.out_dir / "summary.md"));
    EXPECT_TRUE(fs::exists(opts.out_dir / "plots.gp"));
    for (const auto& f : all.results[0].files) EXPECT_TRUE(fs::exists(opts.out_dir / f)) << f;
    for (const auto& c : recheck_reports(opts.out_dir)) EXPECT_TRUE(c.consistent());
}

TEST(Registry, EveryScenarioRegisteredOnce) {
    const auto& reg = registry();
    EXPECT_EQ(reg.size(), 9u);
    for (const auto& s : reg) EXPECT_TRUE(is_registered(s.name));
    EXPECT_FALSE(is_registered("missing"));
}
