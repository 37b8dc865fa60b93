#include <cmath>

#include "isslab/cmpfn.hpp"
#include "isslab/discretization.hpp"
#include "isslab/experiments.hpp"
#include "isslab/lyapunov.hpp"
#include "isslab/semigroup.hpp"
#include "scenario_support.hpp"

namespace isslab::experiments {

using detail::emit;
using detail::fmt;
using detail::stream_seed;
namespace disc = discretization;
using cmpfn::ComparisonFunction;
using cmpfn::FunctionClass;

namespace {
enum : std::uint64_t { kTriangle = 81, kCmpInput = 82, kCmpState = 83 };
}

ScenarioResult run_comparison_functions(const RunOptions& opts) {
    const auto& cfg = opts.config.comparison_functions;
    ScenarioResult res;
    res.name = "comparison_functions";

    // Linear heat test system x' = A x + u on (0, 1) with V = |x|^2:
    //   V' <= -2 mu1 |x|^2 + 2 |x||u| <= -mu1 |x|^2 + |u|^2 / mu1.
    auto sys = disc::build_dirichlet_laplacian(cfg.n, 1.0, 0.0, 1.0);
    sys.B = disc::LinearOperator::diagonal(Eigen::VectorXd::Ones(cfg.n));
    sys.state_norm = disc::NormTag::L2;
    sys.input_norm = disc::NormTag::L2;
    const semigroup::SemigroupCache cache(sys.A);
    const double mu1 = -cache.eigenvalues().maxCoeff();

    const ComparisonFunction alpha([mu1](double s) { return mu1 * s * s; }, FunctionClass::Kinf, 10.0, "alpha");
    const ComparisonFunction sigma([mu1](double r) { return r * r / mu1; }, FunctionClass::Kinf, 10.0, "sigma");
    const auto imp = cmpfn::dissipative_to_implicative(alpha, sigma, 2.0);
    const ComparisonFunction square([](double s) { return s * s; }, FunctionClass::Kinf, 10.0, "s^2");
    const auto sigma_back =
        cmpfn::implicative_to_dissipative(imp.eta, imp.gamma, cmpfn::zero_function(), square, square);

    // Closed forms: gamma = sqrt(2) r / mu1, eta = mu1 s^2 / 2, sigma' = 2 r^2 / mu1^2 + r^2.
    double gap = 0.0;
    for (double r : {0.1, 0.5, 1.0, 2.0, 5.0}) {
        gap = std::max(gap, std::abs(imp.gamma(r) - std::sqrt(2.0) * r / mu1) / (std::sqrt(2.0) * r / mu1));
        gap = std::max(gap, std::abs(imp.eta(r) - 0.5 * mu1 * r * r) / (0.5 * mu1 * r * r));
        const double sb = 2.0 * r * r / (mu1 * mu1) + r * r;
        gap = std::max(gap, std::abs(sigma_back(r) - sb) / sb);
    }
    res.check("transformations_match_closed_form", gap <= 1e-8, "max relative gap " + fmt(gap));

    // Class checks on every constructed gain.
    const auto triple = cmpfn::assemble_bilinear_iiss_gains(1.0, mu1, 1.0, 1.0, cmpfn::identity());
    struct ClassRow {
        std::string name;
        cmpfn::ClassReport report;
    };
    std::vector<ClassRow> classes{
        {"alpha", cmpfn::check_class(alpha, cfg.grid)},
        {"sigma", cmpfn::check_class(sigma, cfg.grid)},
        {"gamma", cmpfn::check_class(imp.gamma, cfg.grid)},
        {"eta", cmpfn::check_class(imp.eta, cfg.grid)},
        {"sigma_from_implicative", cmpfn::check_class(sigma_back, cfg.grid)},
        {"beta", cmpfn::check_kl(triple.beta)},
        {"theta", cmpfn::check_class_as(triple.theta, FunctionClass::Kinf, cfg.grid)},
        {"mu", cmpfn::check_class_as(triple.mu, FunctionClass::Kinf, cfg.grid)},
    };
    std::size_t class_ok = 0;
    for (const auto& c : classes)
        if (c.report.passed) ++class_ok;
    res.check("constructed_gains_pass_class_checks", class_ok == classes.size(),
              std::to_string(class_ok) + "/" + std::to_string(classes.size()) + " gains pass");

    // Weak triangle inequality on sampled Kinf functions.
    const std::vector<ComparisonFunction> kinf{
        cmpfn::identity(),
        {[](double r) { return r * r; }, FunctionClass::Kinf, 10.0, "r^2"},
        {[](double r) { return std::log1p(r); }, FunctionClass::Kinf, 10.0, "ln(1+r)"},
        {[](double r) { return r * r * r + r; }, FunctionClass::Kinf, 10.0, "r^3+r"},
        {[](double r) { return std::expm1(r); }, FunctionClass::Kinf, 10.0, "e^r-1"},
    };
    std::vector<std::pair<std::string, cmpfn::TriangleReport>> triangles;
    std::size_t tri_ok = 0;
    for (std::size_t i = 0; i < kinf.size(); ++i) {
        auto rep = cmpfn::weak_triangle_check(kinf[i], cfg.triangle_samples, stream_seed(opts.config.seed, kTriangle, i));
        if (rep.violations == 0 && rep.samples == cfg.triangle_samples) ++tri_ok;
        triangles.emplace_back(kinf[i].label().empty() ? "r" : kinf[i].label(), rep);
    }
    res.check("weak_triangle", tri_ok == kinf.size(),
              std::to_string(tri_ok) + "/" + std::to_string(kinf.size()) + " functions hold on " +
                  std::to_string(cfg.triangle_samples) + " pairs each");

    // Verdict round trip on simulated trajectories.
    std::vector<semigroup::TrajectoryRecord> trajs;
    for (std::size_t j = 0; j < cfg.trajectories; ++j) {
        Rng pick(stream_seed(opts.config.seed, kCmpInput, j));
        const double amp = pick.uniform(0.0, cfg.amplitude_max);
        const PiecewiseConstantField field(cfg.n, cfg.hold, cfg.t_end, amp, pick.next());
        const Eigen::VectorXd x0 = random_sine_combination(sys.grid, 5, 1.5, stream_seed(opts.config.seed, kCmpState, j));
        trajs.push_back(semigroup::integrate_mild(sys, cache, x0, [field](double t) { return field(t); }, cfg.t_end,
                                                  cfg.dt));
    }
    std::vector<const semigroup::TrajectoryRecord*> ptrs;
    for (const auto& t : trajs) ptrs.push_back(&t);

    const auto V = lyapunov::quadratic_functional(lyapunov::identity_certificate(cfg.n, sys.grid.h()));
    struct Verdict {
        std::string name;
        bool expected;
        lyapunov::DissipationReport report;
    };
    std::vector<Verdict> verdicts{
        {"dissipative", true, lyapunov::certify_dissipation(V, alpha, sigma, ptrs)},
        {"implicative", true, lyapunov::certify_implicative(V, imp.eta, imp.gamma, ptrs)},
        {"dissipative_from_implicative", true, lyapunov::certify_dissipation(V, imp.eta, sigma_back, ptrs)},
        {"dissipative_alpha_x10", false, lyapunov::certify_dissipation(V, cmpfn::scaled(10.0, alpha), sigma, ptrs)},
        {"implicative_eta_x10", false, lyapunov::certify_implicative(V, cmpfn::scaled(10.0, imp.eta), imp.gamma, ptrs)},
    };
    std::size_t agree = 0;
    std::string detail;
    for (const auto& v : verdicts) {
        if (v.report.passed == v.expected) ++agree;
        detail += v.name + "=" + (v.report.passed ? "pass" : "fail") + " ";
    }
    res.check("round_trip_verdicts", agree == verdicts.size(), detail + "(falsified variants must fail)");

    emit(opts, res, "class_checks.csv", [&](std::ostream& os) {
        csv::Writer w(os);
        w.row({"gain", "class", "passed", "summary"});
        for (const auto& c : classes) {
            w.field(c.name).field(std::string(cmpfn::to_string(c.report.checked_class))).field(c.report.passed);
            w.field(c.report.summary());
            w.end_row();
        }
    });
    emit(opts, res, "weak_triangle.csv", [&](std::ostream& os) {
        csv::Writer w(os);
        w.row({"function", "samples", "violations", "min_slack", "max_slack"});
        for (const auto& [name, t] : triangles) {
            w.field(name).field(t.samples).field(t.violations).field(t.worst_slack).field(t.max_slack);
            w.end_row();
        }
    });
    emit(opts, res, "verdicts.csv", [&](std::ostream& os) {
        csv::Writer w(os);
        w.row({"form", "expected_pass", "passed", "steps_checked", "steps_skipped", "violations", "worst_slack"});
        for (const auto& v : verdicts) {
            w.field(v.name).field(v.expected).field(v.report.passed).field(v.report.steps_checked);
            w.field(v.report.steps_skipped).field(v.report.violations).field(v.report.worst_margin);
            w.end_row();
        }
    });
    return res;
}

}  // namespace isslab::experiments
