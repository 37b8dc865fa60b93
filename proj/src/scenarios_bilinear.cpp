#include <algorithm>
#include <boost/math/constants/constants.hpp>
#include <cmath>
#include <map>
#include <optional>

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

constexpr double kPi = boost::math::constants::pi<double>();

enum : std::uint64_t {
    kInstabilityState = 41,
    kRdInput = 51,
    kRdState = 52,
    kBoundRdInput = 61,
    kBoundRdState = 62,
    kBoundHeatInput = 63,
    kBoundHeatState = 64,
    kOrderInput = 71,
    kOrderState = 72,
};

// Smallest magnitude eigenvalue of -A for a symmetric negative definite A.
double principal_decay(const semigroup::SemigroupCache& cache) { return -cache.eigenvalues().maxCoeff(); }

semigroup::InputSignal as_signal(const PiecewiseConstantField& f) {
    return [f](double t) { return f(t); };
}

std::string length_tag(double L) {
    std::string s = fmt(L, 6);
    std::replace(s.begin(), s.end(), '.', 'p');
    return s;
}

}  // namespace

// ---------------------------------------------------------------------------

ScenarioResult run_bilinear_instability(const RunOptions& opts) {
    const auto& cfg = opts.config.bilinear_instability;
    ScenarioResult res;
    res.name = "bilinear_instability";

    const auto sys = detail::bilinear_heat_system(cfg.n, cfg.L);
    const semigroup::SemigroupCache cache(sys.A);
    const double mu1 = principal_decay(cache);
    const double mu1_continuum = (kPi / cfg.L) * (kPi / cfg.L);
    res.notes.push_back("discrete mu1 = " + fmt(mu1, 15) + ", continuum (pi/L)^2 = " + fmt(mu1_continuum, 15));

    struct Level {
        std::string role;
        double c;
        GrowthFit fit;
        bool blow_up;
    };
    std::vector<Level> levels;
    for (double c : cfg.levels) levels.push_back({"configured", c, {}, false});
    levels.push_back({"below_critical", mu1 * (1.0 - cfg.critical_probe), {}, false});
    levels.push_back({"critical", mu1, {}, false});
    levels.push_back({"above_critical", mu1 * (1.0 + cfg.critical_probe), {}, false});

    const Eigen::VectorXd x0 =
        detail::principal_mode_with_noise(sys.grid, cfg.noise, stream_seed(opts.config.seed, kInstabilityState, 0));
    semigroup::IntegrateOptions iopt;
    iopt.keep_states = false;
    for (std::size_t i = 0; i < levels.size(); ++i) {
        auto& lv = levels[i];
        const auto tr = semigroup::integrate_mild(sys, cache, x0,
                                                  constant_input(Eigen::VectorXd::Constant(cfg.n, lv.c)), cfg.t_end,
                                                  cfg.dt, iopt);
        lv.blow_up = tr.blow_up;
        lv.fit = fit_growth_rate(tr.times, tr.state_norms);
        if (lv.role == "configured")
            emit(opts, res, "norms_level" + std::to_string(i) + ".csv",
                 [&](std::ostream& os) { semigroup::write_trajectory_csv(os, tr); });
    }

    std::size_t ok = 0, configured = 0;
    double worst = 0.0;
    for (const auto& lv : levels) {
        if (lv.role != "configured") continue;
        ++configured;
        const double expected = lv.c - mu1;
        const double rel = std::abs(lv.fit.rate - expected) / std::abs(expected);
        worst = std::max(worst, rel);
        if (rel <= cfg.rate_tolerance && !lv.blow_up) ++ok;
    }
    res.check("growth_rate_matches_shift", ok == configured,
              std::to_string(ok) + "/" + std::to_string(configured) + " levels within " + fmt(cfg.rate_tolerance) +
                  " relative of c - mu1; worst " + fmt(worst));

    const auto& below = levels[levels.size() - 3];
    const auto& at = levels[levels.size() - 2];
    const auto& above = levels[levels.size() - 1];
    const double probe_rate = cfg.critical_probe * mu1;
    const bool flips = below.fit.rate < 0.0 && above.fit.rate > 0.0 && std::abs(at.fit.rate) < 0.05 * probe_rate;
    res.check("sign_flip_at_discrete_critical_value", flips,
              "rates " + fmt(below.fit.rate) + " / " + fmt(at.fit.rate) + " / " + fmt(above.fit.rate) +
                  " at c = mu1 (1 - p), mu1, mu1 (1 + p)");

    emit(opts, res, "growth_rates.csv", [&](std::ostream& os) {
        csv::Writer w(os);
        w.row({"role", "c", "mu1", "expected_rate", "fitted_rate", "relative_error", "continuum_rate", "points",
               "t_from", "t_to", "blow_up"});
        for (const auto& lv : levels) {
            const double expected = lv.c - mu1;
            w.field(lv.role).field(lv.c).field(mu1).field(expected).field(lv.fit.rate);
            w.field(expected != 0.0 ? std::abs(lv.fit.rate - expected) / std::abs(expected) : std::abs(lv.fit.rate));
            w.field(lv.c - mu1_continuum).field(lv.fit.points).field(lv.fit.t_from).field(lv.fit.t_to).field(lv.blow_up);
            w.end_row();
        }
    });
    return res;
}

// ---------------------------------------------------------------------------

ScenarioResult run_reaction_diffusion(const RunOptions& opts) {
    const auto& cfg = opts.config.reaction_diffusion;
    ScenarioResult res;
    res.name = "reaction_diffusion";

    std::vector<double> all_lengths = cfg.lengths;
    for (double L : cfg.iss_lengths)
        if (std::find(all_lengths.begin(), all_lengths.end(), L) == all_lengths.end()) all_lengths.push_back(L);

    struct IssStatus {
        double L;
        std::string status;
        double w;
        double mu1;
    };
    std::vector<IssStatus> iss_status;
    struct MuRow {
        double L, discrete, continuum;
    };
    std::vector<MuRow> mu_rows;

    for (std::size_t li = 0; li < all_lengths.size(); ++li) {
        const double L = all_lengths[li];
        const bool do_iiss = std::find(cfg.lengths.begin(), cfg.lengths.end(), L) != cfg.lengths.end();
        const bool want_iss = std::find(cfg.iss_lengths.begin(), cfg.iss_lengths.end(), L) != cfg.iss_lengths.end();
        const bool do_iss = want_iss && L < 1.0;

        const auto sys = detail::reaction_diffusion_system(cfg.n, L, cfg.c);
        const semigroup::SemigroupCache cache(sys.A);
        const double h = sys.grid.h();
        const double mu1 = principal_decay(cache);
        mu_rows.push_back({L, mu1, cfg.c * (kPi / L) * (kPi / L)});

        const double w = cfg.iss_w_factor * mu1;
        if (want_iss && !do_iss) {
            iss_status.push_back({L, "refused: the ISS estimate needs L < 1", w, mu1});
            res.notes.push_back("ISS certification refused for L = " + fmt(L) + " (needs L < 1); iISS only");
        } else if (do_iss) {
            iss_status.push_back({L, "certified", w, mu1});
        } else if (L >= 1.0) {
            iss_status.push_back({L, "refused: the ISS estimate needs L < 1", w, mu1});
        }

        // iISS pair for W = ln(1 + |x|^2).
        const ComparisonFunction alpha([mu1](double s) { return 2.0 * mu1 * s * s / (1.0 + s * s); },
                                       FunctionClass::K, 10.0, "alpha");
        const ComparisonFunction sigma([](double r) { return 2.0 * r; }, FunctionClass::Kinf, 10.0, "sigma");
        const auto id_cert = lyapunov::identity_certificate(cfg.n, h);
        const auto W = lyapunov::log_functional(id_cert);
        const auto V = lyapunov::quadratic_functional(id_cert);

        // The bilinear decay estimate for W = ln(1 + <Px, x>) with P = -A^{-1}/2.
        const auto cert = lyapunov::solve_lyapunov(sys.A, h);
        const auto WP = lyapunov::log_functional(cert);
        const double eps = lyapunov::default_epsilon(cert, 0.0);
        const auto xi = *sys.xi;
        const lyapunov::RateBound lyap_bound = [&cert, xi, eps](double s, double r) {
            return lyapunov::dissipation_rhs_bilinear(cert, 1.0, xi, 0.0, eps, s, r).total();
        };

        // ISS estimate V' <= -(2 mu1 - w) |x|^2 + |u|_L2^2 / (4 (1 - L) w).
        std::optional<double> coeff;
        if (do_iss) coeff = iss_coefficient(L, w);
        const lyapunov::RateBound iss_bound = [mu1, w, coeff](double s, double r) {
            return -(2.0 * mu1 - w) * s * s + coeff.value_or(0.0) * r * r;
        };

        lyapunov::DissipationOptions base;
        lyapunov::DissipationOptions lyap_opt;
        lyap_opt.required_fraction = cfg.lyap_estimate_fraction;
        lyapunov::DissipationOptions iss_opt;
        iss_opt.input_norm = disc::NormTag::L2;
        iss_opt.grid = sys.grid;

        lyapunov::DissipationReport iiss, iiss_refined, lyap, iss, iss_refined;
        iiss.label = "iISS W' <= -alpha(|x|) + sigma(|u|_sup), L = " + fmt(L);
        iiss_refined.label = iiss.label + " (dt/2 reruns)";
        lyap.label = "bilinear estimate for ln(1 + <Px,x>), L = " + fmt(L);
        iss.label = "ISS V' <= -(2 mu1 - w)|x|^2 + coeff |u|_L2^2, L = " + fmt(L);
        iss_refined.label = iss.label + " (dt/2 reruns)";
        std::size_t refined_runs = 0;

        for (std::size_t j = 0; j < cfg.trajectories; ++j) {
            const std::uint64_t stream = li * 1000 + j;
            Rng pick(stream_seed(opts.config.seed, kRdInput, stream));
            const double amp = pick.uniform(cfg.amplitude_min, cfg.amplitude_max);
            const PiecewiseConstantField field(cfg.n, cfg.hold, cfg.t_end, amp, pick.next());
            const Eigen::VectorXd x0 = random_sine_combination(sys.grid, cfg.modes, cfg.mode_amplitude,
                                                               stream_seed(opts.config.seed, kRdState, stream));
            const auto u = as_signal(field);
            const auto tr = semigroup::integrate_mild(sys, cache, x0, u, cfg.t_end, cfg.dt);

            bool needs_refine = j < cfg.always_refine;
            if (do_iiss) {
                const auto part = lyapunov::certify_dissipation(W, alpha, sigma, {&tr}, base);
                detail::merge_report(iiss, part, base.required_fraction);
                needs_refine = needs_refine || part.violations > 0;
                detail::merge_report(lyap, lyapunov::certify_rate_bound(WP, lyap_bound, {&tr}, lyap_opt),
                                     lyap_opt.required_fraction);
            }
            std::size_t iss_violations = 0;
            if (do_iss) {
                const auto part = lyapunov::certify_rate_bound(V, iss_bound, {&tr}, iss_opt);
                detail::merge_report(iss, part, iss_opt.required_fraction);
                iss_violations = part.violations;
                needs_refine = needs_refine || part.violations > 0;
            }
            if (needs_refine) {
                ++refined_runs;
                const auto fine = semigroup::integrate_mild(sys, cache, x0, u, cfg.t_end, 0.5 * cfg.dt);
                if (do_iiss)
                    detail::merge_report(iiss_refined, lyapunov::certify_dissipation(W, alpha, sigma, {&fine}, base),
                                         base.required_fraction);
                if (do_iss && (iss_violations > 0 || j < cfg.always_refine))
                    detail::merge_report(iss_refined, lyapunov::certify_rate_bound(V, iss_bound, {&fine}, iss_opt),
                                         iss_opt.required_fraction);
            }
        }

        const std::string tag = "L" + length_tag(L);
        auto verdict = [&](const lyapunov::DissipationReport& coarse, const lyapunov::DissipationReport& refined) {
            // Violations at dt are accepted only when every rerun at dt/2 is clean.
            return coarse.violations == 0 ? refined.violations == 0
                                          : refined.violations == 0 && refined.trajectories > 0;
        };
        if (do_iiss) {
            res.check("iiss_" + tag, verdict(iiss, iiss_refined),
                      std::to_string(iiss.violations) + " violations in " + std::to_string(iiss.steps_checked) +
                          " steps (" + std::to_string(iiss.trajectories) + " trajectories), " +
                          std::to_string(iiss_refined.violations) + " after halving dt on " +
                          std::to_string(iiss_refined.trajectories) + " reruns; worst slack " +
                          fmt(iiss.worst_margin));
            res.check("lyap_estimate_" + tag, lyap.passed,
                      "pass fraction " + fmt(lyap.pass_fraction()) + " (required " +
                          fmt(cfg.lyap_estimate_fraction) + ")");
            emit(opts, res, "iiss_" + tag + ".csv",
                 [&](std::ostream& os) { lyapunov::write_dissipation_csv(os, iiss); });
            emit(opts, res, "lyap_estimate_" + tag + ".csv",
                 [&](std::ostream& os) { lyapunov::write_dissipation_csv(os, lyap); });
            if (iiss_refined.trajectories > 0)
                emit(opts, res, "iiss_" + tag + "_half_dt.csv",
                     [&](std::ostream& os) { lyapunov::write_dissipation_csv(os, iiss_refined); });
        }
        if (do_iss) {
            res.check("iss_" + tag, verdict(iss, iss_refined),
                      std::to_string(iss.violations) + " violations in " + std::to_string(iss.steps_checked) +
                          " steps, " + std::to_string(iss_refined.violations) + " after halving dt; w = " + fmt(w) +
                          ", coefficient " + fmt(*coeff));
            emit(opts, res, "iss_" + tag + ".csv", [&](std::ostream& os) { lyapunov::write_dissipation_csv(os, iss); });
        }
        res.notes.push_back(tag + ": " + std::to_string(refined_runs) + " trajectories rerun at dt/2");
    }

    // Coefficient table as L approaches 1.
    struct CoeffRow {
        double L, w, coefficient, formula;
    };
    std::vector<CoeffRow> table;
    const double w_table = cfg.iss_w_factor * cfg.c;  // unit principal decay scale, so w = 1 at the defaults
    for (double L : cfg.table_lengths) {
        if (!(L < 1.0)) {
            res.notes.push_back("coefficient table skips L = " + fmt(L) + " (needs L < 1)");
            continue;
        }
        table.push_back({L, w_table, iss_coefficient(L, w_table), 1.0 / (4.0 * (1.0 - L) * w_table)});
    }
    bool exact = !table.empty(), increasing = true;
    for (std::size_t i = 0; i < table.size(); ++i) {
        exact = exact && table[i].coefficient == table[i].formula;
        if (i > 0) increasing = increasing && table[i].L > table[i - 1].L && table[i].coefficient > table[i - 1].coefficient;
    }
    res.check("coefficient_table_formula", exact, std::to_string(table.size()) + " rows equal 1/(4(1-L)w)");
    res.check("coefficient_table_grows", increasing && table.size() >= 2,
              table.empty() ? "empty" : "last coefficient " + fmt(table.back().coefficient) + " at L = " +
                                            fmt(table.back().L));

    emit(opts, res, "coefficient_table.csv", [&](std::ostream& os) {
        csv::Writer w(os);
        w.row({"L", "w", "coefficient"});
        for (const auto& r : table) {
            w.field(r.L).field(r.w).field(r.coefficient);
            w.end_row();
        }
    });
    emit(opts, res, "iss_status.csv", [&](std::ostream& os) {
        csv::Writer w(os);
        w.row({"L", "status", "w", "mu1"});
        for (const auto& r : iss_status) {
            w.field(r.L).field(r.status).field(r.w).field(r.mu1);
            w.end_row();
        }
    });
    emit(opts, res, "principal_decay.csv", [&](std::ostream& os) {
        csv::Writer w(os);
        w.row({"L", "mu1_discrete", "mu1_continuum", "relative_gap"});
        for (const auto& r : mu_rows) {
            w.field(r.L).field(r.discrete).field(r.continuum).field((r.continuum - r.discrete) / r.continuum);
            w.end_row();
        }
    });
    return res;
}

// ---------------------------------------------------------------------------

namespace {

struct BoundRun {
    std::string family;
    semigroup::TrajectoryRecord tr;
};

// Domination by the iISS gains, the step-consistent majorant and the
// continuum Gronwall majorant for one system; appends to the three reports.
struct BoundAccumulator {
    BoundReport gains;
    BoundReport discrete;
    double continuum_worst = 0.0;
    std::size_t continuum_exceeded = 0;
    double tolerance = 1e-6;

    void add(const semigroup::TrajectoryRecord& tr, const semigroup::SemigroupConstants& sc, double normB, double K,
             const ComparisonFunction& xi) {
        const auto triple = cmpfn::assemble_bilinear_iiss_gains(sc.M, sc.lambda, normB, K, xi);
        const std::size_t n = tr.size();
        const double dt = tr.dt;
        const double x0 = tr.state_norms.front();

        std::vector<double> mu_vals(n), kernel(n);
        for (std::size_t k = 0; k < n; ++k) {
            mu_vals[k] = triple.mu(tr.input_norms[k]);
            kernel[k] = sc.M * K * xi(tr.input_norms[k]);
        }
        const auto mu_int = detail::running_integral(mu_vals, dt);

        std::vector<double> bound(n), allowed(n);
        for (std::size_t k = 0; k < n; ++k) {
            bound[k] = triple.bound(x0, tr.times[k], mu_int[k]);
            allowed[k] = bound[k] * (1.0 + 1e-9);
        }
        gains.add_trajectory(tr.times, tr.state_norms, bound, allowed, tr.blow_up);

        // |E| <= e^{-lambda dt} and |Phi| <= (1 - e^{-lambda dt}) / lambda bound one step exactly.
        const double decay = std::exp(-sc.lambda * dt);
        const double phi = -std::expm1(-sc.lambda * dt) / sc.lambda;
        std::vector<double> m(n), m_allowed(n);
        m[0] = sc.M * x0;
        for (std::size_t k = 0; k + 1 < n; ++k)
            m[k + 1] = (decay + phi * sc.M * K * xi(tr.input_norms[k])) * m[k] + phi * sc.M * normB * tr.input_norms[k];
        for (std::size_t k = 0; k < n; ++k) m_allowed[k] = m[k] * (1.0 + tolerance);
        discrete.add_trajectory(tr.times, tr.state_norms, m, m_allowed, tr.blow_up);

        // Continuum majorant: e^{lambda t}|x| <= q(t) exp(int M K xi), q nondecreasing.
        std::vector<double> q(n), ub(n);
        for (std::size_t k = 0; k < n; ++k) ub[k] = std::exp(sc.lambda * tr.times[k]) * tr.input_norms[k];
        const auto ub_int = detail::running_integral(ub, dt);
        for (std::size_t k = 0; k < n; ++k) q[k] = sc.M * (x0 + normB * ub_int[k]);
        const auto g = semigroup::gronwall_majorant(tr.times, q, kernel, semigroup::Quadrature::LeftRiemann);
        for (std::size_t k = 0; k < n; ++k) {
            const double cont = std::exp(-sc.lambda * tr.times[k]) * g[k];
            if (cont > 0.0) {
                const double ratio = tr.state_norms[k] / cont;
                continuum_worst = std::max(continuum_worst, ratio);
                if (ratio > 1.0 + tolerance) ++continuum_exceeded;
            }
        }
    }
};

}  // namespace

ScenarioResult run_bilinear_bound(const RunOptions& opts) {
    const auto& cfg = opts.config.bilinear_bound;
    ScenarioResult res;
    res.name = "bilinear_bound";

    BoundAccumulator acc;
    acc.tolerance = cfg.majorant_tolerance;
    acc.gains.name = "iiss_gains";
    acc.discrete.name = "step_majorant";
    semigroup::IntegrateOptions iopt;
    iopt.keep_states = false;
    std::size_t rd_runs = 0, heat_runs = 0;

    for (std::size_t li = 0; li < cfg.lengths.size(); ++li) {
        const double L = cfg.lengths[li];
        const auto sys = detail::reaction_diffusion_system(cfg.n, L, cfg.c);
        const semigroup::SemigroupCache cache(sys.A);
        const auto sc = semigroup::semigroup_constants(cache);
        for (std::size_t j = 0; j < cfg.rd_trajectories; ++j) {
            const std::uint64_t stream = li * 1000 + j;
            Rng pick(stream_seed(opts.config.seed, kBoundRdInput, stream));
            const double amp = pick.uniform(cfg.amplitude_min, cfg.amplitude_max);
            const PiecewiseConstantField field(cfg.n, cfg.hold, cfg.t_end, amp, pick.next());
            const Eigen::VectorXd x0 =
                random_sine_combination(sys.grid, 5, 1.5, stream_seed(opts.config.seed, kBoundRdState, stream));
            const auto tr = semigroup::integrate_mild(sys, cache, x0, as_signal(field), cfg.t_end, cfg.dt, iopt);
            acc.add(tr, sc, sys.B.norm_l2(), sys.K_bilinear, *sys.xi);
            ++rd_runs;
        }
    }

    {
        const auto sys = detail::bilinear_heat_system(cfg.n);
        const semigroup::SemigroupCache cache(sys.A);
        const auto sc = semigroup::semigroup_constants(cache);
        double top = cfg.random_amplitude_max;
        for (double c : cfg.constant_levels) top = std::max(top, c);
        if (!(top < sc.lambda))
            res.warnings.push_back("input level " + fmt(top) + " is not below mu1 = " + fmt(sc.lambda) +
                                   "; runs are not subcritical");
        std::size_t j = 0;
        for (double c : cfg.constant_levels) {
            const Eigen::VectorXd x0 =
                random_sine_combination(sys.grid, 5, 1.5, stream_seed(opts.config.seed, kBoundHeatState, j++));
            const auto tr = semigroup::integrate_mild(sys, cache, x0, constant_input(Eigen::VectorXd::Constant(cfg.n, c)),
                                                      cfg.t_end, cfg.dt, iopt);
            acc.add(tr, sc, sys.B.norm_l2(), sys.K_bilinear, *sys.xi);
            ++heat_runs;
        }
        for (std::size_t r = 0; r < cfg.random_trajectories; ++r) {
            Rng pick(stream_seed(opts.config.seed, kBoundHeatInput, r));
            const double amp = pick.uniform(0.0, cfg.random_amplitude_max);
            const PiecewiseConstantField field(cfg.n, cfg.hold, cfg.t_end, amp, pick.next());
            const Eigen::VectorXd x0 =
                random_sine_combination(sys.grid, 5, 1.5, stream_seed(opts.config.seed, kBoundHeatState, j++));
            const auto tr = semigroup::integrate_mild(sys, cache, x0, as_signal(field), cfg.t_end, cfg.dt, iopt);
            acc.add(tr, sc, sys.B.norm_l2(), sys.K_bilinear, *sys.xi);
            ++heat_runs;
        }

        // x0 = 0 and u = 0 keep both sides at zero.
        const auto tr = semigroup::integrate_mild(sys, cache, Eigen::VectorXd::Zero(cfg.n),
                                                  constant_input(Eigen::VectorXd::Zero(cfg.n)), 1.0, cfg.dt, iopt);
        const auto triple = cmpfn::assemble_bilinear_iiss_gains(sc.M, sc.lambda, 0.0, 1.0, *sys.xi);
        const double worst = *std::max_element(tr.state_norms.begin(), tr.state_norms.end());
        res.check("zero_state_zero_input", worst == 0.0 && triple.bound(0.0, 1.0, 0.0) == 0.0,
                  "max |x| = " + fmt(worst) + ", bound = " + fmt(triple.bound(0.0, 1.0, 0.0)));
    }

    acc.gains.metadata = {{"reaction_diffusion_runs", std::to_string(rd_runs)},
                          {"bilinear_heat_runs", std::to_string(heat_runs)}};
    acc.discrete.metadata = acc.gains.metadata;
    acc.discrete.metadata.emplace_back("relative_tolerance", csv::number(cfg.majorant_tolerance));
    acc.gains.finalize();
    acc.discrete.finalize();

    res.check("iiss_gain_domination", acc.gains.classification == Classification::Dominates && rd_runs + heat_runs >= 60,
              std::to_string(acc.gains.violations) + " violations over " + std::to_string(acc.gains.trajectories) +
                  " trajectories (" + std::to_string(rd_runs) + " reaction-diffusion, " + std::to_string(heat_runs) +
                  " bilinear heat); max |x|/bound " + fmt(acc.gains.worst_ratio));
    res.check("step_majorant_domination", acc.discrete.classification == Classification::Dominates,
              std::to_string(acc.discrete.violations) + " violations; max |x|/majorant " +
                  fmt(acc.discrete.worst_ratio) + " (tolerance " + fmt(cfg.majorant_tolerance) + " relative)");
    res.notes.push_back("continuum Gronwall majorant: max |x|/majorant " + fmt(acc.continuum_worst) + ", " +
                        std::to_string(acc.continuum_exceeded) +
                        " samples above it; the excess is the first-order integrator error, which the step "
                        "majorant accounts for exactly");

    detail::emit_bound_report(opts, res, acc.gains);
    detail::emit_bound_report(opts, res, acc.discrete);
    return res;
}

// ---------------------------------------------------------------------------

ScenarioResult run_integrator_order(const RunOptions& opts) {
    const auto& cfg = opts.config.integrator_order;
    ScenarioResult res;
    res.name = "integrator_order";

    const auto sys = detail::reaction_diffusion_system(cfg.n, cfg.L, cfg.c);
    const semigroup::SemigroupCache cache(sys.A);
    const PiecewiseConstantField field(cfg.n, cfg.hold, cfg.t_end, cfg.amplitude,
                                       stream_seed(opts.config.seed, kOrderInput, 0));
    const Eigen::VectorXd x0 = random_sine_combination(sys.grid, 5, 1.5, stream_seed(opts.config.seed, kOrderState, 0));
    const auto u = as_signal(field);

    auto final_state = [&](double dt) {
        const auto tr = semigroup::integrate_mild(sys, cache, x0, u, cfg.t_end, dt);
        if (tr.blow_up) throw Error("blow-up in the order study at dt = " + fmt(dt));
        return Eigen::VectorXd(tr.states.col(tr.states.cols() - 1));
    };

    const double dt_ref = cfg.dt / static_cast<double>(cfg.reference_divisor);
    const Eigen::VectorXd ref = 2.0 * final_state(dt_ref) - final_state(2.0 * dt_ref);

    struct Row {
        double dt, error;
    };
    std::vector<Row> rows;
    for (double dt : {cfg.dt, 0.5 * cfg.dt, 0.25 * cfg.dt})
        rows.push_back({dt, disc::norm(sys.grid, final_state(dt) - ref, disc::NormTag::L2)});

    const double ratio = rows[0].error / rows[1].error;
    res.check("richardson_ratio", ratio >= cfg.ratio_min && ratio <= cfg.ratio_max,
              "e(dt)/e(dt/2) = " + fmt(ratio) + " with dt = " + fmt(cfg.dt) + " (accepted [" + fmt(cfg.ratio_min) +
                  ", " + fmt(cfg.ratio_max) + "])");
    res.notes.push_back("e(dt/2)/e(dt/4) = " + fmt(rows[1].error / rows[2].error));

    emit(opts, res, "self_convergence.csv", [&](std::ostream& os) {
        csv::Writer w(os);
        w.row({"dt", "error", "ratio_to_previous"});
        for (std::size_t i = 0; i < rows.size(); ++i) {
            w.field(rows[i].dt).field(rows[i].error);
            if (i == 0) w.field(std::string_view{});
            else w.field(rows[i - 1].error / rows[i].error);
            w.end_row();
        }
    });
    return res;
}

}  // namespace isslab::experiments
