#include "isslab/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <boost/math/constants/constants.hpp>
#include <chrono>
#include <cmath>
#include <limits>
#include <thread>

#include "isslab/errors.hpp"
#include "isslab/random.hpp"
#include "scenario_support.hpp"

namespace isslab::experiments {

namespace {
constexpr double kPi = boost::math::constants::pi<double>();
constexpr double kHalfPi = boost::math::constants::half_pi<double>();
}  // namespace

semigroup::InputSignal constant_input(Eigen::VectorXd values) {
    return [v = std::move(values)](double) { return v; };
}

PiecewiseConstantField::PiecewiseConstantField(std::size_t n, double hold, double t_end, double amplitude,
                                               std::uint64_t seed)
    : hold_(hold), amplitude_(amplitude) {
    if (!(hold > 0.0) || !(t_end >= 0.0) || !(amplitude >= 0.0))
        throw PreconditionError("piecewise-constant field needs hold > 0, t_end >= 0, amplitude >= 0");
    const auto intervals = static_cast<Eigen::Index>(std::floor(t_end / hold)) + 2;
    values_.resize(static_cast<Eigen::Index>(n), intervals);
    Rng rng(seed);
    for (Eigen::Index j = 0; j < intervals; ++j)
        for (Eigen::Index i = 0; i < values_.rows(); ++i) values_(i, j) = rng.uniform(-amplitude, amplitude);
}

Eigen::VectorXd PiecewiseConstantField::operator()(double t) const {
    // The small relative nudge keeps t = k*hold (computed as k*dt) in interval k.
    auto j = static_cast<Eigen::Index>(std::floor(t / hold_ * (1.0 + 1e-12) + 1e-12));
    j = std::clamp<Eigen::Index>(j, 0, values_.cols() - 1);
    return values_.col(j);
}

Eigen::VectorXd random_sine_combination(const discretization::Grid1D& grid, std::size_t modes, double amplitude,
                                        std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> coeff(modes);
    for (auto& a : coeff) a = rng.uniform(-amplitude, amplitude);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid.n()));
    for (std::size_t i = 0; i < grid.n(); ++i) {
        const double l = grid.node(i);
        for (std::size_t m = 0; m < modes; ++m)
            x[static_cast<Eigen::Index>(i)] += coeff[m] * std::sin(static_cast<double>(m + 1) * kPi * l / grid.length());
    }
    return x;
}

// ---------------------------------------------------------------------------

std::string_view to_string(Classification c) {
    switch (c) {
        case Classification::Dominates: return "dominates";
        case Classification::Violated: return "violated";
        case Classification::BlowUp: return "blow-up";
    }
    return "?";
}

Classification parse_classification(std::string_view s) {
    if (s == "dominates") return Classification::Dominates;
    if (s == "violated") return Classification::Violated;
    if (s == "blow-up") return Classification::BlowUp;
    throw Error("unknown classification '" + std::string(s) + "'");
}

void BoundReport::add_trajectory(const std::vector<double>& times, const std::vector<double>& realized,
                                 const std::vector<double>& bound, const std::vector<double>& allowed,
                                 bool blow_up, std::size_t every) {
    const std::size_t n = times.size();
    if (realized.size() != n || bound.size() != n || allowed.size() != n)
        throw PreconditionError("bound report columns differ in length");
    if (every == 0) every = 1;
    const std::size_t traj = trajectories++;
    for (std::size_t k = 0; k < n; ++k) {
        BoundRow row{traj, k, times[k], realized[k], bound[k], allowed[k], false};
        const bool last = k + 1 == n;
        row.blow_up = last && blow_up;
        ++steps;
        if (row.violated()) ++violations;
        if (allowed[k] > 0.0) worst_ratio = std::max(worst_ratio, realized[k] / allowed[k]);
        else if (realized[k] > 0.0) worst_ratio = std::numeric_limits<double>::infinity();
        if (row.violated() || last || k % every == 0) rows.push_back(row);
    }
    if (blow_up) ++blow_ups;
}

void BoundReport::finalize() {
    if (blow_ups > 0) classification = Classification::BlowUp;
    else if (violations > 0) classification = Classification::Violated;
    else classification = Classification::Dominates;
}

Classification classify_rows(const std::vector<BoundRow>& rows) {
    bool violated = false;
    for (const auto& r : rows) {
        if (r.blow_up) return Classification::BlowUp;
        violated = violated || r.violated();
    }
    return violated ? Classification::Violated : Classification::Dominates;
}

// ---------------------------------------------------------------------------

void ScenarioResult::check(std::string check_name, bool ok, std::string detail) {
    checks.push_back({std::move(check_name), ok, std::move(detail)});
}

const Check* ScenarioResult::find(std::string_view check_name) const {
    for (const auto& c : checks)
        if (c.name == check_name) return &c;
    return nullptr;
}

void ScenarioResult::settle() {
    passed = error.empty() && !checks.empty() &&
             std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

const std::vector<ScenarioInfo>& registry() {
    static const std::vector<ScenarioInfo> reg{
        {"lyapunov_family", "Lyapunov equation residuals on Laplacians and random Hurwitz matrices",
         &run_lyapunov_family},
        {"bilinear_instability", "growth rate of x' = x'' + c x against the shifted principal eigenvalue",
         &run_bilinear_instability},
        {"reaction_diffusion", "iISS and ISS dissipation certificates for the saturated reaction-diffusion system",
         &run_reaction_diffusion},
        {"bilinear_bound", "trajectory domination by the assembled (beta, theta, mu) iISS gains",
         &run_bilinear_bound},
        {"linear_unbounded", "sup-norm response to the hat input and the no-fixed-gain falsification table",
         &run_linear_unbounded},
        {"linear_l2l4", "L2/L4 dissipation estimate for the tan-weighted input operator", &run_linear_l2l4},
        {"lp_iss", "Lp-ISS bound for the heat equation with bounded input operator", &run_lp_iss},
        {"integrator_order", "self-convergence order of the exponential Euler integrator",
         &run_integrator_order},
        {"comparison_functions", "class checks, weak triangle inequality, gain transformations",
         &run_comparison_functions},
    };
    return reg;
}

bool is_registered(std::string_view name) {
    const auto& reg = registry();
    return std::any_of(reg.begin(), reg.end(), [&](const ScenarioInfo& s) { return s.name == name; });
}

ScenarioResult run_scenario(std::string_view name, const RunOptions& opts) {
    const auto& reg = registry();
    auto it = std::find_if(reg.begin(), reg.end(), [&](const ScenarioInfo& s) { return s.name == name; });
    if (it == reg.end()) throw PreconditionError("unknown scenario '" + std::string(name) + "'");
    const auto start = std::chrono::steady_clock::now();
    ScenarioResult res;
    try {
        res = it->run(opts);
    } catch (const std::exception& e) {
        res = ScenarioResult{};
        res.error = e.what();
    }
    res.name = it->name;
    res.settle();
    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return res;
}

bool RunAllResult::all_passed() const {
    return !results.empty() &&
           std::all_of(results.begin(), results.end(), [](const ScenarioResult& r) { return r.passed; });
}

bool RunAllResult::any_warnings() const {
    return std::any_of(results.begin(), results.end(), [](const ScenarioResult& r) { return !r.warnings.empty(); });
}

int RunAllResult::exit_code(bool strict) const {
    if (!all_passed()) return 1;
    if (strict && any_warnings()) return 2;
    return 0;
}

RunAllResult run_all(const RunOptions& opts, const std::vector<std::string>& only) {
    std::vector<std::string> names;
    for (const auto& s : registry())
        if (only.empty() || std::find(only.begin(), only.end(), s.name) != only.end()) names.push_back(s.name);
    for (const auto& o : only)
        if (!is_registered(o)) throw PreconditionError("unknown scenario '" + o + "'");

    RunAllResult out;
    out.results.resize(names.size());
    // Scenarios share nothing mutable, so they run on independent workers;
    // results land in registry order regardless of completion order.
    const std::size_t workers =
        std::max<std::size_t>(1, std::min<std::size_t>(std::thread::hardware_concurrency(), names.size()));
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < names.size();) out.results[i] = run_scenario(names[i], opts);
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    if (opts.write_outputs) out.summary_path = detail::write_summary(opts, out.results);
    return out;
}

// ---------------------------------------------------------------------------

GrowthFit fit_growth_rate(const std::vector<double>& times, const std::vector<double>& norms) {
    if (times.size() != norms.size() || times.size() < 3) throw PreconditionError("growth fit needs >= 3 points");
    const double t_last = times.back();
    const double t_from = times.front() + (t_last - times.front()) * (2.0 / 3.0);
    double st = 0, sy = 0, stt = 0, sty = 0;
    std::size_t m = 0;
    for (std::size_t k = 0; k < times.size(); ++k) {
        if (times[k] < t_from || !(norms[k] > 0.0)) continue;
        const double y = std::log(norms[k]);
        st += times[k];
        sy += y;
        stt += times[k] * times[k];
        sty += times[k] * y;
        ++m;
    }
    if (m < 2) throw PreconditionError("growth fit has fewer than two usable points");
    const double dm = static_cast<double>(m);
    const double denom = dm * stt - st * st;
    GrowthFit fit;
    fit.rate = (dm * sty - st * sy) / denom;
    fit.points = m;
    fit.t_from = t_from;
    fit.t_to = t_last;
    return fit;
}

double iss_coefficient(double L, double w) {
    if (!(L < 1.0)) throw PreconditionError("the ISS estimate needs L < 1");
    if (!(L > 0.0) || !(w > 0.0)) throw PreconditionError("need L > 0 and w > 0");
    return 1.0 / (4.0 * (1.0 - L) * w);
}

std::size_t resolving_grid_size(double c) {
    if (!(c > 0.0)) throw PreconditionError("c must be positive");
    // The last node (pi/2) n/(n+1) reaches arctan(c^8) = pi/2 - arctan(c^-8)
    // once n + 1 >= (pi/2) / arctan(c^-8). Nudged by the actual node so rounding
    // in h cannot leave the returned grid one node short.
    const double brk = std::atan(std::pow(c, 8.0));
    const double need = kHalfPi / std::atan(std::pow(c, -8.0));
    if (!(need < 1e9)) throw PreconditionError("breakpoint too close to pi/2 for any feasible grid");
    auto last = [](std::size_t n) { return discretization::Grid1D(n, kHalfPi).node(n - 1); };
    std::size_t n = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(need)) - 1);
    while (last(n) < brk) ++n;
    while (n > 1 && last(n - 1) >= brk) --n;
    return n;
}

std::vector<FalsificationRow> falsification_table(const std::vector<double>& gains,
                                                  const std::vector<double>& multipliers, double b,
                                                  const discretization::Grid1D& grid) {
    if (!(b > 0.0)) throw PreconditionError("b must be positive");
    std::vector<FalsificationRow> rows;
    const double last_node = grid.node(grid.n() - 1);
    for (double a : gains) {
        if (!(a > 0.0)) throw PreconditionError("gain slope must be positive");
        for (double m : multipliers) {
            FalsificationRow r;
            r.a = a;
            r.b = b;
            r.c = m * a + 1.0;
            r.witness_time = r.c > a ? std::log(r.c / (r.c - a)) : std::numeric_limits<double>::infinity();
            r.breakpoint = std::atan(std::pow(r.c, 8.0));
            r.grid_resolved = last_node >= r.breakpoint;
            r.n = grid.n();
            r.h = grid.h();
            rows.push_back(r);
        }
    }
    return rows;
}

// ---------------------------------------------------------------------------

namespace detail {

discretization::EvolutionSystem reaction_diffusion_system(std::size_t n, double L, double c) {
    auto sys = discretization::build_dirichlet_laplacian(n, L, 0.0, c);
    sys.C = discretization::build_saturated_bilinearity(sys.grid);
    sys.K_bilinear = 1.0;
    sys.xi = cmpfn::identity();
    sys.state_norm = discretization::NormTag::L2;
    sys.input_norm = discretization::NormTag::Sup;
    sys.label = "reaction_diffusion";
    return sys;
}

discretization::EvolutionSystem bilinear_heat_system(std::size_t n, double L) {
    auto sys = discretization::build_dirichlet_laplacian(n, L, 0.0, 1.0);
    sys.C = discretization::build_multiplicative_bilinearity(sys.grid);
    sys.K_bilinear = 1.0;
    sys.xi = cmpfn::identity();
    sys.state_norm = discretization::NormTag::L2;
    sys.input_norm = discretization::NormTag::Sup;
    sys.label = "bilinear_heat";
    return sys;
}

Eigen::VectorXd principal_mode_with_noise(const discretization::Grid1D& grid, double noise, std::uint64_t seed) {
    Rng rng(seed);
    Eigen::VectorXd x(static_cast<Eigen::Index>(grid.n()));
    for (std::size_t i = 0; i < grid.n(); ++i)
        x[static_cast<Eigen::Index>(i)] =
            std::sin(kPi * grid.node(i) / grid.length()) + noise * rng.uniform(-1.0, 1.0);
    return x;
}

}  // namespace detail

}  // namespace isslab::experiments
