#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "isslab/config.hpp"
#include "isslab/discretization.hpp"
#include "isslab/semigroup.hpp"

namespace isslab::experiments {

// ---------------------------------------------------------------------------
// Input signals

/// Field that is constant in time: u(t) = values.
semigroup::InputSignal constant_input(Eigen::VectorXd values);

/// Per-node i.i.d. uniform values in [-amplitude, amplitude], redrawn every
/// `hold` time units. The signal depends on t only, so reruns at a finer dt
/// see the same input.
class PiecewiseConstantField {
public:
    PiecewiseConstantField(std::size_t n, double hold, double t_end, double amplitude, std::uint64_t seed);
    Eigen::VectorXd operator()(double t) const;
    double amplitude() const { return amplitude_; }

private:
    double hold_;
    double amplitude_;
    Eigen::MatrixXd values_;  // n x intervals
};

/// Random combination of the first `modes` Dirichlet sine modes on (0, L),
/// coefficients uniform in [-amplitude, amplitude].
Eigen::VectorXd random_sine_combination(const discretization::Grid1D& grid, std::size_t modes, double amplitude,
                                        std::uint64_t seed);

// ---------------------------------------------------------------------------
// Reports

enum class Classification { Dominates, Violated, BlowUp };
std::string_view to_string(Classification c);
Classification parse_classification(std::string_view s);

/// One recorded comparison of a realized norm against a claimed bound.
/// A row violates when realized > allowed (allowed = bound plus tolerance).
struct BoundRow {
    std::size_t trajectory = 0;
    std::size_t step = 0;
    double t = 0.0;
    double realized = 0.0;
    double bound = 0.0;
    double allowed = 0.0;
    bool blow_up = false;
    bool violated() const { return realized > allowed; }
};

struct BoundReport {
    std::string name;
    std::vector<std::pair<std::string, std::string>> metadata;
    std::vector<BoundRow> rows;  // decimated rows, every violation, every trajectory end
    std::size_t trajectories = 0;
    std::size_t steps = 0;
    std::size_t violations = 0;
    std::size_t blow_ups = 0;
    double worst_ratio = 0.0;  // max realized / allowed
    Classification classification = Classification::Dominates;

    /// Records a whole trajectory; bound[k] and allowed[k] align with realized[k].
    void add_trajectory(const std::vector<double>& times, const std::vector<double>& realized,
                        const std::vector<double>& bound, const std::vector<double>& allowed, bool blow_up,
                        std::size_t every = 50);
    /// Sets classification from the counters.
    void finalize();
};

/// Classification recomputed from rows alone (blow-up beats violation).
Classification classify_rows(const std::vector<BoundRow>& rows);

// ---------------------------------------------------------------------------
// Scenario plumbing

struct Check {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct ScenarioResult {
    std::string name;
    bool passed = false;
    std::string error;  // non-empty when the scenario threw
    std::vector<Check> checks;
    std::vector<std::string> warnings;
    std::vector<std::string> notes;
    std::vector<std::string> files;  // relative to the output directory
    double seconds = 0.0;

    void check(std::string check_name, bool ok, std::string detail);
    const Check* find(std::string_view check_name) const;
    /// All checks passed and no error.
    void settle();
};

struct RunOptions {
    config::Config config;
    std::filesystem::path out_dir = "results";
    bool write_outputs = true;
};

struct ScenarioInfo {
    std::string name;
    std::string description;
    ScenarioResult (*run)(const RunOptions&);
};

const std::vector<ScenarioInfo>& registry();
bool is_registered(std::string_view name);

/// Runs one scenario, turning exceptions into an errored result.
ScenarioResult run_scenario(std::string_view name, const RunOptions& opts);

struct RunAllResult {
    std::vector<ScenarioResult> results;
    std::filesystem::path summary_path;
    bool all_passed() const;
    bool any_warnings() const;
    int exit_code(bool strict) const;
};

/// Runs the registered scenarios (all, or those named in `only`), writes
/// per-scenario CSVs, summary.md and plots.gp under opts.out_dir.
RunAllResult run_all(const RunOptions& opts, const std::vector<std::string>& only = {});

// ---------------------------------------------------------------------------
// Scenarios

ScenarioResult run_lyapunov_family(const RunOptions& opts);
ScenarioResult run_bilinear_instability(const RunOptions& opts);
ScenarioResult run_reaction_diffusion(const RunOptions& opts);
ScenarioResult run_bilinear_bound(const RunOptions& opts);
ScenarioResult run_linear_unbounded(const RunOptions& opts);
ScenarioResult run_linear_l2l4(const RunOptions& opts);
ScenarioResult run_lp_iss(const RunOptions& opts);
ScenarioResult run_integrator_order(const RunOptions& opts);
ScenarioResult run_comparison_functions(const RunOptions& opts);

// ---------------------------------------------------------------------------
// Pieces shared with the CLI

/// Least-squares slope of ln|x(t)| over the final third of the recorded times.
struct GrowthFit {
    double rate = 0.0;
    std::size_t points = 0;
    double t_from = 0.0;
    double t_to = 0.0;
};
GrowthFit fit_growth_rate(const std::vector<double>& times, const std::vector<double>& norms);

/// The ISS gain coefficient 1/(4(1-L)w); L must be < 1.
double iss_coefficient(double L, double w);

/// For gamma(r) = a r and u-hat with sup-norm b: the first candidate c = m a + 1
/// (in multiplier order) with bc > gamma(b), and the time ln(c/(c-a)) after
/// which bc(1-e^{-t}) exceeds gamma(b).
struct FalsificationRow {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
    double witness_time = 0.0;  // inf when bc <= a b
    double breakpoint = 0.0;    // arctan(c^8)
    bool grid_resolved = false; // some grid node lies at or past the breakpoint
    std::size_t n = 0;
    double h = 0.0;
};
std::vector<FalsificationRow> falsification_table(const std::vector<double>& gains,
                                                  const std::vector<double>& multipliers, double b,
                                                  const discretization::Grid1D& grid);

/// Smallest n whose last interior node on (0, pi/2) lies past arctan(c^8).
std::size_t resolving_grid_size(double c);

/// Per-file result of recomputing a bound classification from its CSV.
struct RecheckResult {
    std::string file;
    Classification recorded = Classification::Dominates;
    Classification recomputed = Classification::Dominates;
    bool consistent() const { return recorded == recomputed; }
};
/// Scans `dir` for *.meta.csv bound reports and recomputes each one.
std::vector<RecheckResult> recheck_reports(const std::filesystem::path& dir);

/// Writes a bound report as <dir>/<name>.csv and <dir>/<name>.meta.csv;
/// returns the file names written.
std::vector<std::string> write_bound_report(const std::filesystem::path& dir, const BoundReport& report);

}  // namespace isslab::experiments
