#pragma once

// Helpers shared by the scenario implementations; not part of the public API.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>

#include "isslab/csv.hpp"
#include "isslab/errors.hpp"
#include "isslab/experiments.hpp"

namespace isslab::experiments::detail {

inline std::string fmt(double v, int digits = 6) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

/// Writes <out_dir>/<scenario>/<file> through `body` when outputs are enabled
/// and records the relative path in the result.
inline void emit(const RunOptions& opts, ScenarioResult& res, const std::string& file,
                 const std::function<void(std::ostream&)>& body) {
    if (!opts.write_outputs) return;
    const auto dir = opts.out_dir / res.name;
    std::filesystem::create_directories(dir);
    std::ofstream os(dir / file, std::ios::binary);
    if (!os) throw Error("cannot write " + (dir / file).string());
    body(os);
    res.files.push_back(res.name + "/" + file);
}

inline void emit_bound_report(const RunOptions& opts, ScenarioResult& res, const BoundReport& rep) {
    if (!opts.write_outputs) return;
    for (const auto& f : write_bound_report(opts.out_dir / res.name, rep)) res.files.push_back(res.name + "/" + f);
}

/// x' = c x'' + x u / (1 + |l - 1| x^2) on (0, L), Dirichlet, L2 state, sup input.
discretization::EvolutionSystem reaction_diffusion_system(std::size_t n, double L, double c);
/// x' = x'' + x u on (0, L), Dirichlet, L2 state, sup input.
discretization::EvolutionSystem bilinear_heat_system(std::size_t n, double L = 1.0);

/// sin(pi l / L) + noise * uniform(-1, 1) per node.
Eigen::VectorXd principal_mode_with_noise(const discretization::Grid1D& grid, double noise, std::uint64_t seed);

}  // namespace isslab::experiments::detail

namespace isslab::experiments::detail {

/// summary.md and plots.gp for a finished run; returns the summary path.
std::filesystem::path write_summary(const RunOptions& opts, const std::vector<ScenarioResult>& results);

}  // namespace isslab::experiments::detail

#include "isslab/lyapunov.hpp"
#include "isslab/random.hpp"

namespace isslab::experiments::detail {

/// Seed of stream `index` inside the stream family `family` of a run.
inline std::uint64_t stream_seed(std::uint64_t base, std::uint64_t family, std::uint64_t index) {
    return derive_seed(derive_seed(base, family), index);
}

/// Folds a one-trajectory report into an accumulated one, renumbering the
/// trajectory index of the kept samples.
inline void merge_report(lyapunov::DissipationReport& total, const lyapunov::DissipationReport& part,
                         double required_fraction) {
    const std::size_t offset = total.trajectories;
    total.trajectories += part.trajectories;
    total.steps_checked += part.steps_checked;
    total.steps_skipped += part.steps_skipped;
    total.violations += part.violations;
    if (part.worst_margin < total.worst_margin) {
        total.worst_margin = part.worst_margin;
        total.worst = part.worst;
        if (total.worst) total.worst->trajectory += offset;
    }
    for (auto s : part.kept) {
        s.trajectory += offset;
        total.kept.push_back(s);
    }
    total.passed = total.pass_fraction() >= required_fraction;
}

/// Running integral of f over a left-Riemann time grid: out[k] = sum_{j<k} f_j dt.
inline std::vector<double> running_integral(const std::vector<double>& f, double dt) {
    std::vector<double> out(f.size(), 0.0);
    for (std::size_t k = 1; k < f.size(); ++k) out[k] = out[k - 1] + f[k - 1] * dt;
    return out;
}

}  // namespace isslab::experiments::detail
