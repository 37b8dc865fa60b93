#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace isslab::config {

// Every scenario reads one block of the JSON config; fields missing from the
// file keep the defaults below. Unknown keys are rejected so typos surface.

struct LyapunovFamilyConfig {
    std::vector<std::size_t> sizes{50, 100, 200};
    double L = 1.0;
    double diffusivity = 1.0;
    std::size_t random_count = 20;
    std::size_t random_size = 40;
};

struct InstabilityConfig {
    std::size_t n = 200;
    double L = 1.0;
    std::vector<double> levels{0.0, 5.0, 9.869604401089358, 12.0, 15.0};
    double dt = 1e-3;
    double t_end = 5.0;
    double noise = 0.3;
    double rate_tolerance = 0.05;
    double critical_probe = 1e-3;  // also runs c = mu1 (1 +- probe)
};

struct ReactionDiffusionConfig {
    std::size_t n = 200;
    std::vector<double> lengths{0.5, 1.0, 2.0};
    double c = 1.0;
    std::size_t trajectories = 20;
    double amplitude_min = 0.5;
    double amplitude_max = 2.0;
    double hold = 0.05;
    std::size_t modes = 5;
    double mode_amplitude = 1.5;
    double dt = 1e-3;
    double t_end = 5.0;
    std::vector<double> iss_lengths{0.5, 0.9};
    double iss_w_factor = 1.0;  // w = factor * c * mu1 (per unit diffusivity)
    std::vector<double> table_lengths{0.5, 0.75, 0.9, 0.95, 0.99, 0.999};
    double lyap_estimate_fraction = 0.99;
    std::size_t always_refine = 2;  // trajectories rerun at dt/2 even without violations
};

struct BilinearBoundConfig {
    std::size_t n = 200;
    std::vector<double> lengths{0.5, 1.0, 2.0};
    double c = 1.0;
    std::size_t rd_trajectories = 20;
    double amplitude_min = 0.5;
    double amplitude_max = 2.0;
    double hold = 0.05;
    std::vector<double> constant_levels{0.5, 1.0, 3.0, 6.0, 9.0};
    std::size_t random_trajectories = 15;
    double random_amplitude_max = 9.0;
    double dt = 1e-3;
    double t_end = 5.0;
    double majorant_tolerance = 1e-6;
};

struct LinearUnboundedConfig {
    std::size_t n = 0;  // 0: smallest grid whose last node lies past every breakpoint
    std::vector<double> b{1.0, 2.0};
    std::vector<double> c{1.0, 2.0, 4.0};
    std::vector<double> times{1.0, 2.0, 5.0};
    double dt = 0.01;
    double t_end = 5.0;
    double tolerance = 0.01;
    std::vector<double> gains{1.0, 10.0, 100.0};
    std::vector<double> c_multipliers{1.0, 2.0, 4.0, 8.0};  // candidate c = m a + 1
    double witness_b = 1.0;
    std::size_t max_auto_n = 400000;
};

struct L2L4Config {
    std::size_t n = 200;
    double w = 1.0;
    std::size_t trajectories = 20;
    double amplitude_min = 0.2;
    double amplitude_max = 1.0;
    double x0_amplitude = 1.0;
    double hold = 0.05;
    double dt = 1e-3;
    double t_end = 5.0;
};

struct LpIssConfig {
    std::size_t n = 200;
    double L = 1.0;
    double diffusivity = 1.0;
    std::vector<double> p{1.0, 2.0};
    std::size_t trajectories = 20;
    double amplitude_max = 2.0;
    double hold = 0.05;
    double dt = 1e-3;
    double t_end = 5.0;
    double impulse_height = 100.0;
    double impulse_width = 0.01;
    double rel_tol = 1e-9;
};

struct IntegratorOrderConfig {
    std::size_t n = 200;
    double L = 1.0;
    double c = 1.0;
    double dt = 0.01;
    double t_end = 1.0;
    std::size_t reference_divisor = 16;
    double amplitude = 2.0;
    double hold = 0.05;
    double ratio_min = 1.7;
    double ratio_max = 2.3;
};

struct ComparisonConfig {
    std::size_t grid = 1000;
    std::size_t triangle_samples = 1000;
    std::size_t n = 100;
    std::size_t trajectories = 10;
    double amplitude_max = 5.0;
    double hold = 0.05;
    double dt = 1e-3;
    double t_end = 2.0;
};

struct Config {
    std::uint64_t seed = 20240601;
    std::string output_dir = "results";
    LyapunovFamilyConfig lyapunov_family;
    InstabilityConfig bilinear_instability;
    ReactionDiffusionConfig reaction_diffusion;
    BilinearBoundConfig bilinear_bound;
    LinearUnboundedConfig linear_unbounded;
    L2L4Config linear_l2l4;
    LpIssConfig lp_iss;
    IntegratorOrderConfig integrator_order;
    ComparisonConfig comparison_functions;
};

/// Parses JSON text; `source` names the origin in error messages.
/// Throws ConfigError on syntax errors, unknown keys, or invalid values.
Config parse_config(const std::string& text, const std::string& source = "<config>");
Config load_config(const std::string& path);
/// Checks ranges; called by the parsers and after overrides.
void validate(const Config& cfg);

/// Applies --seed/--dt/--n style overrides to every scenario that has the field.
void apply_overrides(Config& cfg, std::optional<std::uint64_t> seed, std::optional<double> dt,
                     std::optional<std::size_t> n);

/// The built-in defaults serialized as JSON (what configs/default.json holds).
std::string default_config_json();

}  // namespace isslab::config
