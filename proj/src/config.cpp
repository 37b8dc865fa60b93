#include "isslab/config.hpp"

#include <boost/math/constants/constants.hpp>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "isslab/errors.hpp"

namespace isslab::config {

namespace {

using nlohmann::json;

constexpr double kPi = boost::math::constants::pi<double>();

double number_from(const json& j, const std::string& path) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "pi") return kPi;
        if (s == "pi^2") return kPi * kPi;
    }
    throw ConfigError(path + ": expected a number (or \"pi\", \"pi^2\")");
}

std::size_t count_from(const json& j, const std::string& path) {
    if (j.is_number_unsigned()) return j.get<std::size_t>();
    if (j.is_number_integer() && j.get<long long>() >= 0) return static_cast<std::size_t>(j.get<long long>());
    throw ConfigError(path + ": expected a nonnegative integer");
}

// Reads fields out of one JSON object and remembers which keys were used.
class Reader {
public:
    Reader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
        if (!obj_.is_object()) throw ConfigError(path_ + ": expected an object");
    }

    void operator()(const char* key, double& v) {
        if (const json* j = take(key)) v = number_from(*j, sub(key));
    }
    void operator()(const char* key, std::size_t& v) {
        if (const json* j = take(key)) v = count_from(*j, sub(key));
    }
    void operator()(const char* key, std::string& v) {
        if (const json* j = take(key)) {
            if (!j->is_string()) throw ConfigError(sub(key) + ": expected a string");
            v = j->get<std::string>();
        }
    }
    void operator()(const char* key, std::vector<double>& v) {
        if (const json* j = take(key)) {
            if (!j->is_array()) throw ConfigError(sub(key) + ": expected an array");
            v.clear();
            for (std::size_t i = 0; i < j->size(); ++i)
                v.push_back(number_from((*j)[i], sub(key) + "[" + std::to_string(i) + "]"));
        }
    }
    void operator()(const char* key, std::vector<std::size_t>& v) {
        if (const json* j = take(key)) {
            if (!j->is_array()) throw ConfigError(sub(key) + ": expected an array");
            v.clear();
            for (std::size_t i = 0; i < j->size(); ++i)
                v.push_back(count_from((*j)[i], sub(key) + "[" + std::to_string(i) + "]"));
        }
    }
    template <class Section>
    void section(const char* key, Section& s);

    void finish() const {
        for (const auto& [k, _] : obj_.items())
            if (!seen_.count(k)) throw ConfigError(sub(k.c_str()) + ": unknown key");
    }

private:
    const json* take(const char* key) {
        seen_.insert(key);
        auto it = obj_.find(key);
        return it == obj_.end() ? nullptr : &*it;
    }
    std::string sub(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

    const json& obj_;
    std::string path_;
    std::set<std::string> seen_;
};

// Writes fields into a JSON object (same visiting order as Reader).
class Writer {
public:
    json out = json::object();
    template <class T>
    void operator()(const char* key, const T& v) {
        out[key] = v;
    }
    template <class Section>
    void section(const char* key, Section& s);
};

template <class V>
void fields(V& v, LyapunovFamilyConfig& c) {
    v("sizes", c.sizes);
    v("L", c.L);
    v("diffusivity", c.diffusivity);
    v("random_count", c.random_count);
    v("random_size", c.random_size);
}

template <class V>
void fields(V& v, InstabilityConfig& c) {
    v("n", c.n);
    v("L", c.L);
    v("levels", c.levels);
    v("dt", c.dt);
    v("t_end", c.t_end);
    v("noise", c.noise);
    v("rate_tolerance", c.rate_tolerance);
    v("critical_probe", c.critical_probe);
}

template <class V>
void fields(V& v, ReactionDiffusionConfig& c) {
    v("n", c.n);
    v("lengths", c.lengths);
    v("c", c.c);
    v("trajectories", c.trajectories);
    v("amplitude_min", c.amplitude_min);
    v("amplitude_max", c.amplitude_max);
    v("hold", c.hold);
    v("modes", c.modes);
    v("mode_amplitude", c.mode_amplitude);
    v("dt", c.dt);
    v("t_end", c.t_end);
    v("iss_lengths", c.iss_lengths);
    v("iss_w_factor", c.iss_w_factor);
    v("table_lengths", c.table_lengths);
    v("lyap_estimate_fraction", c.lyap_estimate_fraction);
    v("always_refine", c.always_refine);
}

template <class V>
void fields(V& v, BilinearBoundConfig& c) {
    v("n", c.n);
    v("lengths", c.lengths);
    v("c", c.c);
    v("rd_trajectories", c.rd_trajectories);
    v("amplitude_min", c.amplitude_min);
    v("amplitude_max", c.amplitude_max);
    v("hold", c.hold);
    v("constant_levels", c.constant_levels);
    v("random_trajectories", c.random_trajectories);
    v("random_amplitude_max", c.random_amplitude_max);
    v("dt", c.dt);
    v("t_end", c.t_end);
    v("majorant_tolerance", c.majorant_tolerance);
}

template <class V>
void fields(V& v, LinearUnboundedConfig& c) {
    v("n", c.n);
    v("b", c.b);
    v("c", c.c);
    v("times", c.times);
    v("dt", c.dt);
    v("t_end", c.t_end);
    v("tolerance", c.tolerance);
    v("gains", c.gains);
    v("c_multipliers", c.c_multipliers);
    v("witness_b", c.witness_b);
    v("max_auto_n", c.max_auto_n);
}

template <class V>
void fields(V& v, L2L4Config& c) {
    v("n", c.n);
    v("w", c.w);
    v("trajectories", c.trajectories);
    v("amplitude_min", c.amplitude_min);
    v("amplitude_max", c.amplitude_max);
    v("x0_amplitude", c.x0_amplitude);
    v("hold", c.hold);
    v("dt", c.dt);
    v("t_end", c.t_end);
}

template <class V>
void fields(V& v, LpIssConfig& c) {
    v("n", c.n);
    v("L", c.L);
    v("diffusivity", c.diffusivity);
    v("p", c.p);
    v("trajectories", c.trajectories);
    v("amplitude_max", c.amplitude_max);
    v("hold", c.hold);
    v("dt", c.dt);
    v("t_end", c.t_end);
    v("impulse_height", c.impulse_height);
    v("impulse_width", c.impulse_width);
    v("rel_tol", c.rel_tol);
}

template <class V>
void fields(V& v, IntegratorOrderConfig& c) {
    v("n", c.n);
    v("L", c.L);
    v("c", c.c);
    v("dt", c.dt);
    v("t_end", c.t_end);
    v("reference_divisor", c.reference_divisor);
    v("amplitude", c.amplitude);
    v("hold", c.hold);
    v("ratio_min", c.ratio_min);
    v("ratio_max", c.ratio_max);
}

template <class V>
void fields(V& v, ComparisonConfig& c) {
    v("grid", c.grid);
    v("triangle_samples", c.triangle_samples);
    v("n", c.n);
    v("trajectories", c.trajectories);
    v("amplitude_max", c.amplitude_max);
    v("hold", c.hold);
    v("dt", c.dt);
    v("t_end", c.t_end);
}

template <class V>
void top_level(V& v, Config& c) {
    v("seed", c.seed);
    v("output_dir", c.output_dir);
}

template <class V>
void scenarios(V& v, Config& c) {
    v.section("lyapunov_family", c.lyapunov_family);
    v.section("bilinear_instability", c.bilinear_instability);
    v.section("reaction_diffusion", c.reaction_diffusion);
    v.section("bilinear_bound", c.bilinear_bound);
    v.section("linear_unbounded", c.linear_unbounded);
    v.section("linear_l2l4", c.linear_l2l4);
    v.section("lp_iss", c.lp_iss);
    v.section("integrator_order", c.integrator_order);
    v.section("comparison_functions", c.comparison_functions);
}

template <class V>
void fields(V& v, Config& c) {
    scenarios(v, c);
}

template <class Section>
void Reader::section(const char* key, Section& s) {
    if (const json* j = take(key)) {
        Reader r(*j, sub(key));
        fields(r, s);
        r.finish();
    }
}

template <class Section>
void Writer::section(const char* key, Section& s) {
    Writer w;
    fields(w, s);
    out[key] = std::move(w.out);
}

void positive(double v, const std::string& name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(name + " must be positive and finite");
}
void nonnegative(double v, const std::string& name) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError(name + " must be nonnegative and finite");
}
void at_least(std::size_t v, std::size_t lo, const std::string& name) {
    if (v < lo) throw ConfigError(name + " must be at least " + std::to_string(lo));
}
void all_positive(const std::vector<double>& v, const std::string& name) {
    if (v.empty()) throw ConfigError(name + " must not be empty");
    for (double x : v) positive(x, name);
}
void all_finite(const std::vector<double>& v, const std::string& name) {
    if (v.empty()) throw ConfigError(name + " must not be empty");
    for (double x : v)
        if (!std::isfinite(x)) throw ConfigError(name + " entries must be finite");
}
void range(double lo, double hi, const std::string& name) {
    if (!(lo <= hi)) throw ConfigError(name + ": lower end exceeds upper end");
}

}  // namespace

void validate(const Config& c) {
    if (c.output_dir.empty()) throw ConfigError("output_dir must not be empty");

    const auto& lf = c.lyapunov_family;
    if (lf.sizes.empty()) throw ConfigError("lyapunov_family.sizes must not be empty");
    for (auto s : lf.sizes) at_least(s, 3, "lyapunov_family.sizes");
    positive(lf.L, "lyapunov_family.L");
    positive(lf.diffusivity, "lyapunov_family.diffusivity");
    at_least(lf.random_size, 2, "lyapunov_family.random_size");

    const auto& bi = c.bilinear_instability;
    at_least(bi.n, 3, "bilinear_instability.n");
    positive(bi.L, "bilinear_instability.L");
    all_finite(bi.levels, "bilinear_instability.levels");
    positive(bi.dt, "bilinear_instability.dt");
    positive(bi.t_end, "bilinear_instability.t_end");
    nonnegative(bi.noise, "bilinear_instability.noise");
    positive(bi.rate_tolerance, "bilinear_instability.rate_tolerance");
    nonnegative(bi.critical_probe, "bilinear_instability.critical_probe");

    const auto& rd = c.reaction_diffusion;
    at_least(rd.n, 3, "reaction_diffusion.n");
    all_positive(rd.lengths, "reaction_diffusion.lengths");
    positive(rd.c, "reaction_diffusion.c");
    at_least(rd.trajectories, 1, "reaction_diffusion.trajectories");
    nonnegative(rd.amplitude_min, "reaction_diffusion.amplitude_min");
    range(rd.amplitude_min, rd.amplitude_max, "reaction_diffusion.amplitude");
    positive(rd.hold, "reaction_diffusion.hold");
    at_least(rd.modes, 1, "reaction_diffusion.modes");
    nonnegative(rd.mode_amplitude, "reaction_diffusion.mode_amplitude");
    positive(rd.dt, "reaction_diffusion.dt");
    positive(rd.t_end, "reaction_diffusion.t_end");
    for (double L : rd.iss_lengths) positive(L, "reaction_diffusion.iss_lengths");
    if (!(rd.iss_w_factor > 0.0 && rd.iss_w_factor < 2.0))
        throw ConfigError("reaction_diffusion.iss_w_factor must lie in (0, 2)");
    all_positive(rd.table_lengths, "reaction_diffusion.table_lengths");
    if (!(rd.lyap_estimate_fraction > 0.0 && rd.lyap_estimate_fraction <= 1.0))
        throw ConfigError("reaction_diffusion.lyap_estimate_fraction must lie in (0, 1]");

    const auto& bb = c.bilinear_bound;
    at_least(bb.n, 3, "bilinear_bound.n");
    all_positive(bb.lengths, "bilinear_bound.lengths");
    positive(bb.c, "bilinear_bound.c");
    nonnegative(bb.amplitude_min, "bilinear_bound.amplitude_min");
    range(bb.amplitude_min, bb.amplitude_max, "bilinear_bound.amplitude");
    positive(bb.hold, "bilinear_bound.hold");
    for (double v : bb.constant_levels) nonnegative(v, "bilinear_bound.constant_levels");
    nonnegative(bb.random_amplitude_max, "bilinear_bound.random_amplitude_max");
    positive(bb.dt, "bilinear_bound.dt");
    positive(bb.t_end, "bilinear_bound.t_end");
    positive(bb.majorant_tolerance, "bilinear_bound.majorant_tolerance");

    const auto& lu = c.linear_unbounded;
    if (lu.n != 0) at_least(lu.n, 1, "linear_unbounded.n");
    all_positive(lu.b, "linear_unbounded.b");
    all_positive(lu.c, "linear_unbounded.c");
    all_positive(lu.times, "linear_unbounded.times");
    positive(lu.dt, "linear_unbounded.dt");
    positive(lu.t_end, "linear_unbounded.t_end");
    for (double t : lu.times)
        if (t > lu.t_end) throw ConfigError("linear_unbounded.times must not exceed t_end");
    positive(lu.tolerance, "linear_unbounded.tolerance");
    all_positive(lu.gains, "linear_unbounded.gains");
    all_positive(lu.c_multipliers, "linear_unbounded.c_multipliers");
    positive(lu.witness_b, "linear_unbounded.witness_b");

    const auto& l4 = c.linear_l2l4;
    at_least(l4.n, 1, "linear_l2l4.n");
    if (!(l4.w > 0.0 && l4.w < 2.0)) throw ConfigError("linear_l2l4.w must lie in (0, 2)");
    nonnegative(l4.amplitude_min, "linear_l2l4.amplitude_min");
    range(l4.amplitude_min, l4.amplitude_max, "linear_l2l4.amplitude");
    nonnegative(l4.x0_amplitude, "linear_l2l4.x0_amplitude");
    positive(l4.hold, "linear_l2l4.hold");
    positive(l4.dt, "linear_l2l4.dt");
    positive(l4.t_end, "linear_l2l4.t_end");

    const auto& lp = c.lp_iss;
    at_least(lp.n, 3, "lp_iss.n");
    positive(lp.L, "lp_iss.L");
    positive(lp.diffusivity, "lp_iss.diffusivity");
    if (lp.p.empty()) throw ConfigError("lp_iss.p must not be empty");
    for (double p : lp.p)
        if (!(p >= 1.0) || !std::isfinite(p)) throw ConfigError("lp_iss.p entries must be >= 1");
    nonnegative(lp.amplitude_max, "lp_iss.amplitude_max");
    positive(lp.hold, "lp_iss.hold");
    positive(lp.dt, "lp_iss.dt");
    positive(lp.t_end, "lp_iss.t_end");
    positive(lp.impulse_height, "lp_iss.impulse_height");
    positive(lp.impulse_width, "lp_iss.impulse_width");
    positive(lp.rel_tol, "lp_iss.rel_tol");

    const auto& io = c.integrator_order;
    at_least(io.n, 3, "integrator_order.n");
    positive(io.L, "integrator_order.L");
    positive(io.c, "integrator_order.c");
    positive(io.dt, "integrator_order.dt");
    positive(io.t_end, "integrator_order.t_end");
    at_least(io.reference_divisor, 4, "integrator_order.reference_divisor");
    nonnegative(io.amplitude, "integrator_order.amplitude");
    positive(io.hold, "integrator_order.hold");
    range(io.ratio_min, io.ratio_max, "integrator_order.ratio");

    const auto& cf = c.comparison_functions;
    at_least(cf.grid, 16, "comparison_functions.grid");
    at_least(cf.triangle_samples, 1, "comparison_functions.triangle_samples");
    at_least(cf.n, 3, "comparison_functions.n");
    nonnegative(cf.amplitude_max, "comparison_functions.amplitude_max");
    positive(cf.hold, "comparison_functions.hold");
    positive(cf.dt, "comparison_functions.dt");
    positive(cf.t_end, "comparison_functions.t_end");
}

Config parse_config(const std::string& text, const std::string& source) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("config parse error in " + source + ": " + e.what());
    }
    Config cfg;
    try {
        Reader top(root, "");
        top_level(top, cfg);
        top.section("scenarios", cfg);
        top.finish();
    } catch (const ConfigError& e) {
        throw ConfigError(source + ": " + e.what());
    }
    try {
        validate(cfg);
    } catch (const ConfigError& e) {
        throw ConfigError(source + ": " + e.what());
    }
    return cfg;
}

Config load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

void apply_overrides(Config& c, std::optional<std::uint64_t> seed, std::optional<double> dt,
                     std::optional<std::size_t> n) {
    if (seed) c.seed = *seed;
    if (dt) {
        c.bilinear_instability.dt = *dt;
        c.reaction_diffusion.dt = *dt;
        c.bilinear_bound.dt = *dt;
        c.linear_unbounded.dt = *dt;
        c.linear_l2l4.dt = *dt;
        c.lp_iss.dt = *dt;
        c.integrator_order.dt = *dt;
        c.comparison_functions.dt = *dt;
    }
    if (n) {
        c.bilinear_instability.n = *n;
        c.reaction_diffusion.n = *n;
        c.bilinear_bound.n = *n;
        c.linear_unbounded.n = *n;
        c.linear_l2l4.n = *n;
        c.lp_iss.n = *n;
        c.integrator_order.n = *n;
        c.comparison_functions.n = *n;
    }
    validate(c);
}

std::string default_config_json() {
    Config cfg;
    Writer top;
    top_level(top, cfg);
    top.section("scenarios", cfg);
    return top.out.dump(2) + "\n";
}

}  // namespace isslab::config
