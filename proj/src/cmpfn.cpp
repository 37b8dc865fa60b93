#include "isslab/cmpfn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>

#include "isslab/errors.hpp"
#include "isslab/random.hpp"

namespace isslab::cmpfn {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kOriginTol = 1e-12;

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
}

// NaN or -inf is always a failure; +inf is accepted only where the caller
// asks for it (far-field growth witnesses).
double evaluate(const ComparisonFunction& f, double r, bool allow_pos_inf = false) {
    const double v = f(r);
    if (std::isnan(v) || (std::isinf(v) && (v < 0 || !allow_pos_inf))) {
        throw EvaluationFailure("evaluation failure: " + (f.label().empty() ? "f" : f.label()) +
                                    "(" + fmt(r) + ") = " + fmt(v),
                                r);
    }
    return v;
}

AxiomResult make_axiom(std::string name) {
    AxiomResult a;
    a.axiom = std::move(name);
    return a;
}

void fail(AxiomResult& a, double witness, std::string detail) {
    if (!a.passed) return;  // keep the first witness
    a.passed = false;
    a.witness = witness;
    a.detail = std::move(detail);
}

bool unbounded_witness(const ComparisonFunction& f, std::string& detail) {
    const double d = f.domain_hint();
    const double f_near = evaluate(f, d, true);
    const double f_mid = evaluate(f, d * 1e3, true);
    const double f_far = evaluate(f, d * 1e6, true);
    if (std::isinf(f_far)) return true;
    // Growth over the last three decades must not collapse relative to the
    // first three; a saturating function shows a vanishing tail increment.
    const bool grows = f_far > 2.0 * f_near && (f_far - f_mid) >= 0.25 * (f_mid - f_near);
    if (!grows) {
        detail = "f(" + fmt(d) + ")=" + fmt(f_near) + ", f(" + fmt(d * 1e3) + ")=" + fmt(f_mid) +
                 ", f(" + fmt(d * 1e6) + ")=" + fmt(f_far) + " saturates";
    }
    return grows;
}

}  // namespace

std::string_view to_string(FunctionClass cls) {
    switch (cls) {
        case FunctionClass::PD: return "PD";
        case FunctionClass::K: return "K";
        case FunctionClass::Kinf: return "Kinf";
        case FunctionClass::L: return "L";
    }
    return "?";
}

ComparisonFunction::ComparisonFunction(Evaluator f, FunctionClass cls, double domain_hint,
                                       std::string label)
    : f_(std::move(f)), cls_(cls), domain_hint_(domain_hint), label_(std::move(label)) {
    if (!f_) throw PreconditionError("comparison function without evaluator");
    if (!(domain_hint_ > 0.0) || !std::isfinite(domain_hint_))
        throw PreconditionError("domain_hint must be positive and finite");
}

ComparisonFunction ComparisonFunction::with_class(FunctionClass cls) const {
    ComparisonFunction g = *this;
    g.cls_ = cls;
    return g;
}

ComparisonFunction ComparisonFunction::with_label(std::string label) const {
    ComparisonFunction g = *this;
    g.label_ = std::move(label);
    return g;
}

ComparisonFunction identity(double domain_hint) {
    return {[](double r) { return r; }, FunctionClass::Kinf, domain_hint, "id"};
}

ComparisonFunction zero_function(double domain_hint) {
    return {[](double) { return 0.0; }, FunctionClass::PD, domain_hint, "0"};
}

ComparisonFunction compose(const ComparisonFunction& outer, const ComparisonFunction& inner,
                           FunctionClass cls) {
    return {[outer, inner](double r) { return outer(inner(r)); }, cls, inner.domain_hint(),
            outer.label() + "o" + inner.label()};
}

ComparisonFunction scaled(double factor, const ComparisonFunction& f) {
    return {[factor, f](double r) { return factor * f(r); }, f.declared_class(), f.domain_hint(),
            fmt(factor) + "*" + f.label()};
}

const AxiomResult* ClassReport::first_failure() const {
    for (const auto& a : axioms)
        if (!a.passed) return &a;
    return nullptr;
}

std::string ClassReport::summary() const {
    std::ostringstream os;
    os << to_string(checked_class) << ": " << (passed ? "pass" : "fail");
    if (const auto* f = first_failure()) {
        os << " (" << f->axiom;
        if (f->witness) os << " at r=" << *f->witness;
        if (!f->detail.empty()) os << "; " << f->detail;
        os << ")";
    }
    return os.str();
}

ClassReport check_class(const ComparisonFunction& f, std::size_t grid_size) {
    return check_class_as(f, f.declared_class(), grid_size);
}

ClassReport check_class_as(const ComparisonFunction& f, FunctionClass cls, std::size_t grid_size) {
    if (grid_size < 16) throw PreconditionError("check_class needs grid_size >= 16");

    const double d = f.domain_hint();
    std::vector<double> r(grid_size), v(grid_size);
    for (std::size_t i = 0; i < grid_size; ++i) {
        r[i] = d * static_cast<double>(i) / static_cast<double>(grid_size - 1);
        v[i] = evaluate(f, r[i]);
    }

    ClassReport report;
    report.checked_class = cls;

    auto nonneg = make_axiom("nonnegative");
    for (std::size_t i = 0; i < grid_size; ++i)
        if (v[i] < 0.0) fail(nonneg, r[i], "value " + fmt(v[i]));
    report.axioms.push_back(nonneg);

    if (cls == FunctionClass::L) {
        auto dec = make_axiom("strictly decreasing");
        for (std::size_t i = 1; i < grid_size; ++i)
            if (!(v[i] < v[i - 1])) fail(dec, r[i], fmt(v[i - 1]) + " -> " + fmt(v[i]));
        report.axioms.push_back(dec);

        auto lim = make_axiom("tends to zero");
        const double far = evaluate(f, d * 1e6);
        const double scale = std::max(v.front(), std::numeric_limits<double>::min());
        if (!(far <= 1e-3 * scale)) fail(lim, d * 1e6, "far value " + fmt(far));
        report.axioms.push_back(lim);
    } else {
        auto origin = make_axiom("zero at origin");
        if (std::abs(v.front()) > kOriginTol) fail(origin, 0.0, "f(0)=" + fmt(v.front()));
        report.axioms.push_back(origin);

        auto pos = make_axiom("positive away from origin");
        for (std::size_t i = 1; i < grid_size; ++i)
            if (!(v[i] > 0.0)) fail(pos, r[i], "value " + fmt(v[i]));
        report.axioms.push_back(pos);

        if (cls == FunctionClass::K || cls == FunctionClass::Kinf) {
            auto inc = make_axiom("strictly increasing");
            for (std::size_t i = 1; i < grid_size; ++i)
                if (!(v[i] > v[i - 1])) fail(inc, r[i], fmt(v[i - 1]) + " -> " + fmt(v[i]));
            report.axioms.push_back(inc);
        }
        if (cls == FunctionClass::Kinf) {
            auto unb = make_axiom("unbounded");
            std::string detail;
            if (!unbounded_witness(f, detail)) fail(unb, d * 1e6, detail);
            report.axioms.push_back(unb);
        }
    }

    report.passed = std::all_of(report.axioms.begin(), report.axioms.end(),
                                [](const AxiomResult& a) { return a.passed; });
    return report;
}

KLFunction::KLFunction(Evaluator f, Structure structure, double s_hint, double t_hint,
                       std::string label)
    : f_(std::move(f)), structure_(structure), s_hint_(s_hint), t_hint_(t_hint),
      label_(std::move(label)) {
    if (!f_) throw PreconditionError("KL function without evaluator");
    if (!(s_hint_ > 0.0) || !(t_hint_ > 0.0)) throw PreconditionError("KL hints must be positive");
}

ClassReport check_kl(const KLFunction& beta, std::size_t grid_size) {
    if (grid_size < 16) throw PreconditionError("check_kl needs grid_size >= 16");
    ClassReport report;
    report.checked_class = FunctionClass::K;

    auto in_k = make_axiom("beta(.,t) in K");
    auto in_l = make_axiom("beta(r,.) in L");
    const auto m = static_cast<double>(grid_size - 1);
    for (std::size_t j = 0; j < grid_size && in_k.passed; ++j) {
        const double t = beta.t_hint() * static_cast<double>(j) / m;
        ComparisonFunction slice([&beta, t](double s) { return beta(s, t); }, FunctionClass::K,
                                 beta.s_hint(), beta.label());
        const auto r = check_class(slice, grid_size);
        if (!r.passed) fail(in_k, t, "t=" + fmt(t) + ": " + r.summary());
    }
    for (std::size_t i = 1; i < grid_size && in_l.passed; ++i) {
        const double s = beta.s_hint() * static_cast<double>(i) / m;
        ComparisonFunction slice([&beta, s](double t) { return beta(s, t); }, FunctionClass::L,
                                 beta.t_hint(), beta.label());
        const auto r = check_class(slice, grid_size);
        if (!r.passed) fail(in_l, s, "s=" + fmt(s) + ": " + r.summary());
    }
    report.axioms = {in_k, in_l};
    report.passed = in_k.passed && in_l.passed;
    return report;
}

double invert(const ComparisonFunction& f, double y) {
    if (!(y >= 0.0) || std::isinf(y)) throw PreconditionError("invert: y must be finite and >= 0");
    if (y == 0.0) return 0.0;

    double lo = 0.0;
    double hi = f.domain_hint();
    int doublings = 0;
    while (evaluate(f, hi, true) < y) {
        lo = hi;
        hi *= 2.0;
        if (++doublings > 200) {
            throw RangeExceeded("invert: y=" + fmt(y) + " exceeds the range of " +
                                (f.label().empty() ? std::string("f") : f.label()));
        }
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (evaluate(f, mid, true) < y) lo = mid;
        else hi = mid;
    }
    const double flo = evaluate(f, lo, true);
    const double fhi = evaluate(f, hi, true);
    return std::abs(flo - y) <= std::abs(fhi - y) ? lo : hi;
}

ComparisonFunction inverse(const ComparisonFunction& f, FunctionClass cls) {
    const double hint = evaluate(f, f.domain_hint(), true);
    return {[f](double y) { return invert(f, y); }, cls,
            std::isfinite(hint) && hint > 0 ? hint : 1.0, f.label() + "^-1"};
}

double weak_triangle_slack(const ComparisonFunction& f, double a, double b) {
    return invert(f, 2.0 * a) + invert(f, 2.0 * b) - invert(f, a + b);
}

TriangleReport weak_triangle_check(const ComparisonFunction& f, std::size_t samples,
                                   std::uint64_t seed) {
    const double y_max = evaluate(f, f.domain_hint());
    Rng rng(seed);
    TriangleReport rep;
    rep.samples = samples;
    rep.worst_slack = kInf;
    rep.max_slack = -kInf;
    for (std::size_t i = 0; i < samples; ++i) {
        const double a = rng.uniform(0.0, y_max);
        const double b = rng.uniform(0.0, y_max);
        const double slack = weak_triangle_slack(f, a, b);
        const double scale = 1.0 + invert(f, a + b);
        if (slack < -1e-9 * scale) {
            ++rep.violations;
            if (!rep.witness) rep.witness = std::make_pair(a, b);
        }
        rep.worst_slack = std::min(rep.worst_slack, slack);
        rep.max_slack = std::max(rep.max_slack, slack);
    }
    return rep;
}

ComparisonFunction implicative_to_dissipative(const ComparisonFunction& eta,
                                              const ComparisonFunction& gamma,
                                              const ComparisonFunction& w_hat,
                                              const ComparisonFunction& p,
                                              const ComparisonFunction& q) {
    (void)eta;  // alpha = eta in the resulting dissipative pair
    ComparisonFunction sigma(
        [gamma, w_hat, p, q](double r) {
            const double g = gamma(r);
            return 2.0 * w_hat(g) * g + p(g) + q(r);
        },
        FunctionClass::Kinf, std::max(gamma.domain_hint(), q.domain_hint()), "sigma");
    const auto rep = check_class(sigma);
    if (!rep.passed) throw ConstructionError("construction not Kinf: " + rep.summary());
    return sigma;
}

ComparisonFunction k_minorant(const ComparisonFunction& alpha) {
    if (check_class_as(alpha, FunctionClass::K).passed)
        return alpha.with_class(FunctionClass::K).with_label(alpha.label());
    const auto pd = check_class_as(alpha, FunctionClass::PD);
    if (!pd.passed) throw PreconditionError("k_minorant needs a PD function: " + pd.summary());

    // Suffix minimum over a dense table on [0, 2D], seeded with geometric
    // far-field samples so the table approximates inf over [s, inf).
    constexpr std::size_t kTable = 4097;
    const double top = 2.0 * alpha.domain_hint();
    auto far_inf = [alpha](double s) {
        double m = kInf;
        for (int k = 0; k <= 160; ++k) m = std::min(m, evaluate(alpha, s * std::exp2(k / 4.0), true));
        return m;
    };
    auto table = std::make_shared<std::vector<double>>(kTable);
    double running = far_inf(top);
    for (std::size_t j = kTable; j-- > 0;) {
        const double s = top * static_cast<double>(j) / static_cast<double>(kTable - 1);
        running = std::min(running, evaluate(alpha, s));
        (*table)[j] = running;
    }
    const double tail_floor = table->back();
    const double delta = 1e-6 * alpha.domain_hint();
    auto minorant = [table, top, tail_floor, far_inf, delta](double s) {
        double m;
        if (s >= top) {
            m = std::max(tail_floor, far_inf(s));
        } else {
            const double x = s / top * static_cast<double>(kTable - 1);
            const auto j = static_cast<std::size_t>(x);
            const double w = x - static_cast<double>(j);
            m = (*table)[j] * (1.0 - w) + (*table)[std::min(j + 1, kTable - 1)] * w;
        }
        return m * s / (s + delta);
    };
    return {minorant, FunctionClass::K, alpha.domain_hint(), "hat(" + alpha.label() + ")"};
}

ImplicativeGains dissipative_to_implicative(const ComparisonFunction& alpha,
                                            const ComparisonFunction& sigma, double K_margin) {
    if (!(K_margin > 1.0)) throw PreconditionError("K_margin must exceed 1");

    const ComparisonFunction ahat = k_minorant(alpha);
    std::string ignored;
    const bool alpha_unbounded = unbounded_witness(ahat, ignored);
    const bool sigma_unbounded = unbounded_witness(sigma, ignored);
    const double alpha_tail = alpha_unbounded ? kInf : evaluate(ahat, ahat.domain_hint() * 1e6);
    const double sigma_tail = sigma_unbounded ? kInf : evaluate(sigma, sigma.domain_hint() * 1e6);

    ImplicativeGains out{ahat, ahat, 1, K_margin, alpha_tail, sigma_tail, {}};

    bool equal_tails = false;
    double K = K_margin;
    if (!alpha_unbounded) {
        if (sigma_unbounded)
            throw NotAnIssPair("not an ISS pair: alpha bounded (" + fmt(alpha_tail) +
                               ") while sigma is unbounded");
        const double ratio = alpha_tail / sigma_tail;
        if (std::abs(ratio - 1.0) <= 1e-6) {
            equal_tails = true;
        } else if (ratio > 1.0) {
            if (ratio < K) {
                K = ratio;
                out.notes.push_back("K_margin reduced to tail ratio " + fmt(ratio));
            }
        } else {
            throw NotAnIssPair("not an ISS pair: lim alpha = " + fmt(alpha_tail) +
                               " < lim sigma = " + fmt(sigma_tail));
        }
    }

    if (!equal_tails) {
        out.tail_case = 1;
        out.margin_used = K;
        out.gamma = ComparisonFunction([ahat, sigma, K](double r) { return invert(ahat, K * sigma(r)); },
                                       FunctionClass::K, sigma.domain_hint(), "gamma");
        out.eta = ComparisonFunction([ahat, K](double s) { return (1.0 - 1.0 / K) * ahat(s); },
                                     FunctionClass::K, ahat.domain_hint(), "eta");
    } else {
        // omega(v) = (sup - v) v / sup on [0, sup), zero beyond; id + omega stays Kinf.
        const double sup = sigma_tail;
        auto id_plus_omega = [sup](double v) { return v < sup ? 2.0 * v - v * v / sup : v; };
        auto id_plus_omega_inv = [sup](double y) {
            return y < sup ? sup * (1.0 - std::sqrt(1.0 - y / sup)) : y;
        };
        out.tail_case = 2;
        out.margin_used = 1.0;
        out.gamma = ComparisonFunction(
            [ahat, sigma, id_plus_omega](double r) { return invert(ahat, id_plus_omega(sigma(r))); },
            FunctionClass::K, sigma.domain_hint(), "gamma");
        out.eta = ComparisonFunction(
            [ahat, id_plus_omega_inv](double s) {
                const double a = ahat(s);
                return a - id_plus_omega_inv(a);
            },
            FunctionClass::PD, ahat.domain_hint(), "eta");
        out.notes.push_back("equal finite tails: eta is only PD; no upgrade to Kinf is attempted");
    }

    for (const auto* g : {&out.gamma, &out.eta}) {
        const auto rep = check_class(*g);
        if (!rep.passed) throw ConstructionError(g->label() + " failed its class check: " + rep.summary());
    }
    return out;
}

IissGainTriple assemble_bilinear_iiss_gains(double M, double lambda, double normB, double K,
                                            const ComparisonFunction& xi) {
    if (!(M >= 1.0)) throw PreconditionError("M must be >= 1");
    if (!(lambda > 0.0)) throw PreconditionError("lambda must be positive");
    if (!(normB >= 0.0) || !(K >= 0.0)) throw PreconditionError("normB and K must be >= 0");
    if (normB == 0.0 && K == 0.0) throw PreconditionError("normB = K = 0: mu would vanish identically");
    const auto xi_rep = check_class_as(xi, FunctionClass::K);
    if (!xi_rep.passed) throw PreconditionError("xi is not of class K: " + xi_rep.summary());

    KLFunction beta(
        [M, lambda](double s, double t) {
            const double a = 1.0 + M * std::exp(-lambda * t) * s;
            return a * a - 1.0;
        },
        KLFunction::Structure::General, 10.0, 20.0 / lambda, "beta");
    ComparisonFunction theta([](double s) { return std::expm1(2.0 * s); }, FunctionClass::Kinf, 5.0,
                             "theta");
    ComparisonFunction mu([M, normB, K, xi](double s) { return M * normB * s + M * K * xi(s); },
                          FunctionClass::K, xi.domain_hint(), "mu");

    const auto rb = check_kl(beta);
    if (!rb.passed) throw ConstructionError("beta: " + rb.summary());
    for (const auto* f : {&theta, &mu}) {
        const auto r = check_class(*f);
        if (!r.passed) throw ConstructionError(f->label() + ": " + r.summary());
    }
    return {beta, theta, mu};
}

}  // namespace isslab::cmpfn
