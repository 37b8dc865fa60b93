#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace isslab::cmpfn {

/// Comparison classes used in stability estimates.
///
///  PD   continuous, zero at 0, positive elsewhere
///  K    PD and strictly increasing
///  Kinf K and unbounded
///  L    continuous, strictly decreasing, tends to 0
enum class FunctionClass { PD, K, Kinf, L };

std::string_view to_string(FunctionClass cls);

/// Scalar map R+ -> R+ tagged with the class it claims to belong to.
///
/// Membership is never proven; check_class() gathers sampling evidence over
/// [0, domain_hint] plus a far-field witness for unboundedness / decay.
class ComparisonFunction {
public:
    using Evaluator = std::function<double(double)>;

    ComparisonFunction(Evaluator f, FunctionClass cls, double domain_hint = 10.0,
                       std::string label = {});

    double operator()(double r) const { return f_(r); }

    FunctionClass declared_class() const { return cls_; }
    double domain_hint() const { return domain_hint_; }
    const std::string& label() const { return label_; }

    ComparisonFunction with_class(FunctionClass cls) const;
    ComparisonFunction with_label(std::string label) const;

private:
    Evaluator f_;
    FunctionClass cls_;
    double domain_hint_;
    std::string label_;
};

ComparisonFunction identity(double domain_hint = 10.0);
/// The zero map; useful as a vanishing gain, fails every class check.
ComparisonFunction zero_function(double domain_hint = 10.0);
/// outer(inner(r)), tagged with `cls`; the domain hint is taken from inner.
ComparisonFunction compose(const ComparisonFunction& outer, const ComparisonFunction& inner,
                           FunctionClass cls);
ComparisonFunction scaled(double factor, const ComparisonFunction& f);

struct AxiomResult {
    std::string axiom;
    bool passed = true;
    std::optional<double> witness;  // first violating argument
    std::string detail;
};

struct ClassReport {
    FunctionClass checked_class = FunctionClass::PD;
    bool passed = true;
    std::vector<AxiomResult> axioms;

    const AxiomResult* first_failure() const;
    std::string summary() const;
};

/// Checks f against its declared class on grid_size uniform samples.
/// Throws EvaluationFailure on non-finite output.
ClassReport check_class(const ComparisonFunction& f, std::size_t grid_size = 1000);
/// Same, against an explicitly chosen class.
ClassReport check_class_as(const ComparisonFunction& f, FunctionClass cls,
                           std::size_t grid_size = 1000);

/// Two-argument comparison function beta(s, t).
class KLFunction {
public:
    using Evaluator = std::function<double(double, double)>;
    enum class Structure { General, Separable };

    KLFunction(Evaluator f, Structure structure = Structure::General, double s_hint = 10.0,
               double t_hint = 10.0, std::string label = {});

    double operator()(double s, double t) const { return f_(s, t); }
    Structure structure() const { return structure_; }
    double s_hint() const { return s_hint_; }
    double t_hint() const { return t_hint_; }
    const std::string& label() const { return label_; }

private:
    Evaluator f_;
    Structure structure_;
    double s_hint_;
    double t_hint_;
    std::string label_;
};

/// beta(., t) in K for sampled t and beta(r, .) decreasing to zero for sampled r > 0.
ClassReport check_kl(const KLFunction& beta, std::size_t grid_size = 64);

/// beta, theta, mu of the integral ISS estimate
///   |x(t)| <= beta(|x0|, t) + theta( int_0^t mu(|u(s)|) ds ).
struct IissGainTriple {
    KLFunction beta;
    ComparisonFunction theta;
    ComparisonFunction mu;

    double bound(double x0_norm, double t, double mu_integral) const {
        return beta(x0_norm, t) + theta(mu_integral);
    }
};

/// x with f(x) = y for strictly increasing f, by bracketed bisection. The
/// bracket starts at [0, domain_hint] and doubles at most 200 times.
double invert(const ComparisonFunction& f, double y);

/// Function object for r -> f^{-1}(r).
ComparisonFunction inverse(const ComparisonFunction& f, FunctionClass cls);

struct TriangleReport {
    std::size_t samples = 0;
    std::size_t violations = 0;
    double worst_slack = 0.0;  // min of f^-1(2a)+f^-1(2b)-f^-1(a+b)
    double max_slack = 0.0;
    std::optional<std::pair<double, double>> witness;
};

/// Samples pairs (a, b) in [0, f(domain_hint)] and checks
/// f^-1(a+b) <= f^-1(2a) + f^-1(2b).
TriangleReport weak_triangle_check(const ComparisonFunction& f, std::size_t samples,
                                   std::uint64_t seed = 1);
/// Explicit pair evaluation (slack; negative means violated).
double weak_triangle_slack(const ComparisonFunction& f, double a, double b);

/// sigma(r) = 2 w_hat(gamma(r)) gamma(r) + p(gamma(r)) + q(r), class-checked as Kinf.
/// Throws ConstructionError with the failing witness otherwise.
ComparisonFunction implicative_to_dissipative(const ComparisonFunction& eta,
                                              const ComparisonFunction& gamma,
                                              const ComparisonFunction& w_hat,
                                              const ComparisonFunction& p,
                                              const ComparisonFunction& q);

/// Largest sampled nondecreasing minorant of a PD function, made strictly increasing.
/// Returns alpha itself when alpha already passes the K check.
ComparisonFunction k_minorant(const ComparisonFunction& alpha);

struct ImplicativeGains {
    ComparisonFunction gamma;
    ComparisonFunction eta;
    int tail_case = 1;          // 1: unbounded or strict tail gap, 2: equal finite tails
    double margin_used = 0.0;   // K actually applied in case 1
    double alpha_tail = 0.0;    // sampled lim alpha_hat (inf when unbounded)
    double sigma_tail = 0.0;    // sampled lim sigma (inf when unbounded)
    std::vector<std::string> notes;
};

/// Converts dissipative ISS gains (alpha, sigma) into implicative gains
/// (gamma, eta). Throws NotAnIssPair when the sampled tails violate
///   lim alpha = inf  or  liminf alpha >= lim sigma.
ImplicativeGains dissipative_to_implicative(const ComparisonFunction& alpha,
                                            const ComparisonFunction& sigma,
                                            double K_margin);

/// Closed-form iISS gains for a bilinear system with |T(t)| <= M e^{-lambda t},
/// |C(x,u)| <= K |x| xi(|u|):
///   beta(s,t) = (1 + M e^{-lambda t} s)^2 - 1
///   theta(s)  = e^{2s} - 1
///   mu(s)     = M normB s + M K xi(s)
IissGainTriple assemble_bilinear_iiss_gains(double M, double lambda, double normB, double K,
                                            const ComparisonFunction& xi);

}  // namespace isslab::cmpfn
