#include <gtest/gtest.h>

#include <cmath>

#include "isslab/cmpfn.hpp"
#include "isslab/errors.hpp"
#include "isslab/random.hpp"

using namespace isslab;
using namespace isslab::cmpfn;

namespace {

ComparisonFunction fn(ComparisonFunction::Evaluator f, FunctionClass cls, double hint = 10.0) {
    return {std::move(f), cls, hint, ""};
}

std::string failed_axiom(const ClassReport& r) {
    const auto* f = r.first_failure();
    return f ? f->axiom : "";
}

}  // namespace

TEST(ClassCheck, IdentityIsKinf) {
    EXPECT_TRUE(check_class(identity()).passed);
}

TEST(ClassCheck, SaturatingFunctionIsKButNotKinf) {
    const auto f = fn([](double r) { return r / (1.0 + r); }, FunctionClass::Kinf);
    const auto rep = check_class(f);
    EXPECT_FALSE(rep.passed);
    EXPECT_EQ(failed_axiom(rep), "unbounded");
    EXPECT_TRUE(check_class_as(f, FunctionClass::K).passed);
}

TEST(ClassCheck, ZeroFailsPositivity) {
    const auto rep = check_class_as(zero_function(), FunctionClass::PD);
    EXPECT_FALSE(rep.passed);
    EXPECT_EQ(failed_axiom(rep), "positive away from origin");
}

TEST(ClassCheck, HumpIsPDButNotK) {
    const auto f = fn([](double s) { return s * s / (1.0 + s * s * s * s); }, FunctionClass::K);
    const auto rep = check_class(f);
    EXPECT_FALSE(rep.passed);
    EXPECT_EQ(failed_axiom(rep), "strictly increasing");
    ASSERT_TRUE(rep.first_failure()->witness.has_value());
    // The hump peaks at s = 1, so the first decrease is just past it.
    EXPECT_GT(*rep.first_failure()->witness, 1.0);
    EXPECT_LT(*rep.first_failure()->witness, 1.1);
    EXPECT_TRUE(check_class_as(f, FunctionClass::PD).passed);
}

TEST(ClassCheck, NonzeroAtOriginFails) {
    const auto rep = check_class(fn([](double r) { return 1.0 + r; }, FunctionClass::K));
    EXPECT_EQ(failed_axiom(rep), "zero at origin");
}

TEST(ClassCheck, DecayingExponentialIsL) {
    EXPECT_TRUE(check_class(fn([](double t) { return std::exp(-t); }, FunctionClass::L)).passed);
    EXPECT_FALSE(check_class(fn([](double t) { return 1.0 / (1.0 + t) + 0.5; }, FunctionClass::L)).passed);
}

TEST(ClassCheck, NonFiniteValueThrows) {
    const auto f = fn([](double r) { return r > 5.0 ? NAN : r; }, FunctionClass::K);
    EXPECT_THROW(check_class(f), EvaluationFailure);
}

TEST(Invert, RecoversCubeRoot) {
    const auto cube = fn([](double r) { return r * r * r; }, FunctionClass::Kinf);
    EXPECT_NEAR(invert(cube, 8.0), 2.0, 1e-12);
    EXPECT_NEAR(invert(cube, 1e9), 1e3, 1e-9);
    EXPECT_EQ(invert(cube, 0.0), 0.0);
}

TEST(Invert, BoundedRangeThrows) {
    const auto f = fn([](double r) { return -std::expm1(-r); }, FunctionClass::K);
    EXPECT_THROW(invert(f, 2.0), RangeExceeded);
}

TEST(WeakTriangle, IdentitySlackIsSum) {
    EXPECT_NEAR(weak_triangle_slack(identity(), 1.5, 2.5), 4.0, 1e-12);
}

TEST(WeakTriangle, HoldsOnRandomPairs) {
    // f^-1(a+b) <= f^-1(2 max(a,b)) <= f^-1(2a) + f^-1(2b) for any increasing f.
    for (const auto& f : {fn([](double r) { return r * r; }, FunctionClass::Kinf),
                          fn([](double r) { return std::log1p(r); }, FunctionClass::Kinf),
                          fn([](double r) { return std::expm1(r); }, FunctionClass::Kinf)}) {
        const auto rep = weak_triangle_check(f, 500, 7);
        EXPECT_EQ(rep.violations, 0u);
        EXPECT_GE(rep.worst_slack, -1e-9);
    }
}

TEST(DissipativeToImplicative, QuadraticPairClosedForm) {
    const auto alpha = fn([](double s) { return s * s; }, FunctionClass::Kinf);
    const auto sigma = fn([](double r) { return r * r; }, FunctionClass::Kinf);
    const auto g = dissipative_to_implicative(alpha, sigma, 2.0);
    EXPECT_EQ(g.tail_case, 1);
    for (double r : {0.1, 1.0, 3.0}) {
        EXPECT_NEAR(g.gamma(r), std::sqrt(2.0) * r, 1e-10 * r);
        EXPECT_NEAR(g.eta(r), 0.5 * r * r, 1e-12);
    }
}

TEST(DissipativeToImplicative, ImplicationHoldsOnSamples) {
    // |x| >= gamma(|u|) and V' <= -alpha + sigma imply V' <= -eta.
    const auto alpha = fn([](double s) { return s * s * s + s; }, FunctionClass::Kinf);
    const auto sigma = fn([](double r) { return 3.0 * r; }, FunctionClass::Kinf);
    const auto g = dissipative_to_implicative(alpha, sigma, 1.5);
    Rng rng(3);
    for (int i = 0; i < 200; ++i) {
        const double r = rng.uniform(0.0, 5.0);
        const double s = g.gamma(r) * (1.0 + rng.uniform01());
        EXPECT_LE(-alpha(s) + sigma(r), -g.eta(s) + 1e-9 * (1.0 + alpha(s)));
    }
}

TEST(DissipativeToImplicative, BoundedAlphaUnboundedSigmaIsRejected) {
    const auto alpha = fn([](double s) { return s * s / (1.0 + s * s); }, FunctionClass::K);
    EXPECT_THROW(dissipative_to_implicative(alpha, identity(), 2.0), NotAnIssPair);
}

TEST(DissipativeToImplicative, SmallerAlphaTailIsRejected) {
    const auto alpha = fn([](double s) { return s * s / (1.0 + s * s); }, FunctionClass::K);
    const auto sigma = fn([](double r) { return 2.0 * r / (1.0 + r); }, FunctionClass::K);
    EXPECT_THROW(dissipative_to_implicative(alpha, sigma, 2.0), NotAnIssPair);
}

TEST(DissipativeToImplicative, TailRatioCapsMargin) {
    const auto alpha = fn([](double s) { return 2.0 * s * s / (1.0 + s * s); }, FunctionClass::K);
    const auto sigma = fn([](double r) { return r / (1.0 + r); }, FunctionClass::K);
    const auto g = dissipative_to_implicative(alpha, sigma, 4.0);
    EXPECT_EQ(g.tail_case, 1);
    EXPECT_NEAR(g.margin_used, 2.0, 1e-4);
}

TEST(DissipativeToImplicative, EqualTailsUsePositiveDefiniteEta) {
    const auto alpha = fn([](double s) { return s * s / (1.0 + s * s); }, FunctionClass::K);
    const auto sigma = fn([](double r) { return r * r / (1.0 + r * r); }, FunctionClass::K);
    const auto g = dissipative_to_implicative(alpha, sigma, 2.0);
    EXPECT_EQ(g.tail_case, 2);
    EXPECT_EQ(g.eta.declared_class(), FunctionClass::PD);
    for (double s : {0.1, 1.0, 10.0}) EXPECT_GT(g.eta(s), 0.0);
    // gamma(r) sits where alpha reaches (id + omega)(sigma(r)) > sigma(r).
    for (double r : {0.5, 2.0}) EXPECT_GT(alpha(g.gamma(r)), sigma(r));
}

TEST(DissipativeToImplicative, MarginMustExceedOne) {
    EXPECT_THROW(dissipative_to_implicative(identity(), identity(), 1.0), PreconditionError);
}

TEST(ImplicativeToDissipative, FormulaOnSamples) {
    const auto gamma = fn([](double r) { return 2.0 * r; }, FunctionClass::Kinf);
    const auto w_hat = fn([](double s) { return s; }, FunctionClass::Kinf);
    const auto p = fn([](double s) { return s * s; }, FunctionClass::Kinf);
    const auto q = fn([](double r) { return 3.0 * r; }, FunctionClass::Kinf);
    const auto sigma = implicative_to_dissipative(identity(), gamma, w_hat, p, q);
    for (double r : {0.0, 0.5, 2.0}) {
        const double g = 2.0 * r;
        EXPECT_NEAR(sigma(r), 2.0 * g * g + g * g + 3.0 * r, 1e-12);
    }
}

TEST(ImplicativeToDissipative, VanishingConstructionThrows) {
    EXPECT_THROW(implicative_to_dissipative(identity(), zero_function(), zero_function(), zero_function(),
                                            zero_function()),
                 ConstructionError);
}

TEST(KMinorant, BelowHumpAndIncreasing) {
    const auto hump = fn([](double s) { return s * s / (1.0 + s * s * s * s); }, FunctionClass::PD, 4.0);
    const auto m = k_minorant(hump);
    EXPECT_TRUE(check_class_as(m, FunctionClass::K).passed);
    for (double s = 0.01; s < 8.0; s += 0.05) EXPECT_LE(m(s), hump(s) * (1.0 + 1e-9));
}

TEST(KMinorant, ReturnsKFunctionsUnchanged) {
    const auto m = k_minorant(identity());
    EXPECT_EQ(m(3.0), 3.0);
}

TEST(BilinearGains, MatchClosedForms) {
    const double M = 1.5, lambda = 2.0, normB = 0.5, K = 3.0;
    const auto xi = fn([](double s) { return s * s; }, FunctionClass::Kinf);
    const auto g = assemble_bilinear_iiss_gains(M, lambda, normB, K, xi);
    for (double s : {0.0, 0.3, 2.0})
        for (double t : {0.0, 0.7, 4.0}) {
            const double a = 1.0 + M * std::exp(-lambda * t) * s;
            EXPECT_NEAR(g.beta(s, t), a * a - 1.0, 1e-12 * (1.0 + a * a));
        }
    EXPECT_NEAR(g.theta(0.4), std::exp(0.8) - 1.0, 1e-14);
    EXPECT_NEAR(g.mu(2.0), M * normB * 2.0 + M * K * 4.0, 1e-12);
    // (1 + 1.5)^2 - 1 + (e^{2} - 1)
    EXPECT_NEAR(g.bound(1.0, 0.0, 1.0), 5.25 + std::expm1(2.0), 1e-12);
    EXPECT_TRUE(check_kl(g.beta).passed);
}

TEST(BilinearGains, RejectBadConstants) {
    EXPECT_THROW(assemble_bilinear_iiss_gains(0.5, 1.0, 1.0, 1.0, identity()), PreconditionError);
    EXPECT_THROW(assemble_bilinear_iiss_gains(1.0, 0.0, 1.0, 1.0, identity()), PreconditionError);
    EXPECT_THROW(assemble_bilinear_iiss_gains(1.0, 1.0, 0.0, 0.0, identity()), PreconditionError);
}

TEST(KLCheck, NonDecayingSliceFails) {
    const KLFunction bad([](double s, double t) { return s * (1.0 + t); });
    EXPECT_FALSE(check_kl(bad).passed);
}
