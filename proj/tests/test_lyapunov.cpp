#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <unsupported/Eigen/KroneckerProduct>

#include "isslab/discretization.hpp"
#include "isslab/errors.hpp"
#include "isslab/lyapunov.hpp"
#include "isslab/random.hpp"
#include "isslab/semigroup.hpp"

using namespace isslab;
using namespace isslab::lyapunov;
namespace disc = isslab::discretization;

namespace {

// Independent oracle: (I kron A^T + A^T kron I) vec(P) = -vec(I).
Eigen::MatrixXd kronecker_oracle(const Eigen::MatrixXd& A) {
    const auto n = A.rows();
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
    const Eigen::MatrixXd K = Eigen::kroneckerProduct(I, A.transpose()) + Eigen::kroneckerProduct(A.transpose(), I);
    const Eigen::VectorXd rhs = -Eigen::Map<const Eigen::VectorXd>(I.data(), n * n);
    const Eigen::VectorXd p = K.partialPivLu().solve(rhs);
    return Eigen::Map<const Eigen::MatrixXd>(p.data(), n, n);
}

Eigen::MatrixXd random_hurwitz(Eigen::Index n, std::uint64_t seed) {
    Rng rng(seed);
    Eigen::MatrixXd A(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) A(i, j) = rng.uniform(-1.0, 1.0);
    const double top = A.eigenvalues().real().maxCoeff();
    return A - (top + 1.0) * Eigen::MatrixXd::Identity(n, n);
}

disc::EvolutionSystem heat(std::size_t n) {
    auto sys = disc::build_dirichlet_laplacian(n, 1.0, 0.0, 1.0);
    sys.B = disc::LinearOperator::diagonal(Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n)));
    return sys;
}

}  // namespace

TEST(Solve, SymmetricPathMatchesKronecker) {
    const auto sys = disc::build_dirichlet_laplacian(20, 1.0, 0.0, 1.0);
    const auto cert = solve_lyapunov(sys.A, sys.grid.h());
    EXPECT_EQ(cert.path, SolvePath::Symmetric);
    const Eigen::MatrixXd ref = kronecker_oracle(sys.A.to_dense());
    EXPECT_LE((cert.P.to_dense() - ref).norm(), 1e-10 * ref.norm());
    EXPECT_LE(cert.residual, 1e-10 * 20);
    EXPECT_GT(cert.k, 0.0);
}

TEST(Solve, BartelsStewartMatchesKronecker) {
    const Eigen::MatrixXd A = random_hurwitz(15, 4);
    const auto cert = solve_lyapunov(disc::LinearOperator::dense(A));
    EXPECT_EQ(cert.path, SolvePath::BartelsStewart);
    const Eigen::MatrixXd ref = kronecker_oracle(A);
    EXPECT_LE((cert.P.to_dense() - ref).norm(), 1e-9 * ref.norm());
    EXPECT_LE((solve_lyapunov_vectorized(A) - ref).norm(), 1e-9 * ref.norm());
}

TEST(Solve, DiagonalPathClosedForm) {
    const auto cert = solve_lyapunov(disc::LinearOperator::diagonal(Eigen::Vector3d(-1.0, -2.0, -4.0)));
    EXPECT_EQ(cert.path, SolvePath::Diagonal);
    const Eigen::VectorXd& p = cert.P.diagonal_entries();
    EXPECT_DOUBLE_EQ(p[0], 0.5);
    EXPECT_DOUBLE_EQ(p[2], 0.125);
    EXPECT_DOUBLE_EQ(cert.k, 0.125);
    EXPECT_DOUBLE_EQ(cert.normP, 0.5);
}

TEST(Solve, UnstableGeneratorHasNoPositiveSolution) {
    const auto sys = disc::build_dirichlet_laplacian(20, 1.0, 20.0, 1.0);
    try {
        solve_lyapunov(sys.A);
        FAIL() << "expected NotExponentiallyStable";
    } catch (const NotExponentiallyStable& e) {
        EXPECT_NE(std::string(e.what()).find("no positive solution"), std::string::npos);
        EXPECT_GE(e.eigenvalue(), 0.0);
    }
    EXPECT_THROW(solve_lyapunov(disc::LinearOperator::dense(-random_hurwitz(6, 2))), NotExponentiallyStable);
}

TEST(Solve, VectorizedSizeCap) {
    EXPECT_THROW(solve_lyapunov_vectorized(Eigen::MatrixXd::Identity(41, 41) * -1.0), PreconditionError);
}

TEST(Functional, SandwichAndWeights) {
    const auto sys = disc::build_dirichlet_laplacian(25, 2.0, 0.0, 1.0);
    const auto cert = solve_lyapunov(sys.A, sys.grid.h());
    Rng rng(12);
    for (int trial = 0; trial < 50; ++trial) {
        Eigen::VectorXd x(25);
        for (auto& v : x) v = rng.uniform(-3.0, 3.0);
        EXPECT_TRUE(sandwich_holds(cert, x));
        const double V = sys.grid.h() * x.dot(cert.P.to_dense() * x);
        EXPECT_NEAR(eval_V(cert, x), V, 1e-12 * V);
        EXPECT_NEAR(eval_W(cert, x), std::log1p(V), 1e-12);
    }
}

TEST(Functional, LyapunovDerivativeIsMinusNormSquared) {
    // d/dt <Px, x>_h along x' = A x equals -|x|_h^2.
    const auto sys = disc::build_dirichlet_laplacian(25, 1.0, 0.0, 1.0);
    const auto cert = solve_lyapunov(sys.A, sys.grid.h());
    const Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(25, 0.0, 1.0).array().sin();
    const Eigen::MatrixXd P = cert.P.to_dense();
    const double vdot = sys.grid.h() * 2.0 * x.dot(P * (sys.A.to_dense() * x));
    EXPECT_NEAR(vdot, -disc::inner(sys.grid, x, x), 1e-9);
}

TEST(Rhs, TermsMatchFormula) {
    const auto cert = solve_lyapunov(disc::LinearOperator::diagonal(Eigen::Vector2d(-1.0, -0.25)));
    // |P| = 2, k = 0.5.
    const double normB = 1.5, K = 0.5, eps = 0.1, s = 2.0, r = 3.0;
    const auto t = dissipation_rhs_bilinear(cert, K, cmpfn::identity(), normB, eps, s, r);
    EXPECT_NEAR(t.decay, (1.0 - eps * 2.0 * normB) * s * s / (1.0 + 2.0 * s * s), 1e-14);
    EXPECT_NEAR(t.bilinear, 2.0 * K * 2.0 / 0.5 * r, 1e-14);
    EXPECT_NEAR(t.input, 2.0 * normB / eps * r * r, 1e-12);
    EXPECT_DOUBLE_EQ(default_epsilon(cert, normB), 1.0 / (2.0 * 2.0 * normB));
    EXPECT_DOUBLE_EQ(default_epsilon(cert, 0.0), 1.0);
}

TEST(Certify, ZeroInputIsNonIncreasing) {
    const auto sys = heat(30);
    const auto tr = semigroup::integrate_mild(sys, Eigen::VectorXd::LinSpaced(30, -1.0, 2.0),
                                              [](double) { return Eigen::VectorXd(Eigen::VectorXd::Zero(30)); },
                                              0.5, 1e-3);
    const auto V = quadratic_functional(identity_certificate(30, sys.grid.h()));
    const auto rep = certify_rate_bound(V, [](double, double) { return 0.0; }, {&tr});
    EXPECT_TRUE(rep.passed);
    EXPECT_EQ(rep.violations, 0u);
    EXPECT_EQ(rep.steps_checked, 500u);
}

TEST(Certify, HonestPairPassesInflatedAlphaFails) {
    const auto sys = heat(40);
    const semigroup::SemigroupCache cache(sys.A);
    const double mu1 = -cache.eigenvalues().maxCoeff();
    const auto tr = semigroup::integrate_mild(sys, cache, Eigen::VectorXd::LinSpaced(40, 0.0, 3.0),
                                              [](double t) { return Eigen::VectorXd(Eigen::VectorXd::Constant(40, t < 0.2 ? 1.0 : -2.0)); },
                                              1.0, 1e-3);
    const auto V = quadratic_functional(identity_certificate(40, sys.grid.h()));
    DissipationOptions opt;
    opt.input_norm = disc::NormTag::L2;
    opt.grid = sys.grid;
    const cmpfn::ComparisonFunction alpha([mu1](double s) { return mu1 * s * s; }, cmpfn::FunctionClass::Kinf);
    const cmpfn::ComparisonFunction sigma([mu1](double r) { return r * r / mu1; }, cmpfn::FunctionClass::Kinf);
    EXPECT_TRUE(certify_dissipation(V, alpha, sigma, {&tr}, opt).passed);

    const auto bad = certify_dissipation(V, cmpfn::scaled(10.0, alpha), sigma, {&tr}, opt);
    EXPECT_FALSE(bad.passed);
    ASSERT_TRUE(bad.worst.has_value());
    EXPECT_TRUE(bad.worst->violated);
    EXPECT_LT(bad.worst_margin, 0.0);
}

TEST(Certify, ImplicativeSkipsStepsBelowGain) {
    const auto sys = heat(20);
    const auto tr = semigroup::integrate_mild(sys, Eigen::VectorXd::Zero(20),
                                              [](double) { return Eigen::VectorXd(Eigen::VectorXd::Ones(20)); }, 0.1,
                                              1e-3);
    const auto V = quadratic_functional(identity_certificate(20, sys.grid.h()));
    // gamma huge: no state ever reaches it.
    const cmpfn::ComparisonFunction gamma([](double r) { return 1e6 * r; }, cmpfn::FunctionClass::Kinf);
    const auto rep = certify_implicative(V, cmpfn::identity(), gamma, {&tr});
    EXPECT_EQ(rep.steps_checked, 0u);
    EXPECT_EQ(rep.steps_skipped, 100u);
    EXPECT_TRUE(rep.passed);
}

TEST(Derivative, RefinementShrinksTruncation) {
    auto sys = heat(30);
    sys.C = disc::build_saturated_bilinearity(sys.grid);
    const semigroup::SemigroupCache cache(sys.A);
    const auto tr = semigroup::integrate_mild(sys, cache, Eigen::VectorXd::Constant(30, 1.0),
                                              [](double) { return Eigen::VectorXd(Eigen::VectorXd::Constant(30, 2.0)); },
                                              0.05, 0.01);
    const auto V = quadratic_functional(identity_certificate(30, sys.grid.h()));
    const auto d = lie_derivative_refined(V, sys, cache.propagator(0.005), tr, 2);
    EXPECT_DOUBLE_EQ(d.full_step, lie_derivative_fd(V, tr, 2));
    EXPECT_NEAR(d.extrapolated, 2.0 * d.half_step - d.full_step, 1e-12 * std::abs(d.full_step));
    EXPECT_NEAR(d.truncation, std::abs(d.full_step - d.half_step), 1e-15);
}

TEST(Output, DissipationCsvAndMarkdown) {
    const auto sys = heat(10);
    const auto tr = semigroup::integrate_mild(sys, Eigen::VectorXd::Ones(10),
                                              [](double) { return Eigen::VectorXd(Eigen::VectorXd::Zero(10)); }, 0.01,
                                              1e-3);
    const auto V = quadratic_functional(identity_certificate(10, sys.grid.h()));
    const auto rep = certify_rate_bound(V, [](double, double) { return 0.0; }, {&tr});
    std::ostringstream os;
    write_dissipation_csv(os, rep);
    EXPECT_EQ(os.str().substr(0, os.str().find('\n')),
              "trajectory,step,time,x_norm,u_norm,vdot,rhs,margin,tolerance,violated");
    EXPECT_NE(dissipation_markdown(rep).find("pass"), std::string::npos);
}
