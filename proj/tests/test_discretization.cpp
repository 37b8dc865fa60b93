#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <cmath>

#include "isslab/discretization.hpp"
#include "isslab/errors.hpp"
#include "isslab/random.hpp"

using namespace isslab;
using namespace isslab::discretization;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST(Grid, NodesSkipEndpoints) {
    const Grid1D g(4, 1.0);
    EXPECT_DOUBLE_EQ(g.h(), 0.2);
    EXPECT_DOUBLE_EQ(g.node(0), 0.2);
    EXPECT_DOUBLE_EQ(g.node(3), 0.8);
    EXPECT_THROW(Grid1D(0, 1.0), PreconditionError);
    EXPECT_THROW(Grid1D(3, -1.0), PreconditionError);
}

TEST(Norms, ConstantFunction) {
    const Grid1D g(9, 2.0);
    const auto one = GridFunction::constant(g, 3.0);
    const double mass = 9 * g.h();  // h * n
    EXPECT_NEAR(norm(one, NormTag::L2), 3.0 * std::sqrt(mass), 1e-14);
    EXPECT_NEAR(norm(one, NormTag::L4), 3.0 * std::pow(mass, 0.25), 1e-14);
    EXPECT_NEAR(norm(one, NormTag::Sup), 3.0, 0.0);
    EXPECT_NEAR(lp_norm(g, one.values, 2.0), norm(one, NormTag::L2), 1e-14);
}

TEST(Norms, SineModeMatchesContinuum) {
    // |sin(pi l)|_L2(0,1)^2 = 1/2; the node sum is exact for this mode.
    const Grid1D g(100, 1.0);
    const auto s = GridFunction::sample(g, [](double l) { return std::sin(kPi * l); });
    EXPECT_NEAR(norm(s, NormTag::L2), std::sqrt(0.5), 1e-12);
    EXPECT_NEAR(inner(g, s.values, s.values), 0.5, 1e-12);
}

TEST(Norms, OrderingOnUnitInterval) {
    // On a domain of measure <= 1: |x|_2 <= |x|_4 <= |x|_sup.
    const Grid1D g(50, 1.0);
    Rng rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        Eigen::VectorXd x(50);
        for (auto& v : x) v = rng.uniform(-2.0, 2.0);
        EXPECT_LE(norm(g, x, NormTag::L2), norm(g, x, NormTag::L4) + 1e-14);
        EXPECT_LE(norm(g, x, NormTag::L4), norm(g, x, NormTag::Sup) + 1e-14);
    }
}

TEST(NormTag, ParseRoundTrip) {
    for (auto t : {NormTag::L2, NormTag::L4, NormTag::Sup}) EXPECT_EQ(parse_norm_tag(to_string(t)), t);
    EXPECT_THROW(parse_norm_tag("L3"), PreconditionError);
}

TEST(Laplacian, ClosedFormSpectrumMatchesEigensolver) {
    const auto sys = build_dirichlet_laplacian(50, 2.0, 0.5, 1.5);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sys.A.to_dense());
    const Eigen::VectorXd closed = dirichlet_laplacian_eigenvalues(50, 2.0, 0.5, 1.5);
    EXPECT_LE((es.eigenvalues() - closed).cwiseAbs().maxCoeff(), 1e-9 * closed.cwiseAbs().maxCoeff());
}

TEST(Laplacian, PrincipalEigenvalueBelowContinuum) {
    // The discrete mu1 approaches (pi/L)^2 from below.
    for (std::size_t n : {10, 50, 200}) {
        const double mu1 = -dirichlet_laplacian_eigenvalues(n, 1.0, 0.0, 1.0).maxCoeff();
        EXPECT_LT(mu1, kPi * kPi);
        EXPECT_GT(mu1, kPi * kPi * (1.0 - 1.0 / static_cast<double>(n)));
    }
}

TEST(Laplacian, SymmetricTridiagonal) {
    const auto sys = build_dirichlet_laplacian(20, 1.0, 0.0, 1.0);
    EXPECT_TRUE(sys.A.is_symmetric());
    const double h = sys.grid.h();
    const Eigen::MatrixXd A = sys.A.to_dense();
    EXPECT_NEAR(A(3, 3), -2.0 / (h * h), 1e-9);
    EXPECT_NEAR(A(3, 4), 1.0 / (h * h), 1e-9);
    EXPECT_EQ(A(3, 5), 0.0);
    EXPECT_THROW(build_dirichlet_laplacian(2, 1.0, 0.0, 1.0), PreconditionError);
}

TEST(LinearOperator, DiagonalStaysDiagonal) {
    const auto op = LinearOperator::diagonal(Eigen::Vector3d(1.0, -4.0, 2.0));
    EXPECT_TRUE(op.is_diagonal());
    EXPECT_DOUBLE_EQ(op.norm_l2(), 4.0);
    const Eigen::VectorXd y = op * Eigen::Vector3d(1.0, 1.0, 1.0);
    EXPECT_DOUBLE_EQ(y[1], -4.0);
    EXPECT_TRUE(LinearOperator::zero(3).is_zero());
    EXPECT_THROW(op * Eigen::Vector2d(1.0, 1.0), PreconditionError);
}

TEST(TanInput, HatInputSaturatesAtBC) {
    const Grid1D g(20000, kPi / 2.0);
    const double b = 2.0, c = 1.5;
    const auto u = build_hat_input(g, b, c);
    const auto B = build_tan_input_operator(g);
    const Eigen::VectorXd Bu = B * u.values;
    const double brk = std::atan(std::pow(c, 8.0));
    for (std::size_t i = 0; i < g.n(); i += 97) {
        const double l = g.node(i);
        if (l < brk) {
            EXPECT_DOUBLE_EQ(u.values[i], b);
        } else {
            EXPECT_NEAR(Bu[i], b * c, 1e-12);
            EXPECT_LE(u.values[i], b);
        }
    }
    EXPECT_NEAR(u.values.cwiseAbs().maxCoeff(), b, 0.0);
}

TEST(TanInput, RejectsGridsReachingPiOverTwo) {
    EXPECT_THROW(build_tan_input_operator(Grid1D(10, 2.0)), PreconditionError);
}

TEST(TanInput, IntegralIsPiOverRootTwo) {
    EXPECT_NEAR(tan_sqrt_integral(), kPi / std::sqrt(2.0), 1e-12);
}

TEST(Bilinearity, SpotChecksHold) {
    for (bool saturated : {true, false}) {
        auto sys = build_dirichlet_laplacian(40, 2.0, 0.0, 1.0);
        sys.C = saturated ? build_saturated_bilinearity(sys.grid) : build_multiplicative_bilinearity(sys.grid);
        sys.K_bilinear = 1.0;
        sys.xi = cmpfn::identity();
        const auto rep = check_bilinear_bound(sys, 500, 9);
        EXPECT_EQ(rep.violations, 0u);
        EXPECT_LE(rep.worst_ratio, 1.0 + 1e-12);
        if (!saturated) EXPECT_GT(rep.worst_ratio, 0.0);
    }
}

TEST(Bilinearity, SaturationFormula) {
    const Grid1D g(3, 2.0);  // nodes 0.5, 1, 1.5
    const auto C = build_saturated_bilinearity(g);
    Eigen::VectorXd out(3);
    C(Eigen::Vector3d(2.0, 2.0, 2.0), Eigen::Vector3d(1.0, 1.0, 1.0), out);
    EXPECT_NEAR(out[0], 2.0 / (1.0 + 0.5 * 4.0), 1e-15);
    EXPECT_NEAR(out[1], 2.0, 1e-15);
    EXPECT_NEAR(out[2], 2.0 / 3.0, 1e-15);
}

TEST(Bilinearity, MissingTermIsAnError) {
    const auto sys = build_dirichlet_laplacian(10, 1.0, 0.0, 1.0);
    EXPECT_THROW(check_bilinear_bound(sys, 10, 1), PreconditionError);
}
