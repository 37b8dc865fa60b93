#include "isslab/discretization.hpp"

#include <boost/math/constants/constants.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>

#include "isslab/errors.hpp"
#include "isslab/random.hpp"

namespace isslab::discretization {

namespace {
constexpr double kPi = boost::math::constants::pi<double>();
constexpr double kHalfPi = boost::math::constants::half_pi<double>();
}  // namespace

std::string_view to_string(NormTag tag) {
    switch (tag) {
        case NormTag::L2: return "L2";
        case NormTag::L4: return "L4";
        case NormTag::Sup: return "sup";
    }
    return "?";
}

NormTag parse_norm_tag(std::string_view s) {
    if (s == "L2" || s == "l2") return NormTag::L2;
    if (s == "L4" || s == "l4") return NormTag::L4;
    if (s == "sup" || s == "Sup" || s == "C") return NormTag::Sup;
    throw PreconditionError("unknown norm tag '" + std::string(s) + "'");
}

Grid1D::Grid1D(std::size_t n, double length) : n_(n), length_(length) {
    if (n_ < 1) throw PreconditionError("grid needs at least one interior node");
    if (!(length_ > 0.0) || !std::isfinite(length_)) throw PreconditionError("grid length must be positive");
    h_ = length_ / static_cast<double>(n_ + 1);
}

Eigen::VectorXd Grid1D::nodes() const {
    Eigen::VectorXd l(static_cast<Eigen::Index>(n_));
    for (std::size_t i = 0; i < n_; ++i) l[static_cast<Eigen::Index>(i)] = node(i);
    return l;
}

GridFunction::GridFunction(Grid1D g, Eigen::VectorXd v) : grid(g), values(std::move(v)) {
    if (static_cast<std::size_t>(values.size()) != grid.n())
        throw PreconditionError("grid function length does not match grid");
    if (!values.allFinite()) throw PreconditionError("grid function has non-finite values");
}

GridFunction GridFunction::constant(const Grid1D& g, double value) {
    return {g, Eigen::VectorXd::Constant(static_cast<Eigen::Index>(g.n()), value)};
}

GridFunction GridFunction::sample(const Grid1D& g, const std::function<double(double)>& f) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(g.n()));
    for (std::size_t i = 0; i < g.n(); ++i) v[static_cast<Eigen::Index>(i)] = f(g.node(i));
    return {g, std::move(v)};
}

double norm(const Grid1D& grid, const Eigen::Ref<const Eigen::VectorXd>& x, NormTag tag) {
    switch (tag) {
        case NormTag::L2: return std::sqrt(grid.h() * x.squaredNorm());
        case NormTag::L4: return std::sqrt(std::sqrt(grid.h() * x.array().square().square().sum()));
        case NormTag::Sup: return x.size() == 0 ? 0.0 : x.cwiseAbs().maxCoeff();
    }
    return 0.0;
}

double norm(const GridFunction& x, NormTag tag) { return norm(x.grid, x.values, tag); }

double lp_norm(const Grid1D& grid, const Eigen::Ref<const Eigen::VectorXd>& x, double p) {
    if (!(p >= 1.0)) throw PreconditionError("lp_norm needs p >= 1");
    return std::pow(grid.h() * x.cwiseAbs().array().pow(p).sum(), 1.0 / p);
}

double inner(const Grid1D& grid, const Eigen::Ref<const Eigen::VectorXd>& x,
             const Eigen::Ref<const Eigen::VectorXd>& y) {
    return grid.h() * x.dot(y);
}

// ---------------------------------------------------------------------------

LinearOperator LinearOperator::diagonal(Eigen::VectorXd entries) {
    const bool z = entries.size() > 0 && (entries.array() == 0.0).all();
    return LinearOperator(std::move(entries), z);
}

LinearOperator LinearOperator::dense(Eigen::MatrixXd matrix) {
    if (matrix.rows() != matrix.cols()) throw PreconditionError("operator matrix must be square");
    return LinearOperator(std::move(matrix), false);
}

LinearOperator LinearOperator::zero(std::size_t n) {
    return LinearOperator(Eigen::VectorXd(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n))), true);
}

std::size_t LinearOperator::size() const {
    return std::visit([](const auto& m) { return static_cast<std::size_t>(m.rows()); }, rep_);
}

void LinearOperator::apply(const Eigen::Ref<const Eigen::VectorXd>& x, Eigen::VectorXd& out) const {
    if (static_cast<std::size_t>(x.size()) != size()) throw PreconditionError("operator size mismatch");
    if (const auto* d = std::get_if<Eigen::VectorXd>(&rep_)) {
        out = d->cwiseProduct(x);
    } else {
        out.noalias() = std::get<Eigen::MatrixXd>(rep_) * x;
    }
}

Eigen::VectorXd LinearOperator::operator*(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    Eigen::VectorXd out;
    apply(x, out);
    return out;
}

const Eigen::VectorXd& LinearOperator::diagonal_entries() const {
    if (!is_diagonal()) throw PreconditionError("operator is not diagonal");
    return std::get<Eigen::VectorXd>(rep_);
}

const Eigen::MatrixXd& LinearOperator::matrix() const {
    if (is_diagonal()) throw PreconditionError("operator is diagonal; use to_dense()");
    return std::get<Eigen::MatrixXd>(rep_);
}

Eigen::MatrixXd LinearOperator::to_dense() const {
    if (is_diagonal()) return std::get<Eigen::VectorXd>(rep_).asDiagonal();
    return std::get<Eigen::MatrixXd>(rep_);
}

bool LinearOperator::is_symmetric(double tol) const {
    if (is_diagonal()) return true;
    const auto& m = std::get<Eigen::MatrixXd>(rep_);
    return (m - m.transpose()).cwiseAbs().maxCoeff() <= tol * std::max(1.0, m.cwiseAbs().maxCoeff());
}

double LinearOperator::norm_l2() const {
    if (is_diagonal()) {
        const auto& d = std::get<Eigen::VectorXd>(rep_);
        return d.size() == 0 ? 0.0 : d.cwiseAbs().maxCoeff();
    }
    const auto& m = std::get<Eigen::MatrixXd>(rep_);
    if (is_symmetric()) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
        return es.eigenvalues().cwiseAbs().maxCoeff();
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    return svd.singularValues()(0);
}

// ---------------------------------------------------------------------------

EvolutionSystem::EvolutionSystem(Grid1D g, LinearOperator a)
    : grid(g), A(std::move(a)), B(LinearOperator::zero(g.n())) {
    if (A.size() != grid.n()) throw PreconditionError("generator size does not match grid");
}

EvolutionSystem build_dirichlet_laplacian(std::size_t n, double L, double c, double diffusivity) {
    if (n < 3) throw PreconditionError("Dirichlet Laplacian needs n >= 3");
    if (!(diffusivity > 0.0)) throw PreconditionError("diffusivity must be positive");
    Grid1D grid(n, L);
    const double s = diffusivity / (grid.h() * grid.h());
    const auto m = static_cast<Eigen::Index>(n);
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
        A(i, i) = -2.0 * s + c;
        if (i > 0) A(i, i - 1) = s;
        if (i + 1 < m) A(i, i + 1) = s;
    }
    EvolutionSystem sys(grid, LinearOperator::dense(std::move(A)));
    sys.label = "dirichlet_laplacian";
    return sys;
}

Eigen::VectorXd dirichlet_laplacian_eigenvalues(std::size_t n, double L, double c,
                                                double diffusivity) {
    const double h = L / static_cast<double>(n + 1);
    Eigen::VectorXd ev(static_cast<Eigen::Index>(n));
    for (std::size_t j = 0; j < n; ++j) {
        const double k = static_cast<double>(n - j);
        const double s = std::sin(k * kPi * h / (2.0 * L));
        ev[static_cast<Eigen::Index>(j)] = c - 4.0 * diffusivity / (h * h) * s * s;
    }
    return ev;
}

LinearOperator build_tan_input_operator(const Grid1D& grid) {
    Eigen::VectorXd d(static_cast<Eigen::Index>(grid.n()));
    for (std::size_t i = 0; i < grid.n(); ++i) {
        const double l = grid.node(i);
        if (!(l < kHalfPi)) throw PreconditionError("singular endpoint: node at l >= pi/2");
        d[static_cast<Eigen::Index>(i)] = std::pow(std::tan(l), 0.125);
    }
    return LinearOperator::diagonal(std::move(d));
}

GridFunction build_hat_input(const Grid1D& grid, double b, double c) {
    if (!(b > 0.0) || !(c > 0.0)) throw PreconditionError("hat input needs b, c > 0");
    const double breakpoint = std::atan(std::pow(c, 8.0));
    return GridFunction::sample(grid, [=](double l) {
        return l < breakpoint ? b : b * c * std::pow(std::tan(l), -0.125);
    });
}

NonlinearMap build_saturated_bilinearity(const Grid1D& grid) {
    Eigen::VectorXd dist = (grid.nodes().array() - 1.0).abs();
    return [dist](const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& u,
                  Eigen::VectorXd& out) {
        out = x.array() * u.array() / (1.0 + dist.array() * x.array().square());
    };
}

NonlinearMap build_multiplicative_bilinearity(const Grid1D&) {
    return [](const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& u,
              Eigen::VectorXd& out) { out = x.cwiseProduct(u); };
}

BilinearSpotCheck check_bilinear_bound(const EvolutionSystem& sys, std::size_t samples,
                                       std::uint64_t seed) {
    if (!sys.has_nonlinearity() || !sys.xi) throw PreconditionError("system has no bilinear term");
    Rng rng(seed);
    const auto n = static_cast<Eigen::Index>(sys.n());
    Eigen::VectorXd x(n), u(n), c(n);
    BilinearSpotCheck rep;
    rep.samples = samples;
    for (std::size_t s = 0; s < samples; ++s) {
        const double xs = rng.uniform(0.01, 5.0);
        const double us = rng.uniform(0.01, 5.0);
        for (Eigen::Index i = 0; i < n; ++i) {
            x[i] = rng.uniform(-xs, xs);
            u[i] = rng.uniform(-us, us);
        }
        sys.C(x, u, c);
        const double lhs = norm(sys.grid, c, sys.state_norm);
        const double rhs = sys.K_bilinear * norm(sys.grid, x, sys.state_norm) *
                           (*sys.xi)(norm(sys.grid, u, sys.input_norm));
        const double ratio = rhs > 0.0 ? lhs / rhs : (lhs > 0.0 ? INFINITY : 0.0);
        rep.worst_ratio = std::max(rep.worst_ratio, ratio);
        if (lhs > rhs * (1.0 + 1e-12)) ++rep.violations;
    }
    return rep;
}

double tan_sqrt_integral() {
    using boost::math::quadrature::gauss_kronrod;
    // (0, pi/4] directly; [pi/4, pi/2) through l = pi/2 - s^2, dl = -2 s ds,
    // which turns the 1/sqrt singularity into a bounded integrand.
    auto near_zero = [](double l) { return std::sqrt(std::tan(l)); };
    auto near_end = [](double s) {
        if (s == 0.0) return 2.0;
        return 2.0 * s / std::sqrt(std::tan(s * s));
    };
    const double left = gauss_kronrod<double, 61>::integrate(near_zero, 0.0, kPi / 4.0, 20, 1e-14);
    const double right =
        gauss_kronrod<double, 61>::integrate(near_end, 0.0, std::sqrt(kPi / 4.0), 20, 1e-14);
    return left + right;
}

}  // namespace isslab::discretization
