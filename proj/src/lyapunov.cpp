#include "isslab/lyapunov.hpp"

#include <Eigen/Eigenvalues>
#include <complex>
#include <ostream>
#include <sstream>

#include "isslab/csv.hpp"
#include "isslab/errors.hpp"

namespace isslab::lyapunov {

namespace {

constexpr std::size_t kMaxGeneralSize = 200;
constexpr std::size_t kMaxVectorizedSize = 40;

[[noreturn]] void not_hurwitz(double eig) {
    throw NotExponentiallyStable(
        "no positive solution: generator has an eigenvalue with real part " + csv::number(eig) +
            " >= 0, so the semigroup is not exponentially stable",
        eig);
}

double residual_of(const Eigen::MatrixXd& A, const Eigen::MatrixXd& P) {
    const Eigen::MatrixXd R =
        A.transpose() * P + P * A + Eigen::MatrixXd::Identity(A.rows(), A.cols());
    return R.norm();
}

void fill_spectrum(LyapunovCertificate& cert, const Eigen::MatrixXd& P) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(P, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw Error("eigenvalues of P did not converge");
    cert.k = es.eigenvalues()(0);
    cert.normP = es.eigenvalues()(es.eigenvalues().size() - 1);
    if (!(cert.k > 0.0)) throw Error("computed P is not positive definite (k = " + csv::number(cert.k) + ")");
}

LyapunovCertificate solve_diagonal(const Eigen::VectorXd& d, double h) {
    const double top = d.maxCoeff();
    if (!(top < 0.0)) not_hurwitz(top);
    Eigen::VectorXd p = (-0.5 * d.array().inverse()).matrix();
    LyapunovCertificate cert{LinearOperator::diagonal(p), p.minCoeff(), p.maxCoeff(), 0.0, h,
                             SolvePath::Diagonal};
    cert.residual = (2.0 * d.array() * p.array() + 1.0).matrix().norm();
    return cert;
}

LyapunovCertificate solve_symmetric(const Eigen::MatrixXd& A, double h) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw Error("eigenvalues of a symmetric generator did not converge");
    const auto& ev = es.eigenvalues();
    const double top = ev(ev.size() - 1);
    if (!(top < 0.0)) not_hurwitz(top);
    Eigen::LLT<Eigen::MatrixXd> llt(-A);
    if (llt.info() != Eigen::Success) throw Error("Cholesky factorization of -A failed");
    Eigen::MatrixXd P = 0.5 * llt.solve(Eigen::MatrixXd::Identity(A.rows(), A.cols()));
    P = 0.5 * (P + P.transpose()).eval();
    LyapunovCertificate cert{LinearOperator::dense(P), 0.0, 0.0, 0.0, h, SolvePath::Symmetric};
    cert.k = 0.5 / std::abs(ev(0));
    cert.normP = 0.5 / std::abs(top);
    cert.residual = residual_of(A, P);
    return cert;
}

// A = U T U^H turns A^T P + P A = -I into T^H X + X T = -I with X = U^H P U,
// solved column by column; T^H + T_jj I is lower triangular.
LyapunovCertificate solve_bartels_stewart(const Eigen::MatrixXd& A, double h) {
    const Eigen::Index n = A.rows();
    Eigen::ComplexSchur<Eigen::MatrixXcd> schur(A.cast<std::complex<double>>());
    if (schur.info() != Eigen::Success) throw Error("Schur decomposition did not converge");
    const Eigen::MatrixXcd& T = schur.matrixT();
    const Eigen::MatrixXcd& U = schur.matrixU();
    double top = -INFINITY;
    for (Eigen::Index i = 0; i < n; ++i) top = std::max(top, T(i, i).real());
    if (!(top < 0.0)) not_hurwitz(top);

    Eigen::MatrixXcd X = Eigen::MatrixXcd::Zero(n, n);
    const Eigen::MatrixXcd TH = T.adjoint();
    for (Eigen::Index j = 0; j < n; ++j) {
        Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(n);
        rhs(j) = -1.0;
        for (Eigen::Index i = 0; i < j; ++i) rhs -= X.col(i) * T(i, j);
        Eigen::MatrixXcd M = TH;
        M.diagonal().array() += T(j, j);
        X.col(j) = M.triangularView<Eigen::Lower>().solve(rhs);
    }
    Eigen::MatrixXd P = (U * X * U.adjoint()).real();
    P = 0.5 * (P + P.transpose()).eval();
    LyapunovCertificate cert{LinearOperator::dense(P), 0.0, 0.0, 0.0, h, SolvePath::BartelsStewart};
    fill_spectrum(cert, P);
    cert.residual = residual_of(A, P);
    return cert;
}

}  // namespace

std::string_view to_string(SolvePath p) {
    switch (p) {
        case SolvePath::Diagonal: return "diagonal";
        case SolvePath::Symmetric: return "symmetric";
        case SolvePath::BartelsStewart: return "bartels-stewart";
        case SolvePath::Identity: return "identity";
    }
    return "?";
}

LyapunovCertificate solve_lyapunov(const LinearOperator& A, double h) {
    if (!(h > 0.0)) throw PreconditionError("grid weight h must be positive");
    if (A.size() == 0) throw PreconditionError("empty generator");
    if (A.is_diagonal()) return solve_diagonal(A.diagonal_entries(), h);
    const auto& m = A.matrix();
    if (!m.allFinite()) throw PreconditionError("generator has non-finite entries");
    if (A.is_symmetric(0.0)) return solve_symmetric(m, h);
    if (A.size() > kMaxGeneralSize)
        throw PreconditionError("nonsymmetric Lyapunov solves are limited to n <= 200");
    return solve_bartels_stewart(m, h);
}

Eigen::MatrixXd solve_lyapunov_vectorized(const Eigen::MatrixXd& A) {
    const Eigen::Index n = A.rows();
    if (A.cols() != n) throw PreconditionError("generator must be square");
    if (static_cast<std::size_t>(n) > kMaxVectorizedSize)
        throw PreconditionError("vectorized Lyapunov solve is limited to n <= 40");
    // Column-major vec: vec(A^T P) = (I kron A^T) vec P, vec(P A) = (A^T kron I) vec P.
    const Eigen::Index N = n * n;
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(N, N);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i) {
            const Eigen::Index row = j * n + i;
            for (Eigen::Index m = 0; m < n; ++m) {
                K(row, j * n + m) += A(m, i);  // (A^T P)_{ij} = sum_m A_{mi} P_{mj}
                K(row, m * n + i) += A(m, j);  // (P A)_{ij} = sum_m P_{im} A_{mj}
            }
        }
    Eigen::VectorXd rhs = -Eigen::Map<const Eigen::VectorXd>(Eigen::MatrixXd::Identity(n, n).eval().data(), N);
    Eigen::VectorXd p = K.fullPivLu().solve(rhs);
    Eigen::MatrixXd P = Eigen::Map<Eigen::MatrixXd>(p.data(), n, n);
    return 0.5 * (P + P.transpose());
}

LyapunovCertificate identity_certificate(std::size_t n, double h) {
    if (!(h > 0.0)) throw PreconditionError("grid weight h must be positive");
    return {LinearOperator::diagonal(Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n))), 1.0, 1.0, 0.0, h,
            SolvePath::Identity};
}

double eval_V(const LyapunovCertificate& cert, const Eigen::Ref<const Eigen::VectorXd>& x) {
    if (static_cast<std::size_t>(x.size()) != cert.size()) throw PreconditionError("state size mismatch");
    if (cert.P.is_diagonal()) return cert.h * (cert.P.diagonal_entries().array() * x.array().square()).sum();
    return cert.h * x.dot(cert.P.matrix() * x);
}

double eval_W(const LyapunovCertificate& cert, const Eigen::Ref<const Eigen::VectorXd>& x) {
    return std::log1p(eval_V(cert, x));
}

bool sandwich_holds(const LyapunovCertificate& cert, const Eigen::Ref<const Eigen::VectorXd>& x) {
    const double v = eval_V(cert, x);
    const double sq = cert.h * x.squaredNorm();
    const double slack = 1e-12 * cert.normP * sq;
    return cert.k * sq <= v + slack && v <= cert.normP * sq + slack;
}

StateFunctional quadratic_functional(const LyapunovCertificate& cert) {
    return [cert](const Eigen::Ref<const Eigen::VectorXd>& x) { return eval_V(cert, x); };
}

StateFunctional log_functional(const LyapunovCertificate& cert) {
    return [cert](const Eigen::Ref<const Eigen::VectorXd>& x) { return eval_W(cert, x); };
}

double lie_derivative_fd(const StateFunctional& V, const TrajectoryRecord& traj, std::size_t index) {
    if (!traj.has_states()) throw PreconditionError("trajectory was recorded without states");
    if (index + 1 >= traj.size()) throw PreconditionError("forward difference needs step index+1");
    const auto k = static_cast<Eigen::Index>(index);
    return (V(traj.states.col(k + 1)) - V(traj.states.col(k))) / traj.dt;
}

RefinedDerivative lie_derivative_refined(const StateFunctional& V, const discretization::EvolutionSystem& sys,
                                         const semigroup::StepPropagator& half, const TrajectoryRecord& traj,
                                         std::size_t index) {
    if (std::abs(2.0 * half.dt - traj.dt) > 1e-12 * traj.dt)
        throw PreconditionError("refinement propagator must use dt/2");
    RefinedDerivative r;
    r.full_step = lie_derivative_fd(V, traj, index);
    const auto k = static_cast<Eigen::Index>(index);
    const Eigen::VectorXd x0 = traj.states.col(k);
    const Eigen::VectorXd u = traj.inputs.col(k);
    const Eigen::VectorXd x1 = semigroup::exponential_euler_step(sys, half, x0, u);
    r.half_step = (V(x1) - V(x0)) / half.dt;
    r.extrapolated = 2.0 * r.half_step - r.full_step;
    r.truncation = std::abs(r.full_step - r.half_step);
    return r;
}

double default_epsilon(const LyapunovCertificate& cert, double normB) {
    if (!(normB >= 0.0)) throw PreconditionError("normB must be nonnegative");
    if (normB == 0.0) return 1.0;
    return 1.0 / (2.0 * cert.normP * normB);
}

DissipationTerms dissipation_rhs_bilinear(const LyapunovCertificate& cert, double K,
                                          const cmpfn::ComparisonFunction& xi, double normB, double eps,
                                          double x_norm, double u_norm) {
    if (!(eps > 0.0)) throw PreconditionError("eps must be positive");
    if (normB > 0.0 && !(eps < 1.0 / (cert.normP * normB)))
        throw PreconditionError("eps must satisfy eps < 1/(|P||B|)");
    if (!(K >= 0.0) || !(normB >= 0.0)) throw PreconditionError("K and normB must be nonnegative");
    DissipationTerms t;
    const double s2 = x_norm * x_norm;
    t.decay = (1.0 - eps * cert.normP * normB) * s2 / (1.0 + cert.normP * s2);
    t.bilinear = 2.0 * K * cert.normP / cert.k * xi(u_norm);
    t.input = cert.normP * normB / eps * u_norm * u_norm;
    return t;
}

// ---------------------------------------------------------------------------

namespace {

// Per-step predicate: returns the bound to compare against, or nullopt to skip.
using StepBound = std::function<std::optional<double>(double x_norm, double u_norm)>;

DissipationReport certify_steps(const StateFunctional& V, const StepBound& bound,
                                const std::vector<const TrajectoryRecord*>& trajectories,
                                const DissipationOptions& opts) {
    if (!V) throw PreconditionError("state functional is empty");
    const bool remeasure = opts.state_norm.has_value() || opts.input_norm.has_value();
    if (remeasure && !opts.grid) throw PreconditionError("norm override needs the grid");
    const std::size_t every = std::max<std::size_t>(1, opts.record_every);

    DissipationReport rep;
    rep.trajectories = trajectories.size();
    std::size_t kept_violations = 0;
    for (std::size_t j = 0; j < trajectories.size(); ++j) {
        const TrajectoryRecord& tr = *trajectories[j];
        if (!tr.has_states()) throw PreconditionError("trajectory was recorded without states");
        if (tr.size() < 2) continue;
        double v_prev = V(tr.states.col(0));
        for (std::size_t k = 0; k + 1 < tr.size(); ++k) {
            const auto col = static_cast<Eigen::Index>(k);
            const double v_next = V(tr.states.col(col + 1));
            const double vdot = (v_next - v_prev) / tr.dt;
            v_prev = v_next;

            double xn = tr.state_norms[k];
            double un = tr.input_norms[k];
            if (opts.state_norm) xn = discretization::norm(*opts.grid, tr.states.col(col), *opts.state_norm);
            if (opts.input_norm) un = discretization::norm(*opts.grid, tr.inputs.col(col), *opts.input_norm);

            const auto rhs = bound(xn, un);
            if (!rhs) {
                ++rep.steps_skipped;
                continue;
            }
            ++rep.steps_checked;
            DissipationSample s{j, k, tr.times[k], xn, un, vdot, *rhs, *rhs - vdot, 0.0, false};
            s.tolerance = (opts.dt_factor * tr.dt + opts.abs_tol) * (1.0 + std::abs(*rhs));
            s.violated = s.margin < -s.tolerance;
            const double slack = s.margin + s.tolerance;
            if (slack < rep.worst_margin) {
                rep.worst_margin = slack;
                rep.worst = s;
            }
            if (s.violated) {
                ++rep.violations;
                if (kept_violations < opts.max_kept_violations) {
                    rep.kept.push_back(s);
                    ++kept_violations;
                }
            } else if (k % every == 0) {
                rep.kept.push_back(s);
            }
        }
    }
    rep.passed = rep.pass_fraction() >= opts.required_fraction;
    return rep;
}

}  // namespace

DissipationReport certify_rate_bound(const StateFunctional& V, const RateBound& bound,
                                     const std::vector<const TrajectoryRecord*>& trajectories,
                                     const DissipationOptions& opts) {
    return certify_steps(
        V, [&](double x, double u) -> std::optional<double> { return bound(x, u); }, trajectories, opts);
}

DissipationReport certify_dissipation(const StateFunctional& V, const cmpfn::ComparisonFunction& alpha,
                                      const cmpfn::ComparisonFunction& sigma,
                                      const std::vector<const TrajectoryRecord*>& trajectories,
                                      const DissipationOptions& opts) {
    return certify_steps(
        V, [&](double x, double u) -> std::optional<double> { return -alpha(x) + sigma(u); }, trajectories,
        opts);
}

DissipationReport certify_implicative(const StateFunctional& V, const cmpfn::ComparisonFunction& eta,
                                      const cmpfn::ComparisonFunction& gamma,
                                      const std::vector<const TrajectoryRecord*>& trajectories,
                                      const DissipationOptions& opts) {
    return certify_steps(
        V,
        [&](double x, double u) -> std::optional<double> {
            if (!(x >= gamma(u))) return std::nullopt;
            return -eta(x);
        },
        trajectories, opts);
}

void write_dissipation_csv(std::ostream& os, const DissipationReport& report) {
    csv::Writer w(os);
    w.row({"trajectory", "step", "time", "x_norm", "u_norm", "vdot", "rhs", "margin", "tolerance", "violated"});
    for (const auto& s : report.kept) {
        w.field(s.trajectory).field(s.step).field(s.t).field(s.x_norm).field(s.u_norm);
        w.field(s.vdot).field(s.rhs).field(s.margin).field(s.tolerance).field(s.violated);
        w.end_row();
    }
}

std::string dissipation_markdown(const DissipationReport& report) {
    std::ostringstream os;
    os << "### " << (report.label.empty() ? "dissipation check" : report.label) << "\n\n";
    os << "| verdict | trajectories | steps checked | skipped | violations | pass fraction | worst slack |\n";
    os << "|---|---|---|---|---|---|---|\n";
    os << "| " << (report.passed ? "pass" : "FAIL") << " | " << report.trajectories << " | "
       << report.steps_checked << " | " << report.steps_skipped << " | " << report.violations << " | "
       << csv::number(report.pass_fraction()) << " | " << csv::number(report.worst_margin) << " |\n";
    if (report.worst) {
        const auto& s = *report.worst;
        os << "\nTightest step: trajectory " << s.trajectory << ", t = " << csv::number(s.t)
           << ", |x| = " << csv::number(s.x_norm) << ", |u| = " << csv::number(s.u_norm)
           << ", dV/dt = " << csv::number(s.vdot) << ", bound = " << csv::number(s.rhs) << ".\n";
    }
    return os.str();
}

}  // namespace isslab::lyapunov
