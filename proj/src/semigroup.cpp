#include "isslab/semigroup.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "isslab/csv.hpp"
#include "isslab/errors.hpp"

namespace isslab::semigroup {

double phi1(double z) {
    if (std::abs(z) < 1e-5) return 1.0 + z * (0.5 + z * (1.0 / 6.0 + z / 24.0));
    return std::expm1(z) / z;
}

SemigroupCache::SemigroupCache(const LinearOperator& A) : A_(A) {
    if (A_.is_diagonal()) {
        path_ = Path::Diagonal;
        const auto& d = A_.diagonal_entries();
        if (!d.allFinite()) throw PreconditionError("generator has non-finite entries");
        eigenvalues_ = d;
        std::sort(eigenvalues_.data(), eigenvalues_.data() + eigenvalues_.size());
        return;
    }
    const auto& m = A_.matrix();
    if (!m.allFinite()) throw PreconditionError("generator has non-finite entries");
    if (!A_.is_symmetric(0.0)) {
        path_ = Path::Pade;
        return;
    }
    path_ = Path::Spectral;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    if (es.info() != Eigen::Success) throw Error("eigendecomposition of a symmetric generator failed");
    eigenvalues_ = es.eigenvalues();
    eigenvectors_ = es.eigenvectors();
    const double scale = m.norm();
    const Eigen::MatrixXd rec = eigenvectors_ * eigenvalues_.asDiagonal() * eigenvectors_.transpose();
    reconstruction_error_ = scale > 0.0 ? (rec - m).norm() / scale : (rec - m).norm();
}

const Eigen::VectorXd& SemigroupCache::eigenvalues() const {
    if (path_ == Path::Pade) throw PreconditionError("no spectral data for a nonsymmetric generator");
    return eigenvalues_;
}

const Eigen::MatrixXd& SemigroupCache::eigenvectors() const {
    if (path_ != Path::Spectral) throw PreconditionError("eigenvectors exist on the spectral path only");
    return eigenvectors_;
}

Eigen::VectorXd SemigroupCache::apply(double t, const Eigen::Ref<const Eigen::VectorXd>& x) const {
    if (!(t >= 0.0)) throw PreconditionError("semigroup time must be nonnegative");
    if (static_cast<std::size_t>(x.size()) != size()) throw PreconditionError("state size mismatch");
    switch (path_) {
        case Path::Diagonal:
            return ((t * A_.diagonal_entries().array()).exp() * x.array()).matrix();
        case Path::Spectral: {
            Eigen::VectorXd y = eigenvectors_.transpose() * x;
            y.array() *= (t * eigenvalues_.array()).exp();
            return eigenvectors_ * y;
        }
        case Path::Pade:
            return expm_pade13(t * A_.matrix()) * x;
    }
    return x;
}

Eigen::VectorXd SemigroupCache::apply_phi1(double t, const Eigen::Ref<const Eigen::VectorXd>& v) const {
    if (!(t >= 0.0)) throw PreconditionError("semigroup time must be nonnegative");
    if (static_cast<std::size_t>(v.size()) != size()) throw PreconditionError("state size mismatch");
    auto scaled_phi = [t](double lam) { return t * phi1(t * lam); };
    switch (path_) {
        case Path::Diagonal:
            return (A_.diagonal_entries().unaryExpr(scaled_phi).array() * v.array()).matrix();
        case Path::Spectral: {
            Eigen::VectorXd y = eigenvectors_.transpose() * v;
            y.array() *= eigenvalues_.unaryExpr(scaled_phi).array();
            return eigenvectors_ * y;
        }
        case Path::Pade:
            return phi1_times_t(A_.matrix(), t) * v;
    }
    return v;
}

StepPropagator SemigroupCache::propagator(double dt) const {
    if (!(dt > 0.0)) throw PreconditionError("dt must be positive");
    auto scaled_phi = [dt](double lam) { return dt * phi1(dt * lam); };
    auto exp_step = [dt](double lam) { return std::exp(dt * lam); };
    switch (path_) {
        case Path::Diagonal: {
            const auto& d = A_.diagonal_entries();
            return {dt, LinearOperator::diagonal(d.unaryExpr(exp_step)),
                    LinearOperator::diagonal(d.unaryExpr(scaled_phi))};
        }
        case Path::Spectral: {
            const auto& Q = eigenvectors_;
            Eigen::MatrixXd E = Q * eigenvalues_.unaryExpr(exp_step).asDiagonal() * Q.transpose();
            Eigen::MatrixXd F = Q * eigenvalues_.unaryExpr(scaled_phi).asDiagonal() * Q.transpose();
            return {dt, LinearOperator::dense(std::move(E)), LinearOperator::dense(std::move(F))};
        }
        case Path::Pade:
            return {dt, LinearOperator::dense(expm_pade13(dt * A_.matrix())),
                    LinearOperator::dense(phi1_times_t(A_.matrix(), dt))};
    }
    throw Error("unreachable semigroup path");
}

Eigen::VectorXd expm_apply(const LinearOperator& A, double t, const Eigen::Ref<const Eigen::VectorXd>& x) {
    return SemigroupCache(A).apply(t, x);
}

// ---------------------------------------------------------------------------

Eigen::VectorXd exponential_euler_step(const EvolutionSystem& sys, const StepPropagator& prop,
                                       const Eigen::Ref<const Eigen::VectorXd>& x,
                                       const Eigen::Ref<const Eigen::VectorXd>& u) {
    Eigen::VectorXd next = prop.expA * x;
    const bool forced = sys.has_input_operator() || sys.has_nonlinearity();
    if (!forced) return next;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(x.size());
    if (sys.has_input_operator()) sys.B.apply(u, rhs);
    if (sys.has_nonlinearity()) {
        Eigen::VectorXd c(x.size());
        sys.C(x, u, c);
        rhs += c;
    }
    next += prop.phi * rhs;
    return next;
}

TrajectoryRecord integrate_mild(const EvolutionSystem& sys, const SemigroupCache& cache,
                                const Eigen::Ref<const Eigen::VectorXd>& x0, const InputSignal& u,
                                double t_end, double dt, const IntegrateOptions& opts) {
    if (!(dt > 0.0)) throw PreconditionError("dt must be positive");
    if (!(t_end >= 0.0)) throw PreconditionError("t_end must be nonnegative");
    if (cache.size() != sys.n() || static_cast<std::size_t>(x0.size()) != sys.n())
        throw PreconditionError("state size mismatch");
    if (!u) throw PreconditionError("input signal is empty");

    const auto steps = static_cast<std::size_t>(std::llround(t_end / dt));
    const StepPropagator prop = cache.propagator(dt);
    const auto n = static_cast<Eigen::Index>(sys.n());

    TrajectoryRecord rec;
    rec.dt = dt;
    rec.state_norm = sys.state_norm;
    rec.input_norm = sys.input_norm;
    rec.times.reserve(steps + 1);
    rec.state_norms.reserve(steps + 1);
    rec.input_norms.reserve(steps + 1);
    if (opts.keep_states) {
        rec.states.resize(n, static_cast<Eigen::Index>(steps + 1));
        rec.inputs.resize(n, static_cast<Eigen::Index>(steps + 1));
    }

    Eigen::VectorXd x = x0;
    for (std::size_t k = 0;; ++k) {
        const double t = static_cast<double>(k) * dt;
        Eigen::VectorXd uk = u(t);
        if (static_cast<std::size_t>(uk.size()) != sys.n()) throw PreconditionError("input size mismatch");
        const auto col = static_cast<Eigen::Index>(k);
        rec.times.push_back(t);
        rec.state_norms.push_back(discretization::norm(sys.grid, x, sys.state_norm));
        rec.input_norms.push_back(discretization::norm(sys.grid, uk, sys.input_norm));
        if (opts.keep_states) {
            rec.states.col(col) = x;
            rec.inputs.col(col) = uk;
        }
        if (k == steps) break;

        Eigen::VectorXd next = exponential_euler_step(sys, prop, x, uk);
        const double nn = discretization::norm(sys.grid, next, sys.state_norm);
        if (!std::isfinite(nn) || nn > opts.blowup_guard) {
            rec.blow_up = true;
            break;
        }
        x = std::move(next);
    }
    if (opts.keep_states && rec.blow_up) {
        const auto cols = static_cast<Eigen::Index>(rec.times.size());
        rec.states.conservativeResize(Eigen::NoChange, cols);
        rec.inputs.conservativeResize(Eigen::NoChange, cols);
    }
    return rec;
}

TrajectoryRecord integrate_mild(const EvolutionSystem& sys, const Eigen::Ref<const Eigen::VectorXd>& x0,
                                const InputSignal& u, double t_end, double dt,
                                const IntegrateOptions& opts) {
    return integrate_mild(sys, SemigroupCache(sys.A), x0, u, t_end, dt, opts);
}

// ---------------------------------------------------------------------------

SemigroupConstants semigroup_constants(const SemigroupCache& cache) {
    if (cache.path() == SemigroupCache::Path::Pade)
        throw PreconditionError("decay constants are derived for symmetric generators only");
    const auto& ev = cache.eigenvalues();
    if (ev.size() == 0) throw PreconditionError("empty generator");
    const double top = ev.maxCoeff();
    if (!(top < 0.0))
        throw NotExponentiallyStable("not exponentially stable: eigenvalue " + csv::number(top) + " >= 0",
                                     top);
    return {1.0, -top};
}

SemigroupConstants semigroup_constants(const LinearOperator& A) {
    return semigroup_constants(SemigroupCache(A));
}

std::vector<double> gronwall_majorant(const std::vector<double>& times, const std::vector<double>& q_values,
                                      const std::vector<double>& kernel, Quadrature rule) {
    const std::size_t n = times.size();
    if (q_values.size() != n || kernel.size() != n)
        throw PreconditionError("majorant inputs must share the time grid");
    for (std::size_t k = 1; k < n; ++k) {
        if (!(times[k] > times[k - 1])) throw PreconditionError("times must be strictly increasing");
        if (q_values[k] < q_values[k - 1])
            throw PreconditionError("q must be nondecreasing (drops at t=" + csv::number(times[k]) + ")");
    }
    std::vector<double> out(n);
    double integral = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        if (k > 0) {
            const double w = times[k] - times[k - 1];
            integral += rule == Quadrature::Trapezoid ? 0.5 * w * (kernel[k] + kernel[k - 1])
                                                      : w * kernel[k - 1];
        }
        out[k] = q_values[k] * std::exp(integral);
    }
    return out;
}

double lp_iss_constant(double M, double lambda, double normB, double p) {
    if (!(p >= 1.0)) throw PreconditionError("Lp exponent must satisfy p >= 1");
    if (!(M >= 1.0) || !(normB >= 0.0)) throw PreconditionError("need M >= 1 and normB >= 0");
    if (p == 1.0) return M * normB;
    if (!(lambda > 0.0)) throw PreconditionError("decay rate must be positive");
    const double q = p / (p - 1.0);
    return M * normB * std::pow(2.0 / (q * lambda), 1.0 / q);
}

void write_trajectory_csv(std::ostream& os, const TrajectoryRecord& traj) {
    csv::Writer w(os);
    w.row({"time", "state_norm", "input_norm"});
    for (std::size_t k = 0; k < traj.size(); ++k) {
        w.field(traj.times[k]).field(traj.state_norms[k]).field(traj.input_norms[k]);
        w.end_row();
    }
}

void write_state_dump_csv(std::ostream& os, const TrajectoryRecord& traj, const discretization::Grid1D& grid,
                          std::size_t every) {
    if (!traj.has_states()) throw PreconditionError("trajectory was recorded without states");
    if (every == 0) every = 1;
    csv::Writer w(os);
    w.row({"time", "node", "value"});
    for (std::size_t k = 0; k < traj.size(); k += every) {
        for (std::size_t i = 0; i < grid.n(); ++i) {
            w.field(traj.times[k]).field(grid.node(i));
            w.field(traj.states(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)));
            w.end_row();
        }
    }
}

}  // namespace isslab::semigroup
