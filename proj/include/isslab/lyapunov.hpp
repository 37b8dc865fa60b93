#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "isslab/cmpfn.hpp"
#include "isslab/discretization.hpp"
#include "isslab/semigroup.hpp"

namespace isslab::lyapunov {

using discretization::LinearOperator;
using discretization::NormTag;
using semigroup::TrajectoryRecord;

enum class SolvePath { Diagonal, Symmetric, BartelsStewart, Identity };

std::string_view to_string(SolvePath p);

/// P solving A^T P + P A = -I, with V(x) = <Px, x>_h = h x^T P x.
///
/// The h-weighted Lyapunov equation reduces to the plain matrix equation, so
/// k = lambda_min(P) and normP = lambda_max(P) bound V against |x|_h^2.
struct LyapunovCertificate {
    LinearOperator P;
    double k = 0.0;
    double normP = 0.0;
    double residual = 0.0;  // |A^T P + P A + I|_F (0 for the identity certificate)
    double h = 1.0;
    SolvePath path = SolvePath::Symmetric;

    std::size_t size() const { return P.size(); }
};

/// Symmetric A: P = -A^{-1}/2. Otherwise (n <= 200) Bartels-Stewart on the
/// complex Schur form. Throws NotExponentiallyStable ("no positive solution")
/// when A has an eigenvalue with nonnegative real part.
LyapunovCertificate solve_lyapunov(const LinearOperator& A, double h = 1.0);

/// Kronecker-vectorized solve of A^T P + P A = -I; an n^2 x n^2 dense system,
/// so limited to n <= 40. Used to cross-check the other paths.
Eigen::MatrixXd solve_lyapunov_vectorized(const Eigen::MatrixXd& A);

/// P = I, i.e. V(x) = |x|_h^2. Not a Lyapunov-equation solution; used where
/// the plain squared norm is the storage function.
LyapunovCertificate identity_certificate(std::size_t n, double h);

double eval_V(const LyapunovCertificate& cert, const Eigen::Ref<const Eigen::VectorXd>& x);
/// ln(1 + V(x)).
double eval_W(const LyapunovCertificate& cert, const Eigen::Ref<const Eigen::VectorXd>& x);
/// k |x|^2 <= V(x) <= normP |x|^2 up to rounding.
bool sandwich_holds(const LyapunovCertificate& cert, const Eigen::Ref<const Eigen::VectorXd>& x);

using StateFunctional = std::function<double(const Eigen::Ref<const Eigen::VectorXd>&)>;

StateFunctional quadratic_functional(const LyapunovCertificate& cert);
StateFunctional log_functional(const LyapunovCertificate& cert);

/// (V(x_{k+1}) - V(x_k)) / dt.
double lie_derivative_fd(const StateFunctional& V, const TrajectoryRecord& traj, std::size_t index);

struct RefinedDerivative {
    double full_step = 0.0;     // forward difference over dt
    double half_step = 0.0;     // forward difference over dt/2, rerun from x_k with u_k
    double extrapolated = 0.0;  // 2 half - full
    double truncation = 0.0;    // |full - half|, the first-order error estimate
};

/// Reruns step `index` as two half steps (half.dt must be traj.dt / 2).
RefinedDerivative lie_derivative_refined(const StateFunctional& V, const discretization::EvolutionSystem& sys,
                                         const semigroup::StepPropagator& half,
                                         const TrajectoryRecord& traj, std::size_t index);

/// Right-hand side of the bilinear decay estimate for W = ln(1 + V):
///   -(1 - eps |P||B|) s^2/(1 + |P| s^2) + (2K|P|/k) xi(r) + (|P||B|/eps) r^2.
struct DissipationTerms {
    double decay = 0.0;     // (1 - eps|P||B|) s^2/(1+|P|s^2), enters with a minus sign
    double bilinear = 0.0;  // (2K|P|/k) xi(r)
    double input = 0.0;     // (|P||B|/eps) r^2
    double total() const { return -decay + bilinear + input; }
};

/// eps = 1/(2 |P||B|), or 1 when B = 0.
double default_epsilon(const LyapunovCertificate& cert, double normB);

DissipationTerms dissipation_rhs_bilinear(const LyapunovCertificate& cert, double K,
                                          const cmpfn::ComparisonFunction& xi, double normB, double eps,
                                          double x_norm, double u_norm);

struct DissipationSample {
    std::size_t trajectory = 0;
    std::size_t step = 0;
    double t = 0.0;
    double x_norm = 0.0;
    double u_norm = 0.0;
    double vdot = 0.0;
    double rhs = 0.0;
    double margin = 0.0;  // rhs - vdot
    double tolerance = 0.0;
    bool violated = false;
};

struct DissipationOptions {
    double dt_factor = 10.0;
    double abs_tol = 1e-8;
    /// Fraction of checked steps that must pass (1 = every step).
    double required_fraction = 1.0;
    /// Norms to measure x and u in; default to the tags recorded in each trajectory.
    std::optional<NormTag> state_norm;
    std::optional<NormTag> input_norm;
    /// Needed only when a norm is overridden (states/inputs are re-measured on it).
    std::optional<discretization::Grid1D> grid;
    /// Keep every record_every-th sample for serialization (violations are always kept).
    std::size_t record_every = 50;
    std::size_t max_kept_violations = 1000;
};

struct DissipationReport {
    std::string label;
    bool passed = true;
    std::size_t trajectories = 0;
    std::size_t steps_checked = 0;
    std::size_t steps_skipped = 0;  // antecedent false (implicative form)
    std::size_t violations = 0;
    double worst_margin = INFINITY;  // min over checked steps of margin + tolerance
    std::optional<DissipationSample> worst;
    std::vector<DissipationSample> kept;  // decimated samples and violations, in order
    double pass_fraction() const {
        return steps_checked == 0 ? 1.0 : 1.0 - static_cast<double>(violations) / steps_checked;
    }
};

/// Bound on the Lie derivative as a function of (|x|, |u|).
using RateBound = std::function<double(double x_norm, double u_norm)>;

/// Checks dV/dt <= bound(|x_k|, |u_k|) at every step of every trajectory with
/// tolerance (dt_factor dt + abs_tol)(1 + |bound|).
DissipationReport certify_rate_bound(const StateFunctional& V, const RateBound& bound,
                                     const std::vector<const TrajectoryRecord*>& trajectories,
                                     const DissipationOptions& opts = {});

/// dV/dt <= -alpha(|x|) + sigma(|u|).
DissipationReport certify_dissipation(const StateFunctional& V, const cmpfn::ComparisonFunction& alpha,
                                      const cmpfn::ComparisonFunction& sigma,
                                      const std::vector<const TrajectoryRecord*>& trajectories,
                                      const DissipationOptions& opts = {});

/// |x| >= gamma(|u|)  =>  dV/dt <= -eta(|x|); steps failing the antecedent are skipped.
DissipationReport certify_implicative(const StateFunctional& V, const cmpfn::ComparisonFunction& eta,
                                      const cmpfn::ComparisonFunction& gamma,
                                      const std::vector<const TrajectoryRecord*>& trajectories,
                                      const DissipationOptions& opts = {});

void write_dissipation_csv(std::ostream& os, const DissipationReport& report);
std::string dissipation_markdown(const DissipationReport& report);

}  // namespace isslab::lyapunov
