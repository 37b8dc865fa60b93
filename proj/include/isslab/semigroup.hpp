#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <vector>

#include "isslab/discretization.hpp"

namespace isslab::semigroup {

using discretization::EvolutionSystem;
using discretization::LinearOperator;

/// phi1(z) = (e^z - 1)/z with a series branch for |z| < 1e-5.
double phi1(double z);

/// e^A by scaling and squaring with a degree-13 Pade approximant.
Eigen::MatrixXd expm_pade13(const Eigen::MatrixXd& A);

/// t * phi1(t A), read off the upper-right block of exp([[tA, tI], [0, 0]]).
Eigen::MatrixXd phi1_times_t(const Eigen::MatrixXd& A, double t);

/// Exponential-Euler step operators for a fixed dt:
///   x_{k+1} = expA x_k + phi (B u_k + C(x_k, u_k)),  phi = dt phi1(dt A).
struct StepPropagator {
    double dt = 0.0;
    LinearOperator expA;
    LinearOperator phi;
};

/// Spectral data of a generator, built once and shared read-only.
///
/// Diagonal generators stay diagonal; symmetric ones are diagonalized by an
/// orthogonal eigenbasis; anything else falls back to Pade exponentials.
class SemigroupCache {
public:
    enum class Path { Diagonal, Spectral, Pade };

    explicit SemigroupCache(const LinearOperator& A);

    Path path() const { return path_; }
    std::size_t size() const { return A_.size(); }
    const LinearOperator& generator() const { return A_; }

    /// Ascending eigenvalues (Diagonal/Spectral paths only).
    const Eigen::VectorXd& eigenvalues() const;
    const Eigen::MatrixXd& eigenvectors() const;
    /// |Q diag(lambda) Q^T - A|_F relative to |A|_F; 0 on the diagonal path.
    double reconstruction_error() const { return reconstruction_error_; }

    Eigen::VectorXd apply(double t, const Eigen::Ref<const Eigen::VectorXd>& x) const;
    Eigen::VectorXd apply_phi1(double t, const Eigen::Ref<const Eigen::VectorXd>& v) const;
    StepPropagator propagator(double dt) const;

private:
    LinearOperator A_;
    Path path_;
    Eigen::VectorXd eigenvalues_;
    Eigen::MatrixXd eigenvectors_;
    double reconstruction_error_ = 0.0;
};

/// e^{tA} x, building a one-off cache.
Eigen::VectorXd expm_apply(const LinearOperator& A, double t, const Eigen::Ref<const Eigen::VectorXd>& x);

/// Input field as a function of time; held constant over each integrator step.
using InputSignal = std::function<Eigen::VectorXd(double t)>;

/// States, inputs and norms at t_k = k dt. inputs.col(k) acts on [t_k, t_{k+1}).
struct TrajectoryRecord {
    double dt = 0.0;
    std::vector<double> times;
    Eigen::MatrixXd states;  // n x steps (empty when states were not kept)
    Eigen::MatrixXd inputs;  // n x steps (empty when states were not kept)
    std::vector<double> state_norms;
    std::vector<double> input_norms;
    discretization::NormTag state_norm = discretization::NormTag::L2;
    discretization::NormTag input_norm = discretization::NormTag::Sup;
    bool blow_up = false;

    std::size_t size() const { return times.size(); }
    bool has_states() const { return states.cols() == static_cast<Eigen::Index>(times.size()); }
};

struct IntegrateOptions {
    double blowup_guard = 1e12;
    bool keep_states = true;
};

/// One exponential-Euler step.
Eigen::VectorXd exponential_euler_step(const EvolutionSystem& sys, const StepPropagator& prop,
                                       const Eigen::Ref<const Eigen::VectorXd>& x,
                                       const Eigen::Ref<const Eigen::VectorXd>& u);

/// Mild-solution time stepping by exponential Euler up to t_end = N dt.
/// A state norm above the blow-up guard truncates the record and sets blow_up.
TrajectoryRecord integrate_mild(const EvolutionSystem& sys, const SemigroupCache& cache,
                                const Eigen::Ref<const Eigen::VectorXd>& x0, const InputSignal& u,
                                double t_end, double dt, const IntegrateOptions& opts = {});
TrajectoryRecord integrate_mild(const EvolutionSystem& sys, const Eigen::Ref<const Eigen::VectorXd>& x0,
                                const InputSignal& u, double t_end, double dt,
                                const IntegrateOptions& opts = {});

/// |T(t)| <= M e^{-lambda t}.
struct SemigroupConstants {
    double M = 1.0;
    double lambda = 0.0;
};

/// M = 1, lambda = |max eigenvalue| for symmetric generators.
/// Throws NotExponentiallyStable when an eigenvalue is >= 0.
SemigroupConstants semigroup_constants(const SemigroupCache& cache);
SemigroupConstants semigroup_constants(const LinearOperator& A);

enum class Quadrature { Trapezoid, LeftRiemann };

/// q(t) * exp(int_0^t kernel) on the given time grid. LeftRiemann integrates
/// piecewise-constant kernels exactly (kernel[k] acts on [t_k, t_{k+1})).
std::vector<double> gronwall_majorant(const std::vector<double>& times,
                                      const std::vector<double>& q_values,
                                      const std::vector<double>& kernel,
                                      Quadrature rule = Quadrature::Trapezoid);

/// w with |x(t)| <= M e^{-lambda t}|x0| + w |u|_{Lp(0,t)}:
///   p = 1: w = M normB;  p > 1: w = M normB (2/(q lambda))^{1/q}, 1/p + 1/q = 1.
double lp_iss_constant(double M, double lambda, double normB, double p);

/// time,state_norm,input_norm rows.
void write_trajectory_csv(std::ostream& os, const TrajectoryRecord& traj);
/// time,node,value rows for every `every`-th recorded state.
void write_state_dump_csv(std::ostream& os, const TrajectoryRecord& traj,
                          const discretization::Grid1D& grid, std::size_t every);

}  // namespace isslab::semigroup
