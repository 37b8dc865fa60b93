#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "isslab/cmpfn.hpp"

namespace isslab::discretization {

enum class NormTag { L2, L4, Sup };

std::string_view to_string(NormTag tag);
NormTag parse_norm_tag(std::string_view s);

/// Uniform grid of n interior nodes on (0, L); node i (0-based) sits at (i+1) h.
/// The endpoints are never sampled, so Dirichlet conditions live in the matrix
/// structure and endpoint singularities are never evaluated.
class Grid1D {
public:
    Grid1D(std::size_t n, double length);

    std::size_t n() const { return n_; }
    double length() const { return length_; }
    double h() const { return h_; }
    double node(std::size_t i) const { return static_cast<double>(i + 1) * h_; }
    Eigen::VectorXd nodes() const;

private:
    std::size_t n_;
    double length_;
    double h_;
};

/// A field sampled on a Grid1D.
struct GridFunction {
    Grid1D grid;
    Eigen::VectorXd values;

    GridFunction(Grid1D g, Eigen::VectorXd v);
    static GridFunction constant(const Grid1D& g, double value);
    static GridFunction sample(const Grid1D& g, const std::function<double(double)>& f);
};

/// Midpoint quadrature Lp norms (h sum |x_i|^p)^(1/p), or max |x_i|.
double norm(const Grid1D& grid, const Eigen::Ref<const Eigen::VectorXd>& x, NormTag tag);
double norm(const GridFunction& x, NormTag tag);
/// (h sum |x_i|^p)^(1/p) for arbitrary p >= 1.
double lp_norm(const Grid1D& grid, const Eigen::Ref<const Eigen::VectorXd>& x, double p);
/// Discrete inner product <x, y>_h = h sum x_i y_i.
double inner(const Grid1D& grid, const Eigen::Ref<const Eigen::VectorXd>& x,
             const Eigen::Ref<const Eigen::VectorXd>& y);

/// Linear map on grid functions; diagonal operators never materialize a matrix.
class LinearOperator {
public:
    static LinearOperator diagonal(Eigen::VectorXd entries);
    static LinearOperator dense(Eigen::MatrixXd matrix);
    static LinearOperator zero(std::size_t n);

    std::size_t size() const;
    bool is_diagonal() const { return std::holds_alternative<Eigen::VectorXd>(rep_); }
    bool is_zero() const { return zero_; }

    /// out = op * x (out is resized).
    void apply(const Eigen::Ref<const Eigen::VectorXd>& x, Eigen::VectorXd& out) const;
    Eigen::VectorXd operator*(const Eigen::Ref<const Eigen::VectorXd>& x) const;

    const Eigen::VectorXd& diagonal_entries() const;
    const Eigen::MatrixXd& matrix() const;
    Eigen::MatrixXd to_dense() const;

    bool is_symmetric(double tol = 0.0) const;
    /// Induced norm in the h-weighted L2 space (the weight cancels): spectral norm.
    double norm_l2() const;

private:
    explicit LinearOperator(std::variant<Eigen::VectorXd, Eigen::MatrixXd> rep, bool zero)
        : rep_(std::move(rep)), zero_(zero) {}
    std::variant<Eigen::VectorXd, Eigen::MatrixXd> rep_;
    bool zero_;
};

/// (state, input) -> C(x, u); writes into `out` (already sized n).
using NonlinearMap = std::function<void(const Eigen::Ref<const Eigen::VectorXd>& x,
                                        const Eigen::Ref<const Eigen::VectorXd>& u,
                                        Eigen::VectorXd& out)>;

/// x' = A x + B u + C(x, u) on a grid, with the norms the estimates are stated in.
struct EvolutionSystem {
    Grid1D grid;
    LinearOperator A;
    LinearOperator B;
    NonlinearMap C;  // empty when the system is linear
    NormTag state_norm = NormTag::L2;
    NormTag input_norm = NormTag::Sup;
    double K_bilinear = 0.0;
    std::optional<cmpfn::ComparisonFunction> xi;
    std::string label;

    EvolutionSystem(Grid1D g, LinearOperator a);
    std::size_t n() const { return grid.n(); }
    bool has_input_operator() const { return !B.is_zero(); }
    bool has_nonlinearity() const { return static_cast<bool>(C); }
};

/// A = diffusivity * tridiag(1,-2,1)/h^2 + c I on n interior nodes of (0, L).
EvolutionSystem build_dirichlet_laplacian(std::size_t n, double L, double c, double diffusivity);

/// Closed-form spectrum of the matrix above, ascending:
/// c - (4 diffusivity / h^2) sin^2(k pi h / (2L)), k = n..1.
Eigen::VectorXd dirichlet_laplacian_eigenvalues(std::size_t n, double L, double c,
                                                double diffusivity);

/// Multiplication by (tan l)^(1/8). Grid must lie inside (0, pi/2).
LinearOperator build_tan_input_operator(const Grid1D& grid);

/// u(l) = b for l < arctan(c^8), b c (tan l)^(-1/8) beyond.
GridFunction build_hat_input(const Grid1D& grid, double b, double c);

/// C(x,u)_i = x_i u_i / (1 + |l_i - 1| x_i^2).
NonlinearMap build_saturated_bilinearity(const Grid1D& grid);
/// C(x,u)_i = x_i u_i.
NonlinearMap build_multiplicative_bilinearity(const Grid1D& grid);

struct BilinearSpotCheck {
    std::size_t samples = 0;
    std::size_t violations = 0;
    double worst_ratio = 0.0;  // max |C(x,u)| / (K |x| xi(|u|))
};

/// Spot-checks |C(x,u)| <= K |x| xi(|u|) on random (x, u) pairs.
BilinearSpotCheck check_bilinear_bound(const EvolutionSystem& sys, std::size_t samples,
                                       std::uint64_t seed);

/// int_0^{pi/2} (tan l)^{1/2} dl by adaptive Gauss-Kronrod, with the
/// endpoint singularity removed through l = pi/2 - s^2.
double tan_sqrt_integral();

}  // namespace isslab::discretization
