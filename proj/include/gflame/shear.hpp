#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "gflame/flows.hpp"
#include "gflame/grid.hpp"

namespace gflame {

/// One-dimensional reductions of the cell problem in the shear flow (v(y), 0),
/// each written as N(phi) = lambda on [0,1):
///   viscous_g      -d phi'' + sqrt(m^2 + (n+phi')^2) + A m v
///   curvature_g    -d m^2 phi'' / (m^2 + (n+phi')^2) + sqrt(m^2 + (n+phi')^2) + A m v
///   quadratic_jkm  -d phi'' + phi'^2 / 2 + v
///   limit_problem  -d phi'' + |phi'| + m v
enum class ShearModel { viscous_g, curvature_g, quadratic_jkm, limit_problem };

std::string_view to_string(ShearModel model) noexcept;
ShearModel parse_shear_model(std::string_view name);

struct ShearSpec {
    double m = 1.0;
    double n = 0.0;
    double A = 0.0;
    double d = 0.0;
    ShearModel model = ShearModel::viscous_g;
    ShearProfile profile = ShearProfile::cosine();
    /// 0 selects the default resolution for d.
    int grid_n = 0;

    /// Throws InvalidModelParams for curvature_g with m = 0 and for
    /// limit_problem or quadratic_jkm with d <= 0.
    void validate() const;
};

/// 2048 nodes for d >= 1e-2, 8192 below.
int default_shear_grid_n(double d);

/// implicit_newton: backward Euler on phi_t + N(phi) = 0 with the full
/// Newton linearization and a pseudo-time step grown by the residual ratio.
/// explicit_relaxation: implicit diffusion, explicit central Hamiltonian.
/// Both stop at the same discrete steady state. d = 0 always uses the
/// explicit Godunov relaxation.
enum class ShearScheme { implicit_newton, explicit_relaxation };

struct ShearOptions {
    double tol = 1e-9;
    double max_T = 500.0;
    long max_steps = 20'000'000;
    ShearScheme scheme = ShearScheme::implicit_newton;
    /// Pseudo-time steps allowed for implicit_newton.
    int max_newton = 5000;
};

struct ShearResult {
    double lambda = 0.0;
    ScalarField phi;
    double residual = 0.0;
    long steps = 0;
    /// Steps that used the linearized implicit Hamiltonian (large cell Peclet number).
    long linearized_steps = 0;
};

/// Pseudo-time relaxation phi_t + N(phi) = 0 with central differences until
/// sup - inf of phi_t <= tol; lambda = -mean(phi_t). The implicit scheme
/// raises tol to the rounding level of d phi'' when that is larger. In the explicit scheme a
/// cell Peclet number above 1 moves the linearized Hamiltonian into the
/// implicit solve. d = 0 switches to explicit Godunov upwinding.
ShearResult solve_shear(const ShearSpec& spec, const ShearOptions& opts = {});

struct SlopeEstimate {
    std::vector<double> A;
    std::vector<double> lambda;
    std::vector<double> ratios;
    double last_ratio = 0.0;
    /// Secant slope through the last two points, removing the O(1) offset of lambda(A).
    double extrapolated = 0.0;
};

/// lambda(A)/A along an increasing A_list (at least three entries).
SlopeEstimate asymptotic_slope(const ShearSpec& base, const std::vector<double>& A_list,
                               const ShearOptions& opts = {});

struct JkmRow {
    double d;
    double I_d;
    double scaled;  // I_d / d
    double transition_point;
};

struct JkmCheck {
    std::vector<JkmRow> rows;
    /// -sqrt(min |v''|) over the maximizers.
    double target = 0.0;
    /// Maximizer with the smallest curvature.
    double selected_maximizer = 0.0;
};

/// Location where phi' flips from negative to positive, taken as the midpoint
/// of the grid interval with the largest jump. NaN when no flip exists.
double transition_point(const ScalarField& phi);

/// Solves quadratic_jkm for each d. Throws DegenerateProfile for constant
/// profiles or a maximizer with |v''| < 1e-8, InvalidArgument if max v != 0.
JkmCheck jkm_limit_check(const ShearProfile& profile, const std::vector<double>& d_list, int grid_n = 0,
                         const ShearOptions& opts = {});

struct QuadraticLawRow {
    double d;
    double neg_lambda_bar;
    double scaled;  // -lambda_bar / d^2
};

struct QuadraticLaw {
    std::vector<QuadraticLawRow> rows;
    /// Exponent r of a log-log fit -lambda_bar ~ C d^r; NaN for fewer than two rows.
    double fitted_power = 0.0;
};

/// limit_problem sweep over d_list; lambda_bar(0) = max m v is exact and must vanish.
QuadraticLaw d_sweep_quadratic_law(const ShearProfile& profile, double m, const std::vector<double>& d_list,
                                   const ShearOptions& opts = {});

}  // namespace gflame
