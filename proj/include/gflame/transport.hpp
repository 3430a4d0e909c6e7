#pragma once

#include <utility>
#include <vector>

#include "gflame/cellular.hpp"
#include "gflame/flows.hpp"
#include "gflame/grid.hpp"

namespace gflame {

/// Steady solution of d Lap T + V.DT = 0 with T - x1 periodic and mean zero.
/// Only the periodic part S = T - x1 is stored; gradients add e1 analytically.
struct TransportResult {
    FlowField flow;
    double d = 0.0;
    ScalarField S;
    /// Relative discrete L2 residual of the linear system.
    double residual = 0.0;
    /// Artificial diffusivity of the first-order upwind flux, max|V| h / 2.
    double numerical_diffusion = 0.0;
};

/// Upwind flux-form discretization with exactly divergence-free face
/// velocities, solved directly. Throws SingularProblem for d = 0 and
/// NonConvergence if the residual exceeds tol.
TransportResult solve_T(const FlowField& flow, double d, const PeriodicGrid& grid, double tol = 1e-10);

struct LpNorm {
    double value;
    /// False when p lies outside [1, 2], where the L^p bound is not claimed.
    bool in_range;
};

/// (integral of |DT|^p)^(1/p) with central differences for S. Throws InvalidP for p <= 0.
LpNorm lp_gradient_norm(const TransportResult& result, double p);

/// Squared gradient of T at every node.
ScalarField grad_T_squared(const TransportResult& result);

struct BandValue {
    double lo;
    double hi;
    double value;
    bool empty;
};

/// Integral of |DT| over the bands (N-1) sqrt(eps) <= |H| <= N sqrt(eps), N = 1, 2, ...
std::vector<BandValue> band_masses(const TransportResult& result, double eps);

/// (N, integral of |DT|^2 over {|H| >= N / sqrt(A)}) for each N.
std::vector<std::pair<double, double>> offcore_decay(const TransportResult& result, const std::vector<double>& N_list);

/// beta_A / lambda_A with beta_A = ||DT||_{L1}.
double beta_lambda_ratio(const TransportResult& transport, const EffectiveHResult& cellular);

}  // namespace gflame
