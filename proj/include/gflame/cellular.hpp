#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gflame/flows.hpp"
#include "gflame/grid.hpp"

namespace gflame {

enum class CellModel { inviscid, viscous };

/// One 2D cell problem
///   -d Lap w + s_l |P + Dw| + A V.(P + Dw) = hbar  on the torus,
/// where the flow carries the intensity A.
struct CellProblemSpec {
    Vec2 P{1.0, 0.0};
    double d = 0.0;
    double s_l = 1.0;
    FlowField flow = FlowField::zero();

    double amplitude() const noexcept { return flow.amplitude(); }
    CellModel model() const noexcept { return d > 0.0 ? CellModel::viscous : CellModel::inviscid; }
    /// Throws InvalidArgument when |P| = 0, d < 0 or s_l <= 0.
    void validate() const;
};

struct HistoryPoint {
    double t;
    double mean_g;
};

struct EffectiveHResult {
    double hbar = 0.0;
    long steps = 0;
    /// sup - inf of the discrete G_t (time marching) or of the cell residual (steady).
    double residual = 0.0;
    std::vector<HistoryPoint> history;
    int grid_n = 0;
    std::string method;
};

struct CellSolution {
    EffectiveHResult result;
    ScalarField w;
};

struct TimeMarchingOptions {
    double tol = 1e-8;
    double max_T = 50.0;
    long max_steps = 100'000'000;
    /// 0 picks 2 for d > 0 and 1 for d = 0.
    int order = 0;
    /// Unset means implicit whenever d > 0.
    std::optional<bool> implicit_diffusion;
    /// Overrides the automatic step; CFLViolation if it exceeds the stability bound.
    std::optional<double> forced_dt;
    int renormalize_every = 100;
    int check_every = 20;
};

struct SteadyOptions {
    double tol = 1e-8;
    int max_iters = 400;
    double d_min = 0.1;
    int anderson_depth = 8;
    /// Regularization of |P + Dw| as sqrt(|P + Dw|^2 + delta^2).
    double delta = 1e-8;
};

/// Automatic explicit step for the given spec and grid.
double time_marching_dt(const CellProblemSpec& spec, const PeriodicGrid& grid, bool implicit_diffusion);

/// Evolves G_t = d Lap G - s_l |DG| - A V.DG with G = P.x + w and returns
/// hbar as minus the long-time slope of mean(G).
CellSolution solve_time_marching(const CellProblemSpec& spec, const PeriodicGrid& grid,
                                 const TimeMarchingOptions& opts = {});

/// Lagged fixed point on the stationary cell problem with Anderson mixing.
/// Each iteration solves (-d Lap + A V.D0) w = hbar - s_l g(w_old) - A V.P.
CellSolution solve_steady_iteration(const CellProblemSpec& spec, const PeriodicGrid& grid,
                                    const SteadyOptions& opts = {});

/// First-order upwind time marching with no diffusion. Requires d = 0.
EffectiveHResult solve_inviscid_reference(const CellProblemSpec& spec, const PeriodicGrid& grid,
                                          double tol = 1e-8, double max_T = 50.0);

/// Residual field -d Lap w + s_l |P + D0 w| + A V.(P + D0 w) with central differences.
ScalarField steady_residual(const CellProblemSpec& spec, const ScalarField& w, double delta = 1e-8);

/// Boundary-layer refinement rule: max(128, ceil(8 sqrt(A / max(d, 0.05)))),
/// rounded up to a power of two and capped.
int refined_grid_n(double amplitude, double d, int cap = 512);

struct CellProfile {
    std::vector<double> bin_center;  // |H| level
    std::vector<double> bin_mean;    // mean of v_A over the bin, NaN if empty
    std::vector<int> bin_count;
    /// +1 if v_A increases from separatrix to cell centre, -1 if it decreases, 0 if flat.
    int direction = 0;
    /// Consecutive nonempty bins stepping against the observed direction.
    int violations = 0;
};

struct DiagnosticsOptions {
    std::vector<double> eps_list{0.05, 0.1, 0.2};
    double bin_width = 1.0 / 64.0;
    /// Also solve the linear transport problem for the beta/lambda ratio.
    bool with_transport = false;
};

struct DiagnosticsReport {
    double l1_grad_total = 0.0;
    /// (eps, integral of |Dv_A| over {|H| <= eps}); always contains eps = 1.
    std::vector<std::pair<double, double>> layer_mass;
    double weighted_h1 = 0.0;
    double streamline_osc = 0.0;
    std::optional<double> beta_over_lambda;
    std::array<CellProfile, 4> cell_profiles;
};

/// Theory quantities of the normalized solution v_A = (P.x + w) / hbar.
DiagnosticsReport diagnostics(const CellProblemSpec& spec, const ScalarField& w, double hbar,
                              const DiagnosticsOptions& opts = {});

}  // namespace gflame
