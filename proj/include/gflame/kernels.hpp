#pragma once

#include "gflame/grid.hpp"

namespace gflame {

/// Node-collocated velocity samples. In 1D only vx is read.
struct VelocitySamples {
    ScalarField vx;
    ScalarField vy;

    explicit VelocitySamples(const PeriodicGrid& grid) : vx(grid), vy(grid) {}
    VelocitySamples(ScalarField x, ScalarField y) : vx(std::move(x)), vy(std::move(y)) {}
    double max_abs() const;
};

struct CentralGradient {
    ScalarField gx;
    ScalarField gy;
};

/// Stencil kernels. `reference` runs serially and `parallel` splits rows over
/// OpenMP threads; both evaluate identical per-node arithmetic, so their
/// outputs agree bit for bit. The unqualified helpers below use `parallel`.
///
/// `slope` is the affine part P of G = P.x + f and is added to every
/// difference. `order` selects first- or second-order one-sided differences.
namespace reference {
void laplacian_into(const ScalarField& f, ScalarField& out);
void godunov_grad_mag_into(const ScalarField& f, Vec2 slope, int order, ScalarField& out);
void upwind_advect_into(const ScalarField& f, const VelocitySamples& v, Vec2 slope, int order, ScalarField& out);
/// out = s_l * godunov|P+Df| + V.(P+Df), the fused explicit part of G_t.
void hamiltonian_into(const ScalarField& f, const VelocitySamples& v, Vec2 slope, double s_l, int order,
                      ScalarField& out);
void central_gradient_into(const ScalarField& f, CentralGradient& out);
/// out = sqrt(|P + D0 f|^2 + delta^2) with central D0.
void central_grad_mag_into(const ScalarField& f, Vec2 slope, double delta, ScalarField& out);
/// Rows summed independently, then combined by a fixed-order pairwise sum.
double mean(const ScalarField& f);
}  // namespace reference

namespace parallel {
void laplacian_into(const ScalarField& f, ScalarField& out);
void godunov_grad_mag_into(const ScalarField& f, Vec2 slope, int order, ScalarField& out);
void upwind_advect_into(const ScalarField& f, const VelocitySamples& v, Vec2 slope, int order, ScalarField& out);
/// out = s_l * godunov|P+Df| + V.(P+Df), the fused explicit part of G_t.
void hamiltonian_into(const ScalarField& f, const VelocitySamples& v, Vec2 slope, double s_l, int order,
                      ScalarField& out);
void central_gradient_into(const ScalarField& f, CentralGradient& out);
/// out = sqrt(|P + D0 f|^2 + delta^2) with central D0.
void central_grad_mag_into(const ScalarField& f, Vec2 slope, double delta, ScalarField& out);
/// Rows summed independently, then combined by a fixed-order pairwise sum.
double mean(const ScalarField& f);
}  // namespace parallel

ScalarField laplacian(const ScalarField& f);
ScalarField godunov_grad_mag(const ScalarField& f, Vec2 slope = {}, int order = 1);
ScalarField upwind_advect(const ScalarField& f, const VelocitySamples& v, Vec2 slope = {}, int order = 1);
CentralGradient central_gradient(const ScalarField& f);
ScalarField central_grad_mag(const ScalarField& f, Vec2 slope = {}, double delta = 0.0);

/// Threads the parallel kernels will use.
int kernel_threads();

}  // namespace gflame
