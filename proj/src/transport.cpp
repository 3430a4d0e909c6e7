#include "gflame/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "detail/pinned_solver.hpp"
#include "gflame/error.hpp"
#include "gflame/kernels.hpp"

namespace gflame {

TransportResult solve_T(const FlowField& flow, double d, const PeriodicGrid& grid, double tol) {
    if (grid.dims() != 2) throw Error(ErrorKind::InvalidArgument, "transport needs a 2D grid");
    if (d == 0.0) throw Error(ErrorKind::SingularProblem, "transport problem is singular for d = 0");
    if (!(d > 0.0)) throw Error(ErrorKind::InvalidArgument, "diffusivity must be positive");

    const int n = grid.n();
    const int size = static_cast<int>(grid.size());
    const double h = grid.h();
    const double dh2 = d / (h * h);

    // Face velocities: u(i,j) on the face (i+1/2, j), v(i,j) on (i, j+1/2).
    std::vector<double> u(size), v(size);
    double vmax = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const std::size_t k = grid.index(i, j);
            u[k] = flow.face_velocity_x(grid, i, j);
            v[k] = flow.face_velocity_y(grid, i, j);
            vmax = std::max({vmax, std::abs(u[k]), std::abs(v[k])});
        }

    // -d Lap S - div_h F(S) = V1 with upwind face flux F = u+ S_right + u- S_left.
    std::vector<detail::Triplet> trip;
    trip.reserve(static_cast<std::size_t>(size) * 5);
    Eigen::VectorXd rhs(size);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const int r = static_cast<int>(grid.index(i, j));
            const double ue = u[r], uw = u[grid.index(i - 1, j)];
            const double vn = v[r], vs = v[grid.index(i, j - 1)];
            const double pos_e = std::max(ue, 0.0), neg_e = std::min(ue, 0.0);
            const double pos_w = std::max(uw, 0.0), neg_w = std::min(uw, 0.0);
            const double pos_n = std::max(vn, 0.0), neg_n = std::min(vn, 0.0);
            const double pos_s = std::max(vs, 0.0), neg_s = std::min(vs, 0.0);
            trip.emplace_back(r, r, 4.0 * dh2 + (pos_w - neg_e + pos_s - neg_n) / h);
            trip.emplace_back(r, static_cast<int>(grid.index(i + 1, j)), -dh2 - pos_e / h);
            trip.emplace_back(r, static_cast<int>(grid.index(i - 1, j)), -dh2 + neg_w / h);
            trip.emplace_back(r, static_cast<int>(grid.index(i, j + 1)), -dh2 - pos_n / h);
            trip.emplace_back(r, static_cast<int>(grid.index(i, j - 1)), -dh2 + neg_s / h);
            rhs[r] = 0.5 * (ue + uw);
        }
    rhs.array() -= rhs.mean();

    const detail::PinnedSolver lin(size, trip);
    Eigen::VectorXd x(size);
    const double rel = lin.solve(rhs, x, tol);
    const double bnorm = rhs.norm();
    x.array() -= x.mean();

    TransportResult out{flow, d, ScalarField(grid), 0.0, 0.5 * vmax * h};
    for (int k = 0; k < size; ++k) out.S[k] = x[k];
    out.residual = bnorm > 0.0 ? rel : 0.0;
    if (out.residual > tol)
        throw Error(ErrorKind::NonConvergence, "transport residual " + message_number(out.residual) + " above tolerance");
    return out;
}

ScalarField grad_T_squared(const TransportResult& result) {
    const CentralGradient g = central_gradient(result.S);
    ScalarField out(result.S.grid());
    for (std::size_t k = 0; k < out.size(); ++k) {
        const double gx = 1.0 + g.gx[k], gy = g.gy[k];
        out[k] = gx * gx + gy * gy;
    }
    return out;
}

LpNorm lp_gradient_norm(const TransportResult& result, double p) {
    if (!(p > 0.0) || !std::isfinite(p)) throw Error(ErrorKind::InvalidP, "p must be a positive finite exponent");
    ScalarField f = grad_T_squared(result);
    for (std::size_t k = 0; k < f.size(); ++k) f[k] = std::pow(f[k], 0.5 * p);
    return {std::pow(integrate(f), 1.0 / p), p >= 1.0 && p <= 2.0};
}

namespace {

ScalarField grad_T_abs(const TransportResult& result) {
    ScalarField f = grad_T_squared(result);
    for (std::size_t k = 0; k < f.size(); ++k) f[k] = std::sqrt(f[k]);
    return f;
}

}  // namespace

std::vector<BandValue> band_masses(const TransportResult& result, double eps) {
    if (!(eps > 0.0) || eps > 1.0) throw Error(ErrorKind::InvalidArgument, "band width eps must lie in (0, 1]");
    const ScalarField mag = grad_T_abs(result);
    const double root = std::sqrt(eps);
    const int bands = static_cast<int>(std::ceil(1.0 / root - 1e-12));
    std::vector<BandValue> out;
    for (int N = 1; N <= bands; ++N) {
        const double lo = (N - 1) * root, hi = std::min(1.0, N * root);
        const BandMask band = band_mask(mag.grid(), lo, hi);
        out.push_back({lo, hi, band.empty ? 0.0 : integrate(mag, band.mask), band.empty});
    }
    return out;
}

std::vector<std::pair<double, double>> offcore_decay(const TransportResult& result, const std::vector<double>& N_list) {
    const ScalarField sq = grad_T_squared(result);
    const auto& grid = sq.grid();
    const double A = result.flow.amplitude();
    std::vector<std::pair<double, double>> out;
    for (double N : N_list) {
        if (!(N >= 1.0)) throw Error(ErrorKind::InvalidArgument, "offcore decay needs N >= 1");
        const double lo = A > 0.0 ? N / std::sqrt(A) : std::numeric_limits<double>::infinity();
        double mass = 0.0;
        if (lo <= 1.0) {
            const BandMask band = band_mask(grid, lo, 1.0 + 1e-12);
            if (!band.empty) mass = integrate(sq, band.mask);
        }
        out.emplace_back(N, mass);
    }
    return out;
}

double beta_lambda_ratio(const TransportResult& transport, const EffectiveHResult& cellular) {
    if (!(cellular.hbar > 0.0)) throw Error(ErrorKind::InvalidArgument, "cellular hbar must be positive");
    return lp_gradient_norm(transport, 1.0).value / cellular.hbar;
}

}  // namespace gflame
