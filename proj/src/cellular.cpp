#include "gflame/cellular.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "detail/implicit_diffusion.hpp"
#include "detail/pinned_solver.hpp"
#include "gflame/error.hpp"
#include "gflame/kernels.hpp"
#include "gflame/transport.hpp"

namespace gflame {

void CellProblemSpec::validate() const {
    if (!(norm(P) > 0.0)) throw Error(ErrorKind::InvalidArgument, "direction P must be nonzero");
    if (!(d >= 0.0) || !std::isfinite(d)) throw Error(ErrorKind::InvalidArgument, "diffusivity must be >= 0");
    if (!(s_l > 0.0)) throw Error(ErrorKind::InvalidArgument, "laminar speed must be positive");
}

namespace {

double spread(const ScalarField& f) { return f.max() - f.min(); }

/// Least-squares slope of mean(G) over the trailing window [0.8 t_end, t_end].
/// Returns NaN when the window holds fewer than `min_points` samples.
double window_slope(const std::vector<HistoryPoint>& hist, int min_points = 5) {
    if (hist.empty()) return std::numeric_limits<double>::quiet_NaN();
    const double t_end = hist.back().t;
    const double t_start = 0.8 * t_end;
    double st = 0.0, sg = 0.0;
    int count = 0;
    for (auto it = hist.rbegin(); it != hist.rend() && it->t >= t_start; ++it) {
        st += it->t;
        sg += it->mean_g;
        ++count;
    }
    if (count < min_points) return std::numeric_limits<double>::quiet_NaN();
    const double tm = st / count, gm = sg / count;
    double num = 0.0, den = 0.0;
    for (auto it = hist.rbegin(); it != hist.rend() && it->t >= t_start; ++it) {
        num += (it->t - tm) * (it->mean_g - gm);
        den += (it->t - tm) * (it->t - tm);
    }
    return num / den;
}

void require_square(const PeriodicGrid& grid) {
    if (grid.dims() != 2) throw Error(ErrorKind::InvalidArgument, "cell problems need a 2D grid");
}

}  // namespace

double time_marching_dt(const CellProblemSpec& spec, const PeriodicGrid& grid, bool implicit_diffusion) {
    const double h = grid.h();
    const double vmax = spec.flow.sample(grid).max_abs();
    const double diff = implicit_diffusion ? 0.0 : 4.0 * spec.d / (h * h);
    return 0.5 / (vmax * 2.0 / h + diff + 2.0 * spec.s_l / h);
}

CellSolution solve_time_marching(const CellProblemSpec& spec, const PeriodicGrid& grid,
                                 const TimeMarchingOptions& opts) {
    spec.validate();
    require_square(grid);
    if (!(opts.tol > 0.0)) throw Error(ErrorKind::InvalidArgument, "tolerance must be positive");
    const int order = opts.order != 0 ? opts.order : (spec.d > 0.0 ? 2 : 1);
    const bool implicit = spec.d > 0.0 && opts.implicit_diffusion.value_or(true);
    const double auto_dt = time_marching_dt(spec, grid, implicit);
    double dt = auto_dt;
    if (opts.forced_dt) {
        // The automatic step carries a safety factor of 1/2 on the stability bound.
        if (!(*opts.forced_dt > 0.0) || *opts.forced_dt > 2.0 * auto_dt)
            throw Error(ErrorKind::CFLViolation, "forced step " + message_number(*opts.forced_dt) +
                                                     " exceeds the stability bound " + message_number(2.0 * auto_dt));
        dt = *opts.forced_dt;
    }

    const VelocitySamples vel = spec.flow.sample(grid);
    ScalarField w(grid), w_new(grid), e(grid), lap(grid);
    std::optional<detail::ImplicitDiffusion> solver;
    if (implicit) solver.emplace(grid, spec.d, dt);

    EffectiveHResult res;
    res.grid_n = grid.n();
    res.method = "time_marching";
    double offset = 0.0;
    double t = 0.0;
    double prev_slope = std::numeric_limits<double>::quiet_NaN();
    res.history.push_back({0.0, parallel::mean(w)});
    const std::size_t size = grid.size();

    for (long step = 1;; ++step) {
        parallel::hamiltonian_into(w, vel, spec.P, spec.s_l, order, e);
        if (implicit) {
            for (std::size_t k = 0; k < size; ++k) w_new[k] = w[k] - dt * e[k];
            solver->apply(w_new.values().data(), w_new.values().data());
        } else if (spec.d > 0.0) {
            parallel::laplacian_into(w, lap);
            for (std::size_t k = 0; k < size; ++k) w_new[k] = w[k] + dt * (spec.d * lap[k] - e[k]);
        } else {
            for (std::size_t k = 0; k < size; ++k) w_new[k] = w[k] - dt * e[k];
        }
        t += dt;

        const bool check = step % opts.check_every == 0;
        if (check) {
            double lo = std::numeric_limits<double>::infinity(), hi = -lo;
            for (std::size_t k = 0; k < size; ++k) {
                const double gt = (w_new[k] - w[k]) / dt;
                lo = std::min(lo, gt);
                hi = std::max(hi, gt);
            }
            res.residual = hi - lo;
        }
        std::swap(w, w_new);
        if (!w.all_finite() && check)
            throw Error(ErrorKind::NonConvergence, "time marching blew up at t = " + message_number(t));

        if (step % opts.renormalize_every == 0) {
            const double m = parallel::mean(w);
            w += -m;
            offset += m;
        }
        if (check) {
            res.history.push_back({t, offset + parallel::mean(w)});
            const double slope = window_slope(res.history);
            const bool slope_ok = std::isfinite(prev_slope) && std::abs(slope - prev_slope) <= opts.tol;
            if (res.residual <= opts.tol && slope_ok) {
                res.hbar = -slope;
                res.steps = step;
                break;
            }
            prev_slope = slope;
        }
        if (t >= opts.max_T || step >= opts.max_steps)
            throw Error(ErrorKind::NonConvergence, "time marching stopped at t = " + message_number(t) +
                                                       " with G_t spread " + message_number(res.residual));
    }
    const double m = parallel::mean(w);
    w += -m;
    return {std::move(res), std::move(w)};
}

EffectiveHResult solve_inviscid_reference(const CellProblemSpec& spec, const PeriodicGrid& grid, double tol,
                                          double max_T) {
    if (spec.d != 0.0) throw Error(ErrorKind::InvalidArgument, "inviscid reference requires d = 0");
    TimeMarchingOptions opts;
    opts.tol = tol;
    opts.max_T = max_T;
    opts.order = 1;
    opts.implicit_diffusion = false;
    auto sol = solve_time_marching(spec, grid, opts);
    sol.result.method = "inviscid_reference";
    return sol.result;
}

ScalarField steady_residual(const CellProblemSpec& spec, const ScalarField& w, double delta) {
    const auto& grid = w.grid();
    const VelocitySamples vel = spec.flow.sample(grid);
    const ScalarField lap = laplacian(w);
    const CentralGradient grad = central_gradient(w);
    ScalarField out(grid);
    const double d2 = delta * delta;
    for (std::size_t k = 0; k < w.size(); ++k) {
        const double px = spec.P.x + grad.gx[k], py = spec.P.y + grad.gy[k];
        out[k] = -spec.d * lap[k] + spec.s_l * std::sqrt(px * px + py * py + d2) + vel.vx[k] * px + vel.vy[k] * py;
    }
    return out;
}

CellSolution solve_steady_iteration(const CellProblemSpec& spec, const PeriodicGrid& grid, const SteadyOptions& opts) {
    spec.validate();
    require_square(grid);
    if (spec.d < opts.d_min)
        throw Error(ErrorKind::DiffusionTooSmall, "d = " + message_number(spec.d) + " below steady-iteration minimum " +
                                                      message_number(opts.d_min) + "; use time marching");
    const int n = grid.n();
    const int size = static_cast<int>(grid.size());
    const double h = grid.h();
    const VelocitySamples vel = spec.flow.sample(grid);

    // L w = -d Lap w + A V.D0 w.
    std::vector<detail::Triplet> trip;
    trip.reserve(static_cast<std::size_t>(size) * 5);
    const double dh2 = spec.d / (h * h), inv_2h = 0.5 / h;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const int r = static_cast<int>(grid.index(i, j));
            const double vx = vel.vx[r], vy = vel.vy[r];
            trip.emplace_back(r, r, 4.0 * dh2);
            trip.emplace_back(r, static_cast<int>(grid.index(i + 1, j)), -dh2 + vx * inv_2h);
            trip.emplace_back(r, static_cast<int>(grid.index(i - 1, j)), -dh2 - vx * inv_2h);
            trip.emplace_back(r, static_cast<int>(grid.index(i, j + 1)), -dh2 + vy * inv_2h);
            trip.emplace_back(r, static_cast<int>(grid.index(i, j - 1)), -dh2 - vy * inv_2h);
        }
    const detail::PinnedSolver lin(size, trip);

    std::vector<double> adv_p(size);
    for (int k = 0; k < size; ++k) adv_p[k] = vel.vx[k] * spec.P.x + vel.vy[k] * spec.P.y;

    ScalarField w(grid), g(grid);
    Eigen::VectorXd rhs(size), sol(size);
    // Fixed-point map w -> Phi(w); returns the lagged hbar.
    auto phi = [&](const ScalarField& in, Eigen::VectorXd& out) {
        parallel::central_grad_mag_into(in, spec.P, opts.delta, g);
        std::vector<double> src(size);
        for (int k = 0; k < size; ++k) src[k] = spec.s_l * g[k] + adv_p[k];
        const double hb = pairwise_sum(src) / size;
        for (int k = 0; k < size; ++k) rhs[k] = hb - src[k];
        lin.solve(rhs, out, 1e-15);
        out.array() -= out.mean();
        return hb;
    };

    EffectiveHResult res;
    res.grid_n = n;
    res.method = "steady";
    std::deque<Eigen::VectorXd> xs, fs;
    Eigen::VectorXd x = Eigen::VectorXd::Zero(size);
    double best = std::numeric_limits<double>::infinity();
    int stalled = 0;
    for (int it = 1; it <= opts.max_iters; ++it) {
        for (int k = 0; k < size; ++k) w[k] = x[k];
        const ScalarField r = steady_residual(spec, w, opts.delta);
        res.residual = spread(r);
        res.hbar = parallel::mean(r);
        res.history.push_back({static_cast<double>(it - 1), res.hbar});
        res.steps = it - 1;
        if (res.residual <= opts.tol) break;
        // Rounding floor of the residual stencil: stop once progress stalls.
        if (res.residual < 0.5 * best) {
            best = res.residual;
            stalled = 0;
        } else if (++stalled >= 6) {
            break;
        }

        phi(w, sol);
        Eigen::VectorXd f = sol - x;
        xs.push_back(x);
        fs.push_back(f);
        if (static_cast<int>(xs.size()) > opts.anderson_depth + 1) {
            xs.pop_front();
            fs.pop_front();
        }
        if (xs.size() > 1) {
            const int m = static_cast<int>(xs.size()) - 1;
            Eigen::MatrixXd dF(size, m), dX(size, m);
            for (int c = 0; c < m; ++c) {
                dF.col(c) = fs[c + 1] - fs[c];
                dX.col(c) = xs[c + 1] - xs[c];
            }
            const Eigen::VectorXd gamma = dF.colPivHouseholderQr().solve(f);
            x = x + f - (dX + dF) * gamma;
        } else {
            x = x + f;
        }
        x.array() -= x.mean();
    }
    if (res.residual > opts.tol)
        throw Error(ErrorKind::NonConvergence, "steady iteration residual " + message_number(res.residual) +
                                                   " after " + std::to_string(res.steps) + " iterations");
    return {std::move(res), std::move(w)};
}

int refined_grid_n(double amplitude, double d, int cap) {
    const double raw = std::ceil(8.0 * std::sqrt(amplitude / std::max(d, 0.05)));
    int n = 128;
    while (n < raw) n *= 2;
    return std::min(n, cap);
}

DiagnosticsReport diagnostics(const CellProblemSpec& spec, const ScalarField& w, double hbar,
                              const DiagnosticsOptions& opts) {
    const auto& grid = w.grid();
    require_square(grid);
    if (!(hbar > 0.0)) throw Error(ErrorKind::InvalidArgument, "hbar must be positive");
    const CentralGradient grad = central_gradient(w);
    const VelocitySamples unit = spec.flow.sample_unit(grid);
    const std::size_t size = grid.size();
    const int n = grid.n();

    ScalarField mag(grid), weighted(grid), osc(grid), stream(grid), va(grid);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const std::size_t k = grid.index(i, j);
            const Vec2 x = grid.point(i, j);
            const double gx = (spec.P.x + grad.gx[k]) / hbar, gy = (spec.P.y + grad.gy[k]) / hbar;
            const double hval = cellular_stream(x);
            const double m2 = gx * gx + gy * gy;
            const double vd = unit.vx[k] * gx + unit.vy[k] * gy;
            stream[k] = hval;
            mag[k] = std::sqrt(m2);
            weighted[k] = m2 * hval * hval;
            osc[k] = hval * hval * hval * hval * vd * vd;
            va[k] = (dot(spec.P, x) + w[k]) / hbar;
        }

    DiagnosticsReport rep;
    rep.l1_grad_total = integrate(mag);
    rep.weighted_h1 = integrate(weighted);
    rep.streamline_osc = integrate(osc);

    std::vector<double> eps = opts.eps_list;
    if (std::find(eps.begin(), eps.end(), 1.0) == eps.end()) eps.push_back(1.0);
    for (double e : eps) {
        if (e >= 1.0) {
            rep.layer_mass.emplace_back(e, rep.l1_grad_total);
            continue;
        }
        RegionMask layer(grid);
        for (std::size_t k = 0; k < size; ++k) layer.set(k, std::abs(stream[k]) <= e);
        rep.layer_mass.emplace_back(e, integrate(mag, layer));
    }

    const auto quarters = QuarterCellDecomposition::build(grid);
    const int bins = static_cast<int>(std::ceil(1.0 / opts.bin_width));
    for (int c = 0; c < 4; ++c) {
        CellProfile& prof = rep.cell_profiles[c];
        std::vector<std::vector<double>> members(bins);
        for (std::size_t k = 0; k < size; ++k) {
            if (!quarters.cells[c][k]) continue;
            const int b = std::min(bins - 1, static_cast<int>(std::abs(stream[k]) / opts.bin_width));
            members[b].push_back(va[k]);
        }
        double first = std::numeric_limits<double>::quiet_NaN(), last = first;
        for (int b = 0; b < bins; ++b) {
            prof.bin_center.push_back((b + 0.5) * opts.bin_width);
            prof.bin_count.push_back(static_cast<int>(members[b].size()));
            const double mean = members[b].empty() ? std::numeric_limits<double>::quiet_NaN()
                                                   : pairwise_sum(members[b]) / members[b].size();
            prof.bin_mean.push_back(mean);
            if (std::isfinite(mean)) {
                if (!std::isfinite(first)) first = mean;
                last = mean;
            }
        }
        if (std::isfinite(first) && last != first) prof.direction = last > first ? 1 : -1;
        double prev = std::numeric_limits<double>::quiet_NaN();
        for (double mean : prof.bin_mean) {
            if (!std::isfinite(mean)) continue;
            if (std::isfinite(prev) && prof.direction != 0 && (mean - prev) * prof.direction < -1e-12) ++prof.violations;
            prev = mean;
        }
    }

    if (opts.with_transport) {
        if (spec.d <= 0.0) throw Error(ErrorKind::SingularProblem, "beta/lambda needs d > 0");
        const TransportResult tr = solve_T(spec.flow, spec.d, grid);
        rep.beta_over_lambda = lp_gradient_norm(tr, 1.0).value / hbar;
    }
    return rep;
}

}  // namespace gflame
