#include "gflame/shear.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "detail/cyclic_tridiagonal.hpp"
#include "detail/pinned_solver.hpp"
#include "gflame/error.hpp"
#include "gflame/kernels.hpp"

namespace gflame {

std::string_view to_string(ShearModel model) noexcept {
    switch (model) {
    case ShearModel::viscous_g: return "viscous_g";
    case ShearModel::curvature_g: return "curvature_g";
    case ShearModel::quadratic_jkm: return "quadratic_jkm";
    case ShearModel::limit_problem: return "limit_problem";
    }
    return "unknown";
}

ShearModel parse_shear_model(std::string_view name) {
    for (auto m : {ShearModel::viscous_g, ShearModel::curvature_g, ShearModel::quadratic_jkm, ShearModel::limit_problem})
        if (to_string(m) == name) return m;
    throw Error(ErrorKind::InvalidArgument, "unknown shear model '" + std::string(name) + "'");
}

void ShearSpec::validate() const {
    if (!(d >= 0.0) || !std::isfinite(d)) throw Error(ErrorKind::InvalidModelParams, "d must be finite and >= 0");
    if (!(A >= 0.0) || !std::isfinite(A)) throw Error(ErrorKind::InvalidModelParams, "A must be finite and >= 0");
    if (model == ShearModel::curvature_g && m == 0.0)
        throw Error(ErrorKind::InvalidModelParams, "curvature_g requires m != 0");
    if ((model == ShearModel::limit_problem || model == ShearModel::quadratic_jkm) && !(d > 0.0))
        throw Error(ErrorKind::InvalidModelParams, std::string(to_string(model)) + " requires d > 0");
    if (grid_n != 0 && grid_n < PeriodicGrid::min_nodes)
        throw Error(ErrorKind::InvalidModelParams, "grid_n too small");
}

int default_shear_grid_n(double d) { return d >= 1e-2 || d == 0.0 ? 2048 : 8192; }

namespace {

/// Hamiltonian H(p) of each model (diffusion excluded) with its slope H'(p).
struct Hamiltonian {
    ShearModel model;
    double m;
    double n;

    double value(double p) const {
        switch (model) {
        case ShearModel::viscous_g:
        case ShearModel::curvature_g: return std::hypot(m, n + p);
        case ShearModel::quadratic_jkm: return 0.5 * p * p;
        case ShearModel::limit_problem: return std::abs(p);
        }
        return 0.0;
    }

    double slope(double p) const {
        switch (model) {
        case ShearModel::viscous_g:
        case ShearModel::curvature_g: {
            const double r = std::hypot(m, n + p);
            return r > 0.0 ? (n + p) / r : 0.0;
        }
        case ShearModel::quadratic_jkm: return p;
        case ShearModel::limit_problem: return p > 0.0 ? 1.0 : (p < 0.0 ? -1.0 : 0.0);
        }
        return 0.0;
    }

    /// Minimizer of the convex H, used by the Godunov flux.
    double argmin() const {
        return model == ShearModel::viscous_g || model == ShearModel::curvature_g ? -n : 0.0;
    }

    /// Godunov numerical Hamiltonian from backward (a) and forward (b) differences.
    double godunov(double a, double b) const {
        const double p = argmin();
        return std::max(value(std::max(a, p)), value(std::min(b, p)));
    }

    /// Diffusion coefficient multiplying phi'' in the model.
    double diffusion(double d, double p) const {
        if (model != ShearModel::curvature_g) return d;
        return d * m * m / (m * m + (n + p) * (n + p));
    }

    double diffusion_slope(double d, double p) const {
        if (model != ShearModel::curvature_g) return 0.0;
        const double q = m * m + (n + p) * (n + p);
        return -2.0 * d * m * m * (n + p) / (q * q);
    }
};

double source_coefficient(const ShearSpec& spec) {
    switch (spec.model) {
    case ShearModel::viscous_g:
    case ShearModel::curvature_g: return spec.A * spec.m;
    case ShearModel::quadratic_jkm: return 1.0;
    case ShearModel::limit_problem: return spec.m;
    }
    return 0.0;
}

double spread(const std::vector<double>& v) {
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return *hi - *lo;
}

/// Central-difference steady operator N(phi) at every node.
void steady_operator(const std::vector<double>& phi, const Hamiltonian& ham, double d, const std::vector<double>& src,
                     double h, std::vector<double>& out) {
    const int n = static_cast<int>(phi.size());
    for (int j = 0; j < n; ++j) {
        const double fp = phi[(j + 1) % n], fm = phi[(j + n - 1) % n];
        const double p = (fp - fm) / (2.0 * h);
        const double lap = (fp - 2.0 * phi[j] + fm) / (h * h);
        out[j] = -ham.diffusion(d, p) * lap + ham.value(p) + src[j];
    }
}

/// Rounding level of the spread of N: the central second difference loses
/// about eps max|phi| / h^2 per node.
double roundoff_floor(const std::vector<double>& phi, const std::vector<double>& N, double d, double h) {
    double pm = 0.0, nm = 0.0;
    for (double v : phi) pm = std::max(pm, std::abs(v));
    for (double v : N) nm = std::max(nm, std::abs(v));
    return 4.0 * std::numeric_limits<double>::epsilon() * (4.0 * d * pm / (h * h) + nm);
}

ShearResult finish(ShearResult res, const std::vector<double>& phi) {
    const double mean = pairwise_sum(phi) / static_cast<double>(phi.size());
    for (std::size_t j = 0; j < phi.size(); ++j) res.phi[j] = phi[j] - mean;
    return res;
}

/// Backward Euler with the full Newton linearization,
///   (I/dt + J) dphi = -(N(phi) - mean N),
/// followed by removal of the mean. The pseudo-time step grows geometrically
/// on accepted steps and shrinks on rejected ones; it stays finite so the
/// cyclic system keeps full rank.
ShearResult solve_implicit(const ShearSpec& spec, const ShearOptions& opts, const PeriodicGrid& grid,
                           const Hamiltonian& ham, const std::vector<double>& src) {
    const int n = grid.n();
    const double h = grid.h();
    const double d = spec.d;
    ShearResult res{0.0, ScalarField(grid), 0.0, 0, 0};
    std::vector<double> phi(n, 0.0), N(n), trial(n), trial_N(n);
    steady_operator(phi, ham, d, src, h, N);
    res.residual = spread(N);

    Eigen::SparseLU<detail::SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
    bool analyzed = false;
    std::vector<detail::Triplet> trip;
    trip.reserve(static_cast<std::size_t>(3 * n));
    detail::SparseMatrix J(n, n);
    Eigen::VectorXd rhs(n), delta(n);
    double dt = 4.0 * h;
    constexpr double dt_max = 1e8;

    long step = 0;
    while (res.residual > std::max(opts.tol, roundoff_floor(phi, N, d, h))) {
        if (step >= opts.max_newton)
            throw Error(ErrorKind::NonConvergence, "implicit shear solve stopped after " + std::to_string(step) +
                                                       " steps with spread " + message_number(res.residual));
        const double mean_N = pairwise_sum(N) / n;
        trip.clear();
        for (int j = 0; j < n; ++j) {
            const int jp = (j + 1) % n, jm = (j + n - 1) % n;
            const double p = (phi[jp] - phi[jm]) / (2.0 * h);
            const double lap = (phi[jp] - 2.0 * phi[j] + phi[jm]) / (h * h);
            const double c = ham.diffusion(d, p);
            const double drift = (ham.slope(p) - ham.diffusion_slope(d, p) * lap) / (2.0 * h);
            trip.emplace_back(j, j, 1.0 / dt + 2.0 * c / (h * h));
            trip.emplace_back(j, jp, -c / (h * h) + drift);
            trip.emplace_back(j, jm, -c / (h * h) - drift);
            rhs[j] = -(N[j] - mean_N);
        }
        J.setFromTriplets(trip.begin(), trip.end());
        J.makeCompressed();
        if (!analyzed) {
            lu.analyzePattern(J);
            analyzed = true;
        }
        lu.factorize(J);
        if (lu.info() != Eigen::Success) throw Error(ErrorKind::NonConvergence, "singular implicit shear step");
        delta = lu.solve(rhs);
        ++step;

        const double shift = delta.mean();
        for (int j = 0; j < n; ++j) trial[j] = phi[j] + (delta[j] - shift);
        steady_operator(trial, ham, d, src, h, trial_N);
        const double r = spread(trial_N);
        if (!std::isfinite(r) || r > 4.0 * res.residual) {
            dt *= 0.25;
            if (dt < 1e-12 * h) throw Error(ErrorKind::NonConvergence, "implicit shear step collapsed");
            continue;
        }
        dt = std::min(dt_max, dt * std::clamp(res.residual / std::max(r, 1e-300), 2.0, 10.0));
        std::swap(phi, trial);
        std::swap(N, trial_N);
        res.residual = r;
    }
    res.steps = step;
    res.lambda = pairwise_sum(N) / n;
    return finish(std::move(res), phi);
}

}  // namespace

ShearResult solve_shear(const ShearSpec& spec, const ShearOptions& opts) {
    spec.validate();
    if (!(opts.tol > 0.0)) throw Error(ErrorKind::InvalidArgument, "tolerance must be positive");
    const int n = spec.grid_n != 0 ? spec.grid_n : default_shear_grid_n(spec.d);
    const PeriodicGrid grid = PeriodicGrid::line(n);
    const double h = grid.h();
    const Hamiltonian ham{spec.model, spec.m, spec.n};
    const double src_coef = source_coefficient(spec);

    std::vector<double> src(n);
    for (int j = 0; j < n; ++j) src[j] = src_coef * spec.profile.v(grid.coord(j));

    if (spec.d > 0.0 && opts.scheme == ShearScheme::implicit_newton) return solve_implicit(spec, opts, grid, ham, src);

    ShearResult res{0.0, ScalarField(grid), 0.0, 0, 0};
    std::vector<double> phi(n, 0.0), next(n), p(n), lower(n), diag(n), upper(n), rhs(n);
    detail::CyclicTridiagonal tri(static_cast<std::size_t>(n));
    const bool inviscid = spec.d == 0.0;
    constexpr double lip_floor = 1.0;
    double t = 0.0;

    for (long step = 1;; ++step) {
        double lip = lip_floor;
        double cmin = std::numeric_limits<double>::infinity();
        for (int j = 0; j < n; ++j) {
            p[j] = (phi[(j + 1) % n] - phi[(j + n - 1) % n]) / (2.0 * h);
            lip = std::max(lip, std::abs(ham.slope(p[j])));
            cmin = std::min(cmin, ham.diffusion(spec.d, p[j]));
        }
        const double dt = 0.5 * h / lip;

        if (inviscid) {
            for (int j = 0; j < n; ++j) {
                const double a = (phi[j] - phi[(j + n - 1) % n]) / h;
                const double b = (phi[(j + 1) % n] - phi[j]) / h;
                next[j] = phi[j] - dt * (ham.godunov(a, b) + src[j]);
            }
        } else {
            const bool linearized = lip * h > 2.0 * cmin;
            if (linearized) ++res.linearized_steps;
            const double inv_h2 = 1.0 / (h * h), inv_2h = 0.5 / h;
            for (int j = 0; j < n; ++j) {
                const double c = ham.diffusion(spec.d, p[j]);
                const double hp = ham.value(p[j]);
                lower[j] = -dt * c * inv_h2;
                upper[j] = -dt * c * inv_h2;
                diag[j] = 1.0 + 2.0 * dt * c * inv_h2;
                if (linearized) {
                    const double s = ham.slope(p[j]);
                    lower[j] -= dt * s * inv_2h;
                    upper[j] += dt * s * inv_2h;
                    rhs[j] = phi[j] - dt * (hp - s * p[j] + src[j]);
                } else {
                    rhs[j] = phi[j] - dt * (hp + src[j]);
                }
            }
            tri.solve(lower, diag, upper, rhs, next);
        }
        t += dt;

        double lo = std::numeric_limits<double>::infinity(), hi = -lo, sum = 0.0;
        for (int j = 0; j < n; ++j) {
            const double rate = (next[j] - phi[j]) / dt;
            lo = std::min(lo, rate);
            hi = std::max(hi, rate);
            sum += rate;
        }
        res.residual = hi - lo;
        res.lambda = -sum / n;
        std::swap(phi, next);
        if (!std::isfinite(res.residual))
            throw Error(ErrorKind::NonConvergence, "shear relaxation produced non-finite values");
        // Drop the accumulated mean so phi stays O(1).
        if (step % 256 == 0) {
            const double m = pairwise_sum(phi) / n;
            for (double& v : phi) v -= m;
        }
        if (res.residual <= opts.tol) {
            res.steps = step;
            break;
        }
        if (t >= opts.max_T || step >= opts.max_steps)
            throw Error(ErrorKind::NonConvergence, "shear relaxation stopped at t = " + message_number(t) +
                                                       " with phi_t spread " + message_number(res.residual));
    }
    return finish(std::move(res), phi);
}

SlopeEstimate asymptotic_slope(const ShearSpec& base, const std::vector<double>& A_list, const ShearOptions& opts) {
    if (A_list.size() < 3) throw Error(ErrorKind::InvalidArgument, "asymptotic slope needs at least three A values");
    for (std::size_t k = 0; k < A_list.size(); ++k)
        if (!(A_list[k] > 0.0) || (k > 0 && !(A_list[k] > A_list[k - 1])))
            throw Error(ErrorKind::InvalidArgument, "A_list must be positive and strictly increasing");
    SlopeEstimate est;
    for (double A : A_list) {
        ShearSpec s = base;
        s.A = A;
        const double lambda = solve_shear(s, opts).lambda;
        est.A.push_back(A);
        est.lambda.push_back(lambda);
        est.ratios.push_back(lambda / A);
    }
    const std::size_t k = est.A.size() - 1;
    est.last_ratio = est.ratios[k];
    est.extrapolated = (est.lambda[k] - est.lambda[k - 1]) / (est.A[k] - est.A[k - 1]);
    return est;
}

double transition_point(const ScalarField& phi) {
    const auto& grid = phi.grid();
    const int n = grid.n();
    const double h = grid.h();
    std::vector<double> p(n);
    for (int j = 0; j < n; ++j) p[j] = (phi(j + 1) - phi(j - 1)) / (2.0 * h);
    double best_jump = -1.0, where = std::numeric_limits<double>::quiet_NaN();
    for (int j = 0; j < n; ++j) {
        const double a = p[j], b = p[(j + 1) % n];
        if (a < 0.0 && b >= 0.0 && b - a > best_jump) {
            best_jump = b - a;
            where = grid.coord(j) + 0.5 * h;
        }
    }
    return where;
}

JkmCheck jkm_limit_check(const ShearProfile& profile, const std::vector<double>& d_list, int grid_n,
                         const ShearOptions& opts) {
    if (profile.is_constant()) throw Error(ErrorKind::DegenerateProfile, "profile is constant");
    if (std::abs(profile.max()) > 1e-10) throw Error(ErrorKind::InvalidArgument, "jkm limit check needs max v = 0");
    const auto curv = profile.curvature_at_maxima();
    const auto& ys = profile.maximizers();
    if (curv.empty()) throw Error(ErrorKind::DegenerateProfile, "profile has no isolated maximizer");
    for (double c : curv)
        if (c < 1e-8) throw Error(ErrorKind::DegenerateProfile, "maximizer with vanishing curvature");

    JkmCheck out;
    const auto it = std::min_element(curv.begin(), curv.end());
    out.target = -std::sqrt(*it);
    out.selected_maximizer = ys[static_cast<std::size_t>(it - curv.begin())];
    for (double d : d_list) {
        ShearSpec s;
        s.model = ShearModel::quadratic_jkm;
        s.d = d;
        s.profile = profile;
        s.grid_n = grid_n;
        const ShearResult r = solve_shear(s, opts);
        out.rows.push_back({d, r.lambda, r.lambda / d, transition_point(r.phi)});
    }
    return out;
}

QuadraticLaw d_sweep_quadratic_law(const ShearProfile& profile, double m, const std::vector<double>& d_list,
                                   const ShearOptions& opts) {
    const double lambda0 = m >= 0.0 ? m * profile.max() : m * profile.min();
    if (std::abs(lambda0) > 1e-10)
        throw Error(ErrorKind::InvalidArgument, "quadratic law needs max m v = 0 so that lambda_bar(0) = 0");
    QuadraticLaw out;
    for (double d : d_list) {
        ShearSpec s;
        s.model = ShearModel::limit_problem;
        s.m = m;
        s.d = d;
        s.profile = profile;
        const double lb = solve_shear(s, opts).lambda;
        out.rows.push_back({d, lambda0 - lb, (lambda0 - lb) / (d * d)});
    }
    // Least-squares slope of log(-lambda_bar) against log d.
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int count = 0;
    for (const auto& r : out.rows) {
        if (!(r.neg_lambda_bar > 0.0)) continue;
        const double x = std::log(r.d), y = std::log(r.neg_lambda_bar);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++count;
    }
    out.fitted_power = count >= 2 ? (count * sxy - sx * sy) / (count * sxx - sx * sx)
                                  : std::numeric_limits<double>::quiet_NaN();
    return out;
}

}  // namespace gflame
