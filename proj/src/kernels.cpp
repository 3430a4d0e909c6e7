#include "gflame/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "gflame/error.hpp"

namespace gflame {

double VelocitySamples::max_abs() const { return std::max(vx.max_abs(), vy.max_abs()); }

namespace {

/// Periodic neighbour offsets along one axis, precomputed to avoid modulo in loops.
struct Neighbours {
    std::vector<int> m1, m2, p1, p2;

    explicit Neighbours(const PeriodicGrid& g) : m1(g.n()), m2(g.n()), p1(g.n()), p2(g.n()) {
        for (int k = 0; k < g.n(); ++k) {
            m1[k] = g.wrap(k - 1);
            m2[k] = g.wrap(k - 2);
            p1[k] = g.wrap(k + 1);
            p2[k] = g.wrap(k + 2);
        }
    }
};

struct Diffs {
    double inv_h;
    double inv_2h;
    int order;

    /// Backward (a) and forward (b) one-sided differences plus the slope.
    void one_sided(double c, double m1, double m2, double p1, double p2, double slope, double& a,
                   double& b) const {
        if (order == 1) {
            a = (c - m1) * inv_h + slope;
            b = (p1 - c) * inv_h + slope;
        } else {
            a = (3.0 * c - 4.0 * m1 + m2) * inv_2h + slope;
            b = (-3.0 * c + 4.0 * p1 - p2) * inv_2h + slope;
        }
    }
};

inline double godunov_axis(double a, double b) {
    const double l = a > 0.0 ? a : 0.0;
    const double r = b < 0.0 ? b : 0.0;
    return std::max(l * l, r * r);
}

inline double upwind_axis(double v, double a, double b) { return v > 0.0 ? v * a : v * b; }

template <bool Par, class RowFn>
void for_rows(int rows, RowFn&& fn) {
    if constexpr (Par) {
#pragma omp parallel for schedule(static)
        for (int i = 0; i < rows; ++i) fn(i);
    } else {
        for (int i = 0; i < rows; ++i) fn(i);
    }
}

void check_order(int order) {
    if (order != 1 && order != 2) throw Error(ErrorKind::InvalidArgument, "difference order must be 1 or 2");
}

void check_same_grid(const ScalarField& a, const ScalarField& b) {
    if (!(a.grid() == b.grid())) throw Error(ErrorKind::InvalidArgument, "fields live on different grids");
}

/// Visits every node with its one-sided differences along each axis.
/// fn(k, ax, bx, ay, by); in 1D ay = by = 0.
template <bool Par, class NodeFn>
void visit_one_sided(const ScalarField& f, Vec2 slope, int order, NodeFn&& fn) {
    check_order(order);
    const auto& g = f.grid();
    const int n = g.n();
    const Neighbours nb(g);
    const Diffs df{1.0 / g.h(), 0.5 / g.h(), order};
    const double* u = f.values().data();
    if (g.dims() == 1) {
        for (int j = 0; j < n; ++j) {
            double ax, bx;
            df.one_sided(u[j], u[nb.m1[j]], u[nb.m2[j]], u[nb.p1[j]], u[nb.p2[j]], slope.x, ax, bx);
            fn(static_cast<std::size_t>(j), ax, bx, 0.0, 0.0);
        }
        return;
    }
    for_rows<Par>(n, [&](int i) {
        const double* r0 = u + static_cast<std::size_t>(i) * n;
        const double* rm1 = u + static_cast<std::size_t>(nb.m1[i]) * n;
        const double* rm2 = u + static_cast<std::size_t>(nb.m2[i]) * n;
        const double* rp1 = u + static_cast<std::size_t>(nb.p1[i]) * n;
        const double* rp2 = u + static_cast<std::size_t>(nb.p2[i]) * n;
        for (int j = 0; j < n; ++j) {
            double ax, bx, ay, by;
            df.one_sided(r0[j], rm1[j], rm2[j], rp1[j], rp2[j], slope.x, ax, bx);
            df.one_sided(r0[j], r0[nb.m1[j]], r0[nb.m2[j]], r0[nb.p1[j]], r0[nb.p2[j]], slope.y, ay, by);
            fn(static_cast<std::size_t>(i) * n + j, ax, bx, ay, by);
        }
    });
}

/// Visits every node with its central differences (slope included).
template <bool Par, class NodeFn>
void visit_central(const ScalarField& f, Vec2 slope, NodeFn&& fn) {
    const auto& g = f.grid();
    const int n = g.n();
    const Neighbours nb(g);
    const double inv_2h = 0.5 / g.h();
    const double* u = f.values().data();
    if (g.dims() == 1) {
        for (int j = 0; j < n; ++j) fn(static_cast<std::size_t>(j), (u[nb.p1[j]] - u[nb.m1[j]]) * inv_2h + slope.x, 0.0);
        return;
    }
    for_rows<Par>(n, [&](int i) {
        const double* r0 = u + static_cast<std::size_t>(i) * n;
        const double* rm1 = u + static_cast<std::size_t>(nb.m1[i]) * n;
        const double* rp1 = u + static_cast<std::size_t>(nb.p1[i]) * n;
        for (int j = 0; j < n; ++j) {
            const double gx = (rp1[j] - rm1[j]) * inv_2h + slope.x;
            const double gy = (r0[nb.p1[j]] - r0[nb.m1[j]]) * inv_2h + slope.y;
            fn(static_cast<std::size_t>(i) * n + j, gx, gy);
        }
    });
}

template <bool Par>
void laplacian_impl(const ScalarField& f, ScalarField& out) {
    check_same_grid(f, out);
    const auto& g = f.grid();
    const int n = g.n();
    const Neighbours nb(g);
    const double inv_h2 = 1.0 / (g.h() * g.h());
    const double* u = f.values().data();
    double* o = out.values().data();
    if (g.dims() == 1) {
        for (int j = 0; j < n; ++j) o[j] = (u[nb.p1[j]] - 2.0 * u[j] + u[nb.m1[j]]) * inv_h2;
        return;
    }
    for_rows<Par>(n, [&](int i) {
        const double* r0 = u + static_cast<std::size_t>(i) * n;
        const double* rm1 = u + static_cast<std::size_t>(nb.m1[i]) * n;
        const double* rp1 = u + static_cast<std::size_t>(nb.p1[i]) * n;
        double* oi = o + static_cast<std::size_t>(i) * n;
        for (int j = 0; j < n; ++j)
            oi[j] = (rp1[j] + rm1[j] + r0[nb.p1[j]] + r0[nb.m1[j]] - 4.0 * r0[j]) * inv_h2;
    });
}

template <bool Par>
void godunov_impl(const ScalarField& f, Vec2 slope, int order, ScalarField& out) {
    check_same_grid(f, out);
    double* o = out.values().data();
    visit_one_sided<Par>(f, slope, order, [&](std::size_t k, double ax, double bx, double ay, double by) {
        o[k] = std::sqrt(godunov_axis(ax, bx) + godunov_axis(ay, by));
    });
}

template <bool Par>
void upwind_impl(const ScalarField& f, const VelocitySamples& v, Vec2 slope, int order, ScalarField& out) {
    check_same_grid(f, out);
    check_same_grid(f, v.vx);
    double* o = out.values().data();
    const double* vx = v.vx.values().data();
    const double* vy = v.vy.values().data();
    const bool two_d = f.grid().dims() == 2;
    visit_one_sided<Par>(f, slope, order, [&](std::size_t k, double ax, double bx, double ay, double by) {
        o[k] = upwind_axis(vx[k], ax, bx) + (two_d ? upwind_axis(vy[k], ay, by) : 0.0);
    });
}

template <bool Par>
void hamiltonian_impl(const ScalarField& f, const VelocitySamples& v, Vec2 slope, double s_l, int order,
                      ScalarField& out) {
    check_same_grid(f, out);
    check_same_grid(f, v.vx);
    double* o = out.values().data();
    const double* vx = v.vx.values().data();
    const double* vy = v.vy.values().data();
    const bool two_d = f.grid().dims() == 2;
    visit_one_sided<Par>(f, slope, order, [&](std::size_t k, double ax, double bx, double ay, double by) {
        const double adv = upwind_axis(vx[k], ax, bx) + (two_d ? upwind_axis(vy[k], ay, by) : 0.0);
        o[k] = s_l * std::sqrt(godunov_axis(ax, bx) + godunov_axis(ay, by)) + adv;
    });
}

template <bool Par>
void central_gradient_impl(const ScalarField& f, CentralGradient& out) {
    check_same_grid(f, out.gx);
    check_same_grid(f, out.gy);
    double* gx = out.gx.values().data();
    double* gy = out.gy.values().data();
    visit_central<Par>(f, Vec2{}, [&](std::size_t k, double a, double b) {
        gx[k] = a;
        gy[k] = b;
    });
}

template <bool Par>
void central_grad_mag_impl(const ScalarField& f, Vec2 slope, double delta, ScalarField& out) {
    check_same_grid(f, out);
    double* o = out.values().data();
    const double d2 = delta * delta;
    visit_central<Par>(f, slope, [&](std::size_t k, double a, double b) { o[k] = std::sqrt(a * a + b * b + d2); });
}

template <bool Par>
double mean_impl(const ScalarField& f) {
    const auto& g = f.grid();
    const int rows = g.dims() == 1 ? 1 : g.n();
    const std::size_t len = g.dims() == 1 ? f.size() : static_cast<std::size_t>(g.n());
    std::vector<double> sums(rows);
    const auto values = f.values();
    for_rows<Par>(rows, [&](int i) { sums[i] = pairwise_sum(values.subspan(static_cast<std::size_t>(i) * len, len)); });
    return pairwise_sum(sums) / static_cast<double>(f.size());
}

}  // namespace

#define GFLAME_DEFINE_KERNELS(NS, PAR)                                                                         \
    namespace NS {                                                                                             \
    void laplacian_into(const ScalarField& f, ScalarField& out) { laplacian_impl<PAR>(f, out); }               \
    void godunov_grad_mag_into(const ScalarField& f, Vec2 slope, int order, ScalarField& out) {               \
        godunov_impl<PAR>(f, slope, order, out);                                                               \
    }                                                                                                          \
    void upwind_advect_into(const ScalarField& f, const VelocitySamples& v, Vec2 slope, int order,            \
                            ScalarField& out) {                                                                \
        upwind_impl<PAR>(f, v, slope, order, out);                                                             \
    }                                                                                                          \
    void hamiltonian_into(const ScalarField& f, const VelocitySamples& v, Vec2 slope, double s_l, int order,   \
                          ScalarField& out) {                                                                  \
        hamiltonian_impl<PAR>(f, v, slope, s_l, order, out);                                                   \
    }                                                                                                          \
    void central_gradient_into(const ScalarField& f, CentralGradient& out) { central_gradient_impl<PAR>(f, out); } \
    void central_grad_mag_into(const ScalarField& f, Vec2 slope, double delta, ScalarField& out) {            \
        central_grad_mag_impl<PAR>(f, slope, delta, out);                                                      \
    }                                                                                                          \
    double mean(const ScalarField& f) { return mean_impl<PAR>(f); }                                            \
    }

GFLAME_DEFINE_KERNELS(reference, false)
GFLAME_DEFINE_KERNELS(parallel, true)
#undef GFLAME_DEFINE_KERNELS

ScalarField laplacian(const ScalarField& f) {
    ScalarField out(f.grid());
    parallel::laplacian_into(f, out);
    return out;
}

ScalarField godunov_grad_mag(const ScalarField& f, Vec2 slope, int order) {
    ScalarField out(f.grid());
    parallel::godunov_grad_mag_into(f, slope, order, out);
    return out;
}

ScalarField upwind_advect(const ScalarField& f, const VelocitySamples& v, Vec2 slope, int order) {
    ScalarField out(f.grid());
    parallel::upwind_advect_into(f, v, slope, order, out);
    return out;
}

CentralGradient central_gradient(const ScalarField& f) {
    CentralGradient out{ScalarField(f.grid()), ScalarField(f.grid())};
    parallel::central_gradient_into(f, out);
    return out;
}

ScalarField central_grad_mag(const ScalarField& f, Vec2 slope, double delta) {
    ScalarField out(f.grid());
    parallel::central_grad_mag_into(f, slope, delta, out);
    return out;
}

int kernel_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

}  // namespace gflame
