#include <doctest.h>

#include <cmath>
#include <random>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "gflame/flows.hpp"
#include "gflame/kernels.hpp"
#include "oracles.hpp"

using namespace gflame;
using oracle::pi;

namespace {

ScalarField random_field(const PeriodicGrid& g, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    ScalarField f(g);
    for (std::size_t k = 0; k < f.size(); ++k) f[k] = u(rng);
    return f;
}

bool identical(const ScalarField& a, const ScalarField& b) {
    for (std::size_t k = 0; k < a.size(); ++k)
        if (a[k] != b[k]) return false;
    return true;
}

}  // namespace

TEST_CASE("godunov gradient is exact for affine data") {
    const auto g = PeriodicGrid::square(16);
    const ScalarField c(g, 7.0);
    const auto m = godunov_grad_mag(c, {1.0, 0.0});
    CHECK(m.min() == doctest::Approx(1.0));
    CHECK(m.max() == doctest::Approx(1.0));
    CHECK(godunov_grad_mag(c, {3.0, -4.0}, 2).max() == doctest::Approx(5.0));
    CHECK(godunov_grad_mag(ScalarField(g)).max_abs() == 0.0);
}

TEST_CASE("godunov selection at kinks of |sin| on a 16-grid") {
    const auto g = PeriodicGrid::square(16);
    const double h = g.h();
    const auto up = ScalarField::sample(g, [](double x, double) { return std::abs(std::sin(2.0 * pi * x)); });
    const auto down = ScalarField::sample(g, [](double x, double) { return -std::abs(std::sin(2.0 * pi * x)); });
    const auto mu = godunov_grad_mag(up);
    const auto md = godunov_grad_mag(down);
    // Nodes x1 = -1/2 and 0 are the kinks (i = 0 and 8).
    const double one_sided = std::sin(2.0 * pi * h) / h;
    for (int i : {0, 8}) {
        // Local minimum: [D-, D+] brackets 0, so the outward scheme picks 0.
        CHECK(mu(i, 3) == doctest::Approx(0.0));
        // Local maximum: the one-sided slope of the adjacent branch.
        CHECK(md(i, 3) == doctest::Approx(one_sided).epsilon(1e-12));
    }
    // Away from kinks the upwind one-sided slope of the smooth branch.
    const double x2 = g.coord(2), x1 = g.coord(1);
    const double back = (std::abs(std::sin(2.0 * pi * x2)) - std::abs(std::sin(2.0 * pi * x1))) / h;
    const double fwd = (std::abs(std::sin(2.0 * pi * g.coord(3))) - std::abs(std::sin(2.0 * pi * x2))) / h;
    const double expect = std::sqrt(std::max(std::pow(std::max(back, 0.0), 2), std::pow(std::min(fwd, 0.0), 2)));
    CHECK(mu(2, 0) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("upwind advection") {
    const auto g = PeriodicGrid::square(32);
    const auto f = ScalarField::sample(g, [](double x, double) { return std::sin(2.0 * pi * x); });
    const VelocitySamples zero(g);
    CHECK(upwind_advect(f, zero).max_abs() == 0.0);

    VelocitySamples v(ScalarField(g, 1.0), ScalarField(g, -2.0));
    CHECK(upwind_advect(ScalarField(g, 4.0), v).max_abs() == 0.0);

    double err[2];
    for (int r = 0; r < 2; ++r) {
        const auto gr = PeriodicGrid::square(64 << r);
        const auto fr = ScalarField::sample(gr, [](double x, double) { return std::sin(2.0 * pi * x); });
        VelocitySamples vr(ScalarField(gr, 1.0), ScalarField(gr, 0.0));
        const auto a = upwind_advect(fr, vr);
        double e = 0.0;
        for (int i = 0; i < gr.n(); ++i)
            e = std::max(e, std::abs(a(i, 0) - 2.0 * pi * std::cos(2.0 * pi * gr.coord(i))));
        err[r] = e;
    }
    CHECK(err[0] / err[1] == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("second-order one-sided differences converge at second order") {
    double err[2];
    for (int r = 0; r < 2; ++r) {
        const auto gr = PeriodicGrid::square(64 << r);
        const auto fr = ScalarField::sample(gr, [](double x, double) { return std::sin(2.0 * pi * x); });
        VelocitySamples vr(ScalarField(gr, 1.0), ScalarField(gr, 0.0));
        const auto a = upwind_advect(fr, vr, {}, 2);
        double e = 0.0;
        for (int i = 0; i < gr.n(); ++i)
            e = std::max(e, std::abs(a(i, 0) - 2.0 * pi * std::cos(2.0 * pi * gr.coord(i))));
        err[r] = e;
    }
    CHECK(err[0] / err[1] == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("central gradient and regularized magnitude") {
    const auto g = PeriodicGrid::square(64);
    const auto f = ScalarField::sample(g, [](double x, double y) { return std::sin(2.0 * pi * x) * std::cos(2.0 * pi * y); });
    const auto grad = central_gradient(f);
    const double k = std::sin(2.0 * pi * g.h()) / g.h();
    for (int i = 0; i < g.n(); i += 7)
        for (int j = 0; j < g.n(); j += 5) {
            const auto p = g.point(i, j);
            CHECK(grad.gx(i, j) == doctest::Approx(k * std::cos(2.0 * pi * p.x) * std::cos(2.0 * pi * p.y)).epsilon(1e-12));
            CHECK(grad.gy(i, j) == doctest::Approx(-k * std::sin(2.0 * pi * p.x) * std::sin(2.0 * pi * p.y)).epsilon(1e-12));
        }
    const auto m = central_grad_mag(ScalarField(g), {0.0, 0.0}, 0.5);
    CHECK(m.min() == doctest::Approx(0.5));
}

TEST_CASE("reference and parallel kernels agree bit for bit") {
#ifdef _OPENMP
    const int saved = omp_get_max_threads();
    omp_set_num_threads(4);
#endif
    const auto g = PeriodicGrid::square(96);
    const auto f = random_field(g, 7);
    const auto v = FlowField::cellular(40.0).sample(g);
    const Vec2 P{1.0, 0.25};
    for (int order : {1, 2}) {
        ScalarField a(g), b(g);
        reference::godunov_grad_mag_into(f, P, order, a);
        parallel::godunov_grad_mag_into(f, P, order, b);
        CHECK(identical(a, b));
        reference::upwind_advect_into(f, v, P, order, a);
        parallel::upwind_advect_into(f, v, P, order, b);
        CHECK(identical(a, b));
        reference::hamiltonian_into(f, v, P, 1.0, order, a);
        parallel::hamiltonian_into(f, v, P, 1.0, order, b);
        CHECK(identical(a, b));
    }
    ScalarField a(g), b(g);
    reference::laplacian_into(f, a);
    parallel::laplacian_into(f, b);
    CHECK(identical(a, b));
    reference::central_grad_mag_into(f, P, 1e-8, a);
    parallel::central_grad_mag_into(f, P, 1e-8, b);
    CHECK(identical(a, b));
    CentralGradient ca{ScalarField(g), ScalarField(g)}, cb{ScalarField(g), ScalarField(g)};
    reference::central_gradient_into(f, ca);
    parallel::central_gradient_into(f, cb);
    CHECK(identical(ca.gx, cb.gx));
    CHECK(identical(ca.gy, cb.gy));
    CHECK(reference::mean(f) == parallel::mean(f));
#ifdef _OPENMP
    omp_set_num_threads(saved);
#endif
}

TEST_CASE("fused hamiltonian equals its parts") {
    const auto g = PeriodicGrid::square(32);
    const auto f = random_field(g, 3);
    const auto v = FlowField::cellular(5.0).sample(g);
    const Vec2 P{0.6, 0.8};
    ScalarField fused(g);
    parallel::hamiltonian_into(f, v, P, 2.0, 1, fused);
    const auto gm = godunov_grad_mag(f, P, 1);
    const auto adv = upwind_advect(f, v, P, 1);
    for (std::size_t k = 0; k < g.size(); ++k) CHECK(fused[k] == doctest::Approx(2.0 * gm[k] + adv[k]).epsilon(1e-13));
}

TEST_CASE("one-dimensional kernels") {
    const auto g = PeriodicGrid::line(128);
    const auto f = ScalarField::sample(g, [](double y) { return std::cos(2.0 * pi * y); });
    const auto L = laplacian(f);
    const double k = 4.0 * std::pow(std::sin(pi * g.h()) / g.h(), 2);
    for (int i = 0; i < g.n(); ++i) CHECK(L(i) == doctest::Approx(-k * f(i)).epsilon(1e-10));
}
