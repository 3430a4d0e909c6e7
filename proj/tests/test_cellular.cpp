#include <doctest.h>

#include <cmath>

#include "gflame/cellular.hpp"
#include "gflame/error.hpp"

using namespace gflame;

namespace {

CellProblemSpec cell(double A, double d, Vec2 P = {1.0, 0.0}) {
    CellProblemSpec s;
    s.P = P;
    s.d = d;
    s.flow = A > 0.0 ? FlowField::cellular(A) : FlowField::zero();
    return s;
}

double steady_hbar(double A, double d, int n, Vec2 P = {1.0, 0.0}) {
    return solve_steady_iteration(cell(A, d, P), PeriodicGrid::square(n)).result.hbar;
}

ErrorKind kind_of(auto&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("no exception");
    return ErrorKind::InvalidArgument;
}

}  // namespace

TEST_CASE("spec validation") {
    CHECK(kind_of([] { cell(1.0, 1.0, {0.0, 0.0}).validate(); }) == ErrorKind::InvalidArgument);
    CHECK(kind_of([] { cell(1.0, -1.0).validate(); }) == ErrorKind::InvalidArgument);
    auto s = cell(1.0, 1.0);
    s.s_l = 0.0;
    CHECK(kind_of([&] { s.validate(); }) == ErrorKind::InvalidArgument);
    CHECK(cell(1.0, 0.0).model() == CellModel::inviscid);
    CHECK(cell(1.0, 0.1).model() == CellModel::viscous);
}

TEST_CASE("no flow gives the laminar speed") {
    const auto g = PeriodicGrid::square(32);
    const auto tm = solve_time_marching(cell(0.0, 0.5), g);
    CHECK(tm.result.hbar == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(tm.w.max_abs() < 1e-10);

    const auto st = solve_steady_iteration(cell(0.0, 1.0), g);
    CHECK(st.result.hbar == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(st.result.steps <= 1);

    const auto inv = solve_inviscid_reference(cell(0.0, 0.0), g);
    CHECK(inv.hbar == doctest::Approx(1.0).epsilon(1e-8));

    auto dirn = cell(0.0, 0.3, {3.0, 4.0});
    CHECK(solve_time_marching(dirn, g).result.hbar == doctest::Approx(5.0).epsilon(1e-8));
}

TEST_CASE("steady iteration reproduces the d = 1 and d = 0.5 reference values on 256^2") {
    CHECK(steady_hbar(32.0, 1.0, 256) == doctest::Approx(1.2701).epsilon(0.03));
    CHECK(steady_hbar(64.0, 0.5, 256) == doctest::Approx(1.5058).epsilon(0.03));
}

TEST_CASE("time marching and steady iteration agree") {
    const auto g = PeriodicGrid::square(128);
    const auto spec = cell(32.0, 1.0);
    const double tm = solve_time_marching(spec, g).result.hbar;
    const double st = solve_steady_iteration(spec, g).result.hbar;
    CHECK(std::abs(tm - st) / st <= 0.005);
}

TEST_CASE("homogeneity of degree one in P") {
    const double base = steady_hbar(32.0, 1.0, 64);
    for (double t : {2.0, 3.0}) CHECK(steady_hbar(32.0, 1.0, 64, {t, 0.0}) == doctest::Approx(t * base).epsilon(0.005));

    const auto g = PeriodicGrid::square(64);
    const double tm1 = solve_time_marching(cell(32.0, 1.0), g).result.hbar;
    const double tm2 = solve_time_marching(cell(32.0, 1.0, {2.0, 0.0}), g).result.hbar;
    CHECK(tm2 == doctest::Approx(2.0 * tm1).epsilon(0.005));
}

TEST_CASE("exchange symmetry of the cellular flow") {
    CHECK(steady_hbar(48.0, 0.5, 64, {0.0, 1.0}) == doctest::Approx(steady_hbar(48.0, 0.5, 64)).epsilon(0.01));
}

TEST_CASE("lower bound and monotone trends along computed sweeps") {
    const int n = 64;
    double prev = 0.0;
    for (double A : {0.0, 8.0, 16.0, 32.0, 64.0}) {
        const auto sol = solve_steady_iteration(cell(A, 0.5, {1.0, 0.0}), PeriodicGrid::square(n));
        CHECK(sol.result.hbar >= 1.0 - 1e-8);
        CHECK(sol.result.residual <= 1e-8);
        CHECK(std::abs(sol.w.mean()) <= 1e-10);
        CHECK(sol.result.hbar >= prev);
        prev = sol.result.hbar;
    }
    prev = 1e300;
    for (double d : {0.1, 0.25, 0.5, 1.0}) {
        const double h = steady_hbar(32.0, d, n);
        CHECK(h <= prev);
        prev = h;
    }
}

TEST_CASE("inviscid reference: increasing in A and above the viscous speed") {
    const auto g = PeriodicGrid::square(64);
    double prev = 1.0;
    double at32 = 0.0;
    for (double A : {8.0, 16.0, 32.0}) {
        const auto r = solve_inviscid_reference(cell(A, 0.0), g, 1e-6);
        CHECK(r.hbar > prev);
        CHECK(r.residual <= 1e-6);
        prev = r.hbar;
        at32 = r.hbar;
    }
    CHECK(at32 >= steady_hbar(32.0, 0.25, 64));
    CHECK(kind_of([&] { (void)solve_inviscid_reference(cell(8.0, 0.1), g); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("time marching bookkeeping") {
    const auto g = PeriodicGrid::square(32);
    const auto spec = cell(16.0, 0.5);
    const auto sol = solve_time_marching(spec, g);
    CHECK(sol.result.residual <= 1e-8);
    CHECK(std::abs(sol.w.mean()) <= 1e-10);
    CHECK(sol.result.grid_n == 32);
    CHECK_FALSE(sol.result.history.empty());
    for (std::size_t k = 1; k < sol.result.history.size(); ++k)
        CHECK(sol.result.history[k].t > sol.result.history[k - 1].t);

    // Explicit and implicit diffusion approach the same steady state.
    TimeMarchingOptions explicit_opts;
    explicit_opts.implicit_diffusion = false;
    CHECK(solve_time_marching(spec, g, explicit_opts).result.hbar == doctest::Approx(sol.result.hbar).epsilon(1e-6));
}

TEST_CASE("error paths") {
    const auto g = PeriodicGrid::square(32);
    CHECK(kind_of([&] { (void)solve_steady_iteration(cell(8.0, 0.05), g); }) == ErrorKind::DiffusionTooSmall);

    TimeMarchingOptions opts;
    opts.implicit_diffusion = false;
    opts.forced_dt = 10.0 * time_marching_dt(cell(8.0, 0.5), g, false);
    CHECK(kind_of([&] { (void)solve_time_marching(cell(8.0, 0.5), g, opts); }) == ErrorKind::CFLViolation);

    TimeMarchingOptions tight;
    tight.max_T = 1e-3;
    CHECK(kind_of([&] { (void)solve_time_marching(cell(8.0, 0.5), g, tight); }) == ErrorKind::NonConvergence);

    SteadyOptions few;
    few.max_iters = 1;
    CHECK(kind_of([&] { (void)solve_steady_iteration(cell(64.0, 0.2), g, few); }) == ErrorKind::NonConvergence);
}

TEST_CASE("the steady residual vanishes at the returned corrector") {
    const auto sol = solve_steady_iteration(cell(24.0, 0.5), PeriodicGrid::square(64));
    const auto r = steady_residual(cell(24.0, 0.5), sol.w);
    CHECK(r.max() - r.min() <= 1e-8);
    CHECK(r.mean() == doctest::Approx(sol.result.hbar).epsilon(1e-9));
}

TEST_CASE("refinement rule") {
    CHECK(refined_grid_n(0.0, 1.0) == 128);
    CHECK(refined_grid_n(128.0, 1.0) == 128);
    CHECK(refined_grid_n(768.0, 1.0) == 256);   // ceil(8 sqrt 768) = 222
    CHECK(refined_grid_n(768.0, 0.25) == 512);  // 444
    CHECK(refined_grid_n(768.0, 0.05, 4096) == 1024);
    CHECK(refined_grid_n(768.0, 0.05) == 512);
    CHECK(refined_grid_n(64.0, 0.01, 4096) == refined_grid_n(64.0, 0.05, 4096));
}

TEST_CASE("diagnostics without flow") {
    const auto g = PeriodicGrid::square(32);
    const auto spec = cell(0.0, 1.0);
    const auto rep = diagnostics(spec, ScalarField(g), 1.0);
    CHECK(rep.l1_grad_total == doctest::Approx(1.0));
    CHECK(rep.streamline_osc == 0.0);
    CHECK(rep.weighted_h1 == doctest::Approx(0.25).epsilon(1e-10));  // integral of H^2
    bool has_one = false;
    for (auto [eps, mass] : rep.layer_mass)
        if (eps == 1.0) {
            has_one = true;
            CHECK(mass == doctest::Approx(rep.l1_grad_total));
        }
    CHECK(has_one);
}

TEST_CASE("diagnostics at A = 64, d = 1") {
    const auto spec = cell(64.0, 1.0);
    const auto sol = solve_steady_iteration(spec, PeriodicGrid::square(128));
    DiagnosticsOptions opts;
    opts.with_transport = true;
    const auto rep = diagnostics(spec, sol.w, sol.result.hbar, opts);
    CHECK(rep.l1_grad_total == doctest::Approx(1.0).epsilon(0.02));
    CHECK(rep.weighted_h1 >= 0.0);
    CHECK(rep.streamline_osc >= 0.0);
    CHECK(std::isfinite(rep.weighted_h1));
    double prev = 0.0;
    for (auto [eps, mass] : rep.layer_mass) {
        CHECK(mass >= prev);
        prev = mass;
        if (eps == 1.0) CHECK(mass == doctest::Approx(rep.l1_grad_total));
    }
    REQUIRE(rep.beta_over_lambda);
    CHECK(*rep.beta_over_lambda > 0.25);
    CHECK(*rep.beta_over_lambda < 4.0);
    for (const auto& p : rep.cell_profiles) {
        CHECK(p.bin_center.size() == p.bin_mean.size());
        CHECK(p.violations >= 0);
    }
    CHECK_THROWS_AS(diagnostics(spec, sol.w, 0.0), Error);
}
