#include <doctest.h>

#include <cmath>
#include <sstream>

#include "gflame/error.hpp"
#include "gflame/grid.hpp"
#include "gflame/kernels.hpp"
#include "oracles.hpp"

using namespace gflame;
using oracle::pi;

namespace {

double max_abs_diff(const ScalarField& a, const ScalarField& b) {
    double e = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) e = std::max(e, std::abs(a[k] - b[k]));
    return e;
}

ScalarField smooth_2d(const PeriodicGrid& g) {
    return ScalarField::sample(g, [](double x, double y) {
        return std::sin(2.0 * pi * x) * std::cos(4.0 * pi * y) + 0.3 * std::cos(2.0 * pi * (x + 2.0 * y));
    });
}

}  // namespace

TEST_CASE("grid construction and index wrapping") {
    const auto g = PeriodicGrid::square(16);
    CHECK(g.dims() == 2);
    CHECK(g.size() == 256);
    CHECK(g.h() == doctest::Approx(1.0 / 16));
    CHECK(g.coord(0) == -0.5);
    CHECK(g.index(-1, 0) == g.index(15, 0));
    CHECK(g.index(16, 17) == g.index(0, 1));
    CHECK(g.wrap(-33) == 15);

    const auto l = PeriodicGrid::line(8);
    CHECK(l.dims() == 1);
    CHECK(l.coord(0) == 0.0);
    CHECK(l.size() == 8);

    CHECK_THROWS_AS(PeriodicGrid::square(4), Error);
    CHECK_THROWS_AS(PeriodicGrid::line(7), Error);
}

TEST_CASE("field sampling rejects the wrong arity") {
    CHECK_THROWS_AS(ScalarField::sample(PeriodicGrid::line(8), [](double x, double y) { return x + y; }), Error);
    CHECK_THROWS_AS(ScalarField::sample(PeriodicGrid::square(8), [](double x) { return x; }), Error);
}

TEST_CASE("laplacian of a constant vanishes") {
    const auto g = PeriodicGrid::square(32);
    const ScalarField f(g, 3.25);
    CHECK(laplacian(f).max_abs() == 0.0);
}

TEST_CASE("laplacian converges at second order") {
    double err[2];
    for (int r = 0; r < 2; ++r) {
        const auto g = PeriodicGrid::square(64 << r);
        const auto f = ScalarField::sample(g, [](double x, double) { return std::sin(2.0 * pi * x); });
        const auto exact =
            ScalarField::sample(g, [](double x, double) { return -4.0 * pi * pi * std::sin(2.0 * pi * x); });
        err[r] = max_abs_diff(laplacian(f), exact);
    }
    CHECK(err[0] / err[1] == doctest::Approx(4.0).epsilon(0.02));

    const auto g = PeriodicGrid::square(256);
    const auto f = ScalarField::sample(g, [](double x, double) { return std::sin(2.0 * pi * x); });
    const auto exact = ScalarField::sample(g, [](double x, double) { return -4.0 * pi * pi * std::sin(2.0 * pi * x); });
    CHECK(max_abs_diff(laplacian(f), exact) <= 1e-3 * 4.0 * pi * pi);
}

TEST_CASE("laplacian of an x2-only field is independent of x1") {
    const auto g = PeriodicGrid::square(32);
    const auto f = ScalarField::sample(g, [](double, double y) { return std::exp(std::cos(2.0 * pi * y)); });
    const auto L = laplacian(f);
    for (int i = 1; i < g.n(); ++i)
        for (int j = 0; j < g.n(); ++j) CHECK(L(i, j) == L(0, j));
}

TEST_CASE("discrete integration by parts and mean preservation") {
    const auto g = PeriodicGrid::square(48);
    const auto f = smooth_2d(g);
    const auto q = ScalarField::sample(g, [](double x, double y) { return std::exp(std::sin(2.0 * pi * x) * std::cos(2.0 * pi * y)); });
    ScalarField a = laplacian(f), b = laplacian(q);
    for (std::size_t k = 0; k < a.size(); ++k) {
        a[k] *= q[k];
        b[k] *= f[k];
    }
    CHECK(std::abs(integrate(a) - integrate(b)) <= 1e-11);
    CHECK(std::abs(integrate(laplacian(q))) <= 1e-11);
}

TEST_CASE("full-wrap index shifts leave operators bit-identical") {
    const auto g = PeriodicGrid::square(24);
    const auto f = smooth_2d(g);
    const auto s = f.shifted(24, -48);
    const auto a = laplacian(f), b = laplacian(s);
    const auto c = godunov_grad_mag(f, {1.0, 0.5}, 2), e = godunov_grad_mag(s, {1.0, 0.5}, 2);
    for (std::size_t k = 0; k < a.size(); ++k) {
        CHECK(a[k] == b[k]);
        CHECK(c[k] == e[k]);
    }
    const auto one = f.shifted(1, 0);
    CHECK(one(0, 3) == f(1, 3));
}

TEST_CASE("midpoint quadrature") {
    const auto g = PeriodicGrid::square(32);
    CHECK(integrate(ScalarField(g, 1.0)) == doctest::Approx(1.0).epsilon(1e-14));

    RegionMask half(g);
    for (std::size_t k = 0; k < g.size(); k += 2) half.set(k, true);
    CHECK(integrate(ScalarField(g, 1.0), half) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(half.measure() == doctest::Approx(0.5));
    CHECK((half | !half).count() == g.size());
    CHECK((half & !half).empty());

    const auto s2 = ScalarField::sample(g, [](double x, double) { return std::pow(std::sin(2.0 * pi * x), 2); });
    CHECK(integrate(s2) == doctest::Approx(0.5).epsilon(1e-12));

    const auto other = PeriodicGrid::square(16);
    CHECK_THROWS_AS(integrate(ScalarField(g, 1.0), RegionMask(other, true)), Error);
}

TEST_CASE("pairwise sum is exact on integers and order-fixed") {
    std::vector<double> v(1000);
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = static_cast<double>(k);
    CHECK(pairwise_sum(v) == 499500.0);
    CHECK(pairwise_sum({}) == 0.0);
}

TEST_CASE("field dumps round-trip") {
    const auto g = PeriodicGrid::square(8);
    const auto f = smooth_2d(g);
    std::stringstream bin;
    write_field_binary(f, bin);
    const auto back = read_field_binary(bin);
    CHECK(back.grid() == g);
    for (std::size_t k = 0; k < f.size(); ++k) CHECK(back[k] == f[k]);

    std::ostringstream csv;
    write_field_csv(f, csv);
    std::istringstream lines(csv.str());
    std::string header, dims;
    std::getline(lines, header);
    std::getline(lines, dims);
    CHECK(header == "dims,n_per_axis");
    CHECK(dims == "2,8");
    int rows = 0;
    for (std::string line; std::getline(lines, line);) ++rows;
    CHECK(rows == 8);
}
