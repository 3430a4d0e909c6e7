#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gflame/analysis.hpp"
#include "gflame/error.hpp"

using namespace gflame;

namespace {

SweepRecord rec(double A, double d, double value, std::string model = "cellular") {
    SweepRecord r;
    r.model = std::move(model);
    r.A = A;
    r.d = d;
    r.value = value;
    r.grid_n = 256;
    r.residual = 1e-9;
    r.steps = 7;
    r.wall_time_s = 0.5;
    r.config_hash = "abc123";
    return r;
}

const std::vector<double> A_ref{32, 48, 64, 96, 128, 192, 256, 384, 512, 768};

/// Reference effective Hamiltonians per d over A_ref.
const std::vector<std::pair<double, std::vector<double>>> hbar_ref{
    {1.0, {1.2701, 1.3473, 1.3968, 1.4605, 1.5017, 1.5543, 1.5881, 1.6328, 1.6631, 1.7049}},
    {0.5, {1.3987, 1.4634, 1.5058, 1.5606, 1.5975, 1.6496, 1.6869, 1.7393, 1.7741, 1.8227}},
    {0.25, {1.5211, 1.5846, 1.6312, 1.7002, 1.7505, 1.8222, 1.8714, 1.9402, 1.9873, 2.0504}},
    {0.1, {1.8418, 1.9592, 2.0459, 2.1696, 2.2590, 2.3839, 2.4724, 2.5938, 2.6774, 2.7900}},
    {0.05, {2.4290, 2.6253, 2.7698, 2.9749, 3.1242, 3.3327, 3.4795, 3.6878, 3.8292, 4.0189}},
};

std::vector<SweepRecord> reference_rows(double d, const std::vector<double>& values) {
    std::vector<SweepRecord> out;
    for (std::size_t k = 0; k < A_ref.size(); ++k) out.push_back(rec(A_ref[k], d, values[k]));
    return out;
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

TEST_CASE("sqrt_log scaling of reference rows") {
    const auto s = scale_column({rec(32, 1.0, 1.2701), rec(768, 0.05, 4.0189)}, ScalingLaw::sqrt_log);
    const auto col = scaled_column_name(ScalingLaw::sqrt_log);
    CHECK(format_sci(s[0].extra.at(col)) == "6.8224e-1");
    CHECK(format_sci(s[1].extra.at(col)) == "1.5592e+0");

    const double A = 100.0;
    const auto one = scale_column({rec(A, 1.0, std::sqrt(std::log(A)))}, ScalingLaw::sqrt_log);
    CHECK(one[0].extra.at(col) == doctest::Approx(1.0).epsilon(1e-15));

    CHECK(kind_of([] { (void)scale_column({rec(1.0, 1.0, 1.0)}, ScalingLaw::sqrt_log); }) == ErrorKind::InvalidArgument);
    CHECK(kind_of([] { (void)scale_column({rec(0.0, 1.0, 1.0)}, ScalingLaw::linear); }) == ErrorKind::InvalidArgument);
    CHECK(kind_of([] { (void)scale_column({rec(1.0, 0.0, 1.0)}, ScalingLaw::d_squared); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("linear and d_squared scaling") {
    const auto lin = scale_column({rec(8.0, 0.1, 4.0)}, ScalingLaw::linear);
    CHECK(lin[0].extra.at("value_over_A") == 0.5);
    const auto sq = scale_column({rec(0.0, 1e-2, -3.9280e-3)}, ScalingLaw::d_squared);
    CHECK(sq[0].extra.at("neg_value_over_d2") == doctest::Approx(39.280));
}

TEST_CASE("scale then unscale recovers the inputs") {
    for (auto law : {ScalingLaw::sqrt_log, ScalingLaw::linear, ScalingLaw::d_squared}) {
        const auto rows = reference_rows(0.1, hbar_ref[3].second);
        const auto back = unscale_column(scale_column(rows, law), law);
        for (std::size_t k = 0; k < rows.size(); ++k)
            CHECK(back[k].value == doctest::Approx(rows[k].value).epsilon(1e-15));
    }
    CHECK(kind_of([] { (void)unscale_column({rec(32, 1.0, 1.0)}, ScalingLaw::linear); }) == ErrorKind::MissingColumn);
}

TEST_CASE("fit recovers its own model") {
    std::vector<SweepRecord> rows;
    for (double A : A_ref) rows.push_back(rec(A, 1.0, 2.0 * std::sqrt(std::log(A))));
    const auto fit = fit_scaling(rows);
    CHECK(fit.c == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(fit.rms <= 1e-12);
    CHECK(fit.rows_used == 5);
}

TEST_CASE("fit preconditions") {
    std::vector<SweepRecord> three{rec(10, 1, 1), rec(100, 1, 2), rec(1000, 1, 3)};
    CHECK(kind_of([&] { (void)fit_scaling(three); }) == ErrorKind::InsufficientData);
    std::vector<SweepRecord> narrow{rec(128, 1, 1), rec(256, 1, 1), rec(512, 1, 1), rec(768, 1, 1)};
    CHECK(kind_of([&] { (void)fit_scaling(narrow); }) == ErrorKind::InsufficientData);
    // Failed rows do not count.
    auto failed = three;
    failed.push_back(rec(5000, 1, 4));
    failed.back().error = "NonConvergence";
    CHECK(kind_of([&] { (void)fit_scaling(failed); }) == ErrorKind::InsufficientData);
}

TEST_CASE("fitted c(d) on reference rows") {
    const auto d1 = fit_scaling(reference_rows(1.0, hbar_ref[0].second));
    CHECK(d1.c >= 0.66);
    CHECK(d1.c <= 0.68);
    CHECK(d1.rms < 0.01);

    // c(d) decreases in d, so it increases along the list ordered by decreasing d.
    double prev = 0.0;
    for (const auto& [d, values] : hbar_ref) {
        const double c = fit_scaling(reference_rows(d, values)).c;
        CHECK(c > prev);
        prev = c;
    }
}

TEST_CASE("number formatting") {
    CHECK(format_sci(37.134) == "3.7134e+1");
    CHECK(format_sci(3.7061e-5) == "3.7061e-5");
    CHECK(format_sci(-5.9414e-2) == "-5.9414e-2");
    CHECK(format_sci(1.0) == "1.0000e+0");
    CHECK(format_sci(1.5e10) == "1.5000e+10");
    CHECK(format_sig5(1.27012) == "1.2701");
    CHECK(format_sig5(12.3456) == "12.346");
    CHECK(format_sig5(0.0) == "0.0000");
}

TEST_CASE("table layouts") {
    SUBCASE("empty record sets give header-only tables") {
        const auto t1 = render_table({}, TableLayout::table1);
        CHECK(t1.find("-lambda_bar/d^2") != std::string::npos);
        CHECK(std::count(t1.begin(), t1.end(), '\n') == 1);
        const auto t2 = render_table({}, TableLayout::table2);
        CHECK(std::count(t2.begin(), t2.end(), '\n') == 1);
        CHECK(t2.find("Hbar(d=0.25)") != std::string::npos);
        CHECK(render_table({}, TableLayout::table3).find("Hbar(d=0.05)") != std::string::npos);
    }
    SUBCASE("d sweep in the three-column layout") {
        const auto t = render_table({rec(0, 2e-2, -1.5540e-2, "limit_problem"), rec(0, 4e-2, -5.9414e-2, "limit_problem")},
                                    TableLayout::table1);
        std::istringstream lines(t);
        std::string header, first, second;
        std::getline(lines, header);
        std::getline(lines, first);
        std::getline(lines, second);
        CHECK(first.find("4.0000e-2") != std::string::npos);
        CHECK(first.find("5.9414e-2") != std::string::npos);
        CHECK(first.find("3.7134e+1") != std::string::npos);
        CHECK(second.find("3.8850e+1") != std::string::npos);
    }
    SUBCASE("A rows with one pair per d") {
        std::vector<SweepRecord> rows{rec(32, 1.0, 1.2701), rec(32, 0.5, 1.3987), rec(48, 1.0, 1.3473)};
        const auto t = render_table(rows, TableLayout::table2);
        CHECK(t.find("1.2701") != std::string::npos);
        CHECK(t.find("6.8224e-1") != std::string::npos);
        CHECK(t.find("7.5132e-1") != std::string::npos);
        CHECK(t.find("-") != std::string::npos);  // A = 48 lacks d = 0.5
    }
    SUBCASE("custom layout echoes the column order") {
        const auto t = render_table({rec(32, 1.0, 1.5)}, TableLayout::custom, {"d", "A", "model"});
        std::istringstream lines(t);
        std::string header;
        std::getline(lines, header);
        CHECK(header.find('d') < header.find('A'));
        CHECK(header.find('A') < header.find("model"));
        CHECK(kind_of([] { (void)render_table({}, TableLayout::custom, {"nope"}); }) == ErrorKind::MissingColumn);
        CHECK(kind_of([] { (void)render_table({}, TableLayout::custom); }) == ErrorKind::MissingColumn);
    }
}

TEST_CASE("sweep CSV round-trip") {
    auto r = rec(96, 0.25, 1.7002);
    r.value = 1.0 / 3.0;
    auto bad = rec(768, 0.05, 0.0);
    bad.error = "DiffusionTooSmall";
    std::stringstream csv;
    write_sweep_csv(csv, {r, bad});
    CHECK(csv.str().substr(0, csv.str().find('\n')) == sweep_csv_header);

    const auto back = read_sweep_csv(csv);
    REQUIRE(back.size() == 2);
    CHECK(back[0].value == r.value);
    CHECK(back[0].config_hash == "abc123");
    CHECK(back[0].ok());
    CHECK(back[1].error == "DiffusionTooSmall");

    std::istringstream missing("model,A,d\ncellular,1,1\n");
    CHECK(kind_of([&] { (void)read_sweep_csv(missing); }) == ErrorKind::MissingColumn);
    CHECK(kind_of([] { (void)record_column(SweepRecord{}, "nope"); }) == ErrorKind::MissingColumn);
}

TEST_CASE("gnuplot blocks per d") {
    std::ostringstream out;
    write_gnuplot(out, {rec(64, 1.0, 1.3968), rec(32, 1.0, 1.2701), rec(32, 0.5, 1.3987)}, "A", "value");
    const auto s = out.str();
    CHECK(s.find("# d = 1\n") < s.find("# d = 0.5\n"));
    CHECK(s.find("32 1.2701") < s.find("64 1.3968"));
    CHECK(s.find("\n\n\n") != std::string::npos);
}
