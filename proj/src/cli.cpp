#include "gflame/cli.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "gflame/cellular.hpp"
#include "gflame/error.hpp"
#include "gflame/shear.hpp"
#include "gflame/transport.hpp"

namespace gflame::cli {

using nlohmann::json;

namespace {

std::string resolve_method(const RunConfig& cfg, double d) {
    if (cfg.method != "auto") return cfg.method;
    return d >= cfg.d_min_steady ? "steady" : "time_marching";
}

int cellular_grid_n(const RunConfig& cfg, double A, double d) {
    return cfg.grid_n != 0 ? cfg.grid_n : refined_grid_n(A, d, cfg.max_grid_n);
}

std::string number_tag(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", x);
    return buf;
}

void dump_field(const RunConfig& cfg, const SweepCell& cell, const ScalarField& f, const std::string& what) {
    namespace fs = std::filesystem;
    fs::create_directories(cfg.dump_dir);
    const std::string stem = what + "_" + cell.model + "_A" + number_tag(cell.A) + "_d" + number_tag(cell.d) + "_P" +
                             number_tag(cell.P.x) + "_" + number_tag(cell.P.y);
    const bool csv = cfg.dump_format == "csv";
    const fs::path path = fs::path(cfg.dump_dir) / (stem + (csv ? ".csv" : ".bin"));
    std::ofstream out(path, csv ? std::ios::out : std::ios::binary);
    if (!out) throw Error(ErrorKind::ConfigError, "cannot write field dump " + path.string());
    if (csv) write_field_csv(f, out);
    else write_field_binary(f, out);
}

CellProblemSpec cellular_spec(const RunConfig& cfg, const SweepCell& cell) {
    CellProblemSpec spec;
    spec.P = cell.P;
    spec.d = cell.d;
    spec.s_l = cfg.s_l;
    spec.flow = make_flow(cfg, cell.A);
    return spec;
}

CellSolution solve_cellular(const RunConfig& cfg, const SweepCell& cell) {
    const CellProblemSpec spec = cellular_spec(cfg, cell);
    const PeriodicGrid grid = PeriodicGrid::square(cellular_grid_n(cfg, cell.A, cell.d));
    const std::string method = resolve_method(cfg, cell.d);
    if (method == "steady") {
        SteadyOptions opts;
        opts.tol = cfg.tol;
        opts.d_min = cfg.d_min_steady;
        return solve_steady_iteration(spec, grid, opts);
    }
    TimeMarchingOptions opts;
    opts.tol = cfg.tol;
    opts.max_steps = cfg.max_steps;
    if (cfg.max_T) opts.max_T = *cfg.max_T;
    opts.order = cfg.order;
    opts.implicit_diffusion = cfg.implicit_diffusion;
    if (cell.d == 0.0) opts.order = cfg.order != 0 ? cfg.order : 1;
    return solve_time_marching(spec, grid, opts);
}

ShearSpec shear_spec(const RunConfig& cfg, const SweepCell& cell) {
    ShearSpec s;
    s.m = cell.P.x;
    s.n = cell.P.y;
    s.A = cell.A;
    s.d = cell.d;
    s.model = parse_shear_model(cell.model);
    s.profile = make_profile(cfg);
    s.grid_n = cfg.grid_n;
    return s;
}

ShearOptions shear_options(const RunConfig& cfg) {
    ShearOptions o;
    o.tol = cfg.tol;
    o.max_steps = cfg.max_steps;
    if (cfg.max_T) o.max_T = *cfg.max_T;
    return o;
}

class OmpSerialScope {
public:
    explicit OmpSerialScope(bool active) {
#ifdef _OPENMP
        if (active) omp_set_num_threads(1);
#else
        (void)active;
#endif
    }
};

std::ofstream open_output(const std::string& path) {
    if (auto parent = std::filesystem::path(path).parent_path(); !parent.empty())
        std::filesystem::create_directories(parent);
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::ConfigError, "cannot write '" + path + "'");
    return out;
}

void print_summary(std::ostream& out, const std::vector<SweepRecord>& records) {
    std::vector<SweepRecord> ok, failed;
    for (const auto& r : records) (r.ok() ? ok : failed).push_back(r);
    out << render_table(ok, TableLayout::custom, {"model", "P_m", "P_n", "A", "d", "grid_n", "value", "residual", "steps"});
    for (const auto& r : failed)
        out << "FAILED " << r.model << " P=(" << r.P_m << "," << r.P_n << ") A=" << r.A << " d=" << r.d << ": " << r.error
            << '\n';
}

int run_sweep(const RunConfig& cfg, const std::vector<SweepCell>& cells, std::ostream& out, std::ostream& err) {
    std::ofstream csv;
    if (!cfg.csv.empty()) {
        csv = open_output(cfg.csv);
        write_sweep_csv_header(csv);
    }
    std::vector<SweepRecord> records;
    run_cells(cfg, cells, [&](std::size_t, const SweepRecord& r) {
        records.push_back(r);
        if (csv.is_open()) {
            write_sweep_csv_row(csv, r);
            csv.flush();
        }
        if (!r.ok()) err << "cell failed (" << r.error << "): " << r.model << " A=" << r.A << " d=" << r.d << '\n';
    });
    print_summary(out, records);
    if (!cfg.table.empty()) {
        const TableLayout layout = parse_table_layout(cfg.table);
        out << '\n' << render_table(records, layout, cfg.columns);
    }
    const bool any_failed = std::any_of(records.begin(), records.end(), [](const SweepRecord& r) { return !r.ok(); });
    return any_failed ? exit_partial_failure : exit_ok;
}

json report_to_json(const DiagnosticsReport& rep) {
    json j;
    j["l1_grad_total"] = rep.l1_grad_total;
    j["weighted_h1"] = rep.weighted_h1;
    j["streamline_osc"] = rep.streamline_osc;
    j["layer_mass"] = json::array();
    for (const auto& [eps, mass] : rep.layer_mass) j["layer_mass"].push_back({{"eps", eps}, {"mass", mass}});
    j["beta_over_lambda"] = rep.beta_over_lambda ? json(*rep.beta_over_lambda) : json(nullptr);
    j["cell_profiles"] = json::array();
    for (const auto& p : rep.cell_profiles) {
        json bins = json::array();
        for (std::size_t b = 0; b < p.bin_center.size(); ++b) {
            if (p.bin_count[b] == 0) continue;
            bins.push_back({{"H", p.bin_center[b]}, {"mean", p.bin_mean[b]}, {"count", p.bin_count[b]}});
        }
        j["cell_profiles"].push_back({{"direction", p.direction}, {"violations", p.violations}, {"bins", bins}});
    }
    return j;
}

int run_diagnose(const RunConfig& cfg, std::ostream& out) {
    if (cfg.model != "cellular") throw Error(ErrorKind::ConfigError, "diagnose needs problem.model = cellular");
    const SweepCell cell{cfg.model, cfg.P, cfg.amplitude, cfg.d};
    const CellSolution sol = solve_cellular(cfg, cell);
    const CellProblemSpec spec = cellular_spec(cfg, cell);
    DiagnosticsOptions opts;
    opts.eps_list = cfg.eps_list;
    opts.bin_width = cfg.bin_width;
    opts.with_transport = cfg.with_transport;
    const DiagnosticsReport rep = diagnostics(spec, sol.w, sol.result.hbar, opts);
    json j = report_to_json(rep);
    j["hbar"] = sol.result.hbar;
    j["A"] = cell.A;
    j["d"] = cell.d;
    j["grid_n"] = sol.result.grid_n;
    j["method"] = sol.result.method;
    j["config_hash"] = cfg.hash;
    if (cfg.field_dump) {
        ScalarField va(sol.w.grid());
        for (int i = 0; i < va.grid().n(); ++i)
            for (int k = 0; k < va.grid().n(); ++k)
                va(i, k) = (dot(cell.P, va.grid().point(i, k)) + sol.w(i, k)) / sol.result.hbar;
        dump_field(cfg, cell, sol.w, "w");
        dump_field(cfg, cell, va, "vA");
    }
    out << j.dump(2) << '\n';
    if (!cfg.json_out.empty()) open_output(cfg.json_out) << j.dump(2) << '\n';
    return exit_ok;
}

int run_transport(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    std::ofstream csv, band, offcore;
    if (!cfg.csv.empty()) {
        csv = open_output(cfg.csv);
        csv << "A,d,p,lp_norm,in_range\n";
    }
    if (!cfg.band_csv.empty()) {
        band = open_output(cfg.band_csv);
        band << "A,d,lo,hi,mass\n";
    }
    if (!cfg.offcore_csv.empty()) {
        offcore = open_output(cfg.offcore_csv);
        offcore << "A,d,N,mass\n";
    }
    const std::vector<double> ds = cfg.d_list.value_or(std::vector<double>{cfg.d});
    const std::vector<double> as = cfg.A_list.value_or(std::vector<double>{cfg.amplitude});
    bool failed = false;
    out << "A d grid_n p lp_norm\n";
    for (double d : ds)
        for (double A : as) {
            try {
                const int n = cellular_grid_n(cfg, A, d);
                const TransportResult tr = solve_T(make_flow(cfg, A), d, PeriodicGrid::square(n), 1e-10);
                for (double p : cfg.p_list) {
                    const LpNorm lp = lp_gradient_norm(tr, p);
                    out << A << ' ' << d << ' ' << n << ' ' << p << ' ' << format_sci(lp.value)
                        << (lp.in_range ? "" : "  (p outside [1,2])") << '\n';
                    if (csv.is_open())
                        csv << A << ',' << d << ',' << p << ',' << json(lp.value).dump() << ',' << lp.in_range << '\n';
                }
                if (band.is_open() && cfg.flow_kind == "cellular")
                    for (const auto& b : band_masses(tr, cfg.band_eps))
                        band << A << ',' << d << ',' << b.lo << ',' << b.hi << ',' << json(b.value).dump() << '\n';
                if (offcore.is_open() && cfg.flow_kind == "cellular")
                    for (const auto& [N, mass] : offcore_decay(tr, cfg.N_list))
                        offcore << A << ',' << d << ',' << N << ',' << json(mass).dump() << '\n';
                if (cfg.field_dump) dump_field(cfg, {cfg.model, cfg.P, A, d}, tr.S, "T_periodic");
            } catch (const Error& e) {
                failed = true;
                err << "transport cell A=" << A << " d=" << d << " failed: " << e.what() << '\n';
            }
        }
    return failed ? exit_partial_failure : exit_ok;
}

int run_analyze(const RunConfig& cfg, std::ostream& out) {
    if (cfg.analyze_input.empty()) throw Error(ErrorKind::ConfigError, "analyze needs analyze.input");
    std::ifstream in(cfg.analyze_input);
    if (!in) throw Error(ErrorKind::ConfigError, "cannot read '" + cfg.analyze_input + "'");
    std::vector<SweepRecord> records = read_sweep_csv(in);
    std::vector<SweepRecord> ok;
    for (const auto& r : records)
        if (r.ok()) ok.push_back(r);
    const ScalingLaw law = parse_scaling_law(cfg.law);
    ok = scale_column(std::move(ok), law);

    std::string layout = cfg.table;
    if (layout.empty()) layout = law == ScalingLaw::d_squared ? "table1" : (law == ScalingLaw::sqrt_log ? "table2" : "custom");
    std::vector<std::string> columns = cfg.columns;
    if (layout == "custom" && columns.empty()) columns = {"model", "A", "d", "value", scaled_column_name(law)};
    out << render_table(ok, parse_table_layout(layout), columns);

    if (cfg.fit && law == ScalingLaw::sqrt_log) {
        std::map<double, std::vector<SweepRecord>, std::greater<>> by_d;
        for (const auto& r : ok) by_d[r.d].push_back(r);
        out << "\nfit value = c(d) sqrt(log A) over the largest-A half\n";
        for (const auto& [d, rows] : by_d) {
            try {
                const ScalingFit fit = fit_scaling(rows);
                out << "d=" << d << "  c=" << format_sci(fit.c) << "  rms=" << format_sci(fit.rms) << "  rows=" << fit.rows_used
                    << '\n';
            } catch (const Error& e) {
                out << "d=" << d << "  " << e.what() << '\n';
            }
        }
    }
    if (!cfg.gnuplot.empty()) {
        auto g = open_output(cfg.gnuplot);
        write_gnuplot(g, ok, "A", "value");
    }
    return exit_ok;
}

int run_validate(const RunConfig& cfg, std::ostream& out) {
    const auto cells = sweep_cells(cfg);
    int flagged = 0;
    out << "model P A d method grid_n rule_grid_n memory_mb steps flags\n";
    for (const auto& cell : cells) {
        const CellEstimate e = estimate_cell(cfg, cell);
        std::ostringstream flags;
        for (std::size_t k = 0; k < e.flags.size(); ++k) flags << (k ? "; " : "") << e.flags[k];
        if (!e.flags.empty()) ++flagged;
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.1f %.3g", e.memory_mb, e.steps);
        out << cell.model << " (" << cell.P.x << "," << cell.P.y << ") " << cell.A << ' ' << cell.d << ' ' << e.method << ' '
            << e.grid_n << ' ' << e.rule_grid_n << ' ' << buf << ' ' << (e.flags.empty() ? "ok" : flags.str()) << '\n';
    }
    out << cells.size() - flagged << " of " << cells.size() << " cells within budget\n";
    return flagged ? exit_partial_failure : exit_ok;
}

}  // namespace

SweepRecord run_cell(const RunConfig& cfg, const SweepCell& cell) {
    SweepRecord r;
    r.model = cell.model;
    r.P_m = cell.P.x;
    r.P_n = cell.P.y;
    r.A = cell.A;
    r.d = cell.d;
    r.config_hash = cfg.hash;
    const auto start = std::chrono::steady_clock::now();
    try {
        if (cell.model == "cellular") {
            r.grid_n = cellular_grid_n(cfg, cell.A, cell.d);
            const CellSolution sol = solve_cellular(cfg, cell);
            r.value = sol.result.hbar;
            r.residual = sol.result.residual;
            r.steps = sol.result.steps;
            if (cfg.field_dump) dump_field(cfg, cell, sol.w, "w");
        } else {
            const ShearSpec spec = shear_spec(cfg, cell);
            r.grid_n = spec.grid_n != 0 ? spec.grid_n : default_shear_grid_n(cell.d);
            const ShearResult res = solve_shear(spec, shear_options(cfg));
            r.value = res.lambda;
            r.residual = res.residual;
            r.steps = res.steps;
            if (cfg.field_dump) dump_field(cfg, cell, res.phi, "phi");
        }
    } catch (const Error& e) {
        r.error = std::string(to_string(e.kind()));
    } catch (const std::exception&) {
        r.error = "Exception";
    }
    r.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

void run_cells(const RunConfig& cfg, const std::vector<SweepCell>& cells,
               const std::function<void(std::size_t, const SweepRecord&)>& sink) {
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const std::size_t workers =
        std::min<std::size_t>(cells.size(), cfg.workers > 0 ? static_cast<std::size_t>(cfg.workers) : hw);
    if (workers <= 1) {
        for (std::size_t k = 0; k < cells.size(); ++k) sink(k, run_cell(cfg, cells[k]));
        return;
    }
    std::vector<std::promise<SweepRecord>> promises(cells.size());
    std::vector<std::future<SweepRecord>> futures;
    for (auto& p : promises) futures.push_back(p.get_future());
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            // Cells already run concurrently; keep the stencil kernels serial per worker.
            const OmpSerialScope serial(true);
            for (std::size_t k = next++; k < cells.size(); k = next++) promises[k].set_value(run_cell(cfg, cells[k]));
        });
    // Single writer: records leave in cell order as soon as each prefix is done.
    for (std::size_t k = 0; k < cells.size(); ++k) sink(k, futures[k].get());
    for (auto& t : pool) t.join();
}

CellEstimate estimate_cell(const RunConfig& cfg, const SweepCell& cell) {
    CellEstimate e;
    e.cell = cell;
    constexpr double mb = 1024.0 * 1024.0;
    if (cell.model == "cellular") {
        e.rule_grid_n = refined_grid_n(cell.A, cell.d, 1 << 20);
        e.grid_n = cellular_grid_n(cfg, cell.A, cell.d);
        e.method = resolve_method(cfg, cell.d);
        const double N = static_cast<double>(e.grid_n) * e.grid_n;
        const double h = 1.0 / e.grid_n;
        if (e.method == "steady") {
            // Sparse LU fill measured at 128^2..512^2: about 181 N log2 N bytes.
            e.memory_mb = (181.0 * N * std::log2(N) + 40.0 * 8.0 * N) / mb;
            e.steps = 30.0;
            if (cell.d < cfg.d_min_steady) e.flags.push_back("d below d_min_steady");
        } else {
            e.memory_mb = 12.0 * 8.0 * N / mb;
            const double vmax = cell.A * (cfg.normalization == "raw" ? 2.0 * 3.141592653589793 : 1.0);
            const bool implicit = cell.d > 0.0 && cfg.implicit_diffusion.value_or(true);
            const double dt = 0.5 / (vmax * 2.0 / h + (implicit ? 0.0 : 4.0 * cell.d / (h * h)) + 2.0 * cfg.s_l / h);
            e.steps = cfg.budget_est_T / dt;
        }
        if (cfg.grid_n == 0 && e.rule_grid_n > cfg.max_grid_n)
            e.flags.push_back("refinement rule asks for " + std::to_string(e.rule_grid_n) + "^2 > max_grid_n " +
                              std::to_string(cfg.max_grid_n));
    } else {
        e.method = "shear_relaxation";
        e.grid_n = cfg.grid_n != 0 ? cfg.grid_n : default_shear_grid_n(cell.d);
        e.rule_grid_n = e.grid_n;
        e.memory_mb = 12.0 * 8.0 * e.grid_n / mb;
        // Pseudo-time step 0.5 h / Lip with Lip ~ 1 for the Hamiltonians used here.
        e.steps = cfg.budget_est_T * 2.0 * e.grid_n;
    }
    if (e.memory_mb > cfg.budget_memory_mb) {
        char buf[96];
        std::snprintf(buf, sizeof(buf), "memory %.0f MB > budget %.0f MB", e.memory_mb, cfg.budget_memory_mb);
        e.flags.push_back(buf);
    }
    if (e.steps > cfg.budget_max_steps) {
        char buf[96];
        std::snprintf(buf, sizeof(buf), "steps %.3g > budget %.3g", e.steps, cfg.budget_max_steps);
        e.flags.push_back(buf);
    }
    return e;
}

int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    try {
        if (cfg.command == "solve") {
            const SweepCell cell{cfg.model, cfg.P, cfg.amplitude, cfg.d};
            return run_sweep(cfg, {cell}, out, err);
        }
        if (cfg.command == "sweep") return run_sweep(cfg, sweep_cells(cfg), out, err);
        if (cfg.command == "diagnose") return run_diagnose(cfg, out);
        if (cfg.command == "transport") return run_transport(cfg, out, err);
        if (cfg.command == "analyze") return run_analyze(cfg, out);
        if (cfg.command == "validate") return run_validate(cfg, out);
        throw Error(ErrorKind::ConfigError, "unknown command '" + cfg.command + "'");
    } catch (const Error& e) {
        err << e.what() << '\n';
        if (e.kind() == ErrorKind::ConfigError || e.kind() == ErrorKind::MissingColumn) return exit_config_error;
        return exit_partial_failure;
    }
}

int main(int argc, char** argv) {
    CLI::App app{"Effective Hamiltonians of G-equations in cellular and shear flows"};
    std::string command;
    std::string config_path;
    std::vector<std::string> overrides;
    app.add_option("command", command, "solve | sweep | diagnose | transport | analyze | validate")
        ->required()
        ->check(CLI::IsMember({"solve", "sweep", "diagnose", "transport", "analyze", "validate"}));
    app.add_option("--config,-c", config_path, "JSON run configuration");
    app.add_option("overrides", overrides, "key=value overrides, e.g. flow.amplitude=64");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_config_error;
    }
    try {
        json config = config_path.empty() ? json::object() : load_config_file(config_path);
        for (const auto& o : overrides) apply_override(config, o);
        config["command"] = command;
        const RunConfig cfg = parse_run_config(config);
        return run(cfg, std::cout, std::cerr);
    } catch (const Error& e) {
        std::cerr << e.what() << '\n';
        return e.kind() == ErrorKind::ConfigError ? exit_config_error : exit_partial_failure;
    }
}

}  // namespace gflame::cli
