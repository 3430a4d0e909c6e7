#include "gflame/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>

#include "gflame/error.hpp"

namespace gflame {

namespace {

std::string round_trip(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_double(const std::string& s, const std::string& column) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw Error(ErrorKind::InvalidArgument, "column " + column + ": cannot parse '" + s + "'");
    }
}

}  // namespace

void write_sweep_csv_header(std::ostream& out) { out << sweep_csv_header << '\n'; }

void write_sweep_csv_row(std::ostream& out, const SweepRecord& r) {
    out << r.model << ',' << round_trip(r.P_m) << ',' << round_trip(r.P_n) << ',' << round_trip(r.A) << ','
        << round_trip(r.d) << ',' << r.grid_n << ',' << round_trip(r.value) << ',' << round_trip(r.residual) << ','
        << r.steps << ',' << round_trip(r.wall_time_s) << ',' << r.config_hash << ',' << r.error << '\n';
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRecord>& records) {
    write_sweep_csv_header(out);
    for (const auto& r : records) write_sweep_csv_row(out, r);
}

std::vector<SweepRecord> read_sweep_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorKind::MissingColumn, "empty sweep CSV");
    const auto header = split_csv_line(line);
    std::map<std::string, std::size_t> col;
    for (std::size_t k = 0; k < header.size(); ++k) col[header[k]] = k;
    for (const auto& name : split_csv_line(std::string(sweep_csv_header)))
        if (!col.count(name)) throw Error(ErrorKind::MissingColumn, "sweep CSV lacks column '" + name + "'");

    std::vector<SweepRecord> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto cells = split_csv_line(line);
        cells.resize(header.size());
        auto get = [&](const char* name) -> const std::string& { return cells[col.at(name)]; };
        SweepRecord r;
        r.model = get("model");
        r.P_m = parse_double(get("P_m"), "P_m");
        r.P_n = parse_double(get("P_n"), "P_n");
        r.A = parse_double(get("A"), "A");
        r.d = parse_double(get("d"), "d");
        r.grid_n = static_cast<int>(parse_double(get("grid_n"), "grid_n"));
        r.value = parse_double(get("value"), "value");
        r.residual = parse_double(get("residual"), "residual");
        r.steps = static_cast<long>(parse_double(get("steps"), "steps"));
        r.wall_time_s = parse_double(get("wall_time_s"), "wall_time_s");
        r.config_hash = get("config_hash");
        r.error = get("error");
        out.push_back(std::move(r));
    }
    return out;
}

ScalingLaw parse_scaling_law(std::string_view name) {
    if (name == "sqrt_log") return ScalingLaw::sqrt_log;
    if (name == "linear") return ScalingLaw::linear;
    if (name == "d_squared") return ScalingLaw::d_squared;
    throw Error(ErrorKind::InvalidArgument, "unknown scaling law '" + std::string(name) + "'");
}

std::string scaled_column_name(ScalingLaw law) {
    switch (law) {
    case ScalingLaw::sqrt_log: return "value_over_sqrt_log_A";
    case ScalingLaw::linear: return "value_over_A";
    case ScalingLaw::d_squared: return "neg_value_over_d2";
    }
    return {};
}

namespace {

double scale_factor(const SweepRecord& r, ScalingLaw law) {
    switch (law) {
    case ScalingLaw::sqrt_log:
        if (!(r.A > 1.0)) throw Error(ErrorKind::InvalidArgument, "sqrt_log scaling needs A > 1");
        return 1.0 / std::sqrt(std::log(r.A));
    case ScalingLaw::linear:
        if (r.A == 0.0) throw Error(ErrorKind::InvalidArgument, "linear scaling needs A != 0");
        return 1.0 / r.A;
    case ScalingLaw::d_squared:
        if (r.d == 0.0) throw Error(ErrorKind::InvalidArgument, "d_squared scaling needs d != 0");
        return -1.0 / (r.d * r.d);
    }
    return 1.0;
}

}  // namespace

std::vector<SweepRecord> scale_column(std::vector<SweepRecord> records, ScalingLaw law) {
    const std::string name = scaled_column_name(law);
    for (auto& r : records) r.extra[name] = r.value * scale_factor(r, law);
    return records;
}

std::vector<SweepRecord> unscale_column(std::vector<SweepRecord> records, ScalingLaw law) {
    const std::string name = scaled_column_name(law);
    for (auto& r : records) {
        const auto it = r.extra.find(name);
        if (it == r.extra.end()) throw Error(ErrorKind::MissingColumn, "record lacks column '" + name + "'");
        r.value = it->second / scale_factor(r, law);
    }
    return records;
}

ScalingFit fit_scaling(const std::vector<SweepRecord>& records) {
    std::vector<SweepRecord> rows;
    for (const auto& r : records)
        if (r.ok()) rows.push_back(r);
    if (rows.size() < 4) throw Error(ErrorKind::InsufficientData, "scaling fit needs at least 4 records");
    std::sort(rows.begin(), rows.end(), [](const SweepRecord& a, const SweepRecord& b) { return a.A < b.A; });
    if (!(rows.front().A > 1.0)) throw Error(ErrorKind::InvalidArgument, "scaling fit needs A > 1");
    if (rows.back().A < 10.0 * rows.front().A)
        throw Error(ErrorKind::InsufficientData, "scaling fit needs A spanning at least one decade");

    const std::size_t first = rows.size() / 2;
    double num = 0.0, den = 0.0;
    for (std::size_t k = first; k < rows.size(); ++k) {
        const double s = std::sqrt(std::log(rows[k].A));
        num += rows[k].value * s;
        den += s * s;
    }
    ScalingFit fit;
    fit.c = num / den;
    fit.rows_used = rows.size() - first;
    double sq = 0.0;
    for (std::size_t k = first; k < rows.size(); ++k) {
        const double rel = (rows[k].value - fit.c * std::sqrt(std::log(rows[k].A))) / rows[k].value;
        sq += rel * rel;
    }
    fit.rms = std::sqrt(sq / static_cast<double>(fit.rows_used));
    return fit;
}

TableLayout parse_table_layout(std::string_view name) {
    if (name == "table1") return TableLayout::table1;
    if (name == "table2") return TableLayout::table2;
    if (name == "table3") return TableLayout::table3;
    if (name == "custom") return TableLayout::custom;
    throw Error(ErrorKind::InvalidArgument, "unknown table layout '" + std::string(name) + "'");
}

std::string format_sci(double x) {
    if (!std::isfinite(x)) return std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf");
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4e", x);
    std::string s(buf);
    // Strip leading zeros of the exponent: 3.7134e+01 -> 3.7134e+1.
    const auto e = s.find('e');
    std::size_t k = e + 2;
    while (k + 1 < s.size() && s[k] == '0') s.erase(k, 1);
    return s;
}

std::string format_sig5(double x) {
    if (!std::isfinite(x)) return format_sci(x);
    if (x == 0.0) return "0.0000";
    const int mag = static_cast<int>(std::floor(std::log10(std::abs(x))));
    if (mag < -3 || mag > 5) return format_sci(x);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.*f", std::max(0, 4 - mag), x);
    return buf;
}

double record_column(const SweepRecord& r, const std::string& name) {
    if (name == "P_m") return r.P_m;
    if (name == "P_n") return r.P_n;
    if (name == "A") return r.A;
    if (name == "d") return r.d;
    if (name == "grid_n") return r.grid_n;
    if (name == "value") return r.value;
    if (name == "residual") return r.residual;
    if (name == "steps") return static_cast<double>(r.steps);
    if (name == "wall_time_s") return r.wall_time_s;
    const auto it = r.extra.find(name);
    if (it != r.extra.end()) return it->second;
    throw Error(ErrorKind::MissingColumn, "unknown column '" + name + "'");
}

namespace {

std::string format_number(double x) {
    if (std::isfinite(x) && x == std::floor(x) && std::abs(x) < 1e9) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.0f", x);
        return buf;
    }
    return format_sci(x);
}

std::string render_rows(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
    std::vector<std::size_t> width(header.size());
    for (std::size_t c = 0; c < header.size(); ++c) width[c] = header[c].size();
    for (const auto& row : rows)
        for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
    std::ostringstream out;
    auto emit = [&](const std::vector<std::string>& cells) {
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (c) out << "  ";
            out << std::setw(static_cast<int>(width[c])) << cells[c];
        }
        out << '\n';
    };
    emit(header);
    for (const auto& row : rows) emit(row);
    return out.str();
}

std::string format_d(double d) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", d);
    return buf;
}

}  // namespace

std::string render_table(const std::vector<SweepRecord>& records, TableLayout layout,
                         const std::vector<std::string>& columns) {
    std::vector<SweepRecord> ok;
    for (const auto& r : records)
        if (r.ok()) ok.push_back(r);

    if (layout == TableLayout::table1) {
        std::vector<std::vector<std::string>> rows;
        auto sorted = ok;
        std::sort(sorted.begin(), sorted.end(), [](const SweepRecord& a, const SweepRecord& b) { return a.d > b.d; });
        for (const auto& r : sorted)
            rows.push_back({format_sci(r.d), format_sci(-r.value), format_sci(-r.value / (r.d * r.d))});
        return render_rows({"d", "-lambda_bar", "-lambda_bar/d^2"}, rows);
    }

    if (layout == TableLayout::table2 || layout == TableLayout::table3) {
        std::set<double, std::greater<>> ds;
        std::set<double> as;
        for (const auto& r : ok) {
            ds.insert(r.d);
            as.insert(r.A);
        }
        if (ds.empty()) {
            if (layout == TableLayout::table2) ds = {1.0, 0.5, 0.25};
            else ds = {0.1, 0.05};
        }
        std::vector<std::string> header{"A"};
        for (double d : ds) {
            header.push_back("Hbar(d=" + format_d(d) + ")");
            header.push_back("Hbar/sqrt(log A)");
        }
        std::vector<std::vector<std::string>> rows;
        for (double A : as) {
            std::vector<std::string> row{format_number(A)};
            for (double d : ds) {
                const auto it = std::find_if(ok.begin(), ok.end(), [&](const SweepRecord& r) { return r.A == A && r.d == d; });
                if (it == ok.end()) {
                    row.insert(row.end(), {"-", "-"});
                } else {
                    row.push_back(format_sig5(it->value));
                    row.push_back(A > 1.0 ? format_sci(it->value / std::sqrt(std::log(A))) : "-");
                }
            }
            rows.push_back(std::move(row));
        }
        return render_rows(header, rows);
    }

    if (columns.empty()) throw Error(ErrorKind::MissingColumn, "custom layout needs a column list");
    std::vector<std::vector<std::string>> rows;
    for (const auto& r : ok) {
        std::vector<std::string> row;
        for (const auto& c : columns) {
            if (c == "model") row.push_back(r.model);
            else if (c == "config_hash") row.push_back(r.config_hash);
            else if (c == "error") row.push_back(r.error);
            else row.push_back(format_number(record_column(r, c)));
        }
        rows.push_back(std::move(row));
    }
    // Validate names even when there are no rows.
    if (ok.empty()) {
        const SweepRecord probe;
        for (const auto& c : columns)
            if (c != "model" && c != "config_hash" && c != "error") (void)record_column(probe, c);
    }
    return render_rows(columns, rows);
}

void write_gnuplot(std::ostream& out, const std::vector<SweepRecord>& records, const std::string& x_column,
                   const std::string& y_column) {
    std::set<double, std::greater<>> ds;
    for (const auto& r : records)
        if (r.ok()) ds.insert(r.d);
    bool first = true;
    for (double d : ds) {
        if (!first) out << "\n\n";
        first = false;
        out << "# d = " << format_d(d) << "\n# " << x_column << ' ' << y_column << '\n';
        std::vector<std::pair<double, double>> pts;
        for (const auto& r : records)
            if (r.ok() && r.d == d) pts.emplace_back(record_column(r, x_column), record_column(r, y_column));
        std::sort(pts.begin(), pts.end());
        for (const auto& [x, y] : pts) out << round_trip(x) << ' ' << round_trip(y) << '\n';
    }
}

}  // namespace gflame
