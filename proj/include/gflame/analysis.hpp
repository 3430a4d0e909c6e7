#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace gflame {

/// One row of the sweep CSV.
struct SweepRecord {
    std::string model;
    double P_m = 1.0;
    double P_n = 0.0;
    double A = 0.0;
    double d = 0.0;
    int grid_n = 0;
    double value = 0.0;
    double residual = 0.0;
    long steps = 0;
    double wall_time_s = 0.0;
    std::string config_hash;
    /// Empty on success, otherwise the error kind tag.
    std::string error;
    /// Derived columns added by scale_column.
    std::map<std::string, double> extra;

    bool ok() const noexcept { return error.empty(); }
};

/// Fixed CSV header of sweep output.
inline constexpr std::string_view sweep_csv_header =
    "model,P_m,P_n,A,d,grid_n,value,residual,steps,wall_time_s,config_hash,error";

void write_sweep_csv_header(std::ostream& out);
/// Numeric fields are written with round-trip precision.
void write_sweep_csv_row(std::ostream& out, const SweepRecord& r);
void write_sweep_csv(std::ostream& out, const std::vector<SweepRecord>& records);
/// Throws MissingColumn if the header lacks a required column.
std::vector<SweepRecord> read_sweep_csv(std::istream& in);

/// sqrt_log: value / sqrt(ln A). linear: value / A. d_squared: -value / d^2.
enum class ScalingLaw { sqrt_log, linear, d_squared };

ScalingLaw parse_scaling_law(std::string_view name);
/// Name of the column each law adds.
std::string scaled_column_name(ScalingLaw law);

/// Adds the law's column to every record. sqrt_log rejects A <= 1,
/// linear rejects A = 0 and d_squared rejects d = 0 (InvalidArgument).
std::vector<SweepRecord> scale_column(std::vector<SweepRecord> records, ScalingLaw law);
/// Recomputes `value` from the scaled column.
std::vector<SweepRecord> unscale_column(std::vector<SweepRecord> records, ScalingLaw law);

struct ScalingFit {
    double c = 0.0;
    /// Relative rms misfit over the rows used.
    double rms = 0.0;
    std::size_t rows_used = 0;
};

/// Least squares for value = c sqrt(ln A) over the largest-A half of the
/// records. Needs >= 4 records whose A span at least a decade (InsufficientData).
ScalingFit fit_scaling(const std::vector<SweepRecord>& records);

enum class TableLayout { table1, table2, table3, custom };

TableLayout parse_table_layout(std::string_view name);

/// Compact scientific notation with 5 significant digits, e.g. 3.7134e+1.
std::string format_sci(double x);
/// 5 significant digits in fixed notation, e.g. 1.2701.
std::string format_sig5(double x);

/// Fixed-width text table. table1: d, -lambda_bar, -lambda_bar/d^2.
/// table2/table3: one row per A, an (Hbar, Hbar/sqrt(log A)) pair per d.
/// custom: the listed columns in order. Unknown columns throw MissingColumn.
std::string render_table(const std::vector<SweepRecord>& records, TableLayout layout,
                         const std::vector<std::string>& columns = {});

/// Two-column "x y" data, one gnuplot index block per distinct d.
void write_gnuplot(std::ostream& out, const std::vector<SweepRecord>& records, const std::string& x_column,
                   const std::string& y_column);

/// Named numeric column of a record (fixed fields or extras); MissingColumn otherwise.
double record_column(const SweepRecord& r, const std::string& name);

}  // namespace gflame
