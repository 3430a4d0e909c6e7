#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "gflame/analysis.hpp"
#include "gflame/run_config.hpp"

namespace gflame::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_config_error = 1;
inline constexpr int exit_partial_failure = 2;

/// Solves one cell; failures are caught and recorded in the error column.
SweepRecord run_cell(const RunConfig& cfg, const SweepCell& cell);

/// Runs cells on a worker pool and hands records to `sink` in cell order.
void run_cells(const RunConfig& cfg, const std::vector<SweepCell>& cells,
               const std::function<void(std::size_t, const SweepRecord&)>& sink);

struct CellEstimate {
    SweepCell cell;
    std::string method;
    int grid_n = 0;
    /// Resolution the refinement rule asks for before the max_grid_n cap.
    int rule_grid_n = 0;
    double memory_mb = 0.0;
    double steps = 0.0;
    std::vector<std::string> flags;
};

/// Dry-run resource estimate for one cell from the refinement and step rules.
CellEstimate estimate_cell(const RunConfig& cfg, const SweepCell& cell);

/// Executes cfg.command. Returns the process exit code.
int run(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// Parses `<command> [--config path] [key=value ...]` and calls run().
int main(int argc, char** argv);

}  // namespace gflame::cli
