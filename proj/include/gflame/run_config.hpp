#pragma once

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gflame/flows.hpp"
#include "gflame/grid.hpp"

namespace gflame {

/// Parsed, validated run configuration. Every block has defaults so an empty
/// JSON object is a valid single-cell config.
struct RunConfig {
    std::string command = "solve";

    /// "cellular" or one of the shear models.
    std::string model = "cellular";
    Vec2 P{1.0, 0.0};
    double d = 1.0;
    double s_l = 1.0;

    std::string flow_kind = "cellular";
    double amplitude = 0.0;
    std::string normalization = "scaled";
    std::string profile = "cosine";
    nlohmann::json profile_params = nlohmann::json::object();

    int grid_n = 0;  // 0 = automatic refinement
    int max_grid_n = 512;
    double tol = 1e-8;
    long max_steps = 20'000'000;
    /// Unset keeps each solver's own default.
    std::optional<double> max_T;
    std::string method = "auto";  // auto | steady | time_marching
    double d_min_steady = 0.1;
    int order = 0;
    std::optional<bool> implicit_diffusion;

    std::optional<std::vector<double>> A_list;
    std::optional<std::vector<double>> d_list;
    std::optional<std::vector<Vec2>> P_list;

    std::string csv;
    bool field_dump = false;
    std::string dump_format = "binary";
    std::string dump_dir = ".";
    std::string table;
    std::vector<std::string> columns;
    std::string gnuplot;
    std::string json_out;

    std::vector<double> eps_list{0.05, 0.1, 0.2};
    double bin_width = 1.0 / 64.0;
    bool with_transport = false;

    std::vector<double> p_list{1.0, 1.5, 2.0};
    double band_eps = 0.01;
    std::vector<double> N_list{2.0, 4.0, 8.0};
    std::string band_csv;
    std::string offcore_csv;

    std::string analyze_input;
    std::string law = "sqrt_log";
    bool fit = true;

    double budget_memory_mb = 1200.0;
    double budget_max_steps = 2e6;
    /// Pseudo-time used to turn a step size into a step-count estimate.
    double budget_est_T = 2.0;

    int workers = 0;  // 0 = available parallelism

    /// FNV-1a of the canonical JSON after overrides.
    std::string hash;
    nlohmann::json raw;
};

/// One (model, P, A, d) cell of a sweep.
struct SweepCell {
    std::string model;
    Vec2 P;
    double A;
    double d;
};

/// Reads a JSON file; ConfigError when unreadable or malformed.
nlohmann::json load_config_file(const std::string& path);
/// Applies "a.b.c=value"; value is parsed as JSON and falls back to a string.
void apply_override(nlohmann::json& config, const std::string& assignment);
/// ConfigError on unknown enum values, wrong types, empty lists or tol outside (0, 1e-2].
RunConfig parse_run_config(const nlohmann::json& config);

std::string config_hash(const nlohmann::json& config);

bool is_shear_model(const std::string& model);
ShearProfile make_profile(const RunConfig& cfg);
FlowField make_flow(const RunConfig& cfg, double amplitude);

/// Cartesian product P_list x d_list x A_list in that nesting order; absent
/// lists fall back to the single problem value.
std::vector<SweepCell> sweep_cells(const RunConfig& cfg);

}  // namespace gflame
