#include "gflame/run_config.hpp"

#include <cstdio>
#include <fstream>

#include "gflame/error.hpp"
#include "gflame/shear.hpp"

namespace gflame {

using nlohmann::json;

json load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::ConfigError, "cannot open config file '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::ConfigError, "malformed config '" + path + "': " + e.what());
    }
}

void apply_override(json& config, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0)
        throw Error(ErrorKind::ConfigError, "override '" + assignment + "' is not key=value");
    const std::string key = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);
    json value;
    try {
        value = json::parse(text);
    } catch (const json::exception&) {
        value = text;
    }
    json* node = &config;
    std::size_t start = 0;
    while (true) {
        const auto dot = key.find('.', start);
        const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (part.empty()) throw Error(ErrorKind::ConfigError, "override key '" + key + "' has an empty segment");
        if (!node->is_object()) *node = json::object();
        if (dot == std::string::npos) {
            (*node)[part] = value;
            return;
        }
        node = &(*node)[part];
        start = dot + 1;
    }
}

std::string config_hash(const json& config) {
    const std::string text = config.dump();
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

bool is_shear_model(const std::string& model) {
    return model == "viscous_g" || model == "curvature_g" || model == "quadratic_jkm" || model == "limit_problem";
}

namespace {

template <class T>
void read(const json& block, const char* key, T& out) {
    if (block.contains(key)) out = block.at(key).get<T>();
}

Vec2 read_vec2(const json& j) {
    if (!j.is_array() || j.size() != 2) throw Error(ErrorKind::ConfigError, "direction must be a two-element array");
    return {j[0].get<double>(), j[1].get<double>()};
}

json block(const json& config, const char* name) {
    if (!config.contains(name)) return json::object();
    const json& b = config.at(name);
    if (!b.is_object()) throw Error(ErrorKind::ConfigError, std::string("block '") + name + "' must be an object");
    return b;
}

void require_one_of(const std::string& value, std::initializer_list<const char*> options, const char* what) {
    for (const char* o : options)
        if (value == o) return;
    throw Error(ErrorKind::ConfigError, std::string("invalid ") + what + " '" + value + "'");
}

template <class T>
std::optional<std::vector<T>> read_list(const json& b, const char* key) {
    if (!b.contains(key)) return std::nullopt;
    auto v = b.at(key).get<std::vector<T>>();
    if (v.empty()) throw Error(ErrorKind::ConfigError, std::string("sweep.") + key + " is empty");
    return v;
}

}  // namespace

RunConfig parse_run_config(const json& config) {
    if (!config.is_object()) throw Error(ErrorKind::ConfigError, "config root must be an object");
    RunConfig c;
    c.raw = config;
    c.hash = config_hash(config);
    try {
        read(config, "command", c.command);
        read(config, "workers", c.workers);

        const json problem = block(config, "problem");
        read(problem, "model", c.model);
        if (problem.contains("P")) c.P = read_vec2(problem.at("P"));
        read(problem, "d", c.d);
        read(problem, "s_l", c.s_l);

        const json flow = block(config, "flow");
        read(flow, "kind", c.flow_kind);
        read(flow, "amplitude", c.amplitude);
        read(flow, "normalization", c.normalization);
        read(flow, "profile", c.profile);
        if (flow.contains("profile_params")) c.profile_params = flow.at("profile_params");
        if (is_shear_model(c.model) && !flow.contains("kind")) c.flow_kind = "shear";

        const json num = block(config, "numerics");
        if (num.contains("grid_n")) {
            const json& g = num.at("grid_n");
            if (g.is_string()) {
                if (g.get<std::string>() != "auto") throw Error(ErrorKind::ConfigError, "numerics.grid_n must be an integer or \"auto\"");
                c.grid_n = 0;
            } else {
                c.grid_n = g.get<int>();
            }
        }
        read(num, "max_grid_n", c.max_grid_n);
        read(num, "tol", c.tol);
        if (num.contains("max_steps")) c.max_steps = static_cast<long>(num.at("max_steps").get<double>());
        if (num.contains("max_T")) c.max_T = num.at("max_T").get<double>();
        read(num, "method", c.method);
        read(num, "d_min_steady", c.d_min_steady);
        read(num, "order", c.order);
        if (num.contains("implicit_diffusion")) c.implicit_diffusion = num.at("implicit_diffusion").get<bool>();

        const json sweep = block(config, "sweep");
        c.A_list = read_list<double>(sweep, "A_list");
        c.d_list = read_list<double>(sweep, "d_list");
        if (sweep.contains("P_list")) {
            std::vector<Vec2> ps;
            for (const auto& p : sweep.at("P_list")) ps.push_back(read_vec2(p));
            if (ps.empty()) throw Error(ErrorKind::ConfigError, "sweep.P_list is empty");
            c.P_list = ps;
        }

        const json out = block(config, "output");
        read(out, "csv", c.csv);
        read(out, "field_dump", c.field_dump);
        read(out, "dump_format", c.dump_format);
        read(out, "dump_dir", c.dump_dir);
        read(out, "table", c.table);
        read(out, "columns", c.columns);
        read(out, "gnuplot", c.gnuplot);
        read(out, "json", c.json_out);

        const json diag = block(config, "diagnostics");
        read(diag, "eps_list", c.eps_list);
        read(diag, "bin_width", c.bin_width);
        read(diag, "with_transport", c.with_transport);

        const json tr = block(config, "transport");
        read(tr, "p_list", c.p_list);
        read(tr, "eps", c.band_eps);
        read(tr, "N_list", c.N_list);
        read(tr, "band_csv", c.band_csv);
        read(tr, "offcore_csv", c.offcore_csv);

        const json an = block(config, "analyze");
        read(an, "input", c.analyze_input);
        read(an, "law", c.law);
        read(an, "fit", c.fit);

        const json budget = block(config, "budget");
        read(budget, "memory_mb", c.budget_memory_mb);
        read(budget, "max_steps", c.budget_max_steps);
        read(budget, "est_T", c.budget_est_T);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::ConfigError, std::string("config type error: ") + e.what());
    }

    require_one_of(c.command, {"solve", "sweep", "diagnose", "transport", "analyze", "validate"}, "command");
    require_one_of(c.model, {"cellular", "viscous_g", "curvature_g", "quadratic_jkm", "limit_problem"}, "problem.model");
    require_one_of(c.flow_kind, {"zero", "cellular", "shear"}, "flow.kind");
    require_one_of(c.normalization, {"raw", "scaled"}, "flow.normalization");
    require_one_of(c.method, {"auto", "steady", "time_marching"}, "numerics.method");
    require_one_of(c.dump_format, {"binary", "csv"}, "output.dump_format");
    if (c.model == "cellular" && c.flow_kind == "shear")
        throw Error(ErrorKind::ConfigError, "2D cell problems support zero or cellular flows");
    if (is_shear_model(c.model) && c.flow_kind != "shear")
        throw Error(ErrorKind::ConfigError, "shear models need flow.kind = shear");
    if (!(c.tol > 0.0) || c.tol > 1e-2) throw Error(ErrorKind::ConfigError, "numerics.tol must lie in (0, 1e-2]");
    if (c.grid_n != 0 && c.grid_n < PeriodicGrid::min_nodes)
        throw Error(ErrorKind::ConfigError, "numerics.grid_n must be >= 8");
    if (c.max_grid_n < PeriodicGrid::min_nodes) throw Error(ErrorKind::ConfigError, "numerics.max_grid_n must be >= 8");
    if (c.order < 0 || c.order > 2) throw Error(ErrorKind::ConfigError, "numerics.order must be 0, 1 or 2");
    if (c.workers < 0) throw Error(ErrorKind::ConfigError, "workers must be >= 0");
    if (!(c.bin_width > 0.0) || c.bin_width > 1.0) throw Error(ErrorKind::ConfigError, "diagnostics.bin_width must lie in (0, 1]");
    if (c.eps_list.empty() || c.p_list.empty() || c.N_list.empty())
        throw Error(ErrorKind::ConfigError, "eps_list, p_list and N_list must be nonempty");
    if (c.flow_kind == "shear") (void)make_profile(c);
    return c;
}

ShearProfile make_profile(const RunConfig& cfg) {
    const json& p = cfg.profile_params;
    try {
        if (cfg.profile == "custom") {
            const double c0 = p.value("c0", 0.0);
            const auto a = p.value("cos", std::vector<double>{});
            const auto b = p.value("sin", std::vector<double>{});
            auto prof = ShearProfile::fourier(c0, a, b);
            if (prof.is_constant()) throw Error(ErrorKind::ConfigError, "custom shear profile is constant");
            return prof;
        }
        return make_shear_profile(cfg.profile, p.value("c", 1.0), p.value("eps", 0.3));
    } catch (const json::exception& e) {
        throw Error(ErrorKind::ConfigError, std::string("flow.profile_params: ") + e.what());
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::ConfigError) throw;
        throw Error(ErrorKind::ConfigError, e.what());
    }
}

FlowField make_flow(const RunConfig& cfg, double amplitude) {
    if (cfg.flow_kind == "zero" || amplitude == 0.0) {
        if (cfg.flow_kind == "shear") return FlowField::shear(0.0, make_profile(cfg));
        return FlowField::zero();
    }
    if (cfg.flow_kind == "cellular")
        return FlowField::cellular(amplitude, cfg.normalization == "raw" ? Normalization::raw : Normalization::scaled);
    return FlowField::shear(amplitude, make_profile(cfg));
}

std::vector<SweepCell> sweep_cells(const RunConfig& cfg) {
    const std::vector<Vec2> ps = cfg.P_list.value_or(std::vector<Vec2>{cfg.P});
    const std::vector<double> ds = cfg.d_list.value_or(std::vector<double>{cfg.d});
    const std::vector<double> as = cfg.A_list.value_or(std::vector<double>{cfg.amplitude});
    std::vector<SweepCell> cells;
    for (const Vec2& P : ps)
        for (double d : ds)
            for (double A : as) cells.push_back({cfg.model, P, A, d});
    return cells;
}

}  // namespace gflame
