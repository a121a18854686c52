#pragma once

#include "swfe/mesh.hpp"
#include "swfe/model.hpp"
#include "swfe/spaces.hpp"

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

namespace swfe {

/// Run configuration; the defaults reproduce the steady-balance experiment
/// (P1DG-P2, perturbed n=8 unit square, Ro=0.1, Fr=1.0, dt=0.01, 1000 steps,
/// direct solver).
struct RunConfig {
    std::string pair = "P1DG-P2";
    int n = 8;
    double perturb = 0.2;
    std::uint64_t mesh_seed = 1;
    std::string mesh_file;  // when set, load instead of generating
    double ro = 0.1;
    double fr = 1.0;
    std::optional<double> f_override, g_override, dbar_override;
    double dt = 0.01;
    int nsteps = 1000;
    std::uint64_t seed = 42;
    std::string output_dir = "./out";
    SolverKind solver = SolverKind::direct;
    double tol = 1e-12;
    int snapshot_interval = 0;  // 0 disables field snapshots
};

namespace detail {

inline double parse_double_value(const std::string& s, const std::string& key, int line_no) {
    std::istringstream iss(s);
    double v = 0.0;
    iss >> v;
    std::string rest;
    if (iss.fail() || (iss >> rest && !rest.empty()))
        throw ParseError("config: line " + std::to_string(line_no) + ": invalid value for '" + key + "'");
    return v;
}

inline long long parse_int_value(const std::string& s, const std::string& key, int line_no) {
    std::istringstream iss(s);
    long long v = 0;
    iss >> v;
    std::string rest;
    if (iss.fail() || (iss >> rest && !rest.empty()))
        throw ParseError("config: line " + std::to_string(line_no) + ": invalid value for '" + key + "'");
    return v;
}

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return {};
    return s.substr(a, s.find_last_not_of(" \t\r") - a + 1);
}

[[noreturn]] inline void config_fail(int line_no, const std::string& msg) {
    throw ParseError("config: line " + std::to_string(line_no) + ": " + msg);
}

}  // namespace detail

/// Parse line-oriented `key = value` configuration text; '#' starts a comment.
/// Unknown keys, unparsable values and constraint violations are reported with
/// their line number.
inline RunConfig parse_config(const std::string& text) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
        const std::string line = detail::trim(raw);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) detail::config_fail(line_no, "expected 'key = value'");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (key.empty()) detail::config_fail(line_no, "missing key");
        if (value.empty()) detail::config_fail(line_no, "missing value for '" + key + "'");

        if (key == "pair") {
            if (!is_known_pair(value)) detail::config_fail(line_no, "unknown pair '" + value + "'");
            cfg.pair = value;
        } else if (key == "n") {
            const long long v = detail::parse_int_value(value, key, line_no);
            if (v < 1) detail::config_fail(line_no, "n must be >= 1");
            cfg.n = static_cast<int>(v);
        } else if (key == "perturb") {
            const double v = detail::parse_double_value(value, key, line_no);
            if (!(v >= 0.0 && v <= 0.3)) detail::config_fail(line_no, "perturb must lie in [0, 0.3]");
            cfg.perturb = v;
        } else if (key == "mesh_seed") {
            cfg.mesh_seed = static_cast<std::uint64_t>(detail::parse_int_value(value, key, line_no));
        } else if (key == "mesh_file") {
            cfg.mesh_file = value;
        } else if (key == "ro") {
            const double v = detail::parse_double_value(value, key, line_no);
            if (!(v > 0.0)) detail::config_fail(line_no, "ro must be positive");
            cfg.ro = v;
        } else if (key == "fr") {
            const double v = detail::parse_double_value(value, key, line_no);
            if (!(v > 0.0)) detail::config_fail(line_no, "fr must be positive");
            cfg.fr = v;
        } else if (key == "f") {
            const double v = detail::parse_double_value(value, key, line_no);
            if (!(v >= 0.0)) detail::config_fail(line_no, "f must be nonnegative");
            cfg.f_override = v;
        } else if (key == "g") {
            const double v = detail::parse_double_value(value, key, line_no);
            if (!(v > 0.0)) detail::config_fail(line_no, "g must be positive");
            cfg.g_override = v;
        } else if (key == "dbar") {
            const double v = detail::parse_double_value(value, key, line_no);
            if (!(v > 0.0)) detail::config_fail(line_no, "dbar must be positive");
            cfg.dbar_override = v;
        } else if (key == "dt") {
            const double v = detail::parse_double_value(value, key, line_no);
            if (!(v > 0.0)) detail::config_fail(line_no, "dt must be positive");
            cfg.dt = v;
        } else if (key == "nsteps") {
            const long long v = detail::parse_int_value(value, key, line_no);
            if (v < 1) detail::config_fail(line_no, "nsteps must be >= 1");
            cfg.nsteps = static_cast<int>(v);
        } else if (key == "seed") {
            cfg.seed = static_cast<std::uint64_t>(detail::parse_int_value(value, key, line_no));
        } else if (key == "output_dir") {
            cfg.output_dir = value;
        } else if (key == "solver") {
            if (value == "direct")
                cfg.solver = SolverKind::direct;
            else if (value == "iterative")
                cfg.solver = SolverKind::iterative;
            else
                detail::config_fail(line_no, "solver must be 'direct' or 'iterative'");
        } else if (key == "tol") {
            const double v = detail::parse_double_value(value, key, line_no);
            if (!(v > 0.0)) detail::config_fail(line_no, "tol must be positive");
            cfg.tol = v;
        } else if (key == "snapshot_interval") {
            const long long v = detail::parse_int_value(value, key, line_no);
            if (v < 0) detail::config_fail(line_no, "snapshot_interval must be >= 0");
            cfg.snapshot_interval = static_cast<int>(v);
        } else {
            detail::config_fail(line_no, "unknown key '" + key + "'");
        }
    }
    return cfg;
}

inline RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("config: cannot open file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

inline ModelParams to_model_params(const RunConfig& cfg) {
    ModelParams p = params_from_ro_fr(cfg.ro, cfg.fr);
    if (cfg.f_override) p.f = *cfg.f_override;
    if (cfg.g_override) p.g = *cfg.g_override;
    if (cfg.dbar_override) p.dbar = *cfg.dbar_override;
    p.dt = cfg.dt;
    p.nsteps = cfg.nsteps;
    return p;
}

inline Mesh build_mesh(const RunConfig& cfg) {
    if (!cfg.mesh_file.empty()) {
        std::ifstream in(cfg.mesh_file);
        if (!in) throw ParseError("mesh: cannot open file '" + cfg.mesh_file + "'");
        std::ostringstream ss;
        ss << in.rdbuf();
        return load_mesh(ss.str());
    }
    return generate_square_mesh(cfg.n, cfg.perturb, cfg.mesh_seed);
}

}  // namespace swfe
