#pragma once

#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include "sdfv/cases.hpp"

namespace sdfv {

/// A parsed run configuration: the case name plus optional overrides.
/// The line-oriented file format is `key = value` with optional [section]
/// headers; every key belongs to a fixed schema and may be given bare or
/// inside its section.
struct RunConfig {
    std::string case_name;

    std::optional<int> nx, ny, nz;
    std::optional<std::string> mode, solver, detector_fields;
    std::optional<bool> tvd;
    std::optional<double> weno_epsilon, epsilon_s, dt, cfl, final_time, steady_tol, ausm_minf;
    std::optional<long> max_steps;
    std::optional<int> hysteresis_steps;

    std::string output_dir = "out";
    int cadence = 0;  // sensor-map/progress output interval in steps; 0 = final only
    int workers = 1;
    bool write_profile = true;
    bool write_field = true;
    bool write_sensor = true;
};

namespace config_detail {

inline std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

// key -> section of the schema; bare keys are accepted everywhere.
inline const std::map<std::string, std::string>& schema() {
    static const std::map<std::string, std::string> s = {
        {"case", ""},           {"workers", ""},
        {"nx", "mesh"},         {"ny", "mesh"},          {"nz", "mesh"},
        {"mode", "scheme"},     {"solver", "scheme"},    {"tvd", "scheme"},
        {"weno_epsilon", "scheme"}, {"epsilon_s", "scheme"},
        {"detector_fields", "scheme"}, {"hysteresis_steps", "scheme"},
        {"ausm_minf", "scheme"},
        {"dt", "time"},         {"cfl", "time"},         {"final_time", "time"},
        {"max_steps", "time"},  {"steady_tol", "time"},
        {"dir", "output"},      {"cadence", "output"},   {"profile", "output"},
        {"field", "output"},    {"sensor_map", "output"},
    };
    return s;
}

inline bool parse_bool(const std::string& v, const std::string& key, int line) {
    if (v == "on" || v == "true" || v == "1" || v == "yes") return true;
    if (v == "off" || v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("line " + std::to_string(line) + ": key '" + key +
                      "' expects a boolean, got '" + v + "'");
}

inline double parse_num(const std::string& v, const std::string& key, int line) {
    try {
        size_t pos = 0;
        double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return x;
    } catch (...) {
        throw ConfigError("line " + std::to_string(line) + ": key '" + key +
                          "' expects a number, got '" + v + "'");
    }
}

}  // namespace config_detail

/// Apply one key=value assignment (used by both file parsing and CLI
/// --override handling; `where` names the source for error messages).
inline void apply_key(RunConfig& cfg, std::string key, const std::string& value,
                      const std::string& section, int line) {
    using namespace config_detail;
    // accept section-qualified names: scheme.solver
    auto dot = key.find('.');
    std::string key_section = section;
    if (dot != std::string::npos) {
        key_section = key.substr(0, dot);
        key = key.substr(dot + 1);
    }
    auto it = schema().find(key);
    if (it == schema().end())
        throw ConfigError("line " + std::to_string(line) + ": unknown key '" + key + "'");
    if (!key_section.empty() && key_section != it->second)
        throw ConfigError("line " + std::to_string(line) + ": key '" + key +
                          "' does not belong to section [" + key_section + "]");

    if (key == "case") {
        cfg.case_name = value;
        // existence check happens here so the error names the key
        make_case(value);
    } else if (key == "workers") {
        cfg.workers = static_cast<int>(parse_num(value, key, line));
        if (cfg.workers < 1)
            throw ConfigError("line " + std::to_string(line) + ": workers must be >= 1");
    } else if (key == "nx" || key == "ny" || key == "nz") {
        int v = static_cast<int>(parse_num(value, key, line));
        if (v < 1) throw ConfigError("line " + std::to_string(line) + ": " + key + " must be >= 1");
        (key == "nx" ? cfg.nx : key == "ny" ? cfg.ny : cfg.nz) = v;
    } else if (key == "mode") {
        mode_from_name(value);
        cfg.mode = value;
    } else if (key == "solver") {
        solver_from_name(value);
        cfg.solver = value;
    } else if (key == "tvd") {
        cfg.tvd = parse_bool(value, key, line);
    } else if (key == "weno_epsilon") {
        double v = parse_num(value, key, line);
        if (!(v > 0)) throw ConfigError("line " + std::to_string(line) + ": weno_epsilon must be > 0");
        cfg.weno_epsilon = v;
    } else if (key == "epsilon_s") {
        double v = parse_num(value, key, line);
        if (!(v > 0)) throw ConfigError("line " + std::to_string(line) + ": epsilon_s must be > 0");
        cfg.epsilon_s = v;
    } else if (key == "detector_fields") {
        if (value != "density" && value != "pressure" && value != "density,pressure" &&
            value != "pressure,density")
            throw ConfigError("line " + std::to_string(line) +
                              ": detector_fields expects density|pressure|density,pressure");
        cfg.detector_fields = value;
    } else if (key == "hysteresis_steps") {
        cfg.hysteresis_steps = static_cast<int>(parse_num(value, key, line));
    } else if (key == "ausm_minf") {
        cfg.ausm_minf = parse_num(value, key, line);
    } else if (key == "dt") {
        double v = parse_num(value, key, line);
        if (!(v > 0)) throw ConfigError("line " + std::to_string(line) + ": dt must be > 0");
        cfg.dt = v;
    } else if (key == "cfl") {
        double v = parse_num(value, key, line);
        if (!(v > 0)) throw ConfigError("line " + std::to_string(line) + ": cfl must be > 0");
        cfg.cfl = v;
    } else if (key == "final_time") {
        cfg.final_time = parse_num(value, key, line);
    } else if (key == "max_steps") {
        cfg.max_steps = static_cast<long>(parse_num(value, key, line));
    } else if (key == "steady_tol") {
        cfg.steady_tol = parse_num(value, key, line);
    } else if (key == "dir") {
        cfg.output_dir = value;
    } else if (key == "cadence") {
        cfg.cadence = static_cast<int>(parse_num(value, key, line));
    } else if (key == "profile") {
        cfg.write_profile = parse_bool(value, key, line);
    } else if (key == "field") {
        cfg.write_field = parse_bool(value, key, line);
    } else if (key == "sensor_map") {
        cfg.write_sensor = parse_bool(value, key, line);
    }
}

inline RunConfig parse_config(const std::string& text) {
    using namespace config_detail;
    RunConfig cfg;
    std::istringstream in(text);
    std::string raw, section;
    int line = 0;
    bool have_case = false;
    while (std::getline(in, raw)) {
        ++line;
        std::string s = trim(raw);
        if (s.empty() || s[0] == '#' || s[0] == ';') continue;
        if (s.front() == '[') {
            if (s.back() != ']')
                throw ConfigError("line " + std::to_string(line) + ": malformed section header");
            section = trim(s.substr(1, s.size() - 2));
            if (section != "mesh" && section != "scheme" && section != "time" && section != "output")
                throw ConfigError("line " + std::to_string(line) + ": unknown section [" + section + "]");
            continue;
        }
        auto eq = s.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line) + ": expected key = value");
        std::string key = trim(s.substr(0, eq));
        std::string value = trim(s.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError("line " + std::to_string(line) + ": empty key or value");
        apply_key(cfg, key, value, section, line);
        if (key == "case" || key.substr(key.find('.') + 1) == "case") have_case = true;
    }
    if (!have_case) throw ConfigError("missing required key 'case'");
    return cfg;
}

inline RunConfig parse_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str());
}

inline std::string serialize_config(const RunConfig& c) {
    std::ostringstream o;
    o.precision(17);
    o << "case = " << c.case_name << "\n";
    o << "workers = " << c.workers << "\n";
    o << "[mesh]\n";
    if (c.nx) o << "nx = " << *c.nx << "\n";
    if (c.ny) o << "ny = " << *c.ny << "\n";
    if (c.nz) o << "nz = " << *c.nz << "\n";
    o << "[scheme]\n";
    if (c.mode) o << "mode = " << *c.mode << "\n";
    if (c.solver) o << "solver = " << *c.solver << "\n";
    if (c.tvd) o << "tvd = " << (*c.tvd ? "on" : "off") << "\n";
    if (c.weno_epsilon) o << "weno_epsilon = " << *c.weno_epsilon << "\n";
    if (c.epsilon_s) o << "epsilon_s = " << *c.epsilon_s << "\n";
    if (c.detector_fields) o << "detector_fields = " << *c.detector_fields << "\n";
    if (c.hysteresis_steps) o << "hysteresis_steps = " << *c.hysteresis_steps << "\n";
    if (c.ausm_minf) o << "ausm_minf = " << *c.ausm_minf << "\n";
    o << "[time]\n";
    if (c.dt) o << "dt = " << *c.dt << "\n";
    if (c.cfl) o << "cfl = " << *c.cfl << "\n";
    if (c.final_time) o << "final_time = " << *c.final_time << "\n";
    if (c.max_steps) o << "max_steps = " << *c.max_steps << "\n";
    if (c.steady_tol) o << "steady_tol = " << *c.steady_tol << "\n";
    o << "[output]\n";
    o << "dir = " << c.output_dir << "\n";
    o << "cadence = " << c.cadence << "\n";
    o << "profile = " << (c.write_profile ? "on" : "off") << "\n";
    o << "field = " << (c.write_field ? "on" : "off") << "\n";
    o << "sensor_map = " << (c.write_sensor ? "on" : "off") << "\n";
    return o.str();
}

/// Materialize the case with all overrides applied.
inline CaseDefinition resolve_case(const RunConfig& cfg) {
    CaseDefinition c = make_case(cfg.case_name);
    if (cfg.nx && !cfg.ny && !cfg.nz && c.apply_mesh) {
        c.apply_mesh(c, *cfg.nx);
    } else {
        if (cfg.nx) c.nx = *cfg.nx;
        if (cfg.ny) c.ny = *cfg.ny;
        if (cfg.nz) c.nz = *cfg.nz;
    }
    if (cfg.mode) c.mode = mode_from_name(*cfg.mode);
    if (cfg.solver) c.solver = solver_from_name(*cfg.solver);
    if (cfg.tvd) c.tvd = *cfg.tvd;
    if (cfg.weno_epsilon) c.weno_epsilon = *cfg.weno_epsilon;
    if (cfg.epsilon_s) c.detector.epsilon_s = *cfg.epsilon_s;
    if (cfg.detector_fields) {
        c.detector.on_density = cfg.detector_fields->find("density") != std::string::npos;
        c.detector.on_pressure = cfg.detector_fields->find("pressure") != std::string::npos;
    }
    if (cfg.hysteresis_steps) c.detector.hysteresis_steps = *cfg.hysteresis_steps;
    if (cfg.ausm_minf) c.ausm_minf = *cfg.ausm_minf;
    if (cfg.dt) {
        c.dt = *cfg.dt;
        c.cfl = 0.0;
    }
    if (cfg.cfl) {
        c.cfl = *cfg.cfl;
        c.dt = 0.0;
    }
    if (cfg.final_time) {
        c.final_time = *cfg.final_time;
        c.steady = false;
    }
    if (cfg.max_steps) c.max_steps = *cfg.max_steps;
    if (cfg.steady_tol) c.steady_tol = *cfg.steady_tol;
    return c;
}

/// Environment overrides (spec'd): output directory and worker count.
inline void apply_env(RunConfig& cfg) {
    if (const char* d = std::getenv("SDFV_OUTPUT_DIR")) cfg.output_dir = d;
    if (const char* w = std::getenv("SDFV_WORKERS")) {
        int n = std::atoi(w);
        if (n >= 1) cfg.workers = n;
    }
}

}  // namespace sdfv
