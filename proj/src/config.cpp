#include "qnd/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace qnd {

std::vector<double> SweepConfig::grid() const {
    if (points < 2) throw std::runtime_error("sweep: points must be >= 2");
    std::vector<double> g(static_cast<std::size_t>(points));
    if (spacing == "log") {
        if (!(min > 0.0) || !(max > 0.0))
            throw std::runtime_error("sweep: log spacing needs positive bounds");
        const double l0 = std::log(min), l1 = std::log(max);
        for (int i = 0; i < points; ++i)
            g[std::size_t(i)] =
                std::exp(l0 + (l1 - l0) * double(i) / double(points - 1));
    } else if (spacing == "linear") {
        for (int i = 0; i < points; ++i)
            g[std::size_t(i)] = min + (max - min) * double(i) / double(points - 1);
    } else {
        throw std::runtime_error("sweep: unknown spacing '" + spacing + "'");
    }
    return g;
}

namespace {

[[noreturn]] void fail(int line, const std::string& msg) {
    throw std::runtime_error("config line " + std::to_string(line) + ": " + msg);
}

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

double to_double(const std::string& key, const std::string& v, int line) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing");
        if (!std::isfinite(x)) throw std::invalid_argument("nonfinite");
        return x;
    } catch (const std::exception&) {
        fail(line, "key '" + key + "': cannot parse number '" + v + "'");
    }
}

long to_long(const std::string& key, const std::string& v, int line) {
    try {
        std::size_t pos = 0;
        const long x = std::stol(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing");
        return x;
    } catch (const std::exception&) {
        fail(line, "key '" + key + "': cannot parse integer '" + v + "'");
    }
}

}  // namespace

RunConfig parse_config(std::istream& in) {
    RunConfig cfg;
    std::string section;
    SweepConfig* sweep = nullptr;

    // Temperature-based occupation inputs, resolved after the full parse.
    double omega1 = -1.0, temp_thermal = -1.0, temp_meas = -1.0, temp_system = -1.0;
    int omega1_line = 0;

    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::string s = trim(raw);
        const auto cut = s.find_first_of("#;");
        if (cut != std::string::npos) s = trim(s.substr(0, cut));
        if (s.empty()) continue;

        if (s.front() == '[') {
            if (s.back() != ']') fail(line, "unterminated section header");
            section = trim(s.substr(1, s.size() - 2));
            sweep = nullptr;
            if (section == "sweep" || section == "sweep2") {
                if (cfg.sweeps.size() >= 2)
                    fail(line, "at most 2 sweep sections allowed");
                cfg.sweeps.emplace_back();
                sweep = &cfg.sweeps.back();
            } else if (section == "geometry") {
                cfg.has_geometry = true;
            } else if (section != "system" && section != "ancilla" &&
                       section != "coupling" && section != "output" &&
                       section != "run") {
                fail(line, "unknown section '" + section + "'");
            }
            continue;
        }

        const auto eq = s.find('=');
        if (eq == std::string::npos) fail(line, "expected 'key = value'");
        const std::string key = trim(s.substr(0, eq));
        const std::string val = trim(s.substr(eq + 1));
        if (key.empty()) fail(line, "empty key");
        if (val.empty()) fail(line, "key '" + key + "': empty value");
        if (section.empty()) fail(line, "key '" + key + "' outside any section");

        if (section == "system") {
            if (key == "omega0") cfg.system.omega0 = to_double(key, val, line);
            else if (key == "lambda00") cfg.system.lambda00 = to_double(key, val, line);
            else if (key == "nu") cfg.system.nu = to_double(key, val, line);
            else if (key == "quality")
                cfg.system.nu = nu_from_quality(cfg.system.omega0, to_double(key, val, line));
            else if (key == "N0") cfg.system.N0 = to_double(key, val, line);
            else if (key == "temperature") temp_system = to_double(key, val, line);
            else fail(line, "unknown key '" + key + "' in [system]");
        } else if (section == "ancilla") {
            auto& a = cfg.ancilla;
            if (key == "delta_omega") a.delta_omega = to_double(key, val, line);
            else if (key == "lambda11") a.lambda11 = to_double(key, val, line);
            else if (key == "epsilon") a.epsilon = to_double(key, val, line);
            else if (key == "damping_thermal") a.damping_thermal = to_double(key, val, line);
            else if (key == "damping_measurement") a.damping_measurement = to_double(key, val, line);
            else if (key == "occupation_thermal") a.occupation_thermal = to_double(key, val, line);
            else if (key == "occupation_measurement") a.occupation_measurement = to_double(key, val, line);
            else if (key == "omega1") { omega1 = to_double(key, val, line); omega1_line = line; }
            else if (key == "temperature_thermal") temp_thermal = to_double(key, val, line);
            else if (key == "temperature_measurement") temp_meas = to_double(key, val, line);
            else fail(line, "unknown key '" + key + "' in [ancilla]");
        } else if (section == "coupling") {
            if (key == "lambda01") cfg.coupling.lambda01 = to_double(key, val, line);
            else fail(line, "unknown key '" + key + "' in [coupling]");
        } else if (section == "geometry") {
            auto& g = cfg.geometry;
            if (key == "bulk_modulus") g.bulk_modulus = to_double(key, val, line);
            else if (key == "density") g.density = to_double(key, val, line);
            else if (key == "length") g.length = to_double(key, val, line);
            else if (key == "width") g.width = to_double(key, val, line);
            else if (key == "thickness") g.thickness = to_double(key, val, line);
            else if (key == "mode_frequency") g.mode_frequency = to_double(key, val, line);
            else fail(line, "unknown key '" + key + "' in [geometry]");
        } else if (sweep != nullptr) {
            if (key == "variable") sweep->variable = val;
            else if (key == "min") sweep->min = to_double(key, val, line);
            else if (key == "max") sweep->max = to_double(key, val, line);
            else if (key == "points") {
                const long n = to_long(key, val, line);
                if (n < 2 || n > 100000000L) fail(line, "points out of range");
                sweep->points = int(n);
            } else if (key == "spacing") {
                if (val != "linear" && val != "log")
                    fail(line, "spacing must be 'linear' or 'log'");
                sweep->spacing = val;
            } else fail(line, "unknown key '" + key + "' in [" + section + "]");
        } else if (section == "output") {
            if (key == "path") cfg.output_path = val;
            else if (key == "format") {
                if (val != "csv" && val != "json")
                    fail(line, "format must be 'csv' or 'json'");
                cfg.output_format = val;
            } else fail(line, "unknown key '" + key + "' in [output]");
        } else if (section == "run") {
            if (key == "seed") {
                const long n = to_long(key, val, line);
                if (n < 0) fail(line, "seed must be non-negative");
                cfg.seed = std::uint64_t(n);
            } else if (key == "tolerance") {
                cfg.tolerance = to_double(key, val, line);
                if (!(cfg.tolerance > 0.0)) fail(line, "tolerance must be > 0");
            } else fail(line, "unknown key '" + key + "' in [run]");
        }
    }

    if (temp_thermal >= 0.0 || temp_meas >= 0.0) {
        if (omega1 <= 0.0)
            fail(omega1_line ? omega1_line : line,
                 "temperature-based occupations need a positive 'omega1'");
        if (temp_thermal >= 0.0)
            cfg.ancilla.occupation_thermal = bose_occupation(omega1, temp_thermal);
        if (temp_meas >= 0.0)
            cfg.ancilla.occupation_measurement = bose_occupation(omega1, temp_meas);
    }
    if (temp_system >= 0.0) {
        if (cfg.system.omega0 <= 0.0)
            fail(line, "system temperature needs a positive 'omega0'");
        cfg.system.N0 = bose_occupation(cfg.system.omega0, temp_system);
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
    return parse_config(in);
}

}  // namespace qnd
