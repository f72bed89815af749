#include "cerx/config.hpp"

#include "cerx/analytic.hpp"
#include "cerx/errors.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace cerx {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) {
        return "";
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double parse_number(const std::string& value, const std::string& key, const std::string& origin,
                    int line_no) {
    std::size_t pos = 0;
    double out = 0.0;
    try {
        out = std::stod(value, &pos);
    } catch (const std::exception&) {
        throw ConfigError(origin + ":" + std::to_string(line_no) + ": invalid number for '" + key +
                          "': " + value);
    }
    if (pos != value.size()) {
        throw ConfigError(origin + ":" + std::to_string(line_no) + ": trailing characters after '" +
                          key + "' value: " + value);
    }
    return out;
}

} // namespace

RunConfig parse_config(const std::string& text, const std::string& origin) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(origin + ":" + std::to_string(line_no) + ": expected 'name = value'");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const double v = parse_number(value, key, origin, line_no);

        if (key == "lf") {
            cfg.params.lf = v;
        } else if (key == "cf") {
            cfg.params.cf = v;
        } else if (key == "co") {
            cfg.params.co = v;
        } else if (key == "r") {
            cfg.params.r = v;
        } else if (key == "fs") {
            cfg.params.fs = v;
        } else if (key == "ils_amp") {
            cfg.params.ils_amp = v;
        } else if (key == "ls") {
            cfg.params.ls = v;
        } else if (key == "cs") {
            cfg.params.cs = v;
        } else if (key == "vo_nominal") {
            cfg.params.vo_nominal = v;
        } else if (key == "dt") {
            cfg.sim.dt = v;
        } else if (key == "ss_tol") {
            cfg.sim.ss_tolerance = v;
        } else if (key == "fc") {
            cfg.fc = v;
        } else if (key == "kp") {
            cfg.kp = v;
        } else if (key == "ki") {
            cfg.ki = v;
        } else if (key == "d0") {
            cfg.d0 = v;
        } else {
            throw ConfigError(origin + ":" + std::to_string(line_no) + ": unknown key '" + key + "'");
        }
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file: " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path);
}

double nominal_phase_ratio(const RunConfig& cfg) {
    if (cfg.d0) {
        return *cfg.d0;
    }
    const double arg = cfg.params.vo_nominal /
                       (analytic::WaveformConstants::k_gain * cfg.params.ils_amp * cfg.params.r);
    if (arg > 0.0 && arg < 1.0) {
        const double d = std::asin(arg) / 6.283185307179586476925286766559;
        if (d < 0.25) {
            return d;
        }
    }
    return 0.125;
}

} // namespace cerx
