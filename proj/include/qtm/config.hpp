// config.hpp - Flat key=value configuration files.
//
//   # comment
//   omega_c_ghz = 1.0
//
// Frequencies are ordinary frequencies in GHz. Keys not listed below are
// rejected, as are duplicates and non-numeric values. Missing keys keep the
// Nominal operating point.

#pragma once

#include <array>
#include <charconv>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qtm/errors.hpp"
#include "qtm/params.hpp"
#include "qtm/units.hpp"

namespace qtm {

struct Config {
    MachineParams machine{};
    MeasurementNoise noise{};
    double tc_mk{15.0};
    double g_fit_ratio{0.125};   // g = g_fit_ratio * E_J for the Gaussian model

    double g() const { return g_fit_ratio * machine.ej; }

    // Ordered (key, value) pairs in file units, for manifests.
    std::vector<std::pair<std::string, double>> key_values() const {
        return {
            {"omega_c_ghz", units::to_ghz(machine.omega_c)},
            {"omega_h_ghz", units::to_ghz(machine.omega_h)},
            {"kappa_c_ghz", units::to_ghz(machine.kappa_c)},
            {"kappa_h_ghz", units::to_ghz(machine.kappa_h)},
            {"ej_ghz", units::to_ghz(machine.ej)},
            {"lambda_c", machine.lambda_c},
            {"lambda_h", machine.lambda_h},
            {"delta_i_pa", noise.delta_i_pa},
            {"delta_th_mk", noise.delta_th_mk},
            {"tc_mk", tc_mk},
            {"g_fit_ratio", g_fit_ratio},
        };
    }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

inline double parse_number(std::string_view text, const std::string& where) {
    double value = 0.0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc{} || ptr != end || !std::isfinite(value))
        throw ConfigError(where + ": not a number: '" + std::string(text) + "'");
    return value;
}

} // namespace detail

inline Config parse_config(std::istream& in, const std::string& source = "<config>") {
    Config cfg;
    std::set<std::string> seen;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view view = line;
        if (auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
        view = detail::trim(view);
        if (view.empty()) continue;

        const std::string where = source + ":" + std::to_string(line_no);
        const auto eq = view.find('=');
        if (eq == std::string_view::npos) throw ConfigError(where + ": expected key = value");
        const std::string key{detail::trim(view.substr(0, eq))};
        const double v = detail::parse_number(detail::trim(view.substr(eq + 1)), where);
        if (!seen.insert(key).second) throw ConfigError(where + ": duplicate key '" + key + "'");

        auto& m = cfg.machine;
        if (key == "omega_c_ghz") m.omega_c = units::ghz(v);
        else if (key == "omega_h_ghz") m.omega_h = units::ghz(v);
        else if (key == "kappa_c_ghz") m.kappa_c = units::ghz(v);
        else if (key == "kappa_h_ghz") m.kappa_h = units::ghz(v);
        else if (key == "ej_ghz") m.ej = units::ghz(v);
        else if (key == "lambda_c") m.lambda_c = v;
        else if (key == "lambda_h") m.lambda_h = v;
        else if (key == "delta_i_pa") cfg.noise.delta_i_pa = v;
        else if (key == "delta_th_mk") cfg.noise.delta_th_mk = v;
        else if (key == "tc_mk") cfg.tc_mk = v;
        else if (key == "g_fit_ratio") cfg.g_fit_ratio = v;
        else throw ConfigError(where + ": unknown key '" + key + "'");
    }

    try {
        cfg.machine.validate();
    } catch (const DomainError& e) {
        throw ConfigError(source + ": " + e.what());
    }
    if (cfg.noise.delta_i_pa < 0.0 || cfg.noise.delta_th_mk < 0.0)
        throw ConfigError(source + ": noise levels must be non-negative");
    if (!(cfg.tc_mk > 0.0)) throw ConfigError(source + ": tc_mk must be positive");
    if (!(cfg.g_fit_ratio > 0.0)) throw ConfigError(source + ": g_fit_ratio must be positive");
    return cfg;
}

inline Config load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    return parse_config(in, path);
}

inline Config parse_config_string(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in);
}

} // namespace qtm
