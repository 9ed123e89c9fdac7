#pragma once

// Declarative configuration file (JSON). Every key is optional; missing keys
// take the defaults below and unknown keys are an error.
//
// {
//   "geometry": {
//     "sections": [ {"n": 12, "d": 2.5, "h": 3, "s_min": 38, "s_max": 162,
//                    "theta_max_deg": 75, "kappa_max": <theta_max / s_min>}, ... x3 ],
//     "total_min": 160, "total_max": 502, "group_offset_deg": 40 },
//   "plant": { "k_ref", "L_ref", "routing_length", "baseline", "F_ref",
//              "tension_limit", "dt_max", "ballscrew_max_speed", "zone_length" },
//   "controller": { "Kp", "Ki", "Kd", "F_ref" (number or 9 numbers),
//                   "integral_clamp", "derivative_tau", "max_spool_speed",
//                   "limit_mode": "lenient" | "strict" },
//   "protocol": { "bind": "127.0.0.1:8765", "tick_hz": 100, "broadcast_hz": 30,
//                 "watchdog_ms": 500, "polyline_samples": 8 },
//   "validation": { "samples": 10000, "jacobian_samples": 1000, "seed": 1 }
// }
//
// controller.F_ref defaults to plant.F_ref when absent.

#include <cstdint>
#include <filesystem>
#include <string>

#include "ppcm/controller.hpp"
#include "ppcm/multisection.hpp"
#include "ppcm/plant.hpp"

namespace ppcm {

struct ProtocolSettings {
    std::string bind = "127.0.0.1:8765";
    double tick_hz = 100.0;
    double broadcast_hz = 30.0;
    double watchdog_ms = 500.0;
    int polyline_samples = 8;  // per section

    double dt() const { return 1.0 / tick_hz; }
    // Ticks between snapshot broadcasts, at least 1.
    int broadcast_every() const;

    bool operator==(const ProtocolSettings&) const = default;
};

struct ValidationSettings {
    int samples = 10000;
    int jacobian_samples = 1000;
    std::uint64_t seed = 1;

    bool operator==(const ValidationSettings&) const = default;
};

struct AppConfig {
    ManipulatorGeometry geometry = ManipulatorGeometry::defaults();
    PlantParameters plant;
    ControllerGains controller;
    ProtocolSettings protocol;
    ValidationSettings validation;

    // Throws ConfigError naming the offending field.
    void validate() const;

    bool operator==(const AppConfig&) const = default;
};

// ConfigError on malformed JSON, wrong types, unknown keys or invalid values.
AppConfig parse_config(const std::string& json_text);
AppConfig load_config(const std::filesystem::path& path);
std::string config_to_json(const AppConfig& config);

}  // namespace ppcm
