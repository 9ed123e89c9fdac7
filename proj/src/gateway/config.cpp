#include "ppcm/config.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "ppcm/errors.hpp"

namespace ppcm {

using nlohmann::json;

int ProtocolSettings::broadcast_every() const {
    return std::max(1, static_cast<int>(std::lround(tick_hz / broadcast_hz)));
}

namespace {

// Shortest decimal degree value that reads back to the same radians.
double degrees_for(double rad) {
    char buf[32];
    for (int digits = 1; digits <= 17; ++digits) {
        std::snprintf(buf, sizeof buf, "%.*g", digits, rad_to_deg(rad));
        const double deg = std::strtod(buf, nullptr);
        if (deg_to_rad(deg) == rad) return deg;
    }
    return rad_to_deg(rad);
}

// Object reader: records which keys were consumed so leftovers can be reported.
class Reader {
public:
    Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
    }

    bool has(const char* key) {
        seen_.insert(key);
        return j_.contains(key);
    }

    double number(const char* key, double fallback) {
        if (!has(key)) return fallback;
        const json& v = j_.at(key);
        if (!v.is_number()) throw ConfigError(where(key) + ": expected a number");
        const double d = v.get<double>();
        if (!std::isfinite(d)) throw ConfigError(where(key) + ": not finite");
        return d;
    }

    int integer(const char* key, int fallback) {
        if (!has(key)) return fallback;
        const json& v = j_.at(key);
        if (!v.is_number_integer()) throw ConfigError(where(key) + ": expected an integer");
        return v.get<int>();
    }

    std::string text(const char* key, const std::string& fallback) {
        if (!has(key)) return fallback;
        const json& v = j_.at(key);
        if (!v.is_string()) throw ConfigError(where(key) + ": expected a string");
        return v.get<std::string>();
    }

    // A scalar broadcast to all nine tendons, or an array of nine.
    Vector9d nine(const char* key, const Vector9d& fallback) {
        if (!has(key)) return fallback;
        const json& v = j_.at(key);
        if (v.is_number()) return Vector9d::Constant(v.get<double>());
        if (!v.is_array() || v.size() != 9) throw ConfigError(where(key) + ": expected a number or 9 numbers");
        Vector9d out;
        for (int i = 0; i < 9; ++i) {
            if (!v[i].is_number()) throw ConfigError(where(key) + ": expected numbers");
            out[i] = v[i].get<double>();
        }
        return out;
    }

    const json& child(const char* key) {
        seen_.insert(key);
        return j_.at(key);
    }

    std::string where(const std::string& key) const { return path_ + "." + key; }

    void finish() const {
        for (const auto& [key, _] : j_.items()) {
            if (!seen_.count(key)) throw ConfigError(where(key) + ": unknown key");
        }
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

void read_section(const json& j, const std::string& path, SectionGeometry& g) {
    Reader r(j, path);
    g.n = r.integer("n", g.n);
    g.d = r.number("d", g.d);
    g.h = r.number("h", g.h);
    g.s_min = r.number("s_min", g.s_min);
    g.s_max = r.number("s_max", g.s_max);
    if (r.has("theta_max_deg")) g.theta_max = deg_to_rad(r.number("theta_max_deg", 0.0));
    g.kappa_max = r.has("kappa_max") ? r.number("kappa_max", 0.0) : g.theta_max / g.s_min;
    r.finish();
}

void read_geometry(const json& j, ManipulatorGeometry& g) {
    Reader r(j, "geometry");
    if (r.has("sections")) {
        const json& s = r.child("sections");
        if (!s.is_array() || s.size() != 3) throw ConfigError("geometry.sections: expected 3 sections");
        for (int i = 0; i < kSections; ++i) read_section(s[i], "geometry.sections[" + std::to_string(i) + "]", g[i]);
    }
    g.total_min = r.number("total_min", g.total_min);
    g.total_max = r.number("total_max", g.total_max);
    if (r.has("group_offset_deg")) g.group_offset = deg_to_rad(r.number("group_offset_deg", 0.0));
    r.finish();
}

void read_plant(const json& j, PlantParameters& p) {
    Reader r(j, "plant");
    p.k_ref = r.number("k_ref", p.k_ref);
    p.L_ref = r.number("L_ref", p.L_ref);
    p.routing_length = r.number("routing_length", p.routing_length);
    p.baseline = r.number("baseline", p.baseline);
    p.F_ref = r.number("F_ref", p.F_ref);
    p.tension_limit = r.number("tension_limit", p.tension_limit);
    p.dt_max = r.number("dt_max", p.dt_max);
    p.ballscrew_max_speed = r.number("ballscrew_max_speed", p.ballscrew_max_speed);
    p.zones.zone_length = r.number("zone_length", p.zones.zone_length);
    r.finish();
}

bool read_controller(const json& j, ControllerGains& c) {
    Reader r(j, "controller");
    c.Kp = r.nine("Kp", c.Kp);
    c.Ki = r.nine("Ki", c.Ki);
    c.Kd = r.nine("Kd", c.Kd);
    const bool explicit_ref = r.has("F_ref");
    c.F_ref = r.nine("F_ref", c.F_ref);
    c.integral_clamp = r.number("integral_clamp", c.integral_clamp);
    c.derivative_tau = r.number("derivative_tau", c.derivative_tau);
    c.max_spool_speed = r.number("max_spool_speed", c.max_spool_speed);
    const std::string mode = r.text("limit_mode", c.limit_mode == LimitCheck::Strict ? "strict" : "lenient");
    if (mode == "strict") {
        c.limit_mode = LimitCheck::Strict;
    } else if (mode == "lenient") {
        c.limit_mode = LimitCheck::Lenient;
    } else {
        throw ConfigError("controller.limit_mode: expected \"lenient\" or \"strict\"");
    }
    r.finish();
    return explicit_ref;
}

void read_protocol(const json& j, ProtocolSettings& p) {
    Reader r(j, "protocol");
    p.bind = r.text("bind", p.bind);
    p.tick_hz = r.number("tick_hz", p.tick_hz);
    p.broadcast_hz = r.number("broadcast_hz", p.broadcast_hz);
    p.watchdog_ms = r.number("watchdog_ms", p.watchdog_ms);
    p.polyline_samples = r.integer("polyline_samples", p.polyline_samples);
    r.finish();
}

void read_validation(const json& j, ValidationSettings& v) {
    Reader r(j, "validation");
    v.samples = r.integer("samples", v.samples);
    v.jacobian_samples = r.integer("jacobian_samples", v.jacobian_samples);
    if (r.has("seed")) {
        const json& s = r.child("seed");
        if (!s.is_number_unsigned()) throw ConfigError("validation.seed: expected a non-negative integer");
        v.seed = s.get<std::uint64_t>();
    }
    r.finish();
}

json nine_to_json(const Vector9d& v) {
    if ((v.array() == v[0]).all()) return v[0];
    json a = json::array();
    for (int i = 0; i < 9; ++i) a.push_back(v[i]);
    return a;
}

}  // namespace

void AppConfig::validate() const {
    try {
        geometry.validate();
    } catch (const InvalidInput& e) {
        throw ConfigError(std::string("geometry: ") + e.what());
    }
    try {
        plant.validate();
    } catch (const InvalidInput& e) {
        throw ConfigError(std::string("plant: ") + e.what());
    }
    try {
        controller.validate();
    } catch (const InvalidInput& e) {
        throw ConfigError(std::string("controller: ") + e.what());
    }
    if (!(protocol.tick_hz > 0.0) || 1.0 / protocol.tick_hz > plant.dt_max * (1.0 + 1e-12)) {
        throw ConfigError("protocol.tick_hz: tick period must be positive and not exceed plant.dt_max");
    }
    if (!(protocol.broadcast_hz > 0.0) || protocol.broadcast_hz > protocol.tick_hz) {
        throw ConfigError("protocol.broadcast_hz: must be in (0, tick_hz]");
    }
    if (!(protocol.watchdog_ms > 0.0)) throw ConfigError("protocol.watchdog_ms: must be > 0");
    if (protocol.polyline_samples < 2) throw ConfigError("protocol.polyline_samples: must be >= 2");
    if (protocol.bind.find(':') == std::string::npos) throw ConfigError("protocol.bind: expected host:port");
    if (validation.samples < 1 || validation.jacobian_samples < 1) {
        throw ConfigError("validation: sample counts must be >= 1");
    }
}

AppConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    AppConfig c;
    Reader r(j, "config");
    if (r.has("geometry")) read_geometry(r.child("geometry"), c.geometry);
    if (r.has("plant")) read_plant(r.child("plant"), c.plant);
    bool explicit_ref = false;
    if (r.has("controller")) explicit_ref = read_controller(r.child("controller"), c.controller);
    if (!explicit_ref) c.controller.F_ref.setConstant(c.plant.F_ref);
    if (r.has("protocol")) read_protocol(r.child("protocol"), c.protocol);
    if (r.has("validation")) read_validation(r.child("validation"), c.validation);
    r.finish();
    c.validate();
    return c;
}

AppConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_config(buf.str());
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

std::string config_to_json(const AppConfig& c) {
    json sections = json::array();
    for (const auto& s : c.geometry.sections) {
        sections.push_back({{"n", s.n},
                            {"d", s.d},
                            {"h", s.h},
                            {"s_min", s.s_min},
                            {"s_max", s.s_max},
                            {"theta_max_deg", degrees_for(s.theta_max)},
                            {"kappa_max", s.kappa_max}});
    }
    const json j = {
        {"geometry",
         {{"sections", sections},
          {"total_min", c.geometry.total_min},
          {"total_max", c.geometry.total_max},
          {"group_offset_deg", degrees_for(c.geometry.group_offset)}}},
        {"plant",
         {{"k_ref", c.plant.k_ref},
          {"L_ref", c.plant.L_ref},
          {"routing_length", c.plant.routing_length},
          {"baseline", c.plant.baseline},
          {"F_ref", c.plant.F_ref},
          {"tension_limit", c.plant.tension_limit},
          {"dt_max", c.plant.dt_max},
          {"ballscrew_max_speed", c.plant.ballscrew_max_speed},
          {"zone_length", c.plant.zones.zone_length}}},
        {"controller",
         {{"Kp", nine_to_json(c.controller.Kp)},
          {"Ki", nine_to_json(c.controller.Ki)},
          {"Kd", nine_to_json(c.controller.Kd)},
          {"F_ref", nine_to_json(c.controller.F_ref)},
          {"integral_clamp", c.controller.integral_clamp},
          {"derivative_tau", c.controller.derivative_tau},
          {"max_spool_speed", c.controller.max_spool_speed},
          {"limit_mode", c.controller.limit_mode == LimitCheck::Strict ? "strict" : "lenient"}}},
        {"protocol",
         {{"bind", c.protocol.bind},
          {"tick_hz", c.protocol.tick_hz},
          {"broadcast_hz", c.protocol.broadcast_hz},
          {"watchdog_ms", c.protocol.watchdog_ms},
          {"polyline_samples", c.protocol.polyline_samples}}},
        {"validation",
         {{"samples", c.validation.samples},
          {"jacobian_samples", c.validation.jacobian_samples},
          {"seed", c.validation.seed}}},
    };
    return j.dump(2) + "\n";
}

}  // namespace ppcm
