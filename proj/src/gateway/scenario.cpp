#include "ppcm/scenario.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "ppcm/errors.hpp"

namespace ppcm {

namespace {

std::vector<std::string> words(const std::string& line) {
    std::istringstream in(line);
    std::vector<std::string> out;
    for (std::string w; in >> w;) out.push_back(w);
    return out;
}

[[noreturn]] void fail(int line, const std::string& what) {
    throw ScriptError("line " + std::to_string(line) + ": " + what);
}

double number(const std::string& w, int line) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(w.data(), w.data() + w.size(), v);
    if (ec != std::errc{} || ptr != w.data() + w.size() || !std::isfinite(v)) fail(line, "expected a number, got '" + w + "'");
    return v;
}

bool open_flag(const std::string& w, int line) {
    if (w == "open") return true;
    if (w == "closed") return false;
    fail(line, "expected open or closed, got '" + w + "'");
}

int velocity_index(const std::string& key, int line) {
    const auto dot = key.find('.');
    if (dot == std::string::npos) fail(line, "velocity key '" + key + "' must be <section>.<parameter>");
    const std::string sec = key.substr(0, dot);
    const std::string par = key.substr(dot + 1);
    int s = -1;
    for (int i = 0; i < kSections; ++i) {
        if (sec == section_name(i)) s = i;
    }
    int p = -1;
    if (par == "kappa") p = 0;
    if (par == "phi") p = 1;
    if (par == "s") p = 2;
    if (s < 0 || p < 0) fail(line, "unknown velocity key '" + key + "'");
    return 3 * s + p;
}

}  // namespace

ScenarioScript parse_scenario(const std::string& text) {
    ScenarioScript script;
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    bool have_end = false;
    double last_start = 0.0;
    double latest = 0.0;
    while (std::getline(in, raw)) {
        ++line;
        const auto hash = raw.find('#');
        const auto w = words(raw.substr(0, hash));
        if (w.empty()) continue;
        if (have_end) fail(line, "command after 'end'");
        if (w[0] == "end") {
            if (w.size() != 2) fail(line, "expected 'end <time>'");
            script.end = number(w[1], line);
            have_end = true;
            continue;
        }
        if (w[0] != "at" || w.size() < 3) fail(line, "expected 'at <time> <command>'");
        ScriptCommand cmd;
        cmd.line = line;
        cmd.start = number(w[1], line);
        if (cmd.start < 0.0) fail(line, "negative start time");
        if (cmd.start < last_start) fail(line, "start times must not decrease");
        last_start = cmd.start;

        std::size_t k = 2;
        if (w[k] == "for") {
            if (w.size() < k + 3) fail(line, "expected 'for <duration> <velocity|ballscrew> ...'");
            cmd.duration = number(w[k + 1], line);
            if (!(cmd.duration > 0.0)) fail(line, "duration must be > 0");
            k += 2;
            if (w[k] == "velocity") {
                VelocityAction v;
                if (w.size() == k + 1) fail(line, "velocity needs at least one key=value");
                for (std::size_t i = k + 1; i < w.size(); ++i) {
                    const auto eq = w[i].find('=');
                    if (eq == std::string::npos) fail(line, "expected key=value, got '" + w[i] + "'");
                    v.rate[velocity_index(w[i].substr(0, eq), line)] += number(w[i].substr(eq + 1), line);
                }
                cmd.action = v;
            } else if (w[k] == "ballscrew") {
                if (w.size() != k + 2) fail(line, "expected 'ballscrew <rate>'");
                cmd.action = BallscrewAction{number(w[k + 1], line)};
            } else {
                fail(line, "unknown timed command '" + w[k] + "'");
            }
        } else if (w[k] == "calibrate") {
            if (w.size() != k + 1) fail(line, "calibrate takes no arguments");
            cmd.action = CalibrateAction{};
        } else if (w[k] == "gripper") {
            if (w.size() != k + 6) fail(line, "expected 'gripper <a> <b> <c> <zone> <d>'");
            GripperAction g;
            g.cmd.a_open = open_flag(w[k + 1], line);
            g.cmd.b_open = open_flag(w[k + 2], line);
            g.cmd.c_open = open_flag(w[k + 3], line);
            const auto zone = parse_zone(w[k + 4]);
            if (!zone) fail(line, "zone must be I, II or III");
            g.cmd.zone = *zone;
            g.cmd.d_closed = !open_flag(w[k + 5], line);
            for (const auto& prev : script.commands) {
                if (std::holds_alternative<GripperAction>(prev.action) && prev.start == cmd.start) {
                    fail(line, "two gripper commands at the same time");
                }
            }
            cmd.action = g;
        } else {
            fail(line, "unknown command '" + w[k] + "'");
        }
        latest = std::max(latest, cmd.start + cmd.duration);
        script.commands.push_back(cmd);
    }
    if (!have_end) {
        script.end = latest;
    } else if (script.end < latest) {
        throw ScriptError("end time " + std::to_string(script.end) + " precedes the last command");
    }
    return script;
}

ScenarioScript load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ScriptError("cannot open script " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_scenario(buf.str());
    } catch (const ScriptError& e) {
        throw ScriptError(path.string() + ": " + e.what());
    }
}

TickSchedule::TickSchedule(const ScenarioScript& script, double dt)
    : dt_(dt), ticks_(std::lround(script.end / dt)) {
    for (const auto& c : script.commands) {
        const long begin = std::lround(c.start / dt);
        const long end = c.duration > 0.0 ? std::lround((c.start + c.duration) / dt) : begin + 1;
        spans_.push_back({begin, std::max(end, begin + 1), c.action});
    }
}

ConfigVelocity TickSchedule::velocity(long tick) const {
    ConfigVelocity v = ConfigVelocity::Zero();
    for (const auto& s : spans_) {
        if (tick < s.begin || tick >= s.end) continue;
        if (const auto* a = std::get_if<VelocityAction>(&s.action)) v += a->rate;
    }
    return v;
}

std::optional<double> TickSchedule::ballscrew(long tick) const {
    std::optional<double> out;
    for (const auto& s : spans_) {
        if (tick < s.begin || tick >= s.end) continue;
        if (const auto* a = std::get_if<BallscrewAction>(&s.action)) out = out.value_or(0.0) + a->rate;
    }
    return out;
}

std::optional<GripperState> TickSchedule::gripper(long tick) const {
    for (const auto& s : spans_) {
        if (s.begin != tick) continue;
        if (const auto* a = std::get_if<GripperAction>(&s.action)) return a->cmd;
    }
    return std::nullopt;
}

bool TickSchedule::calibrate(long tick) const {
    for (const auto& s : spans_) {
        if (s.begin == tick && std::holds_alternative<CalibrateAction>(s.action)) return true;
    }
    return false;
}

}  // namespace ppcm
