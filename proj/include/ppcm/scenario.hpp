#pragma once

// Line-based scenario scripts. One command per line, '#' starts a comment:
//
//   at 0 calibrate
//   at 0.5 gripper closed closed closed I closed     # a b c zone d
//   at 1 for 4 velocity in.kappa=0.0075 mid.phi=0.2  # rates add while overlapping
//   at 6 for 2 ballscrew -5                          # mm/s
//   end 23
//
// Velocity keys are <in|mid|out>.<kappa|phi|s>. Start times must not
// decrease; at most one gripper command per instant.

#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ppcm/controller.hpp"
#include "ppcm/gripper.hpp"

namespace ppcm {

struct CalibrateAction {
    bool operator==(const CalibrateAction&) const = default;
};
struct GripperAction {
    GripperState cmd;  // ballscrew_pos unused
    bool operator==(const GripperAction&) const = default;
};
struct VelocityAction {
    ConfigVelocity rate = ConfigVelocity::Zero();
    bool operator==(const VelocityAction&) const = default;
};
struct BallscrewAction {
    double rate = 0.0;  // mm/s
    bool operator==(const BallscrewAction&) const = default;
};

using ScriptAction = std::variant<CalibrateAction, GripperAction, VelocityAction, BallscrewAction>;

struct ScriptCommand {
    double start = 0.0;
    double duration = 0.0;  // zero for instantaneous actions
    ScriptAction action;
    int line = 0;

    bool operator==(const ScriptCommand&) const = default;
};

struct ScenarioScript {
    std::vector<ScriptCommand> commands;
    double end = 0.0;  // s

    bool operator==(const ScenarioScript&) const = default;
};

// Per-tick view of a script for a fixed tick period.
class TickSchedule {
public:
    TickSchedule(const ScenarioScript& script, double dt);

    long ticks() const { return ticks_; }
    double dt() const { return dt_; }

    ConfigVelocity velocity(long tick) const;
    // Explicit ballscrew rate, if a ballscrew segment covers this tick.
    std::optional<double> ballscrew(long tick) const;
    std::optional<GripperState> gripper(long tick) const;
    bool calibrate(long tick) const;

private:
    struct Span {
        long begin, end;  // [begin, end) in ticks
        ScriptAction action;
    };
    double dt_;
    long ticks_;
    std::vector<Span> spans_;
};

// ScriptError with the line number for malformed input.
ScenarioScript parse_scenario(const std::string& text);
ScenarioScript load_scenario(const std::filesystem::path& path);

}  // namespace ppcm
