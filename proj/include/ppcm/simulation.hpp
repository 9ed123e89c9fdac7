#pragma once

// Authoritative simulation loop: one plant, one controller, fixed tick.

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "ppcm/config.hpp"
#include "ppcm/scenario.hpp"
#include "ppcm/telemetry.hpp"

namespace ppcm {

struct TickInput {
    ConfigVelocity cdot = ConfigVelocity::Zero();
    std::optional<double> ballscrew;  // explicit rate; otherwise follows the controllable tube's s rate
    std::optional<GripperState> gripper;
    bool calibrate = false;
};

struct TickResult {
    TelemetryRecord record;
    ConfigVelocity applied = ConfigVelocity::Zero();  // after structural zeroing and the limit guard
    std::optional<std::string> gripper_error;
    std::optional<std::string> step_error;
    std::optional<std::string> fault;
};

class Simulation {
public:
    explicit Simulation(AppConfig config);

    const AppConfig& config() const { return config_; }
    const Plant& plant() const { return plant_; }
    const PlantState& state() const { return state_; }
    const ControllerState& controller_state() const { return cstate_; }

    // Starts from the calibrated posture at t = 0.
    void reset();

    TickResult tick(const TickInput& input);

private:
    AppConfig config_;
    Plant plant_;
    PlantState state_;
    ControllerState cstate_;
};

struct SectionTrace {
    double max_drift = 0.0;     // |kappa - reference| while the section has no kappa command (1/mm)
    double max_tracking = 0.0;  // relative |kappa - reference| / |reference| inside its windows after the transient
};

struct RunReport {
    long ticks = 0;
    long clamped = 0;
    long rejected_steps = 0;
    long rejected_grippers = 0;
    long saturated = 0;
    long slack = 0;
    long faults = 0;
    long limit_violations = 0;  // post-step validate_limits entries
    double total_length_min = 0.0;
    double total_length_max = 0.0;
    double tension_min = 0.0;
    double tension_max = 0.0;
    std::array<SectionTrace, kSections> sections{};
    std::vector<std::string> events;  // first few rejections and faults, with times

    // No rejected steps, no controller faults and no limit violations.
    bool ok() const { return rejected_steps == 0 && faults == 0 && limit_violations == 0; }
    std::string summary() const;
};

struct RunResult {
    std::vector<TelemetryRecord> records;
    RunReport report;
};

// Transient excluded from tracking after a section's kappa command changes.
inline constexpr double kTrackingTransient = 0.5;  // s

// Deterministic headless run; `fail_fast` escalates the first rejected step to SimFault.
RunResult run_scenario(const ScenarioScript& script, const AppConfig& config, bool fail_fast = false);

// Drift and tracking of each section's kappa against the integral of the
// scripted kappa rates, restarted at every calibrate. Works on imported
// telemetry as well.
std::array<SectionTrace, kSections> kappa_traces(const std::vector<TelemetryRecord>& records,
                                                 const ScenarioScript& script, double dt);

}  // namespace ppcm
