#pragma once

// Quasi-static plant. Backbone arc lengths are imposed by the grippers and the
// ballscrew; each tendon group bends its section until the three tendons carry
// equal tension (no backbone bending stiffness, no friction, no gravity).

#include <optional>

#include "ppcm/gripper.hpp"
#include "ppcm/multisection.hpp"

namespace ppcm {

struct PlantParameters {
    // Reference tendon: 39.24 N (4 kg) stretches a 1125 mm sample by 1.408%.
    double k_ref = 39.24 / 15.84;  // N/mm at L_ref
    double L_ref = 1125.0;         // mm
    double routing_length = 800.0;  // mm of tendon between spool and manipulator base
    double baseline = 0.0;          // N added to every tension reading
    double F_ref = 5.0;             // N, calibration pretension
    double tension_limit = 65.0;    // N
    double dt_max = 0.01;           // s
    double ballscrew_max_speed = 20.0;  // mm/s
    ZoneLayout zones;

    // Elastic stiffness of a tendon of total length `length` (mm).
    double stiffness(double length) const { return k_ref * L_ref / length; }

    void validate() const;

    bool operator==(const PlantParameters&) const = default;
};

// F = k(L) * max(0, stretch) + baseline, before saturation.
double elastic_tension(double stretch, double length, const PlantParameters& p);

struct TendonPlant {
    Vector9d spool = Vector9d::Zero();      // commanded free length inside the manipulator (mm)
    Vector9d spool_vel = Vector9d::Zero();  // last applied (mm/s)
    Vector9d tensions = Vector9d::Zero();   // measured, saturated at tension_limit (N)
};

struct PlantFlags {
    bool clamped = false;    // a limit clamp acted this step
    bool rejected = false;   // the step was refused and the previous state kept
    bool saturated = false;  // some tension reached tension_limit
    bool slack = false;      // some group had no taut equilibrium
    bool fault = false;      // controller fault this tick

    bool any() const { return clamped || rejected || saturated || slack || fault; }
    bool operator==(const PlantFlags&) const = default;
};

struct PlantState {
    ManipulatorConfig config;
    ActuatorLengths actuator;  // required path lengths, compose_actuator(config)
    TendonPlant tendon;
    GripperState grippers;
    double ballscrew_vel = 0.0;  // applied on the last step (mm/s)
    double time = 0.0;           // s
    PlantFlags flags;
};

struct TensionReading {
    Vector9d F = Vector9d::Zero();
    bool saturated = false;
};

struct Calibration {
    PlantState state;
    ActuatorLengths reference;  // kinematic zero
};

class Plant {
public:
    Plant(ManipulatorGeometry geometry, PlantParameters params);

    const ManipulatorGeometry& geometry() const { return geometry_; }
    const PlantParameters& params() const { return params_; }

    // Tube grippers open, d clamping tube 1 at the start of zone I, all
    // sections straight at s_min, every tendon at F_ref.
    Calibration calibrate(const PlantState& state) const;
    PlantState calibrated() const { return calibrate(PlantState{}).state; }

    // InvalidGripperCombination for a tuple outside the table (checked
    // first); GripperPreconditionError if the zone does not match the
    // ballscrew position or the ballscrew moved on the last step.
    PlantState apply_gripper_command(const PlantState& state, const GripperState& cmd) const;

    // InvalidInput for dt outside (0, dt_max] or non-finite velocities;
    // StepRejected when a tendon group cannot be resolved.
    PlantState step(const PlantState& state, const Vector9d& spool_vel, double ballscrew_vel, double dt) const;

    // Ballscrew velocity the plant will realize for `ballscrew_vel` over one
    // step: speed limit, zone interval, tube arc-length range and total length.
    // `clamped` is set when the request had to be reduced.
    double ballscrew_reach(const PlantState& state, double ballscrew_vel, double dt, bool* clamped = nullptr) const;

    TensionReading tendon_tensions(const PlantState& state) const;
    TensionReading tendon_tensions(const ActuatorLengths& required, const Vector9d& spool) const;

    // Spool free length that puts `tension` on a tendon whose path is `required`.
    double spool_for_tension(double required, double tension) const;

private:
    ManipulatorGeometry geometry_;
    PlantParameters params_;
};

}  // namespace ppcm
