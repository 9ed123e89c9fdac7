#pragma once

// Configuration-space velocity control through the multisection inverse
// Jacobian, plus PID tension compensation that keeps every tendon near F_ref.
//
// Sign convention: a positive tension error (over-taut) yields a positive
// spool velocity, i.e. the tendon is paid out.

#include <optional>
#include <string>
#include <vector>

#include "ppcm/multisection.hpp"
#include "ppcm/plant.hpp"

namespace ppcm {

struct ControllerGains {
    Vector9d Kp = Vector9d::Constant(0.5);   // (mm/s)/N
    Vector9d Ki = Vector9d::Constant(0.3);   // (mm/s)/(N s)
    Vector9d Kd = Vector9d::Constant(0.01);  // (mm/s)/(N/s)
    Vector9d F_ref = Vector9d::Constant(5.0);  // N
    double integral_clamp = 20.0;    // N s, per tendon
    double derivative_tau = 0.05;    // s, low-pass on the error derivative
    double max_spool_speed = 50.0;   // mm/s, per tendon
    LimitCheck limit_mode = LimitCheck::Lenient;

    void validate() const;

    bool operator==(const ControllerGains&) const = default;
};

struct ControllerState {
    Vector9d F_i = Vector9d::Zero();         // N s
    Vector9d F_d = Vector9d::Zero();         // N/s, filtered
    Vector9d last_error = Vector9d::Zero();  // N

    bool operator==(const ControllerState&) const = default;
};

// (kappa_dot, phi_dot, s_dot) per section, proximal first.
using ConfigVelocity = Vector9d;

struct ControlOutput {
    Vector9d spool_vel = Vector9d::Zero();
    ControllerState state;
    Vector9d L_ik = Vector9d::Zero();
    Vector9d L_c = Vector9d::Zero();
    ConfigVelocity applied = ConfigVelocity::Zero();  // after the limit guard
    ManipulatorConfig config;                         // decoupled from the snapshot
    bool guarded = false;    // some commanded component was zeroed
    bool rate_limited = false;
    std::optional<std::string> fault;  // decoupling failed; output is zero
};

// Zeroes the components of `cmd` that would carry the configuration outside
// its limits within one tick. Strict mode throws LimitViolation instead.
ConfigVelocity limit_guard(const ConfigVelocity& cmd, const ManipulatorConfig& config,
                           const ManipulatorGeometry& geom, double dt, LimitCheck mode, bool* guarded = nullptr);

ControlOutput control_step(const ConfigVelocity& cmd, const PlantState& snapshot, const ManipulatorGeometry& geom,
                           const ControllerGains& gains, const ControllerState& cstate, double dt);

inline ControlOutput constant_force_mode(const PlantState& snapshot, const ManipulatorGeometry& geom,
                                         const ControllerGains& gains, const ControllerState& cstate, double dt) {
    return control_step(ConfigVelocity::Zero(), snapshot, geom, gains, cstate, dt);
}

}  // namespace ppcm
