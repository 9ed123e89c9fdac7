#include "ppcm/controller.hpp"

#include <cmath>

#include "ppcm/errors.hpp"

namespace ppcm {

void ControllerGains::validate() const {
    if (!Kp.allFinite() || !Ki.allFinite() || !Kd.allFinite() || !F_ref.allFinite()) {
        throw InvalidInput("controller gains must be finite");
    }
    if (!(integral_clamp > 0.0) || !std::isfinite(integral_clamp)) throw InvalidInput("integral_clamp must be > 0");
    if (!(derivative_tau >= 0.0) || !std::isfinite(derivative_tau)) throw InvalidInput("derivative_tau must be >= 0");
    if (!(max_spool_speed > 0.0) || !std::isfinite(max_spool_speed)) throw InvalidInput("max_spool_speed must be > 0");
}

ConfigVelocity limit_guard(const ConfigVelocity& cmd, const ManipulatorConfig& config,
                           const ManipulatorGeometry& geom, double dt, LimitCheck mode, bool* guarded) {
    ConfigVelocity out = cmd;
    bool any = false;
    // Two passes: zeroing an arc-length rate can clear a total-length violation.
    for (int pass = 0; pass < 2; ++pass) {
        const ManipulatorConfig next = ManipulatorConfig::from(config.vec() + out * dt);
        const auto violations = validate_limits(next, geom);
        if (violations.empty()) break;
        if (mode == LimitCheck::Strict) throw LimitViolation("command leaves limits: " + violations.front().describe());
        for (const auto& v : violations) {
            const bool upper = v.value > v.bound;
            auto cut = [&](int k) {
                if ((upper && out[k] > 0.0) || (!upper && out[k] < 0.0)) {
                    out[k] = 0.0;
                    any = true;
                }
            };
            // Single-variable limits: stop exactly on the bound.
            auto reach = [&](int k) {
                if ((upper && out[k] > 0.0) || (!upper && out[k] < 0.0)) {
                    const double rate = (v.bound - config.vec()[k]) / dt;
                    out[k] = (upper ? rate > 0.0 : rate < 0.0) ? rate : 0.0;
                    any = true;
                }
            };
            if (v.section < 0) {
                for (int sec = 0; sec < kSections; ++sec) cut(3 * sec + 2);
                continue;
            }
            switch (v.parameter) {
                case LimitParameter::ArcLength: reach(3 * v.section + 2); break;
                case LimitParameter::Curvature: reach(3 * v.section); break;
                case LimitParameter::Bend: {
                    cut(3 * v.section + 2);
                    const int k = 3 * v.section;
                    if (out[k] > 0.0) {
                        const double s_next = config[v.section].s + out[k + 2] * dt;
                        const double rate = (v.bound / s_next - config[v.section].kappa) / dt;
                        out[k] = rate > 0.0 ? rate : 0.0;
                        any = true;
                    }
                    break;
                }
                case LimitParameter::TotalLength: break;
            }
        }
    }
    if (guarded) *guarded = any;
    return out;
}

ControlOutput control_step(const ConfigVelocity& cmd, const PlantState& snapshot, const ManipulatorGeometry& geom,
                           const ControllerGains& gains, const ControllerState& cstate, double dt) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidInput("controller dt must be > 0");
    if (!cmd.allFinite()) throw InvalidInput("configuration velocity must be finite");

    ControlOutput out;
    out.state = cstate;
    try {
        out.config = forward_decouple(snapshot.actuator, geom).config;
    } catch (const Error& e) {
        out.fault = e.what();
        return out;
    }

    out.applied = limit_guard(cmd, out.config, geom, dt, gains.limit_mode, &out.guarded);
    out.L_ik = jacobian_inverse(out.config, geom) * out.applied;

    const Vector9d error = snapshot.tendon.tensions - gains.F_ref;
    out.L_c = gains.Kp.cwiseProduct(error) + gains.Ki.cwiseProduct(cstate.F_i) + gains.Kd.cwiseProduct(cstate.F_d);

    out.state.F_i = (cstate.F_i + error * dt).cwiseMax(-gains.integral_clamp).cwiseMin(gains.integral_clamp);
    const double alpha = dt / (gains.derivative_tau + dt);
    out.state.F_d = cstate.F_d + alpha * ((error - cstate.last_error) / dt - cstate.F_d);
    out.state.last_error = error;

    out.spool_vel = out.L_ik + out.L_c;
    const double peak = out.spool_vel.cwiseAbs().maxCoeff();
    if (peak > gains.max_spool_speed) {
        const double scale = gains.max_spool_speed / peak;
        out.spool_vel *= scale;
        // Keeps the ballscrew in step with the slowed spools.
        out.applied *= scale;
        out.rate_limited = true;
    }
    return out;
}

}  // namespace ppcm
