#include "ppcm/simulation.hpp"

#include <cmath>
#include <sstream>

#include "ppcm/errors.hpp"

namespace ppcm {

Simulation::Simulation(AppConfig config)
    : config_((config.validate(), std::move(config))), plant_(config_.geometry, config_.plant) {
    reset();
}

void Simulation::reset() {
    state_ = plant_.calibrated();
    cstate_ = {};
}

TickResult Simulation::tick(const TickInput& input) {
    const double dt = config_.protocol.dt();
    TickResult result;
    PlantFlags extra;

    if (input.calibrate) {
        state_ = plant_.calibrate(state_).state;
        cstate_ = {};
    }
    if (input.gripper) {
        try {
            state_ = plant_.apply_gripper_command(state_, *input.gripper);
        } catch (const Error& e) {
            result.gripper_error = e.what();
            extra.rejected = true;
        }
    }

    // Only the tube clamped by gripper d can change length; it moves with the ballscrew.
    ConfigVelocity cdot = input.cdot;
    const TubeStatuses tubes = tube_status(state_.grippers);
    const std::optional<int> tube = state_.grippers.d_closed ? controllable_tube(tubes) : std::nullopt;
    for (int sec = 0; sec < kSections; ++sec) {
        if (!tube || *tube != sec) cdot[3 * sec + 2] = 0.0;
    }
    if (tube && input.ballscrew) cdot[3 * *tube + 2] = *input.ballscrew;
    // The spools must follow the tube as far as the ballscrew can actually take it.
    if (tube) {
        bool cut = false;
        cdot[3 * *tube + 2] = plant_.ballscrew_reach(state_, cdot[3 * *tube + 2], dt, &cut);
        extra.clamped = cut;
    }

    const ControlOutput out = control_step(cdot, state_, config_.geometry, config_.controller, cstate_, dt);
    double ballscrew = 0.0;
    Vector9d spool_vel = out.spool_vel;
    if (out.fault) {
        result.fault = out.fault;
        extra.fault = true;
    } else {
        cstate_ = out.state;
        result.applied = out.applied;
        if (tube) {
            ballscrew = out.applied[3 * *tube + 2];
        } else if (!state_.grippers.d_closed && input.ballscrew) {
            ballscrew = *input.ballscrew;
        }
        extra.clamped |= out.guarded;
    }

    try {
        state_ = plant_.step(state_, spool_vel, ballscrew, dt);
    } catch (const StepRejected& e) {
        result.step_error = e.what();
        state_.time += dt;
        state_.ballscrew_vel = 0.0;
        state_.tendon.spool_vel.setZero();
        state_.flags = {};
        extra.rejected = true;
    }
    state_.flags.clamped |= extra.clamped;
    state_.flags.rejected |= extra.rejected;
    state_.flags.fault |= extra.fault;
    result.record = make_record(state_, config_.geometry, config_.protocol.polyline_samples);
    return result;
}

std::string RunReport::summary() const {
    std::ostringstream os;
    os << "ticks=" << ticks << " clamped=" << clamped << " rejected_steps=" << rejected_steps
       << " rejected_grippers=" << rejected_grippers << " saturated=" << saturated << " slack=" << slack
       << " faults=" << faults << " limit_violations=" << limit_violations << '\n';
    os << "total_length=[" << total_length_min << ", " << total_length_max << "] mm tension=[" << tension_min
       << ", " << tension_max << "] N\n";
    for (int s = 0; s < kSections; ++s) {
        os << section_name(s) << ": kappa drift=" << sections[s].max_drift
           << " /mm, tracking=" << 100.0 * sections[s].max_tracking << " %\n";
    }
    for (const auto& e : events) os << "event: " << e << '\n';
    os << (ok() ? "result: ok" : "result: FAILED") << '\n';
    return os.str();
}

std::array<SectionTrace, kSections> kappa_traces(const std::vector<TelemetryRecord>& records,
                                                 const ScenarioScript& script, double dt) {
    const TickSchedule schedule(script, dt);
    std::array<SectionTrace, kSections> out{};
    std::array<double, kSections> reference{};
    std::array<long, kSections> window_start{};
    std::array<bool, kSections> was_commanded{};
    for (long k = 0; k < static_cast<long>(records.size()); ++k) {
        if (schedule.calibrate(k)) reference.fill(0.0);
        const ConfigVelocity v = schedule.velocity(k);
        for (int s = 0; s < kSections; ++s) {
            const double rate = v[3 * s];
            reference[s] += rate * dt;
            const double err = std::abs(records[k].config[s].kappa - reference[s]);
            const bool commanded = rate != 0.0;
            if (commanded && !was_commanded[s]) window_start[s] = k;
            was_commanded[s] = commanded;
            if (!commanded) {
                out[s].max_drift = std::max(out[s].max_drift, err);
            } else if ((k - window_start[s]) * dt >= kTrackingTransient && reference[s] != 0.0) {
                out[s].max_tracking = std::max(out[s].max_tracking, err / std::abs(reference[s]));
            }
        }
    }
    return out;
}

RunResult run_scenario(const ScenarioScript& script, const AppConfig& config, bool fail_fast) {
    Simulation sim(config);
    const double dt = config.protocol.dt();
    const TickSchedule schedule(script, dt);
    RunResult result;
    RunReport& rep = result.report;
    rep.total_length_min = rep.total_length_max = sim.state().config.total_length();
    rep.tension_min = rep.tension_max = sim.state().tendon.tensions[0];
    auto note = [&](const std::string& what) {
        if (rep.events.size() < 20) rep.events.push_back(what);
    };
    result.records.reserve(schedule.ticks());
    for (long k = 0; k < schedule.ticks(); ++k) {
        TickInput in;
        in.cdot = schedule.velocity(k);
        in.ballscrew = schedule.ballscrew(k);
        in.gripper = schedule.gripper(k);
        in.calibrate = schedule.calibrate(k);
        TickResult t = sim.tick(in);
        const double now = t.record.time;
        if (t.gripper_error) {
            ++rep.rejected_grippers;
            note("t=" + std::to_string(now) + " gripper rejected: " + *t.gripper_error);
        }
        if (t.step_error) {
            if (fail_fast) throw SimFault("t=" + std::to_string(now) + ": " + *t.step_error);
            ++rep.rejected_steps;
            note("t=" + std::to_string(now) + " step rejected: " + *t.step_error);
        }
        if (t.fault) {
            ++rep.faults;
            note("t=" + std::to_string(now) + " controller fault: " + *t.fault);
        }
        const PlantFlags& f = t.record.flags;
        rep.clamped += f.clamped;
        rep.saturated += f.saturated;
        rep.slack += f.slack;
        rep.limit_violations += static_cast<long>(validate_limits(t.record.config, config.geometry).size());
        const double total = t.record.config.total_length();
        rep.total_length_min = std::min(rep.total_length_min, total);
        rep.total_length_max = std::max(rep.total_length_max, total);
        rep.tension_min = std::min(rep.tension_min, t.record.F.minCoeff());
        rep.tension_max = std::max(rep.tension_max, t.record.F.maxCoeff());
        result.records.push_back(std::move(t.record));
    }
    rep.ticks = schedule.ticks();
    rep.sections = kappa_traces(result.records, script, dt);
    return result;
}

}  // namespace ppcm
