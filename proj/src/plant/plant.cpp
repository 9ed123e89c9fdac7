#include "ppcm/plant.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>

#include <boost/math/tools/roots.hpp>

#include "ppcm/errors.hpp"

namespace ppcm {

void PlantParameters::validate() const {
    std::ostringstream why;
    auto positive = [&](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v)) why << name << " must be > 0; ";
    };
    positive(k_ref, "k_ref");
    positive(L_ref, "L_ref");
    positive(tension_limit, "tension_limit");
    positive(dt_max, "dt_max");
    positive(ballscrew_max_speed, "ballscrew_max_speed");
    positive(zones.zone_length, "zone_length");
    if (!(routing_length >= 0.0) || !std::isfinite(routing_length)) why << "routing_length must be >= 0; ";
    if (!(baseline >= 0.0) || !std::isfinite(baseline)) why << "baseline must be >= 0; ";
    if (!(F_ref >= baseline) || !(F_ref < tension_limit)) why << "need baseline <= F_ref < tension_limit; ";
    const std::string msg = why.str();
    if (!msg.empty()) throw InvalidInput("invalid plant parameters: " + msg.substr(0, msg.size() - 2));
}

double elastic_tension(double stretch, double length, const PlantParameters& p) {
    return p.stiffness(length) * std::max(0.0, stretch) + p.baseline;
}

Plant::Plant(ManipulatorGeometry geometry, PlantParameters params)
    : geometry_(std::move(geometry)), params_(std::move(params)) {
    geometry_.validate();
    params_.validate();
}

double Plant::spool_for_tension(double required, double tension) const {
    const double elastic = std::max(0.0, tension - params_.baseline);
    return required - elastic * (params_.routing_length + required) / (params_.k_ref * params_.L_ref);
}

TensionReading Plant::tendon_tensions(const ActuatorLengths& required, const Vector9d& spool) const {
    TensionReading out;
    for (int i = 0; i < kTendons; ++i) {
        const double R = required.L[i];
        const double F = elastic_tension(R - spool[i], params_.routing_length + R, params_);
        if (F >= params_.tension_limit) out.saturated = true;
        out.F[i] = std::min(F, params_.tension_limit);
    }
    return out;
}

TensionReading Plant::tendon_tensions(const PlantState& state) const {
    return tendon_tensions(state.actuator, state.tendon.spool);
}

Calibration Plant::calibrate(const PlantState& state) const {
    Calibration out;
    PlantState& c = out.state;
    c.time = state.time;
    c.grippers = GripperState{true, true, true, Zone::I, true, params_.zones.lower(Zone::I)};
    c.config = ManipulatorConfig::straight(geometry_[0].s_min, geometry_[1].s_min, geometry_[2].s_min);
    c.actuator = compose_actuator(c.config, geometry_).lengths;
    for (int i = 0; i < kTendons; ++i) c.tendon.spool[i] = spool_for_tension(c.actuator.L[i], params_.F_ref);
    const TensionReading t = tendon_tensions(c);
    c.tendon.tensions = t.F;
    c.flags.saturated = t.saturated;
    out.reference = c.actuator;
    return out;
}

PlantState Plant::apply_gripper_command(const PlantState& state, const GripperState& cmd) const {
    tube_status(cmd);
    const Zone at = params_.zones.zone_of(state.grippers.ballscrew_pos);
    if (cmd.zone != at) {
        throw GripperPreconditionError(std::string("gripper d commanded in zone ") + zone_name(cmd.zone) +
                                       " but the ballscrew is in zone " + zone_name(at));
    }
    if (state.ballscrew_vel != 0.0) {
        throw GripperPreconditionError("gripper change while the ballscrew is moving");
    }
    PlantState next = state;
    next.grippers = cmd;
    next.grippers.ballscrew_pos = state.grippers.ballscrew_pos;
    return next;
}

namespace {

struct SectionSolve {
    SectionConfig config;
    bool clamped = false;
    bool slack = false;
};

// Equal-tension equilibrium of one group at imposed arc length s. `spool` is
// the group's free lengths, `passive` what the lower sections already consume.
class GroupEquilibrium {
public:
    GroupEquilibrium(const Eigen::Vector3d& spool, const Eigen::Vector3d& passive, double s,
                     const SectionGeometry& geom, const PlantParameters& p)
        : spool_(spool), passive_(passive), s_(s), geom_(geom),
          compliance_(1.0 / (p.k_ref * p.L_ref)), routing_(p.routing_length) {}

    // Section lengths when every tendon in the group carries elastic tension F.
    Eigen::Vector3d lengths(double F) const {
        const double scale = 1.0 - F * compliance_;
        Eigen::Vector3d l;
        for (int i = 0; i < 3; ++i) l[i] = (spool_[i] + F * routing_ * compliance_) / scale - passive_[i];
        return l;
    }

    // Curvature from the differential length, clamped to the bend limit.
    double kappa(const Eigen::Vector3d& l, bool* clamped = nullptr) const {
        const ArcIntermediates arc = arc_intermediates(TendonLengths::from(l), geom_);
        const double limit = geom_.kappa_limit(s_);
        const double ratio = arc.K_chord / (2.0 * geom_.n);
        double k = ratio < 1.0 ? 2.0 * geom_.n / s_ * std::asin(ratio) : limit;
        if (k > limit) {
            k = limit;
            if (clamped) *clamped = true;
        } else if (ratio >= 1.0 && clamped) {
            *clamped = true;
        }
        return k;
    }

    // Mean section length minus what the arc at s needs; increasing in F.
    double residual(double F) const {
        const Eigen::Vector3d l = lengths(F);
        const double k = kappa(l);
        const double mean_chord = s_ * detail::sinc(k * s_ / (2.0 * geom_.n));
        return l.mean() - geom_.disk_length() - mean_chord;
    }

    double max_tension() const { return 0.5 / compliance_; }

private:
    Eigen::Vector3d spool_;
    Eigen::Vector3d passive_;
    double s_;
    const SectionGeometry& geom_;
    double compliance_;
    double routing_;
};

SectionSolve hold_previous(const SectionConfig& previous, double s, const SectionGeometry& geom) {
    SectionSolve out;
    out.slack = true;
    out.config = {previous.kappa, previous.phi, s};
    const double limit = geom.kappa_limit(s);
    if (out.config.kappa > limit) {
        out.config.kappa = limit;
        out.clamped = true;
    }
    return out;
}

SectionSolve solve_section(const GroupEquilibrium& eq, const SectionConfig& previous, double s,
                           const SectionGeometry& geom, int section) {
    const double r0 = eq.residual(0.0);
    if (!std::isfinite(r0)) {
        throw StepRejected(std::string("section ") + section_name(section) + ": non-finite tendon lengths");
    }
    if (r0 >= 0.0) return hold_previous(previous, s, geom);

    double hi = 1.0;
    double r_hi = eq.residual(hi);
    while (r_hi <= 0.0) {
        hi *= 2.0;
        if (hi > eq.max_tension()) {
            throw StepRejected(std::string("section ") + section_name(section) +
                               ": tendon group cannot reach equilibrium (over-constrained)");
        }
        r_hi = eq.residual(hi);
    }
    std::uintmax_t iterations = 200;
    const auto [a, b] = boost::math::tools::toms748_solve([&](double F) { return eq.residual(F); }, 0.0, hi,
                                                          r0, r_hi, boost::math::tools::eps_tolerance<double>(52),
                                                          iterations);
    const double F = 0.5 * (a + b);

    SectionSolve out;
    const Eigen::Vector3d l = eq.lengths(F);
    const double k = eq.kappa(l, &out.clamped);
    if (k < kStraightEpsilon) {
        out.config = {0.0, 0.0, s};
    } else {
        out.config = {k, bend_plane_angle(TendonLengths::from(l)), s};
    }
    return out;
}

}  // namespace

double Plant::ballscrew_reach(const PlantState& state, double ballscrew_vel, double dt, bool* clamped) const {
    bool cut = false;
    const double v = std::clamp(ballscrew_vel, -params_.ballscrew_max_speed, params_.ballscrew_max_speed);
    if (v != ballscrew_vel) cut = true;
    double delta = v * dt;
    const double pos = state.grippers.ballscrew_pos;
    const ZoneLayout& zones = params_.zones;
    if (state.grippers.d_closed) {
        const std::optional<int> tube = controllable_tube(tube_status(state.grippers));
        if (!tube) {
            if (delta != 0.0) cut = true;
            delta = 0.0;
        } else {
            const Zone z = state.grippers.zone;
            const double lo = zones.lower(z);
            const double hi = z == Zone::III ? zones.upper(z) : std::nextafter(zones.upper(z), lo);
            const double others = state.config.total_length() - state.config[*tube].s;
            const double s_lo = std::max(geometry_[*tube].s_min, geometry_.total_min - others);
            const double s_hi = std::min(geometry_[*tube].s_max, geometry_.total_max - others);
            const double s0 = state.config[*tube].s;
            const double d_min = std::max(lo - pos, s_lo - s0);
            const double d_max = std::min(hi - pos, s_hi - s0);
            const double limited = std::clamp(delta, std::min(d_min, 0.0), std::max(d_max, 0.0));
            if (limited != delta) cut = true;
            delta = limited;
        }
    } else {
        const double target = pos + delta;
        if (target < 0.0 || target > zones.travel()) {
            delta = std::clamp(target, 0.0, zones.travel()) - pos;
            cut = true;
        }
    }
    if (clamped) *clamped = cut;
    return delta / dt;
}

PlantState Plant::step(const PlantState& state, const Vector9d& spool_vel, double ballscrew_vel, double dt) const {
    if (!(dt > 0.0) || dt > params_.dt_max) {
        throw InvalidInput("step dt must be in (0, " + std::to_string(params_.dt_max) + "] s");
    }
    if (!spool_vel.allFinite() || !std::isfinite(ballscrew_vel)) {
        throw InvalidInput("step velocities must be finite");
    }
    const TubeStatuses tubes = tube_status(state.grippers);

    PlantState next = state;
    next.time = state.time + dt;
    next.flags = {};

    bool clamped = false;
    const double delta = ballscrew_reach(state, ballscrew_vel, dt, &clamped) * dt;
    next.flags.clamped = clamped;
    next.grippers.ballscrew_pos = state.grippers.ballscrew_pos + delta;
    const std::optional<int> tube = state.grippers.d_closed ? controllable_tube(tubes) : std::nullopt;
    if (tube) next.config[*tube].s = state.config[*tube].s + delta;
    if (!state.grippers.d_closed) next.grippers.zone = params_.zones.zone_of(next.grippers.ballscrew_pos);
    next.ballscrew_vel = delta / dt;

    next.tendon.spool = state.tendon.spool + spool_vel * dt;
    next.tendon.spool_vel = spool_vel;

    // Proximal first: each group sees the passages the lower sections impose.
    CouplingDecomposition parts;
    for (int sec = 0; sec < kSections; ++sec) {
        const TendonGroup own = group_of_section(sec);
        Eigen::Vector3d passive = Eigen::Vector3d::Zero();
        for (int below = 0; below < sec; ++below) passive += parts.part(own, below);
        const GroupEquilibrium eq(next.tendon.spool.segment<3>(first_tendon(own)), passive, next.config[sec].s,
                                  geometry_[sec], params_);
        const SectionSolve solved = solve_section(eq, state.config[sec], next.config[sec].s, geometry_[sec], sec);
        next.config[sec] = solved.config;
        next.flags.clamped |= solved.clamped;
        next.flags.slack |= solved.slack;
        for (int g = 0; g < static_cast<int>(own); ++g) {
            const auto passing = static_cast<TendonGroup>(g);
            parts.part(passing, sec) =
                rotated_inverse(next.config[sec], geometry_[sec], geometry_.passage_offset(passing, sec)).vec();
        }
    }

    next.actuator = compose_actuator(next.config, geometry_).lengths;
    const TensionReading t = tendon_tensions(next);
    next.tendon.tensions = t.F;
    next.flags.saturated = t.saturated;
    return next;
}

}  // namespace ppcm
