#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "ppcm/errors.hpp"
#include "ppcm/plant.hpp"

using namespace ppcm;

namespace {

constexpr double kDt = 0.01;

Plant default_plant() { return Plant(ManipulatorGeometry::defaults(), PlantParameters{}); }

PlantState run(const Plant& plant, PlantState s, const Vector9d& spool_vel, double ballscrew, double seconds) {
    const int steps = static_cast<int>(std::lround(seconds / kDt));
    for (int i = 0; i < steps; ++i) s = plant.step(s, spool_vel, ballscrew, kDt);
    return s;
}

GripperState row(int r, double pos = 0.0) {
    switch (r) {
        case 1: return {true, true, true, Zone::I, true, pos};
        case 2: return {false, true, true, Zone::II, true, pos};
        case 3: return {false, false, true, Zone::III, true, pos};
        default: return {false, false, false, Zone::I, true, pos};
    }
}

// Places the ballscrew in `z` through the d-open repositioning path.
PlantState move_to_zone(const Plant& plant, PlantState s, Zone z) {
    const Zone from = plant.params().zones.zone_of(s.grippers.ballscrew_pos);
    s = plant.apply_gripper_command(s, {false, false, false, from, false, s.grippers.ballscrew_pos});
    const double target = plant.params().zones.lower(z) + 10.0;
    const double dir = target > s.grippers.ballscrew_pos ? 1.0 : -1.0;
    while (std::abs(target - s.grippers.ballscrew_pos) > 1e-9) {
        const double v = std::min(20.0, std::abs(target - s.grippers.ballscrew_pos) / kDt);
        s = plant.step(s, Vector9d::Zero(), dir * v, kDt);
    }
    return plant.step(s, Vector9d::Zero(), 0.0, kDt);
}

}  // namespace

TEST(Gripper, ExhaustiveTable) {
    int accepted = 0;
    for (int bits = 0; bits < 8; ++bits) {
        for (int z = 0; z < 3; ++z) {
            for (bool d : {false, true}) {
                const bool a = bits & 1, b = bits & 2, c = bits & 4;
                if (tube_status(a, b, c, static_cast<Zone>(z), d)) ++accepted;
            }
        }
    }
    EXPECT_EQ(accepted, 9);
}

TEST(Gripper, RowStatuses) {
    using enum TubeStatus;
    EXPECT_EQ(tube_status(row(1)), (TubeStatuses{Controllable, Movable, Movable}));
    EXPECT_EQ(tube_status(row(2)), (TubeStatuses{Fixed, Controllable, Movable}));
    EXPECT_EQ(tube_status(row(3)), (TubeStatuses{Fixed, Fixed, Controllable}));
    EXPECT_EQ(tube_status(row(4)), (TubeStatuses{Fixed, Fixed, Fixed}));
    EXPECT_THROW(tube_status(GripperState{false, true, false, Zone::II, true, 250.0}), InvalidGripperCombination);
    EXPECT_THROW(tube_status(GripperState{true, true, true, Zone::I, false, 0.0}), InvalidGripperCombination);
}

TEST(Gripper, ApplyChecksTableBeforePreconditions) {
    const Plant plant = default_plant();
    const PlantState s = plant.calibrated();
    EXPECT_THROW(plant.apply_gripper_command(s, {false, true, false, Zone::II, true, 0.0}), InvalidGripperCombination);
    EXPECT_THROW(plant.apply_gripper_command(s, row(2)), GripperPreconditionError);  // ballscrew is in zone I
    const PlantState closed = plant.apply_gripper_command(s, row(4));
    EXPECT_EQ(closed.grippers, row(4));
    EXPECT_EQ(closed.config, s.config);
}

TEST(Gripper, RejectsChangesWhileBallscrewMoves) {
    const Plant plant = default_plant();
    const Vector9d comp = jacobian_inverse(plant.calibrated().config, plant.geometry()).col(2) * 5.0;
    const PlantState moving = plant.step(plant.calibrated(), comp, 5.0, kDt);
    ASSERT_GT(moving.ballscrew_vel, 0.0);
    EXPECT_THROW(plant.apply_gripper_command(moving, row(4)), GripperPreconditionError);
    const PlantState stopped = plant.step(moving, Vector9d::Zero(), 0.0, kDt);
    EXPECT_NO_THROW(plant.apply_gripper_command(stopped, row(4)));
}

TEST(Gripper, UnlistedTupleLeavesStateUnchanged) {
    const Plant plant = default_plant();
    const PlantState s = plant.calibrated();
    PlantState copy = s;
    try {
        copy = plant.apply_gripper_command(s, {true, false, true, Zone::I, true, 0.0});
    } catch (const InvalidGripperCombination&) {
    }
    EXPECT_EQ(copy.grippers, s.grippers);
}

TEST(Tension, ReferenceSample) {
    const PlantParameters p;
    EXPECT_NEAR(elastic_tension(15.84, 1125.0, p), 4.0 * 9.81, 1e-12);
    EXPECT_NEAR(elastic_tension(7.92, 562.5, p), 4.0 * 9.81, 1e-12);
    EXPECT_EQ(elastic_tension(0.0, 1125.0, p), 0.0);
    EXPECT_EQ(elastic_tension(-3.0, 1125.0, p), 0.0);
    PlantParameters with_base;
    with_base.baseline = 0.5;
    EXPECT_EQ(elastic_tension(0.0, 1125.0, with_base), 0.5);
}

TEST(Tension, PlantReadingAndSaturation) {
    PlantParameters p;
    const Plant plant(ManipulatorGeometry::defaults(), p);
    ActuatorLengths required;
    required.L.setConstant(1125.0 - p.routing_length);
    Vector9d spool = required.L;
    spool[0] -= 15.84;
    spool[1] -= 30.0;
    const TensionReading t = plant.tendon_tensions(required, spool);
    EXPECT_NEAR(t.F[0], 39.24, 39.24 * 0.005);
    EXPECT_EQ(t.F[1], 65.0);
    EXPECT_TRUE(t.saturated);
    EXPECT_EQ(t.F[2], 0.0);
}

TEST(Calibrate, ShortestStraightAtReferenceTension) {
    const Plant plant = default_plant();
    const Calibration cal = plant.calibrate(PlantState{});
    EXPECT_DOUBLE_EQ(cal.state.config.total_length(), 160.0);
    EXPECT_EQ(cal.reference.L, compose_actuator(ManipulatorConfig::straight(38, 44, 78), plant.geometry()).lengths.L);
    for (int i = 0; i < kTendons; ++i) EXPECT_NEAR(cal.state.tendon.tensions[i], 5.0, 1e-12);
    EXPECT_EQ(tube_status(cal.state.grippers), tube_status(row(1)));
}

TEST(Calibrate, Idempotent) {
    const Plant plant = default_plant();
    PlantState messy = plant.calibrated();
    messy.tendon.spool[4] += 3.0;
    messy.time = 2.5;
    const Calibration once = plant.calibrate(messy);
    const Calibration twice = plant.calibrate(once.state);
    EXPECT_EQ(twice.state.config, once.state.config);
    EXPECT_EQ(twice.state.tendon.spool, once.state.tendon.spool);
    EXPECT_EQ(twice.reference.L, once.reference.L);
    EXPECT_EQ(twice.state.time, 2.5);
}

TEST(Step, ZeroVelocityIsFixedPoint) {
    const Plant plant = default_plant();
    const PlantState s = plant.calibrated();
    const PlantState next = plant.step(s, Vector9d::Zero(), 0.0, kDt);
    EXPECT_EQ(next.config, s.config);
    EXPECT_EQ(next.tendon.spool, s.tendon.spool);
    EXPECT_LT((next.tendon.tensions - s.tendon.tensions).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_DOUBLE_EQ(next.time, s.time + kDt);
    EXPECT_FALSE(next.flags.any());
}

TEST(Step, RejectsBadTick) {
    const Plant plant = default_plant();
    const PlantState s = plant.calibrated();
    EXPECT_THROW(plant.step(s, Vector9d::Zero(), 0.0, 0.0), InvalidInput);
    EXPECT_THROW(plant.step(s, Vector9d::Zero(), 0.0, 0.02), InvalidInput);
    Vector9d bad = Vector9d::Zero();
    bad[3] = std::nan("");
    EXPECT_THROW(plant.step(s, bad, 0.0, kDt), InvalidInput);
}

TEST(Step, SymmetricGroupShorteningKeepsStraight) {
    // Arc length is held by the closed grippers, so equal shortening only
    // raises tension.
    const Plant plant = default_plant();
    const PlantState s = plant.apply_gripper_command(plant.calibrated(), row(4));
    Vector9d v = Vector9d::Zero();
    v.segment<3>(6).setConstant(-1.0);
    const PlantState next = run(plant, s, v, 0.0, 1.0);
    EXPECT_EQ(next.config[0].kappa, 0.0);
    EXPECT_EQ(next.config[0].s, s.config[0].s);
    for (int i = 6; i < 9; ++i) EXPECT_GT(next.tendon.tensions[i], s.tendon.tensions[i] + 1.0);
}

TEST(Step, SingleTendonBendsTowardsItsPlane) {
    const Plant plant = default_plant();
    const PlantState s = plant.apply_gripper_command(plant.calibrated(), row(4));
    Vector9d v = Vector9d::Zero();
    v[6] = -1.0;
    const PlantState next = run(plant, s, v, 0.0, 1.0);
    EXPECT_GT(next.config[0].kappa, 1e-3);
    EXPECT_NEAR(next.config[0].phi, std::numbers::pi / 2.0, 1e-9);
    // Groups A and B pass through the proximal section uncompensated.
    EXPECT_GT(next.config[1].kappa, 0.0);
    const auto t = next.tendon.tensions;
    EXPECT_NEAR(t[6], t[7], 1e-6);
    EXPECT_NEAR(t[6], t[8], 1e-6);
}

TEST(Step, CompensatedBendLeavesOtherSectionsStraight) {
    const Plant plant = default_plant();
    PlantState s = plant.apply_gripper_command(plant.calibrated(), row(4));
    Vector9d cdot = Vector9d::Zero();
    cdot[0] = 0.005;  // proximal kappa rate, 1/mm/s
    cdot[1] = 0.0;
    for (int i = 0; i < 200; ++i) {
        const Vector9d v = jacobian_inverse(s.config, plant.geometry()) * cdot;
        s = plant.step(s, v, 0.0, kDt);
    }
    EXPECT_NEAR(s.config[0].kappa, 0.01, 1e-4);
    EXPECT_LT(s.config[1].kappa, 1e-4);
    EXPECT_LT(s.config[2].kappa, 1e-4);
}

TEST(Step, PushPullChangesOnlyControllableTube) {
    const Plant plant = default_plant();
    PlantState s = plant.calibrated();
    const auto before = s.config;
    for (int i = 0; i < 100; ++i) {
        Vector9d cdot = Vector9d::Zero();
        cdot[2] = 5.0;
        s = plant.step(s, jacobian_inverse(s.config, plant.geometry()) * cdot, 5.0, kDt);
    }
    EXPECT_NEAR(s.config[0].s, before[0].s + 5.0, 1e-9);
    EXPECT_EQ(s.config[1].s, before[1].s);
    EXPECT_EQ(s.config[2].s, before[2].s);
    EXPECT_NEAR(s.grippers.ballscrew_pos, 5.0, 1e-9);
    for (int i = 0; i < kTendons; ++i) EXPECT_NEAR(s.tendon.tensions[i], 5.0, 0.05);
}

TEST(Step, FixedTubesHoldExactly) {
    const Plant plant = default_plant();
    PlantState s = move_to_zone(plant, plant.calibrated(), Zone::II);
    s = plant.apply_gripper_command(s, {false, false, false, Zone::II, true, s.grippers.ballscrew_pos});
    s = plant.apply_gripper_command(s, row(2, s.grippers.ballscrew_pos));
    const auto before = s.config;
    Vector9d cdot = Vector9d::Zero();
    cdot[5] = 4.0;
    for (int i = 0; i < 100; ++i) s = plant.step(s, jacobian_inverse(s.config, plant.geometry()) * cdot, 4.0, kDt);
    EXPECT_EQ(s.config[0].s, before[0].s);
    EXPECT_EQ(s.config[2].s, before[2].s);
    EXPECT_NEAR(s.config[1].s, before[1].s + 4.0, 1e-9);
}

TEST(Step, RepositioningWithDOpen) {
    const Plant plant = default_plant();
    const PlantState s = move_to_zone(plant, plant.calibrated(), Zone::III);
    EXPECT_EQ(plant.params().zones.zone_of(s.grippers.ballscrew_pos), Zone::III);
    EXPECT_EQ(s.grippers.zone, Zone::III);
    EXPECT_EQ(s.config, plant.calibrated().config);
    EXPECT_EQ(s.ballscrew_vel, 0.0);
}

TEST(Step, ArcLengthAndZoneClamps) {
    const Plant plant = default_plant();
    PlantState s = plant.calibrated();
    // Retracting below s_min is refused outright.
    const PlantState retract = plant.step(s, Vector9d::Zero(), -5.0, kDt);
    EXPECT_TRUE(retract.flags.clamped);
    EXPECT_EQ(retract.config[0].s, 38.0);
    EXPECT_EQ(retract.grippers.ballscrew_pos, 0.0);
    // Extension stops at s_max = 162 mm, well inside zone I.
    bool clamped = false;
    for (int i = 0; i < 800; ++i) {
        Vector9d cdot = Vector9d::Zero();
        cdot[2] = 20.0;
        s = plant.step(s, jacobian_inverse(s.config, plant.geometry()) * cdot, 20.0, kDt);
        clamped |= s.flags.clamped;
        ASSERT_TRUE(validate_limits(s.config, plant.geometry()).empty());
    }
    EXPECT_TRUE(clamped);
    EXPECT_DOUBLE_EQ(s.config[0].s, 162.0);
    EXPECT_NEAR(s.grippers.ballscrew_pos, 124.0, 1e-9);
}

TEST(Step, ZoneBoundaryStopsBallscrew) {
    PlantParameters p;
    p.zones.zone_length = 60.0;
    const Plant plant(ManipulatorGeometry::defaults(), p);
    PlantState s = plant.calibrated();
    for (int i = 0; i < 400; ++i) s = plant.step(s, Vector9d::Zero(), 20.0, kDt);
    EXPECT_LT(s.grippers.ballscrew_pos, 60.0);
    EXPECT_EQ(p.zones.zone_of(s.grippers.ballscrew_pos), Zone::I);
    EXPECT_TRUE(s.flags.clamped);
}

TEST(Step, BallscrewReachMatchesStep) {
    const Plant plant = default_plant();
    PlantState s = plant.calibrated();
    bool clamped = false;
    EXPECT_DOUBLE_EQ(plant.ballscrew_reach(s, 10.0, kDt, &clamped), 10.0);
    EXPECT_FALSE(clamped);
    EXPECT_DOUBLE_EQ(plant.ballscrew_reach(s, 50.0, kDt, &clamped), 20.0);
    EXPECT_TRUE(clamped);
    EXPECT_DOUBLE_EQ(plant.ballscrew_reach(s, -5.0, kDt, &clamped), 0.0);
    EXPECT_TRUE(clamped);

    s.config[0].s = 161.9;
    EXPECT_NEAR(plant.ballscrew_reach(s, 20.0, kDt), 10.0, 1e-9);

    PlantState fixed = plant.apply_gripper_command(plant.calibrated(), {false, false, false, Zone::I, true, 0.0});
    EXPECT_DOUBLE_EQ(plant.ballscrew_reach(fixed, 5.0, kDt, &clamped), 0.0);
    EXPECT_TRUE(clamped);
    fixed = plant.apply_gripper_command(fixed, {false, false, false, Zone::I, false, 0.0});
    EXPECT_DOUBLE_EQ(plant.ballscrew_reach(fixed, 5.0, kDt, &clamped), 5.0);
    EXPECT_FALSE(clamped);
    EXPECT_DOUBLE_EQ(plant.ballscrew_reach(fixed, -5.0, kDt, &clamped), 0.0);
    EXPECT_TRUE(clamped);
}

TEST(Step, SlackGroupHoldsShape) {
    const Plant plant = default_plant();
    PlantState s = plant.apply_gripper_command(plant.calibrated(), row(4));
    Vector9d v = Vector9d::Zero();
    v.segment<3>(6).setConstant(2.0);
    s = run(plant, s, v, 0.0, 1.0);
    EXPECT_TRUE(s.flags.slack);
    EXPECT_EQ(s.config[0].kappa, 0.0);
    for (int i = 6; i < 9; ++i) EXPECT_EQ(s.tendon.tensions[i], 0.0);
}

TEST(Step, LengtheningNeverRaisesTension) {
    const Plant plant = default_plant();
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    PlantState base = plant.apply_gripper_command(plant.calibrated(), row(4));
    for (int trial = 0; trial < 20; ++trial) {
        Vector9d v;
        for (int i = 0; i < kTendons; ++i) v[i] = u(rng);
        base = run(plant, base, v, 0.0, 0.1);
        for (int t = 0; t < kTendons; ++t) {
            PlantState longer = base;
            longer.tendon.spool[t] += 0.5;
            EXPECT_LE(plant.tendon_tensions(longer).F[t], plant.tendon_tensions(base).F[t]);
        }
    }
}

TEST(Step, GrossOvertensionRejected) {
    const Plant plant = default_plant();
    PlantState s = plant.apply_gripper_command(plant.calibrated(), row(4));
    s.tendon.spool.segment<3>(6).array() -= 600.0;
    EXPECT_THROW(plant.step(s, Vector9d::Zero(), 0.0, kDt), StepRejected);
}

TEST(Step, RandomDrivingKeepsInvariants) {
    const Plant plant = default_plant();
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    PlantState s = plant.calibrated();
    for (int i = 0; i < 1000; ++i) {
        Vector9d cdot;
        for (int k = 0; k < 9; ++k) cdot[k] = u(rng) * (k % 3 == 0 ? 0.01 : (k % 3 == 1 ? 0.5 : 3.0));
        cdot[2] = u(rng) * 10.0;
        Vector9d v = jacobian_inverse(s.config, plant.geometry()) * cdot;
        for (int k = 0; k < kTendons; ++k) v[k] += 0.3 * u(rng);
        s = plant.step(s, v, cdot[2], kDt);
        ASSERT_TRUE(validate_limits(s.config, plant.geometry()).empty()) << i;
        ASSERT_EQ(s.actuator.L, compose_actuator(s.config, plant.geometry()).lengths.L);
        ASSERT_GE(s.tendon.tensions.minCoeff(), 0.0);
        ASSERT_LE(s.tendon.tensions.maxCoeff(), 65.0);
    }
}
