#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "ppcm/config.hpp"
#include "ppcm/errors.hpp"
#include "ppcm/protocol.hpp"
#include "ppcm/scenario.hpp"
#include "ppcm/simulation.hpp"
#include "ppcm/telemetry.hpp"

using namespace ppcm;
using nlohmann::json;

namespace {

std::filesystem::path temp_path(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("ppcm_gateway_test_" + name);
}

ScenarioScript short_script() {
    return parse_scenario(
        "at 0 calibrate\n"
        "at 0.1 for 0.5 velocity in.kappa=0.004 in.phi=0.3\n"
        "at 0.7 for 0.3 velocity in.s=5\n"
        "end 1.2\n");
}

}  // namespace

TEST(Config, EmptyObjectGivesDefaults) { EXPECT_EQ(parse_config("{}"), AppConfig{}); }

TEST(Config, DefaultsRoundTripThroughJson) {
    const AppConfig c;
    EXPECT_EQ(parse_config(config_to_json(c)), c);
}

TEST(Config, EditedValuesRoundTrip) {
    const AppConfig c = parse_config(R"({"plant": {"routing_length": 500},
        "controller": {"Kp": [0.4, 0.4, 0.4, 0.5, 0.5, 0.5, 0.6, 0.6, 0.6], "limit_mode": "strict"},
        "protocol": {"broadcast_hz": 10}})");
    EXPECT_DOUBLE_EQ(c.plant.routing_length, 500.0);
    EXPECT_DOUBLE_EQ(c.controller.Kp[8], 0.6);
    EXPECT_EQ(c.controller.limit_mode, LimitCheck::Strict);
    EXPECT_EQ(c.protocol.broadcast_every(), 10);
    EXPECT_EQ(parse_config(config_to_json(c)), c);
}

TEST(Config, ControllerReferenceFollowsPlant) {
    const AppConfig c = parse_config(R"({"plant": {"F_ref": 7}})");
    EXPECT_TRUE(c.controller.F_ref.isConstant(7.0));
}

TEST(Config, UnknownKeyRejected) {
    EXPECT_THROW(parse_config(R"({"plant": {"k_reff": 1}})"), ConfigError);
    EXPECT_THROW(parse_config(R"({"extras": {}})"), ConfigError);
}

TEST(Config, NonPositiveOffsetRejected) {
    EXPECT_THROW(parse_config(R"({"geometry": {"sections": [{"d": 0}, {}, {}]}})"), ConfigError);
    EXPECT_THROW(parse_config(R"({"geometry": {"sections": [{}, {"d": -1}, {}]}})"), ConfigError);
}

TEST(Config, CurvatureOutsideInverseDomainRejected) {
    // kappa_max * d >= 1 leaves the inverse map's domain.
    EXPECT_THROW(parse_config(R"({"geometry": {"sections": [{"kappa_max": 0.4}, {}, {}]}})"), ConfigError);
}

TEST(Config, MalformedValuesRejected) {
    EXPECT_THROW(parse_config("not json"), ConfigError);
    EXPECT_THROW(parse_config(R"({"geometry": {"sections": [{}, {}]}})"), ConfigError);
    EXPECT_THROW(parse_config(R"({"controller": {"Ki": [1, 2]}})"), ConfigError);
    EXPECT_THROW(parse_config(R"({"controller": {"limit_mode": "loose"}})"), ConfigError);
    EXPECT_THROW(parse_config(R"({"protocol": {"tick_hz": 50}})"), ConfigError);
    EXPECT_THROW(parse_config(R"({"plant": {"k_ref": "stiff"}})"), ConfigError);
}

TEST(Config, MissingFileNamesThePath) {
    try {
        load_config(temp_path("absent.json"));
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("absent.json"), std::string::npos);
    }
}

TEST(Scenario, ParsesEveryCommandKind) {
    const auto s = parse_scenario(
        "# comment line\n"
        "at 0 calibrate\n"
        "at 0.5 gripper closed open open II closed   # row two\n"
        "at 1 for 4 velocity in.kappa=0.0075 out.s=-2\n"
        "at 6 for 2 ballscrew -5\n"
        "end 9\n");
    ASSERT_EQ(s.commands.size(), 4u);
    EXPECT_DOUBLE_EQ(s.end, 9.0);
    EXPECT_TRUE(std::holds_alternative<CalibrateAction>(s.commands[0].action));
    const auto& g = std::get<GripperAction>(s.commands[1].action).cmd;
    EXPECT_FALSE(g.a_open);
    EXPECT_TRUE(g.b_open);
    EXPECT_TRUE(g.c_open);
    EXPECT_EQ(g.zone, Zone::II);
    EXPECT_TRUE(g.d_closed);
    const auto& v = std::get<VelocityAction>(s.commands[2].action).rate;
    EXPECT_DOUBLE_EQ(v[0], 0.0075);
    EXPECT_DOUBLE_EQ(v[8], -2.0);
    EXPECT_DOUBLE_EQ(s.commands[2].duration, 4.0);
    EXPECT_EQ(s.commands[2].line, 4);
    EXPECT_DOUBLE_EQ(std::get<BallscrewAction>(s.commands[3].action).rate, -5.0);
}

TEST(Scenario, ErrorsCarryLineNumbers) {
    auto line_of = [](const std::string& text) {
        try {
            parse_scenario(text);
        } catch (const ScriptError& e) {
            return std::string(e.what());
        }
        return std::string("no error");
    };
    EXPECT_NE(line_of("at 0 calibrate\nat 1 jump\nend 2\n").find("line 2"), std::string::npos);
    EXPECT_NE(line_of("at 2 calibrate\nat 1 calibrate\nend 3\n").find("line 2"), std::string::npos);
    EXPECT_NE(line_of("at 0 for 1 velocity in.tau=1\nend 2\n").find("line 1"), std::string::npos);
    EXPECT_NE(line_of("at 0 gripper open open open I closed\nat 0 gripper closed closed closed I closed\nend 1\n")
                  .find("line 2"),
              std::string::npos);
    EXPECT_NE(line_of("at 0 gripper open open open IV closed\nend 1\n").find("line 1"), std::string::npos);
    EXPECT_NE(line_of("at 0 for -1 ballscrew 3\nend 1\n").find("line 1"), std::string::npos);
}

TEST(Scenario, ScheduleUsesHalfOpenTickSpans) {
    const auto s = parse_scenario(
        "at 0 calibrate\n"
        "at 1 for 0.5 velocity in.kappa=0.01\n"
        "at 1.25 for 0.5 velocity in.kappa=0.02\n"
        "at 2 for 0.1 ballscrew 4\n"
        "at 3 gripper closed closed closed I closed\n"
        "end 4\n");
    const TickSchedule t(s, 0.01);
    EXPECT_EQ(t.ticks(), 400);
    EXPECT_TRUE(t.calibrate(0));
    EXPECT_FALSE(t.calibrate(1));
    EXPECT_DOUBLE_EQ(t.velocity(99)[0], 0.0);
    EXPECT_DOUBLE_EQ(t.velocity(100)[0], 0.01);
    EXPECT_DOUBLE_EQ(t.velocity(130)[0], 0.03);
    EXPECT_DOUBLE_EQ(t.velocity(150)[0], 0.02);
    EXPECT_DOUBLE_EQ(t.velocity(175)[0], 0.0);
    EXPECT_FALSE(t.ballscrew(199));
    EXPECT_DOUBLE_EQ(*t.ballscrew(200), 4.0);
    EXPECT_FALSE(t.ballscrew(210));
    EXPECT_TRUE(t.gripper(300));
    EXPECT_FALSE(t.gripper(301));
}

TEST(Telemetry, ThreeTicksGiveThreeRowsAndAHeader) {
    const auto run = run_scenario(parse_scenario("at 0 calibrate\nend 0.03\n"), AppConfig{});
    ASSERT_EQ(run.records.size(), 3u);
    std::ostringstream out;
    write_csv(out, run.records);
    std::istringstream in(out.str());
    std::string line;
    int lines = 0;
    while (std::getline(in, line)) ++lines;
    EXPECT_EQ(lines, 4);
    EXPECT_EQ(out.str().substr(0, out.str().find('\n')), csv_header());
    EXPECT_EQ(csv_header().rfind("time,in_kappa,in_phi,in_s,", 0), 0u);
}

TEST(Telemetry, CsvAndJsonlRoundTripExactly) {
    const AppConfig config;
    const auto run = run_scenario(short_script(), config);
    for (const auto format : {TelemetryFormat::Csv, TelemetryFormat::Jsonl}) {
        const auto path = temp_path(format == TelemetryFormat::Csv ? "rt.csv" : "rt.jsonl");
        export_telemetry(run.records, format, path);
        const auto back = import_telemetry(path, config.geometry, config.protocol.polyline_samples);
        ASSERT_EQ(back.size(), run.records.size());
        for (std::size_t i = 0; i < back.size(); ++i) ASSERT_EQ(back[i], run.records[i]) << "row " << i;
        std::filesystem::remove(path);
    }
}

TEST(Telemetry, ImportedTracesReproduceTheReport) {
    const AppConfig config;
    const auto script = short_script();
    const auto run = run_scenario(script, config);
    const auto path = temp_path("traces.csv");
    export_telemetry(run.records, TelemetryFormat::Csv, path);
    const auto traces = kappa_traces(import_telemetry(path, config.geometry, config.protocol.polyline_samples),
                                     script, config.protocol.dt());
    for (int sec = 0; sec < kSections; ++sec) {
        EXPECT_EQ(traces[sec].max_drift, run.report.sections[sec].max_drift);
        EXPECT_EQ(traces[sec].max_tracking, run.report.sections[sec].max_tracking);
    }
    std::filesystem::remove(path);
}

TEST(Telemetry, PolylineEndsAtTheTip) {
    const AppConfig config;
    const auto run = run_scenario(short_script(), config);
    const auto& r = run.records.back();
    ASSERT_EQ(r.polyline.size(), 1u + kSections * config.protocol.polyline_samples);
    EXPECT_TRUE(r.polyline.front().isZero(0.0));
    const auto tip = backbone_poses(r.config, config.geometry, config.protocol.polyline_samples).back().position;
    EXPECT_LT((r.polyline.back() - tip).norm(), 1e-12);
}

TEST(Telemetry, FormatsAndIoErrors) {
    EXPECT_EQ(format_for("a/b.jsonl"), TelemetryFormat::Jsonl);
    EXPECT_EQ(format_for("a/b.csv"), TelemetryFormat::Csv);
    EXPECT_EQ(parse_format("jsonl"), TelemetryFormat::Jsonl);
    EXPECT_FALSE(parse_format("xml"));
    const auto missing = temp_path("missing.csv");
    try {
        import_telemetry(missing, ManipulatorGeometry::defaults(), 8);
        FAIL();
    } catch (const IoError& e) {
        EXPECT_NE(std::string(e.what()).find(missing.string()), std::string::npos);
    }
    EXPECT_THROW(export_telemetry({}, TelemetryFormat::Csv, "/nonexistent-dir/x.csv"), IoError);
}

TEST(Telemetry, CsvRejectsBadRows) {
    std::istringstream bad(csv_header() + "\n1,2,3\n");
    EXPECT_THROW(read_csv(bad, ManipulatorGeometry::defaults(), 8), IoError);
}

TEST(RunScenario, EmptyScriptHoldsTheCalibratedState) {
    const AppConfig config;
    const auto run = run_scenario(parse_scenario("end 1\n"), config);
    ASSERT_EQ(run.records.size(), 100u);
    const auto first = run.records.front();
    EXPECT_DOUBLE_EQ(first.config.total_length(), 160.0);
    for (const auto& r : run.records) {
        EXPECT_EQ(r.config, first.config);
        EXPECT_EQ(r.L, first.L);
        EXPECT_LT((r.F.array() - config.plant.F_ref).abs().maxCoeff(), 1e-9);
    }
    EXPECT_TRUE(run.report.ok());
}

TEST(RunScenario, RepeatRunsAreIdentical) {
    const AppConfig config;
    const auto a = run_scenario(short_script(), config);
    const auto b = run_scenario(short_script(), config);
    EXPECT_EQ(a.records, b.records);
}

TEST(RunScenario, CommandedSectionMovesAlone) {
    const auto run = run_scenario(short_script(), AppConfig{});
    const auto& last = run.records.back();
    EXPECT_NEAR(last.config[0].kappa, 0.002, 2e-5);
    EXPECT_NEAR(last.config[0].s, 38.0 + 1.5, 1e-9);
    EXPECT_LT(last.config[1].kappa, 1e-4);
    EXPECT_LT(last.config[2].kappa, 1e-4);
    EXPECT_EQ(last.config[1].s, 44.0);
}

TEST(RunScenario, RejectedGripperIsReportedNotFatal) {
    const auto run = run_scenario(
        parse_scenario("at 0 calibrate\nat 0.1 gripper open closed open I closed\n"
                       "at 0.2 gripper closed closed closed II closed\nend 0.5\n"),
        AppConfig{});
    EXPECT_EQ(run.report.rejected_grippers, 2);
    EXPECT_TRUE(run.records[10].flags.rejected);
    EXPECT_FALSE(run.records[11].flags.rejected);
    EXPECT_EQ(run.records.back().grippers, run.records.front().grippers);
}

TEST(RunScenario, SpoolsFollowTheBallscrewLimit) {
    // 50 mm/s requested, 20 mm/s available: tension must not collapse.
    const auto run = run_scenario(parse_scenario("at 0 calibrate\nat 0 for 2 velocity in.s=50\nend 2.5\n"),
                                  AppConfig{});
    EXPECT_NEAR(run.records.back().config[0].s, 78.0, 1e-9);
    EXPECT_EQ(run.report.slack, 0);
    EXPECT_GT(run.report.tension_min, 4.5);
}

TEST(RunScenario, ExtensionStopsOnTheArcLengthBound) {
    const auto run = run_scenario(parse_scenario("at 0 calibrate\nat 0 for 8 velocity in.s=20\nend 9\n"),
                                  AppConfig{});
    EXPECT_DOUBLE_EQ(run.records.back().config[0].s, 162.0);
    EXPECT_EQ(run.report.limit_violations, 0);
}

namespace {

struct Hub {
    CommandQueue queue;
    SessionHub hub{queue, ProtocolSettings{}};

    std::vector<json> take(SessionId id) {
        std::vector<json> out;
        for (const auto& m : hub.take(id)) out.push_back(json::parse(m));
        return out;
    }
    json one(SessionId id, const std::string& text) {
        hub.handle(id, text);
        auto replies = take(id);
        EXPECT_EQ(replies.size(), 1u) << text;
        return replies.empty() ? json() : replies.front();
    }
};

}  // namespace

TEST(Protocol, HelloNegotiatesVersion) {
    Hub h;
    const auto id = h.hub.open_session();
    const json ok = h.one(id, R"({"type":"hello","version":1})");
    EXPECT_EQ(ok["type"], "hello");
    EXPECT_EQ(ok["version"], kProtocolVersion);
    EXPECT_EQ(ok["session"], id);
    const json bad = h.one(id, R"({"type":"hello","version":7})");
    EXPECT_EQ(bad["code"], "unsupported_version");
}

TEST(Protocol, SecondOperatorIsDenied) {
    Hub h;
    const auto a = h.hub.open_session();
    const auto b = h.hub.open_session();
    EXPECT_EQ(h.one(a, R"({"type":"acquire_operator"})")["type"], "ack");
    const json denied = h.one(b, R"({"type":"acquire_operator"})");
    EXPECT_EQ(denied["type"], "error");
    EXPECT_EQ(denied["code"], "role_denied");
    EXPECT_EQ(h.hub.operator_session(), a);
    EXPECT_EQ(h.one(b, R"({"type":"release_operator"})")["code"], "not_operator");
    EXPECT_EQ(h.one(a, R"({"type":"release_operator"})")["type"], "ack");
    EXPECT_EQ(h.one(b, R"({"type":"acquire_operator"})")["type"], "ack");
}

TEST(Protocol, MalformedMessagesAreTypedErrors) {
    Hub h;
    const auto id = h.hub.open_session();
    h.one(id, R"({"type":"acquire_operator"})");
    for (const char* text : {"{", "[1,2]", R"({"kind":"hello"})", R"({"type":"teleport"})",
                             R"({"type":"cmd_velocity","cdot":[0,0,0,0,0,0,0,0]})",
                             R"({"type":"cmd_velocity","cdot":[0,0,0,0,0,0,0,0,"x"]})",
                             R"({"type":"cmd_velocity"})", R"({"type":"cmd_ballscrew","rate":"fast"})",
                             R"({"type":"cmd_gripper","a":"open","b":"open","c":"open","zone":"IV","d":"closed"})",
                             R"({"type":"cmd_gripper","a":"ajar","b":"open","c":"open","zone":"I","d":"closed"})"}) {
        const json r = h.one(id, text);
        EXPECT_EQ(r["code"], "bad_command") << text;
    }
    EXPECT_TRUE(h.queue.drain().empty());
}

TEST(Protocol, ObserversCannotCommand) {
    Hub h;
    const auto op = h.hub.open_session();
    const auto obs = h.hub.open_session();
    h.one(op, R"({"type":"acquire_operator"})");
    for (const char* text : {R"({"type":"cmd_velocity","cdot":[0,0,0,0,0,0,0,0,1]})",
                             R"({"type":"cmd_ballscrew","rate":1})", R"({"type":"calibrate"})",
                             R"({"type":"cmd_gripper","a":"open","b":"open","c":"open","zone":"I","d":"closed"})"}) {
        EXPECT_EQ(h.one(obs, text)["code"], "not_operator") << text;
    }
    EXPECT_TRUE(h.queue.drain().empty());
}

TEST(Protocol, OperatorVelocityIsFireAndForget) {
    Hub h;
    const auto id = h.hub.open_session();
    h.one(id, R"({"type":"acquire_operator"})");
    h.hub.handle(id, R"({"type":"cmd_velocity","cdot":[0,0,0,0,0,0,0,0,1.5]})");
    EXPECT_TRUE(h.take(id).empty());
    const auto queued = h.queue.drain();
    ASSERT_EQ(queued.size(), 1u);
    EXPECT_DOUBLE_EQ(std::get<VelocityCommand>(queued[0].what).cdot[8], 1.5);
}

TEST(Protocol, ClosingTheOperatorSessionQueuesDeadman) {
    Hub h;
    const auto id = h.hub.open_session();
    h.one(id, R"({"type":"acquire_operator"})");
    h.hub.close_session(id);
    EXPECT_FALSE(h.hub.operator_session());
    const auto queued = h.queue.drain();
    ASSERT_EQ(queued.size(), 1u);
    EXPECT_TRUE(std::holds_alternative<DeadmanCommand>(queued[0].what));
}

TEST(Protocol, SlowObserverKeepsOnlyTheLatestSnapshot) {
    Hub h;
    const auto id = h.hub.open_session();
    h.hub.reply(id, "{\"type\":\"ack\",\"of\":\"x\"}");
    for (int i = 0; i < 5; ++i) h.hub.publish_snapshot("{\"type\":\"snapshot\",\"seq\":" + std::to_string(i) + "}");
    EXPECT_EQ(h.hub.dropped_snapshots(id), 4u);
    const auto out = h.take(id);
    ASSERT_EQ(out.size(), 2u);
    EXPECT_EQ(out[0]["type"], "ack");
    EXPECT_EQ(out[1]["seq"], 4);
    EXPECT_TRUE(h.take(id).empty());
}

TEST(Protocol, OutputKeepsPublicationOrder) {
    Hub h;
    const auto id = h.hub.open_session();
    h.hub.publish_snapshot("{\"type\":\"snapshot\",\"seq\":0}");
    h.hub.reply(id, "{\"type\":\"ack\",\"of\":\"calibrate\"}");
    auto out = h.take(id);
    ASSERT_EQ(out.size(), 2u);
    EXPECT_EQ(out[0]["type"], "snapshot");
    EXPECT_EQ(out[1]["type"], "ack");
    h.hub.reply(id, "{\"type\":\"ack\",\"of\":\"calibrate\"}");
    h.hub.publish_snapshot("{\"type\":\"snapshot\",\"seq\":1}");
    out = h.take(id);
    ASSERT_EQ(out.size(), 2u);
    EXPECT_EQ(out[0]["type"], "ack");
    EXPECT_EQ(out[1]["seq"], 1);
}

TEST(Protocol, NotifyFiresOnOutput) {
    Hub h;
    int calls = 0;
    const auto id = h.hub.open_session([&] { ++calls; });
    h.hub.handle(id, R"({"type":"hello"})");
    h.hub.publish_snapshot("{}");
    EXPECT_EQ(calls, 2);
}

namespace {

struct Service {
    Hub h;
    SimulationService service{AppConfig{}, h.hub, h.queue};
    SessionId op = h.hub.open_session();

    Service() { h.one(op, R"({"type":"acquire_operator"})"); }
    void ticks(int n) {
        for (int i = 0; i < n; ++i) service.tick_once();
    }
    std::vector<json> replies() {
        std::vector<json> out;
        for (auto& m : h.take(op)) {
            if (m["type"] != "snapshot") out.push_back(m);
        }
        return out;
    }
};

}  // namespace

TEST(SimulationService, StartsCalibratedAndBroadcasts) {
    Service s;
    EXPECT_DOUBLE_EQ(s.service.latest().config.total_length(), 160.0);
    s.ticks(3);
    const auto out = s.h.take(s.op);
    ASSERT_EQ(out.size(), 1u);
    EXPECT_EQ(out[0]["type"], "snapshot");
    EXPECT_EQ(out[0]["seq"], 0);
    EXPECT_EQ(out[0]["operator"], s.op);
    EXPECT_EQ(out[0]["record"]["sections"].size(), 3u);
}

TEST(SimulationService, WatchdogZeroesLatchedVelocity) {
    Service s;
    s.h.hub.handle(s.op, R"({"type":"cmd_velocity","cdot":[0.002,0,0,0,0,0,0,0,0]})");
    s.ticks(10);
    const double early = s.service.latest().config[0].kappa;
    EXPECT_GT(early, 0.0);
    s.ticks(60);
    const double stopped = s.service.latest().config[0].kappa;
    s.ticks(50);
    EXPECT_NEAR(s.service.latest().config[0].kappa, stopped, 1e-6);
    EXPECT_NEAR(stopped, 0.002 * 0.5, 1e-5);
}

TEST(SimulationService, GripperAndCalibrateAreAcknowledgedAfterTheTick) {
    Service s;
    s.h.hub.handle(s.op, R"({"type":"cmd_gripper","a":"closed","b":"closed","c":"closed","zone":"I","d":"closed"})");
    s.h.hub.handle(s.op, R"({"type":"cmd_gripper","a":"open","b":"closed","c":"open","zone":"I","d":"closed"})");
    s.h.hub.handle(s.op, R"({"type":"calibrate"})");
    EXPECT_TRUE(s.replies().empty());
    s.ticks(1);
    auto r = s.replies();
    ASSERT_EQ(r.size(), 1u);
    EXPECT_EQ(r[0]["type"], "ack");
    EXPECT_EQ(r[0]["of"], "cmd_gripper");
    EXPECT_FALSE(s.service.latest().grippers.a_open);
    s.ticks(1);
    r = s.replies();
    ASSERT_EQ(r.size(), 1u);
    EXPECT_EQ(r[0]["code"], "gripper_rejected");
    s.ticks(1);
    r = s.replies();
    ASSERT_EQ(r.size(), 1u);
    EXPECT_EQ(r[0]["of"], "calibrate");
    EXPECT_TRUE(s.service.latest().grippers.a_open);
    EXPECT_DOUBLE_EQ(s.service.latest().config.total_length(), 160.0);
}

TEST(SimulationService, MalformedVelocityLeavesStateUnchanged) {
    Service s;
    s.ticks(2);
    const auto before = s.service.latest();
    EXPECT_EQ(s.h.one(s.op, R"({"type":"cmd_velocity","cdot":[1,1,1,1,1,1,1,1]})")["code"], "bad_command");
    s.ticks(5);
    EXPECT_EQ(s.service.latest().config, before.config);
}

TEST(SimulationService, DeadmanStopsMotionImmediately) {
    Service s;
    s.h.hub.handle(s.op, R"({"type":"cmd_velocity","cdot":[0.002,0,0,0,0,0,0,0,0]})");
    s.ticks(10);
    s.h.hub.close_session(s.op);
    s.ticks(1);
    const double k = s.service.latest().config[0].kappa;
    s.ticks(20);
    EXPECT_NEAR(s.service.latest().config[0].kappa, k, 1e-6);
}
