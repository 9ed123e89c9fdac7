#pragma once

// Session protocol: JSON text messages, one per WebSocket frame.
//
// Client -> gateway                          Reply
//   {"type":"hello","version":1}             hello {version, session, tick_hz, broadcast_hz}
//   {"type":"acquire_operator"}              ack | error role_denied
//   {"type":"release_operator"}              ack | error not_operator
//   {"type":"cmd_velocity","cdot":[9]}       none on success (latched, watchdog) | error
//   {"type":"cmd_ballscrew","rate":r}        none on success (latched, watchdog) | error
//   {"type":"cmd_gripper","a":"open","b":..,"c":..,"zone":"I","d":"closed"}
//                                            ack once applied | error gripper_rejected
//   {"type":"calibrate"}                     ack once applied
//   {"type":"snapshot"}                      snapshot (latest)
// Gateway -> client, unsolicited:
//   {"type":"snapshot","seq":n,"operator":id|null,"record":{...}}
// Errors: {"type":"error","code":c,"message":m,"in_reply_to":type}, codes
// bad_command, unsupported_version, role_denied, not_operator, gripper_rejected.
//
// Snapshots are a latest-value slot per session: an observer that falls
// behind loses intermediate snapshots, never replies.

#include <atomic>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "ppcm/simulation.hpp"

namespace ppcm {

inline constexpr int kProtocolVersion = 1;

using SessionId = std::uint64_t;

struct VelocityCommand {
    ConfigVelocity cdot;
};
struct BallscrewCommand {
    double rate = 0.0;
};
struct GripperCommand {
    GripperState cmd;
};
struct CalibrateCommand {};
// The operator left or released; latched rates drop to zero.
struct DeadmanCommand {};

struct SessionCommand {
    SessionId session = 0;
    std::variant<VelocityCommand, BallscrewCommand, GripperCommand, CalibrateCommand, DeadmanCommand> what;
};

class CommandQueue {
public:
    void push(SessionCommand c);
    std::vector<SessionCommand> drain();

private:
    std::mutex mutex_;
    std::vector<SessionCommand> items_;
};

std::string error_message(const std::string& code, const std::string& message, const std::string& in_reply_to = "");

class SessionHub {
public:
    using Notify = std::function<void()>;

    SessionHub(CommandQueue& queue, ProtocolSettings settings);

    // `notify` is called (from any thread) whenever the session has output.
    SessionId open_session(Notify notify = {});
    void close_session(SessionId id);

    // Parses and dispatches one inbound message.
    void handle(SessionId id, const std::string& text);

    void reply(SessionId id, std::string message);
    void publish_snapshot(const std::string& message);

    // Pending output in publication order; at most one snapshot, the latest.
    std::vector<std::string> take(SessionId id);

    std::optional<SessionId> operator_session() const;
    std::uint64_t dropped_snapshots(SessionId id) const;
    std::size_t session_count() const;

private:
    struct Session {
        Notify notify;
        std::deque<std::string> replies;
        std::optional<std::string> snapshot;
        std::size_t snapshot_after = 0;  // replies queued before the snapshot was published
        std::uint64_t dropped = 0;
    };

    void reply_locked(SessionId id, std::string message, std::vector<Notify>& wake);

    CommandQueue& queue_;
    ProtocolSettings settings_;
    mutable std::mutex mutex_;
    std::map<SessionId, Session> sessions_;
    std::optional<SessionId> operator_;
    std::optional<std::string> latest_;
    SessionId next_id_ = 1;
};

// Owns the simulation; drains commands once per tick and fans out snapshots.
class SimulationService {
public:
    SimulationService(AppConfig config, SessionHub& hub, CommandQueue& queue);
    ~SimulationService();

    SimulationService(const SimulationService&) = delete;
    SimulationService& operator=(const SimulationService&) = delete;

    // One tick without a clock, for tests and headless use.
    void tick_once();

    // Fixed-rate thread on the steady clock.
    void start();
    void stop();

    std::uint64_t ticks() const { return ticks_.load(); }
    // Latest record, copied under a lock.
    TelemetryRecord latest() const;

private:
    Simulation sim_;
    SessionHub& hub_;
    CommandQueue& queue_;
    VelocityCommand latched_{ConfigVelocity::Zero()};
    std::optional<double> ballscrew_;
    long velocity_age_ = 0;
    long ballscrew_age_ = 0;
    std::deque<SessionCommand> oneshots_;
    std::uint64_t seq_ = 0;
    std::atomic<std::uint64_t> ticks_{0};
    mutable std::mutex latest_mutex_;
    TelemetryRecord latest_;
    std::atomic<bool> running_{false};
    std::thread thread_;
};

std::string snapshot_message(const TelemetryRecord& record, std::uint64_t seq, std::optional<SessionId> op);

}  // namespace ppcm
