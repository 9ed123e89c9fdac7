#include "ppcm/protocol.hpp"

#include <chrono>
#include <cmath>
#include <iostream>

#include "json.hpp"

#include "ppcm/errors.hpp"

namespace ppcm {

using nlohmann::json;

void CommandQueue::push(SessionCommand c) {
    std::lock_guard lock(mutex_);
    items_.push_back(std::move(c));
}

std::vector<SessionCommand> CommandQueue::drain() {
    std::lock_guard lock(mutex_);
    std::vector<SessionCommand> out;
    out.swap(items_);
    return out;
}

std::string error_message(const std::string& code, const std::string& message, const std::string& in_reply_to) {
    json j = {{"type", "error"}, {"code", code}, {"message", message}};
    if (!in_reply_to.empty()) j["in_reply_to"] = in_reply_to;
    return j.dump();
}

namespace {

std::string ack(const std::string& of) { return json{{"type", "ack"}, {"of", of}}.dump(); }

bool open_word(const json& j, const char* key) {
    const std::string w = j.at(key).get<std::string>();
    if (w == "open") return true;
    if (w == "closed") return false;
    throw InvalidInput(std::string(key) + " must be \"open\" or \"closed\"");
}

GripperState parse_gripper(const json& j) {
    GripperState g;
    g.a_open = open_word(j, "a");
    g.b_open = open_word(j, "b");
    g.c_open = open_word(j, "c");
    const auto zone = parse_zone(j.at("zone").get<std::string>());
    if (!zone) throw InvalidInput("zone must be I, II or III");
    g.zone = *zone;
    g.d_closed = !open_word(j, "d");
    return g;
}

}  // namespace

SessionHub::SessionHub(CommandQueue& queue, ProtocolSettings settings)
    : queue_(queue), settings_(std::move(settings)) {}

SessionId SessionHub::open_session(Notify notify) {
    std::lock_guard lock(mutex_);
    const SessionId id = next_id_++;
    sessions_[id].notify = std::move(notify);
    return id;
}

void SessionHub::close_session(SessionId id) {
    bool was_operator = false;
    {
        std::lock_guard lock(mutex_);
        sessions_.erase(id);
        if (operator_ == id) {
            operator_.reset();
            was_operator = true;
        }
    }
    if (was_operator) queue_.push({id, DeadmanCommand{}});
}

void SessionHub::reply_locked(SessionId id, std::string message, std::vector<Notify>& wake) {
    const auto it = sessions_.find(id);
    if (it == sessions_.end()) return;
    it->second.replies.push_back(std::move(message));
    if (it->second.notify) wake.push_back(it->second.notify);
}

void SessionHub::reply(SessionId id, std::string message) {
    std::vector<Notify> wake;
    {
        std::lock_guard lock(mutex_);
        reply_locked(id, std::move(message), wake);
    }
    for (auto& w : wake) w();
}

void SessionHub::publish_snapshot(const std::string& message) {
    std::vector<Notify> wake;
    {
        std::lock_guard lock(mutex_);
        latest_ = message;
        for (auto& [id, s] : sessions_) {
            if (s.snapshot) ++s.dropped;
            s.snapshot = message;
            s.snapshot_after = s.replies.size();
            if (s.notify) wake.push_back(s.notify);
        }
    }
    for (auto& w : wake) w();
}

std::vector<std::string> SessionHub::take(SessionId id) {
    std::lock_guard lock(mutex_);
    std::vector<std::string> out;
    const auto it = sessions_.find(id);
    if (it == sessions_.end()) return out;
    Session& s = it->second;
    for (std::size_t i = 0; i <= s.replies.size(); ++i) {
        if (s.snapshot && i == s.snapshot_after) out.push_back(std::move(*s.snapshot));
        if (i < s.replies.size()) out.push_back(std::move(s.replies[i]));
    }
    s.replies.clear();
    s.snapshot.reset();
    return out;
}

std::optional<SessionId> SessionHub::operator_session() const {
    std::lock_guard lock(mutex_);
    return operator_;
}

std::uint64_t SessionHub::dropped_snapshots(SessionId id) const {
    std::lock_guard lock(mutex_);
    const auto it = sessions_.find(id);
    return it == sessions_.end() ? 0 : it->second.dropped;
}

std::size_t SessionHub::session_count() const {
    std::lock_guard lock(mutex_);
    return sessions_.size();
}

void SessionHub::handle(SessionId id, const std::string& text) {
    std::vector<Notify> wake;
    std::optional<SessionCommand> command;
    {
        std::lock_guard lock(mutex_);
        if (!sessions_.count(id)) return;
        auto send = [&](std::string m) { reply_locked(id, std::move(m), wake); };

        json j;
        try {
            j = json::parse(text);
        } catch (const json::parse_error&) {
            send(error_message("bad_command", "message is not valid JSON"));
        }
        if (!j.is_null()) {
            const std::string type = j.is_object() && j.contains("type") && j["type"].is_string()
                                         ? j["type"].get<std::string>()
                                         : std::string();
            const bool is_operator = operator_ == id;
            auto require_operator = [&]() {
                if (is_operator) return true;
                std::clog << "session " << id << ": " << type << " from a non-operator rejected\n";
                send(error_message("not_operator", "command authority is held by another session or none", type));
                return false;
            };
            try {
                if (type.empty()) {
                    send(error_message("bad_command", "expected an object with a string \"type\""));
                } else if (type == "hello") {
                    const int version = j.value("version", kProtocolVersion);
                    if (version != kProtocolVersion) {
                        send(error_message("unsupported_version",
                                           "gateway speaks version " + std::to_string(kProtocolVersion), type));
                    } else {
                        send(json{{"type", "hello"},
                                  {"version", kProtocolVersion},
                                  {"session", id},
                                  {"tick_hz", settings_.tick_hz},
                                  {"broadcast_hz", settings_.broadcast_hz},
                                  {"watchdog_ms", settings_.watchdog_ms}}
                                 .dump());
                    }
                } else if (type == "acquire_operator") {
                    if (operator_ && *operator_ != id) {
                        send(error_message("role_denied", "operator role is held by session " +
                                                              std::to_string(*operator_), type));
                    } else {
                        operator_ = id;
                        send(ack(type));
                    }
                } else if (type == "release_operator") {
                    if (!is_operator) {
                        send(error_message("not_operator", "this session does not hold the operator role", type));
                    } else {
                        operator_.reset();
                        command = SessionCommand{id, DeadmanCommand{}};
                        send(ack(type));
                    }
                } else if (type == "cmd_velocity") {
                    if (require_operator()) {
                        const json& v = j.at("cdot");
                        if (!v.is_array() || v.size() != 9) throw InvalidInput("cdot must hold 9 numbers");
                        ConfigVelocity c;
                        for (int i = 0; i < 9; ++i) {
                            if (!v[i].is_number()) throw InvalidInput("cdot must hold 9 numbers");
                            c[i] = v[i].get<double>();
                        }
                        if (!c.allFinite()) throw InvalidInput("cdot must be finite");
                        command = SessionCommand{id, VelocityCommand{c}};
                    }
                } else if (type == "cmd_ballscrew") {
                    if (require_operator()) {
                        const json& r = j.at("rate");
                        if (!r.is_number() || !std::isfinite(r.get<double>())) throw InvalidInput("rate must be a number");
                        command = SessionCommand{id, BallscrewCommand{r.get<double>()}};
                    }
                } else if (type == "cmd_gripper") {
                    if (require_operator()) command = SessionCommand{id, GripperCommand{parse_gripper(j)}};
                } else if (type == "calibrate") {
                    if (require_operator()) command = SessionCommand{id, CalibrateCommand{}};
                } else if (type == "snapshot") {
                    if (latest_) {
                        send(*latest_);
                    } else {
                        send(error_message("bad_command", "no snapshot available yet", type));
                    }
                } else {
                    send(error_message("bad_command", "unknown message type '" + type + "'", type));
                }
            } catch (const json::exception& e) {
                send(error_message("bad_command", e.what(), type));
            } catch (const InvalidInput& e) {
                send(error_message("bad_command", e.what(), type));
            }
        }
    }
    if (command) queue_.push(std::move(*command));
    for (auto& w : wake) w();
}

std::string snapshot_message(const TelemetryRecord& record, std::uint64_t seq, std::optional<SessionId> op) {
    json j = {{"type", "snapshot"}, {"seq", seq}, {"record", json::parse(record_to_json(record))}};
    j["operator"] = op ? json(*op) : json(nullptr);
    return j.dump();
}

SimulationService::SimulationService(AppConfig config, SessionHub& hub, CommandQueue& queue)
    : sim_(std::move(config)), hub_(hub), queue_(queue) {
    latest_ = make_record(sim_.state(), sim_.config().geometry, sim_.config().protocol.polyline_samples);
}

SimulationService::~SimulationService() { stop(); }

void SimulationService::tick_once() {
    for (auto& c : queue_.drain()) {
        if (auto* v = std::get_if<VelocityCommand>(&c.what)) {
            latched_ = *v;
            velocity_age_ = 0;
        } else if (auto* b = std::get_if<BallscrewCommand>(&c.what)) {
            ballscrew_ = b->rate;
            ballscrew_age_ = 0;
        } else if (std::holds_alternative<DeadmanCommand>(c.what)) {
            latched_.cdot.setZero();
            ballscrew_.reset();
        } else {
            oneshots_.push_back(std::move(c));
        }
    }
    const ProtocolSettings& p = sim_.config().protocol;
    const long watchdog = std::max(1L, std::lround(p.watchdog_ms / 1000.0 * p.tick_hz));
    if (velocity_age_ >= watchdog) latched_.cdot.setZero();
    if (ballscrew_age_ >= watchdog) ballscrew_.reset();

    TickInput in;
    in.cdot = latched_.cdot;
    in.ballscrew = ballscrew_;
    std::optional<SessionCommand> oneshot;
    if (!oneshots_.empty()) {
        oneshot = std::move(oneshots_.front());
        oneshots_.pop_front();
        if (auto* g = std::get_if<GripperCommand>(&oneshot->what)) {
            in.gripper = g->cmd;
        } else {
            // Calibration is a reset: latched motion does not survive it.
            in.calibrate = true;
            latched_.cdot.setZero();
            ballscrew_.reset();
            in.cdot.setZero();
            in.ballscrew.reset();
        }
    }
    TickResult r = sim_.tick(in);
    if (oneshot) {
        const bool gripper = std::holds_alternative<GripperCommand>(oneshot->what);
        const char* of = gripper ? "cmd_gripper" : "calibrate";
        if (r.gripper_error) {
            hub_.reply(oneshot->session, error_message("gripper_rejected", *r.gripper_error, of));
        } else {
            hub_.reply(oneshot->session, json{{"type", "ack"}, {"of", of}}.dump());
        }
    }
    ++velocity_age_;
    ++ballscrew_age_;
    const std::uint64_t n = ++ticks_;
    if (n % static_cast<std::uint64_t>(p.broadcast_every()) == 0) {
        hub_.publish_snapshot(snapshot_message(r.record, seq_++, hub_.operator_session()));
    }
    std::lock_guard lock(latest_mutex_);
    latest_ = std::move(r.record);
}

TelemetryRecord SimulationService::latest() const {
    std::lock_guard lock(latest_mutex_);
    return latest_;
}

void SimulationService::start() {
    if (running_.exchange(true)) return;
    thread_ = std::thread([this] {
        using Clock = std::chrono::steady_clock;
        const auto period = std::chrono::duration_cast<Clock::duration>(
            std::chrono::duration<double>(sim_.config().protocol.dt()));
        auto next = Clock::now();
        while (running_.load()) {
            tick_once();
            next += period;
            std::this_thread::sleep_until(next);
        }
    });
}

void SimulationService::stop() {
    running_.store(false);
    if (thread_.joinable()) thread_.join();
}

}  // namespace ppcm
