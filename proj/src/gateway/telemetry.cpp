#include "ppcm/telemetry.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "json.hpp"

#include "ppcm/errors.hpp"

namespace ppcm {

using nlohmann::json;

std::vector<Eigen::Vector3d> backbone_polyline(const ManipulatorConfig& config, const ManipulatorGeometry& geom,
                                               int samples_per_section) {
    std::vector<Eigen::Vector3d> points;
    points.push_back(Eigen::Vector3d::Zero());
    for (const Pose& p : backbone_poses(config, geom, samples_per_section)) points.push_back(p.position);
    return points;
}

TelemetryRecord make_record(const PlantState& s, const ManipulatorGeometry& geom, int samples_per_section) {
    TelemetryRecord r;
    r.time = s.time;
    r.config = s.config;
    r.L = s.actuator.L;
    r.F = s.tendon.tensions;
    r.V = s.tendon.spool_vel;
    r.grippers = s.grippers;
    r.ballscrew_vel = s.ballscrew_vel;
    r.flags = s.flags;
    r.polyline = backbone_polyline(s.config, geom, samples_per_section);
    return r;
}

TelemetryFormat format_for(const std::filesystem::path& path) {
    const auto ext = path.extension().string();
    if (ext == ".csv") return TelemetryFormat::Csv;
    if (ext == ".jsonl") return TelemetryFormat::Jsonl;
    throw IoError(path.string() + ": unknown telemetry extension (expected .csv or .jsonl)");
}

std::optional<TelemetryFormat> parse_format(const std::string& name) {
    if (name == "csv") return TelemetryFormat::Csv;
    if (name == "jsonl") return TelemetryFormat::Jsonl;
    return std::nullopt;
}

namespace {

void put(std::string& line, double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    line.append(buf, res.ptr);
}

double take(const std::string& field, int row) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc{} || ptr != field.data() + field.size()) {
        throw IoError("row " + std::to_string(row) + ": bad number '" + field + "'");
    }
    return v;
}

bool take_bool(const std::string& field, int row) {
    if (field == "1") return true;
    if (field == "0") return false;
    throw IoError("row " + std::to_string(row) + ": bad flag '" + field + "'");
}

constexpr int kColumns = 1 + 9 + 18 + 7 + 5 + 9;

}  // namespace

std::string csv_header() {
    std::string h = "time";
    for (int s = 0; s < kSections; ++s) {
        for (const char* p : {"kappa", "phi", "s"}) h += std::string(",") + section_name(s) + "_" + p;
    }
    for (const char* prefix : {"L", "F"}) {
        for (int i = 1; i <= 9; ++i) h += std::string(",") + prefix + std::to_string(i);
    }
    h += ",a_open,b_open,c_open,d_zone,d_closed,ballscrew_pos,ballscrew_vel";
    h += ",clamped,rejected,saturated,slack,fault";
    for (int i = 1; i <= 9; ++i) h += ",V" + std::to_string(i);
    return h;
}

void write_csv(std::ostream& out, const std::vector<TelemetryRecord>& records) {
    out << csv_header() << '\n';
    std::string line;
    for (const auto& r : records) {
        line.clear();
        put(line, r.time);
        auto field = [&](double v) {
            line += ',';
            put(line, v);
        };
        auto flag = [&](bool b) { line += b ? ",1" : ",0"; };
        for (int s = 0; s < kSections; ++s) {
            field(r.config[s].kappa);
            field(r.config[s].phi);
            field(r.config[s].s);
        }
        for (int i = 0; i < 9; ++i) field(r.L[i]);
        for (int i = 0; i < 9; ++i) field(r.F[i]);
        flag(r.grippers.a_open);
        flag(r.grippers.b_open);
        flag(r.grippers.c_open);
        line += ',';
        line += zone_name(r.grippers.zone);
        flag(r.grippers.d_closed);
        field(r.grippers.ballscrew_pos);
        field(r.ballscrew_vel);
        flag(r.flags.clamped);
        flag(r.flags.rejected);
        flag(r.flags.saturated);
        flag(r.flags.slack);
        flag(r.flags.fault);
        for (int i = 0; i < 9; ++i) field(r.V[i]);
        out << line << '\n';
    }
}

std::vector<TelemetryRecord> read_csv(std::istream& in, const ManipulatorGeometry& geom, int samples_per_section) {
    std::string line;
    if (!std::getline(in, line) || line != csv_header()) throw IoError("missing or unexpected CSV header");
    std::vector<TelemetryRecord> out;
    int row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::istringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
        if (static_cast<int>(f.size()) != kColumns) {
            throw IoError("row " + std::to_string(row) + ": expected " + std::to_string(kColumns) + " columns");
        }
        TelemetryRecord r;
        int k = 0;
        r.time = take(f[k++], row);
        for (int s = 0; s < kSections; ++s) {
            r.config[s].kappa = take(f[k++], row);
            r.config[s].phi = take(f[k++], row);
            r.config[s].s = take(f[k++], row);
        }
        for (int i = 0; i < 9; ++i) r.L[i] = take(f[k++], row);
        for (int i = 0; i < 9; ++i) r.F[i] = take(f[k++], row);
        r.grippers.a_open = take_bool(f[k++], row);
        r.grippers.b_open = take_bool(f[k++], row);
        r.grippers.c_open = take_bool(f[k++], row);
        const auto zone = parse_zone(f[k++]);
        if (!zone) throw IoError("row " + std::to_string(row) + ": bad zone");
        r.grippers.zone = *zone;
        r.grippers.d_closed = take_bool(f[k++], row);
        r.grippers.ballscrew_pos = take(f[k++], row);
        r.ballscrew_vel = take(f[k++], row);
        r.flags.clamped = take_bool(f[k++], row);
        r.flags.rejected = take_bool(f[k++], row);
        r.flags.saturated = take_bool(f[k++], row);
        r.flags.slack = take_bool(f[k++], row);
        r.flags.fault = take_bool(f[k++], row);
        for (int i = 0; i < 9; ++i) r.V[i] = take(f[k++], row);
        r.polyline = backbone_polyline(r.config, geom, samples_per_section);
        out.push_back(std::move(r));
    }
    return out;
}

namespace {

json nine(const Vector9d& v) { return std::vector<double>(v.data(), v.data() + 9); }

Vector9d nine_from(const json& j) {
    const auto v = j.get<std::vector<double>>();
    if (v.size() != 9) throw IoError("expected 9 values");
    return Eigen::Map<const Vector9d>(v.data());
}

}  // namespace

std::string record_to_json(const TelemetryRecord& r) {
    json sections = json::array();
    for (const auto& s : r.config.sections) sections.push_back({{"kappa", s.kappa}, {"phi", s.phi}, {"s", s.s}});
    json poly = json::array();
    for (const auto& p : r.polyline) poly.push_back({p.x(), p.y(), p.z()});
    const json j = {
        {"time", r.time},
        {"sections", sections},
        {"L", nine(r.L)},
        {"F", nine(r.F)},
        {"V", nine(r.V)},
        {"gripper",
         {{"a_open", r.grippers.a_open},
          {"b_open", r.grippers.b_open},
          {"c_open", r.grippers.c_open},
          {"d_zone", zone_name(r.grippers.zone)},
          {"d_closed", r.grippers.d_closed},
          {"ballscrew_pos", r.grippers.ballscrew_pos}}},
        {"ballscrew_vel", r.ballscrew_vel},
        {"flags",
         {{"clamped", r.flags.clamped},
          {"rejected", r.flags.rejected},
          {"saturated", r.flags.saturated},
          {"slack", r.flags.slack},
          {"fault", r.flags.fault}}},
        {"polyline", poly},
    };
    return j.dump();
}

void write_jsonl(std::ostream& out, const std::vector<TelemetryRecord>& records) {
    for (const auto& r : records) out << record_to_json(r) << '\n';
}

std::vector<TelemetryRecord> read_jsonl(std::istream& in) {
    std::vector<TelemetryRecord> out;
    std::string line;
    int row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        try {
            const json j = json::parse(line);
            TelemetryRecord r;
            r.time = j.at("time").get<double>();
            const json& secs = j.at("sections");
            if (secs.size() != 3) throw IoError("expected 3 sections");
            for (int s = 0; s < kSections; ++s) {
                r.config[s] = {secs[s].at("kappa").get<double>(), secs[s].at("phi").get<double>(),
                               secs[s].at("s").get<double>()};
            }
            r.L = nine_from(j.at("L"));
            r.F = nine_from(j.at("F"));
            r.V = nine_from(j.at("V"));
            const json& g = j.at("gripper");
            r.grippers.a_open = g.at("a_open").get<bool>();
            r.grippers.b_open = g.at("b_open").get<bool>();
            r.grippers.c_open = g.at("c_open").get<bool>();
            const auto zone = parse_zone(g.at("d_zone").get<std::string>());
            if (!zone) throw IoError("bad zone");
            r.grippers.zone = *zone;
            r.grippers.d_closed = g.at("d_closed").get<bool>();
            r.grippers.ballscrew_pos = g.at("ballscrew_pos").get<double>();
            r.ballscrew_vel = j.at("ballscrew_vel").get<double>();
            const json& fl = j.at("flags");
            r.flags.clamped = fl.at("clamped").get<bool>();
            r.flags.rejected = fl.at("rejected").get<bool>();
            r.flags.saturated = fl.at("saturated").get<bool>();
            r.flags.slack = fl.at("slack").get<bool>();
            r.flags.fault = fl.at("fault").get<bool>();
            for (const auto& p : j.at("polyline")) r.polyline.emplace_back(p.at(0), p.at(1), p.at(2));
            out.push_back(std::move(r));
        } catch (const json::exception& e) {
            throw IoError("line " + std::to_string(row) + ": " + e.what());
        } catch (const IoError& e) {
            throw IoError("line " + std::to_string(row) + ": " + e.what());
        }
    }
    return out;
}

void export_telemetry(const std::vector<TelemetryRecord>& records, TelemetryFormat format,
                      const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    if (format == TelemetryFormat::Csv) {
        write_csv(out, records);
    } else {
        write_jsonl(out, records);
    }
    out.flush();
    if (!out) throw IoError("write failed: " + path.string());
}

std::vector<TelemetryRecord> import_telemetry(const std::filesystem::path& path, const ManipulatorGeometry& geom,
                                              int samples_per_section) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    try {
        if (format_for(path) == TelemetryFormat::Csv) return read_csv(in, geom, samples_per_section);
        return read_jsonl(in);
    } catch (const IoError& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

}  // namespace ppcm
