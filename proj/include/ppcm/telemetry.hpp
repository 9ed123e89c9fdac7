#pragma once

// Per-tick telemetry and its file formats.
//
// CSV: one header row, then one row per tick with columns
//   time, in_kappa, in_phi, in_s, mid_kappa, mid_phi, mid_s, out_kappa, out_phi, out_s,
//   L1..L9 (path lengths, mm), F1..F9 (tensions, N),
//   a_open, b_open, c_open, d_zone, d_closed, ballscrew_pos, ballscrew_vel,
//   clamped, rejected, saturated, slack, fault, V1..V9 (spool velocities, mm/s)
// Booleans are 0/1, d_zone is I/II/III, numbers use the shortest text that
// reads back to the same double. The polyline is not stored; import
// regenerates it from the configuration.
//
// JSONL: one object per tick with the same fields plus "polyline".

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ppcm/plant.hpp"

namespace ppcm {

struct TelemetryRecord {
    double time = 0.0;
    ManipulatorConfig config;
    Vector9d L = Vector9d::Zero();
    Vector9d F = Vector9d::Zero();
    Vector9d V = Vector9d::Zero();
    GripperState grippers;
    double ballscrew_vel = 0.0;
    PlantFlags flags;
    std::vector<Eigen::Vector3d> polyline;  // backbone points, base to tip

    bool operator==(const TelemetryRecord&) const = default;
};

std::vector<Eigen::Vector3d> backbone_polyline(const ManipulatorConfig& config, const ManipulatorGeometry& geom,
                                               int samples_per_section);

TelemetryRecord make_record(const PlantState& state, const ManipulatorGeometry& geom, int samples_per_section);

enum class TelemetryFormat { Csv, Jsonl };

// From a file extension (.csv, .jsonl); IoError otherwise.
TelemetryFormat format_for(const std::filesystem::path& path);
std::optional<TelemetryFormat> parse_format(const std::string& name);

std::string csv_header();
void write_csv(std::ostream& out, const std::vector<TelemetryRecord>& records);
std::vector<TelemetryRecord> read_csv(std::istream& in, const ManipulatorGeometry& geom, int samples_per_section);

std::string record_to_json(const TelemetryRecord& r);
void write_jsonl(std::ostream& out, const std::vector<TelemetryRecord>& records);
std::vector<TelemetryRecord> read_jsonl(std::istream& in);

// IoError carrying the path on any failure.
void export_telemetry(const std::vector<TelemetryRecord>& records, TelemetryFormat format,
                      const std::filesystem::path& path);
std::vector<TelemetryRecord> import_telemetry(const std::filesystem::path& path, const ManipulatorGeometry& geom,
                                              int samples_per_section);

}  // namespace ppcm
