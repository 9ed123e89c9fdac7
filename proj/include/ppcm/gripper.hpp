#pragma once

// Push-pull backbone actuation. Grippers a, b, c clamp tubes 1-3 (proximal,
// middle, distal backbone); gripper d rides the ballscrew and clamps whichever
// tube is exposed in its zone.

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace ppcm {

enum class Zone { I = 0, II = 1, III = 2 };
enum class TubeStatus { Fixed, Movable, Controllable };

const char* zone_name(Zone z);
std::optional<Zone> parse_zone(std::string_view text);
const char* tube_status_name(TubeStatus s);

struct ZoneLayout {
    double zone_length = 200.0;  // mm per zone; ballscrew travel is 3 zones

    Zone zone_of(double ballscrew_pos) const;
    double lower(Zone z) const { return static_cast<int>(z) * zone_length; }
    double upper(Zone z) const { return (static_cast<int>(z) + 1) * zone_length; }
    double travel() const { return 3.0 * zone_length; }

    bool operator==(const ZoneLayout&) const = default;
};

struct GripperState {
    bool a_open = false;
    bool b_open = false;
    bool c_open = false;
    Zone zone = Zone::I;
    bool d_closed = false;
    double ballscrew_pos = 0.0;  // mm

    bool operator==(const GripperState&) const = default;
    std::string describe() const;
};

using TubeStatuses = std::array<TubeStatus, 3>;

// nullopt for a tuple outside the table. Accepted: the three push-pull rows
// with d closed, and all three tube grippers closed in any zone with d either
// closed or open.
std::optional<TubeStatuses> tube_status(bool a_open, bool b_open, bool c_open, Zone zone, bool d_closed);

// Throws InvalidGripperCombination for a tuple outside the table.
TubeStatuses tube_status(const GripperState& g);

// Index of the Controllable tube, if any.
std::optional<int> controllable_tube(const TubeStatuses& s);

}  // namespace ppcm
