#include "ppcm/gripper.hpp"

#include <cmath>
#include <sstream>

#include "ppcm/errors.hpp"

namespace ppcm {

const char* zone_name(Zone z) {
    switch (z) {
        case Zone::I: return "I";
        case Zone::II: return "II";
        case Zone::III: return "III";
    }
    return "?";
}

std::optional<Zone> parse_zone(std::string_view text) {
    if (text == "I") return Zone::I;
    if (text == "II") return Zone::II;
    if (text == "III") return Zone::III;
    return std::nullopt;
}

const char* tube_status_name(TubeStatus s) {
    switch (s) {
        case TubeStatus::Fixed: return "fixed";
        case TubeStatus::Movable: return "movable";
        case TubeStatus::Controllable: return "controllable";
    }
    return "?";
}

Zone ZoneLayout::zone_of(double ballscrew_pos) const {
    if (ballscrew_pos < zone_length) return Zone::I;
    if (ballscrew_pos < 2.0 * zone_length) return Zone::II;
    return Zone::III;
}

std::string GripperState::describe() const {
    std::ostringstream os;
    os << "a=" << (a_open ? "open" : "closed") << " b=" << (b_open ? "open" : "closed")
       << " c=" << (c_open ? "open" : "closed") << " d=" << zone_name(zone) << '/'
       << (d_closed ? "closed" : "open") << " ballscrew=" << ballscrew_pos;
    return os.str();
}

std::optional<TubeStatuses> tube_status(bool a_open, bool b_open, bool c_open, Zone zone, bool d_closed) {
    using enum TubeStatus;
    if (!a_open && !b_open && !c_open) return TubeStatuses{Fixed, Fixed, Fixed};
    if (!d_closed) return std::nullopt;
    if (a_open && b_open && c_open && zone == Zone::I) return TubeStatuses{Controllable, Movable, Movable};
    if (!a_open && b_open && c_open && zone == Zone::II) return TubeStatuses{Fixed, Controllable, Movable};
    if (!a_open && !b_open && c_open && zone == Zone::III) return TubeStatuses{Fixed, Fixed, Controllable};
    return std::nullopt;
}

TubeStatuses tube_status(const GripperState& g) {
    const auto s = tube_status(g.a_open, g.b_open, g.c_open, g.zone, g.d_closed);
    if (!s) throw InvalidGripperCombination("gripper combination not in the actuation table: " + g.describe());
    return *s;
}

std::optional<int> controllable_tube(const TubeStatuses& s) {
    for (int i = 0; i < 3; ++i) {
        if (s[i] == TubeStatus::Controllable) return i;
    }
    return std::nullopt;
}

}  // namespace ppcm
