#include <algorithm>
#include <cmath>
#include <sstream>

#include "ppcm/multisection.hpp"

namespace ppcm {

namespace {

// Values sitting on a bound after clamping must not register as violations.
bool above(double value, double bound) { return value > bound + 1e-12 * std::max(1.0, std::abs(bound)); }
bool below(double value, double bound) { return value < bound - 1e-12 * std::max(1.0, std::abs(bound)); }

}  // namespace

const char* limit_parameter_name(LimitParameter p) {
    switch (p) {
        case LimitParameter::ArcLength: return "s";
        case LimitParameter::Curvature: return "kappa";
        case LimitParameter::Bend: return "bend";
        case LimitParameter::TotalLength: return "total_length";
    }
    return "?";
}

std::string LimitViolationRecord::describe() const {
    std::ostringstream os;
    os << (section >= 0 ? section_name(section) : "manipulator") << ' ' << limit_parameter_name(parameter)
       << '=' << value << " bound=" << bound;
    return os.str();
}

std::vector<LimitViolationRecord> validate_limits(const ManipulatorConfig& config,
                                                  const ManipulatorGeometry& geom) {
    std::vector<LimitViolationRecord> out;
    for (int i = 0; i < kSections; ++i) {
        const SectionConfig& c = config[i];
        const SectionGeometry& g = geom[i];
        if (below(c.s, g.s_min)) out.push_back({i, LimitParameter::ArcLength, c.s, g.s_min});
        if (above(c.s, g.s_max)) out.push_back({i, LimitParameter::ArcLength, c.s, g.s_max});
        if (c.kappa < 0.0) out.push_back({i, LimitParameter::Curvature, c.kappa, 0.0});
        if (above(c.kappa, g.kappa_max)) out.push_back({i, LimitParameter::Curvature, c.kappa, g.kappa_max});
        if (above(c.bend(), g.theta_max)) out.push_back({i, LimitParameter::Bend, c.bend(), g.theta_max});
    }
    const double total = config.total_length();
    if (below(total, geom.total_min)) out.push_back({-1, LimitParameter::TotalLength, total, geom.total_min});
    if (above(total, geom.total_max)) out.push_back({-1, LimitParameter::TotalLength, total, geom.total_max});
    return out;
}

}  // namespace ppcm
