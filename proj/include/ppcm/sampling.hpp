#pragma once

#include <random>

#include "ppcm/multisection.hpp"

namespace ppcm {

// Uniform in-limit section configuration: s in [s_min, s_max], kappa in
// [0, kappa_limit(s)], phi in [-pi, pi).
inline SectionConfig sample_section(std::mt19937_64& rng, const SectionGeometry& g) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    SectionConfig c;
    c.s = g.s_min + (g.s_max - g.s_min) * unit(rng);
    c.kappa = g.kappa_limit(c.s) * unit(rng);
    c.phi = -std::numbers::pi + 2.0 * std::numbers::pi * unit(rng);
    return c;
}

inline ManipulatorConfig sample_manipulator(std::mt19937_64& rng, const ManipulatorGeometry& g) {
    ManipulatorConfig c;
    for (int i = 0; i < kSections; ++i) c[i] = sample_section(rng, g[i]);
    return c;
}

}  // namespace ppcm
