#pragma once

// Property and oracle suites over sampled in-limit configurations.

#include <string>
#include <vector>

#include "ppcm/config.hpp"

namespace ppcm {

struct SuiteResult {
    std::string name;
    bool passed = false;
    double max_error = 0.0;
    double tolerance = 0.0;
    long samples = 0;
    double seconds = 0.0;
    std::string detail;

    std::string line() const;  // "PASS name max_error=... tol=... n=..."
};

// forward(inverse(C)) = C per section. phi is compared as the curvature
// vector kappa*(cos phi, sin phi) below kappa = 1e-6, where phi alone is
// ill-conditioned.
SuiteResult roundtrip_suite(const ManipulatorGeometry& geom, long samples, std::uint64_t seed);
SuiteResult chord_oracle_suite(const ManipulatorGeometry& geom, long samples, std::uint64_t seed);
SuiteResult chained_oracle_suite(const ManipulatorGeometry& geom, long samples, std::uint64_t seed);
SuiteResult mean_chord_suite(const ManipulatorGeometry& geom, long samples, std::uint64_t seed);
SuiteResult section_jacobian_suite(const ManipulatorGeometry& geom, long samples, std::uint64_t seed);
// Relative finite-difference agreement plus exactly zero upper-right blocks.
SuiteResult multisection_jacobian_suite(const ManipulatorGeometry& geom, long samples, std::uint64_t seed);
SuiteResult decouple_roundtrip_suite(const ManipulatorGeometry& geom, long samples, std::uint64_t seed);

std::vector<SuiteResult> run_validation(const AppConfig& config);

}  // namespace ppcm
