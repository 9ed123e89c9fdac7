#include "ppcm/validation.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>

#include "ppcm/sampling.hpp"

namespace ppcm {

std::string SuiteResult::line() const {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%s %-22s max_error=%.3e tol=%.1e n=%ld %.2fs", passed ? "PASS" : "FAIL",
                  name.c_str(), max_error, tolerance, samples, seconds);
    std::string out = buf;
    if (!detail.empty()) out += " (" + detail + ")";
    return out;
}

namespace {

using Clock = std::chrono::steady_clock;

template <class Body>
SuiteResult timed(const char* name, double tolerance, long samples, Body&& body) {
    SuiteResult r;
    r.name = name;
    r.tolerance = tolerance;
    r.samples = samples;
    const auto t0 = Clock::now();
    r.max_error = body(r);
    r.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    r.passed = std::isfinite(r.max_error) && r.max_error < tolerance;
    return r;
}

double config_error(const SectionConfig& a, const SectionConfig& b) {
    double e = std::max(std::abs(a.kappa - b.kappa), std::abs(a.s - b.s));
    if (b.kappa >= 1e-6) {
        e = std::max(e, std::abs(angle_difference(a.phi, b.phi)));
    } else {
        e = std::max(e, std::hypot(a.kappa * std::cos(a.phi) - b.kappa * std::cos(b.phi),
                                   a.kappa * std::sin(a.phi) - b.kappa * std::sin(b.phi)));
    }
    return e;
}

}  // namespace

SuiteResult roundtrip_suite(const ManipulatorGeometry& geom, long samples, std::uint64_t seed) {
    return timed("section_roundtrip", 1e-9, samples, [&](SuiteResult&) {
        std::mt19937_64 rng(seed);
        double worst = 0.0;
        for (long i = 0; i < samples; ++i) {
            const SectionGeometry& g = geom[i % kSections];
            const SectionConfig c = sample_section(rng, g);
            worst = std::max(worst, config_error(forward_section(inverse_section(c, g), g), c));
        }
        return worst;
    });
}

SuiteResult chord_oracle_suite(const ManipulatorGeometry& geom, long samples, std::uint64_t seed) {
    return timed("chord_oracle", 1e-6, samples, [&](SuiteResult&) {
        std::mt19937_64 rng(seed + 1);
        double worst = 0.0;
        for (long i = 0; i < samples; ++i) {
            const SectionGeometry& g = geom[i % kSections];
            const SectionConfig c = sample_section(rng, g);
            const double offset = static_cast<double>(i % 3) * geom.group_offset;
            const Eigen::Vector3d a = rotated_inverse(c, g, offset).vec();
            const Eigen::Vector3d b = chord_oracle(c, g, offset).vec();
            worst = std::max(worst, (a - b).cwiseAbs().maxCoeff());
        }
        return worst;
    });
}

SuiteResult chained_oracle_suite(const ManipulatorGeometry& geom, long samples, std::uint64_t seed) {
    return timed("chained_oracle", 1e-6, samples, [&](SuiteResult&) {
        std::mt19937_64 rng(seed + 2);
        double worst = 0.0;
        for (long i = 0; i < samples; ++i) {
            const ManipulatorConfig c = sample_manipulator(rng, geom);
            worst = std::max(worst,
                             (compose_actuator(c, geom).lengths.L - chained_chord_oracle(c, geom).L).cwiseAbs().maxCoeff());
        }
        return worst;
    });
}

SuiteResult mean_chord_suite(const ManipulatorGeometry& geom, long samples, std::uint64_t seed) {
    return timed("mean_chord_identity", 1e-9, samples, [&](SuiteResult&) {
        std::mt19937_64 rng(seed + 3);
        double worst = 0.0;
        for (long i = 0; i < samples; ++i) {
            const SectionGeometry& g = geom[i % kSections];
            const SectionConfig c = sample_section(rng, g);
            if (c.kappa <= 0.0) continue;
            const TendonLengths l = inverse_section(c, g);
            const double K = 2.0 * g.n * std::sin(c.kappa * c.s / (2.0 * g.n));
            worst = std::max(worst, std::abs((l.l1 + l.l2 + l.l3) / 3.0 - g.disk_length() - K / c.kappa));
        }
        return worst;
    });
}

namespace {

double relative(const Eigen::MatrixXd& a, const Eigen::MatrixXd& fd) {
    double worst = 0.0;
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
        for (Eigen::Index k = 0; k < a.cols(); ++k) {
            worst = std::max(worst, std::abs(a(r, k) - fd(r, k)) / std::max(1.0, std::abs(fd(r, k))));
        }
    }
    return worst;
}

}  // namespace

SuiteResult section_jacobian_suite(const ManipulatorGeometry& geom, long samples, std::uint64_t seed) {
    return timed("section_jacobian", 1e-6, samples, [&](SuiteResult&) {
        std::mt19937_64 rng(seed + 4);
        double worst = 0.0;
        for (long i = 0; i < samples; ++i) {
            const SectionGeometry& g = geom[i % kSections];
            const SectionConfig c = sample_section(rng, g);
            const double offset = static_cast<double>(i % 3) * geom.group_offset;
            worst = std::max(worst, relative(section_jacobian_inverse(c, g, offset),
                                             section_jacobian_inverse_fd(c, g, offset)));
        }
        return worst;
    });
}

SuiteResult multisection_jacobian_suite(const ManipulatorGeometry& geom, long samples, std::uint64_t seed) {
    return timed("multisection_jacobian", 1e-6, samples, [&](SuiteResult& r) {
        std::mt19937_64 rng(seed + 5);
        double worst = 0.0;
        long nonzero_blocks = 0;
        for (long i = 0; i < samples; ++i) {
            const ManipulatorConfig c = sample_manipulator(rng, geom);
            const Matrix9d J = jacobian_inverse(c, geom);
            worst = std::max(worst, relative(J, jacobian_inverse_fd(c, geom)));
            const bool zero = J.block<3, 3>(3, 6).isZero(0.0) && J.block<3, 6>(6, 3).isZero(0.0);
            if (!zero) ++nonzero_blocks;
        }
        r.detail = "upper-right blocks nonzero in " + std::to_string(nonzero_blocks) + " samples";
        return nonzero_blocks > 0 ? INFINITY : worst;
    });
}

SuiteResult decouple_roundtrip_suite(const ManipulatorGeometry& geom, long samples, std::uint64_t seed) {
    return timed("decouple_roundtrip", 1e-9, samples, [&](SuiteResult&) {
        std::mt19937_64 rng(seed + 6);
        double worst = 0.0;
        for (long i = 0; i < samples; ++i) {
            const ManipulatorConfig c = sample_manipulator(rng, geom);
            const ManipulatorConfig back = forward_decouple(compose_actuator(c, geom).lengths, geom).config;
            for (int s = 0; s < kSections; ++s) worst = std::max(worst, config_error(back[s], c[s]));
        }
        return worst;
    });
}

std::vector<SuiteResult> run_validation(const AppConfig& config) {
    const auto& g = config.geometry;
    const auto& v = config.validation;
    return {
        roundtrip_suite(g, v.samples, v.seed),
        chord_oracle_suite(g, v.samples, v.seed),
        mean_chord_suite(g, v.samples, v.seed),
        chained_oracle_suite(g, v.samples, v.seed),
        decouple_roundtrip_suite(g, v.samples, v.seed),
        section_jacobian_suite(g, v.jacobian_samples, v.seed),
        multisection_jacobian_suite(g, v.jacobian_samples, v.seed),
    };
}

}  // namespace ppcm
