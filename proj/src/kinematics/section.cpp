#include "ppcm/kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ppcm/errors.hpp"

namespace ppcm {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSqrt3 = std::numbers::sqrt3;

void require_finite(double v, const char* what) {
    if (!std::isfinite(v)) {
        throw InvalidInput(std::string(what) + " is not finite");
    }
}

// asin(x)/x, accurate near zero.
double asinc(double x) {
    if (std::abs(x) < 1e-4) {
        const double x2 = x * x;
        return 1.0 + x2 / 6.0 + 3.0 * x2 * x2 / 40.0;
    }
    return std::asin(x) / x;
}

}  // namespace

double canonical_angle(double angle) {
    double a = std::fmod(angle + kPi, 2.0 * kPi);
    if (a < 0.0) a += 2.0 * kPi;
    a -= kPi;
    if (a >= kPi) a -= 2.0 * kPi;
    return a;
}

double angle_difference(double a, double b) {
    double diff = std::remainder(a - b, 2.0 * kPi);
    if (diff <= -kPi) diff += 2.0 * kPi;
    return diff;
}

double SectionGeometry::kappa_limit(double s) const {
    return s > 0.0 ? std::min(kappa_max, theta_max / s) : kappa_max;
}

void SectionGeometry::validate() const {
    std::ostringstream why;
    if (n < 1) why << "n must be >= 1; ";
    if (!(d > 0.0) || !std::isfinite(d)) why << "d must be > 0; ";
    if (!(h >= 0.0) || !std::isfinite(h)) why << "h must be >= 0; ";
    if (!(s_min > 0.0) || !(s_min <= s_max) || !std::isfinite(s_max)) why << "need 0 < s_min <= s_max; ";
    if (!(kappa_max > 0.0) || !std::isfinite(kappa_max)) why << "kappa_max must be > 0; ";
    if (!(theta_max > 0.0) || !std::isfinite(theta_max)) why << "theta_max must be > 0; ";
    if (kappa_max * d >= 1.0) why << "kappa_max * d must be < 1; ";
    const std::string msg = why.str();
    if (!msg.empty()) {
        throw InvalidInput("invalid section geometry: " + msg.substr(0, msg.size() - 2));
    }
}

SectionConfig SectionConfig::canonical() const {
    if (kappa == 0.0) return {0.0, 0.0, s};
    return {kappa, canonical_angle(phi), s};
}

namespace detail {

double sinc(double x) {
    if (std::abs(x) < 1e-4) {
        const double x2 = x * x;
        return 1.0 - x2 / 6.0 + x2 * x2 / 120.0;
    }
    return std::sin(x) / x;
}

double sinc_derivative(double x) {
    if (std::abs(x) < 1e-2) {
        const double x2 = x * x;
        return x * (-1.0 / 3.0 + x2 / 30.0 - x2 * x2 / 840.0);
    }
    return (x * std::cos(x) - std::sin(x)) / (x * x);
}

Eigen::Vector3d section_lengths_raw(double kappa, double phi, double s, const SectionGeometry& geom,
                                    double offset) {
    const double x = kappa * s / (2.0 * geom.n);
    const double chord_over_kappa = s * sinc(x);  // K / kappa
    Eigen::Vector3d l;
    for (int i = 0; i < 3; ++i) {
        const double c = std::sin(phi + offset + i * kTendonSpacing);
        l[i] = chord_over_kappa * (1.0 - geom.d * kappa * c) + geom.disk_length();
    }
    return l;
}

}  // namespace detail

ArcIntermediates arc_intermediates(const TendonLengths& lengths, const SectionGeometry& geom) {
    const double d12 = lengths.l1 - lengths.l2;
    const double d23 = lengths.l2 - lengths.l3;
    const double d31 = lengths.l3 - lengths.l1;
    ArcIntermediates out;
    // Equal to sqrt(l1^2 + l2^2 + l3^2 - l1 l2 - l2 l3 - l1 l3) without the cancellation.
    out.l_m = std::sqrt(0.5 * (d12 * d12 + d23 * d23 + d31 * d31));
    out.l_c = lengths.l1 + lengths.l2 + lengths.l3 - 3.0 * geom.disk_length();
    // l_m = 1.5 d K for any realizable triple.
    out.K_chord = out.l_m / (1.5 * geom.d);
    return out;
}

SectionConfig forward_section(const TendonLengths& lengths, const SectionGeometry& geom) {
    const double nh = geom.disk_length();
    for (int i = 0; i < 3; ++i) {
        require_finite(lengths[i], "tendon length");
        if (lengths[i] <= nh) {
            throw InvalidInput("tendon length " + std::to_string(lengths[i]) +
                               " does not exceed its disk passages (" + std::to_string(nh) + " mm)");
        }
    }
    const ArcIntermediates arc = arc_intermediates(lengths, geom);
    const double ratio = arc.l_m / (3.0 * geom.n * geom.d);
    if (ratio >= 1.0) {
        throw DomainError("tendon triple not realizable: l_m / 3nd = " + std::to_string(ratio));
    }
    const double kappa = 2.0 * arc.l_m / (geom.d * arc.l_c);
    if (kappa < kStraightEpsilon) {
        return {0.0, 0.0, arc.l_c / 3.0};
    }
    const double s = arc.l_c / 3.0 * asinc(ratio);
    return {kappa, bend_plane_angle(lengths), s};
}

double bend_plane_angle(const TendonLengths& lengths) {
    return canonical_angle(
        std::atan2(lengths.l2 + lengths.l3 - 2.0 * lengths.l1, kSqrt3 * (lengths.l3 - lengths.l2)));
}

TendonLengths rotated_inverse(const SectionConfig& config, const SectionGeometry& geom, double offset,
                              LimitCheck check) {
    require_finite(config.kappa, "curvature");
    require_finite(config.phi, "bending-plane angle");
    require_finite(config.s, "arc length");
    if (config.kappa < 0.0) throw InvalidInput("curvature must be non-negative");
    if (!(config.s > 0.0)) throw InvalidInput("arc length must be positive");
    if (config.kappa * geom.d >= 1.0) {
        throw DomainError("kappa * d >= 1: tendon hole circle exceeds the bending radius");
    }
    if (check == LimitCheck::Strict) {
        if (config.s < geom.s_min || config.s > geom.s_max) {
            throw LimitViolation("arc length " + std::to_string(config.s) + " outside [" +
                                 std::to_string(geom.s_min) + ", " + std::to_string(geom.s_max) + "]");
        }
        if (config.kappa > geom.kappa_limit(config.s)) {
            throw LimitViolation("curvature " + std::to_string(config.kappa) + " above limit " +
                                 std::to_string(geom.kappa_limit(config.s)));
        }
    }
    // No straight branch: the sinc series already gives s + nh at kappa = 0.
    return TendonLengths::from(detail::section_lengths_raw(config.kappa, config.phi, config.s, geom, offset));
}

TendonLengths inverse_section(const SectionConfig& config, const SectionGeometry& geom, LimitCheck check) {
    return rotated_inverse(config, geom, 0.0, check);
}

Eigen::Matrix3d section_jacobian_inverse(const SectionConfig& config, const SectionGeometry& geom,
                                         double offset) {
    const double kappa = config.kappa;
    const double s = config.s;
    const double n2 = 2.0 * geom.n;
    const double x = kappa * s / n2;
    const double chord_over_kappa = s * detail::sinc(x);
    const double dA_dkappa = s * detail::sinc_derivative(x) * s / n2;
    const double dA_ds = std::cos(x);

    Eigen::Matrix3d J;
    for (int i = 0; i < 3; ++i) {
        const double angle = config.phi + offset + i * kTendonSpacing;
        const double c = std::sin(angle);
        const double radial = 1.0 - geom.d * kappa * c;
        J(i, 0) = dA_dkappa * radial - chord_over_kappa * geom.d * c;
        J(i, 1) = -chord_over_kappa * geom.d * kappa * std::cos(angle);
        J(i, 2) = dA_ds * radial;
    }
    if (!J.allFinite()) {
        throw SingularityError("section inverse Jacobian is not finite");
    }
    return J;
}

Eigen::Matrix3d section_jacobian_inverse_fd(const SectionConfig& config, const SectionGeometry& geom,
                                            double offset, double step) {
    const Eigen::Vector3d x0(config.kappa, config.phi, config.s);
    Eigen::Matrix3d J;
    for (int j = 0; j < 3; ++j) {
        const double hj = step * std::max(1.0, std::abs(x0[j]));
        Eigen::Vector3d xp = x0;
        Eigen::Vector3d xm = x0;
        xp[j] += hj;
        xm[j] -= hj;
        const Eigen::Vector3d lp = detail::section_lengths_raw(xp[0], xp[1], xp[2], geom, offset);
        const Eigen::Vector3d lm = detail::section_lengths_raw(xm[0], xm[1], xm[2], geom, offset);
        J.col(j) = (lp - lm) / (2.0 * hj);
    }
    return J;
}

}  // namespace ppcm
