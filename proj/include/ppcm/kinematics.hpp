#pragma once

// Single-section piecewise-constant-curvature maps between the three tendon
// lengths of one section and its (curvature, bending-plane angle, arc length)
// triple, plus the explicit disk-chain construction used to check them.
//
// Conventions
//   * The section frame has z along the backbone at the base disk. A bending
//     plane angle phi means the arc curves towards (cos phi, sin phi, 0).
//   * Tendon hole i (i = 0, 1, 2) of a group rotated by `offset` sits at
//     angle pi/2 - offset - i * 120 deg, so tendon 1 of the unrotated group
//     lies on the +y axis and holes are numbered clockwise seen from the tip.
//   * s is the bending arc length, excluding the n disk passages of height h.

#include <array>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

namespace ppcm {

inline constexpr double kStraightEpsilon = 1e-8;  // 1/mm
inline constexpr double kGroupOffset = 40.0 * std::numbers::pi / 180.0;
inline constexpr double kTendonSpacing = 2.0 * std::numbers::pi / 3.0;

constexpr double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
constexpr double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

// Wraps an angle into [-pi, pi).
double canonical_angle(double angle);

// Signed smallest difference a - b on the circle, in (-pi, pi].
double angle_difference(double a, double b);

struct SectionGeometry {
    int n = 12;              // segments (disk passages)
    double d = 2.5;          // tendon hole radius, mm
    double h = 3.0;          // guide-disk height, mm
    double s_min = 38.0;     // mm
    double s_max = 162.0;    // mm
    double kappa_max = 0.0;  // 1/mm
    double theta_max = 0.0;  // rad

    double disk_length() const { return n * h; }

    // Largest admissible curvature at arc length s (curvature and bend limits).
    double kappa_limit(double s) const;

    // Throws InvalidInput when the geometry breaks its invariants, including
    // kappa_max * d >= 1 which leaves the inverse map undefined.
    void validate() const;

    bool operator==(const SectionGeometry&) const = default;
};

struct SectionConfig {
    double kappa = 0.0;  // 1/mm, >= 0
    double phi = 0.0;    // rad, [-pi, pi)
    double s = 0.0;      // mm

    double bend() const { return kappa * s; }

    // kappa = 0 forces phi = 0; phi wrapped into [-pi, pi).
    SectionConfig canonical() const;

    bool operator==(const SectionConfig&) const = default;
};

struct TendonLengths {
    double l1 = 0.0;
    double l2 = 0.0;
    double l3 = 0.0;

    Eigen::Vector3d vec() const { return {l1, l2, l3}; }
    static TendonLengths from(const Eigen::Vector3d& v) { return {v[0], v[1], v[2]}; }
    double operator[](int i) const { return i == 0 ? l1 : (i == 1 ? l2 : l3); }

    bool operator==(const TendonLengths&) const = default;
};

struct ArcIntermediates {
    double l_m = 0.0;      // bending asymmetry magnitude, mm
    double l_c = 0.0;      // l1 + l2 + l3 - 3nh, mm
    double K_chord = 0.0;  // 2n sin(kappa s / 2n)
};

struct Pose {
    Eigen::Vector3d position = Eigen::Vector3d::Zero();
    Eigen::Matrix3d orientation = Eigen::Matrix3d::Identity();

    static Pose identity() { return {}; }
    static Pose rotation_z(double angle);
    static Pose translation(const Eigen::Vector3d& p);

    Pose operator*(const Pose& rhs) const;
    Eigen::Vector3d apply(const Eigen::Vector3d& p) const { return orientation * p + position; }
    Eigen::Vector3d tangent() const { return orientation.col(2); }
};

enum class LimitCheck { Lenient, Strict };

ArcIntermediates arc_intermediates(const TendonLengths& lengths, const SectionGeometry& geom);

SectionConfig forward_section(const TendonLengths& lengths, const SectionGeometry& geom);

// phi of the bending plane implied by a triple; meaningless when l_m ~ 0.
double bend_plane_angle(const TendonLengths& lengths);

TendonLengths inverse_section(const SectionConfig& config, const SectionGeometry& geom,
                              LimitCheck check = LimitCheck::Lenient);

// inverse_section with the tendon group rotated by `offset` about the section axis.
TendonLengths rotated_inverse(const SectionConfig& config, const SectionGeometry& geom, double offset,
                              LimitCheck check = LimitCheck::Lenient);

// d(l1, l2, l3) / d(kappa, phi, s) of rotated_inverse, analytic.
Eigen::Matrix3d section_jacobian_inverse(const SectionConfig& config, const SectionGeometry& geom,
                                         double offset);

// Central finite-difference version of section_jacobian_inverse, step scaled
// per component as step * max(1, |x|).
Eigen::Matrix3d section_jacobian_inverse_fd(const SectionConfig& config, const SectionGeometry& geom,
                                            double offset, double step = 1e-6);

// Frame after a torsion-free constant-curvature arc of the given length.
Pose arc_transform(double kappa, double direction, double length);

// `samples` frames uniformly spaced along the backbone path (arcs and disk
// passages) of one section, starting at `base`; the last one is the tip frame.
std::vector<Pose> config_to_poses(const SectionConfig& config, const SectionGeometry& geom, const Pose& base,
                                  int samples);

Pose section_tip(const SectionConfig& config, const SectionGeometry& geom, const Pose& base);

// Ground-truth tendon lengths from the explicit guide-disk chain: n arcs of
// bend kappa*s/n, each followed by a straight disk passage of height h, with
// chords summed between consecutive hole positions.
TendonLengths chord_oracle(const SectionConfig& config, const SectionGeometry& geom, double offset);

namespace detail {

// The closed-form tendon lengths without any validation; defined for negative
// curvature as the smooth extension (used by finite differences).
Eigen::Vector3d section_lengths_raw(double kappa, double phi, double s, const SectionGeometry& geom,
                                    double offset);

// sin(x)/x and its derivative, accurate near zero.
double sinc(double x);
double sinc_derivative(double x);

}  // namespace detail

}  // namespace ppcm
