#pragma once

// Three-section, nine-tendon coupling layer.
//
// Tendons are grouped A = (L1, L2, L3) driving the distal section,
// B = (L4, L5, L6) the middle and C = (L7, L8, L9) the proximal. A tendon
// traverses every section between the drive station and the section it
// terminates in; inside a section it sits at a hole rotated by group_offset
// per group step relative to that section's own tendon group. Each section's
// bending-plane angle is measured in its own frame, whose +y axis passes
// through its first tendon.

#include <array>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ppcm/kinematics.hpp"

namespace ppcm {

using Vector9d = Eigen::Matrix<double, 9, 1>;
using Matrix9d = Eigen::Matrix<double, 9, 9>;

inline constexpr int kSections = 3;
inline constexpr int kTendons = 9;

enum class SectionId { Proximal = 0, Middle = 1, Distal = 2 };
enum class TendonGroup { A = 0, B = 1, C = 2 };

const char* section_name(int section);  // "in", "mid", "out"

// Section actuated by a group: C -> proximal, B -> middle, A -> distal.
constexpr int driven_section(TendonGroup g) { return 2 - static_cast<int>(g); }
constexpr TendonGroup group_of_section(int section) { return static_cast<TendonGroup>(2 - section); }
constexpr int first_tendon(TendonGroup g) { return 3 * static_cast<int>(g); }

struct ManipulatorGeometry {
    std::array<SectionGeometry, kSections> sections;
    double total_min = 160.0;  // mm, sum of section arc lengths
    double total_max = 502.0;
    double group_offset = kGroupOffset;

    // Structural defaults: 38-162 / 44-158 / 78-182 mm arc length, about
    // 75 / 75 / 85 deg bend, n = 12, d = 2.5 mm, h = 3 mm.
    static ManipulatorGeometry defaults();

    const SectionGeometry& operator[](int i) const { return sections[i]; }
    SectionGeometry& operator[](int i) { return sections[i]; }

    // Hole rotation of `group` inside `section`; only meaningful when the
    // group traverses that section.
    double passage_offset(TendonGroup group, int section) const {
        return (driven_section(group) - section) * group_offset;
    }

    void validate() const;

    bool operator==(const ManipulatorGeometry&) const = default;
};

struct ManipulatorConfig {
    std::array<SectionConfig, kSections> sections;  // proximal, middle, distal

    const SectionConfig& inner() const { return sections[0]; }
    const SectionConfig& middle() const { return sections[1]; }
    const SectionConfig& outer() const { return sections[2]; }
    const SectionConfig& operator[](int i) const { return sections[i]; }
    SectionConfig& operator[](int i) { return sections[i]; }

    double total_length() const { return sections[0].s + sections[1].s + sections[2].s; }

    // (kappa, phi, s) per section, proximal first.
    Vector9d vec() const;
    static ManipulatorConfig from(const Vector9d& v);

    static ManipulatorConfig straight(double s_in, double s_mid, double s_out);

    bool operator==(const ManipulatorConfig&) const = default;
};

struct ActuatorLengths {
    Vector9d L = Vector9d::Zero();

    TendonLengths group(TendonGroup g) const {
        const int k = first_tendon(g);
        return {L[k], L[k + 1], L[k + 2]};
    }
};

// part(g, s): length of group g's tendons inside section s. Blocks for
// sections a group never reaches are exactly zero.
struct CouplingDecomposition {
    std::array<std::array<Eigen::Vector3d, kSections>, 3> parts{};

    CouplingDecomposition();

    Eigen::Vector3d& part(TendonGroup g, int section) { return parts[static_cast<int>(g)][section]; }
    const Eigen::Vector3d& part(TendonGroup g, int section) const {
        return parts[static_cast<int>(g)][section];
    }

    // Sum over sections in proximal-to-distal order.
    ActuatorLengths total() const;
};

struct Composition {
    ActuatorLengths lengths;
    CouplingDecomposition parts;
};

struct Decoupling {
    ManipulatorConfig config;
    CouplingDecomposition parts;
};

Composition compose_actuator(const ManipulatorConfig& config, const ManipulatorGeometry& geom);

// Proximal from group C, then middle from group B minus its proximal passage,
// then distal from group A minus both passages. Throws DomainError or
// InvalidInput when a residual triple is not realizable.
Decoupling forward_decouple(const ActuatorLengths& lengths, const ManipulatorGeometry& geom);

// dL / dC with rows (A, B, C) and columns (in, mid, out), lower block-triangular.
Matrix9d jacobian_inverse(const ManipulatorConfig& config, const ManipulatorGeometry& geom);

// Central finite differences of the composed map.
Matrix9d jacobian_inverse_fd(const ManipulatorConfig& config, const ManipulatorGeometry& geom,
                             double step = 1e-6);

// Tendon lengths from one explicit disk chain through all three sections
// with every hole placed at its absolute angle.
ActuatorLengths chained_chord_oracle(const ManipulatorConfig& config, const ManipulatorGeometry& geom);

// Backbone polyline: `samples_per_section` frames per section, chained tip to base.
std::vector<Pose> backbone_poses(const ManipulatorConfig& config, const ManipulatorGeometry& geom,
                                 int samples_per_section, const Pose& base = Pose::identity());

enum class LimitParameter { ArcLength, Curvature, Bend, TotalLength };

const char* limit_parameter_name(LimitParameter p);

struct LimitViolationRecord {
    int section = -1;  // -1 for whole-manipulator limits
    LimitParameter parameter = LimitParameter::ArcLength;
    double value = 0.0;
    double bound = 0.0;

    std::string describe() const;
};

std::vector<LimitViolationRecord> validate_limits(const ManipulatorConfig& config,
                                                  const ManipulatorGeometry& geom);

}  // namespace ppcm
