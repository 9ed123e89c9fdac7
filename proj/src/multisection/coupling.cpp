#include <algorithm>
#include <cmath>

#include "ppcm/errors.hpp"
#include "ppcm/multisection.hpp"

namespace ppcm {

const char* section_name(int section) {
    static constexpr const char* names[] = {"in", "mid", "out"};
    return (section >= 0 && section < kSections) ? names[section] : "?";
}

ManipulatorGeometry ManipulatorGeometry::defaults() {
    ManipulatorGeometry g;
    const double s_min[] = {38.0, 44.0, 78.0};
    const double s_max[] = {162.0, 158.0, 182.0};
    const double theta_deg[] = {75.0, 75.0, 85.0};
    for (int i = 0; i < kSections; ++i) {
        SectionGeometry& sec = g.sections[i];
        sec.n = 12;
        sec.d = 2.5;
        sec.h = 3.0;
        sec.s_min = s_min[i];
        sec.s_max = s_max[i];
        sec.theta_max = deg_to_rad(theta_deg[i]);
        // Full bend capability reachable at the shortest length.
        sec.kappa_max = sec.theta_max / sec.s_min;
    }
    return g;
}

void ManipulatorGeometry::validate() const {
    for (int i = 0; i < kSections; ++i) {
        try {
            sections[i].validate();
        } catch (const InvalidInput& e) {
            throw InvalidInput(std::string("section ") + section_name(i) + ": " + e.what());
        }
    }
    if (!(total_min <= total_max) || !std::isfinite(total_max)) {
        throw InvalidInput("total length range must satisfy total_min <= total_max");
    }
    if (!std::isfinite(group_offset)) throw InvalidInput("group offset must be finite");
}

Vector9d ManipulatorConfig::vec() const {
    Vector9d v;
    for (int i = 0; i < kSections; ++i) {
        v[3 * i] = sections[i].kappa;
        v[3 * i + 1] = sections[i].phi;
        v[3 * i + 2] = sections[i].s;
    }
    return v;
}

ManipulatorConfig ManipulatorConfig::from(const Vector9d& v) {
    ManipulatorConfig c;
    for (int i = 0; i < kSections; ++i) c.sections[i] = {v[3 * i], v[3 * i + 1], v[3 * i + 2]};
    return c;
}

ManipulatorConfig ManipulatorConfig::straight(double s_in, double s_mid, double s_out) {
    ManipulatorConfig c;
    c.sections[0] = {0.0, 0.0, s_in};
    c.sections[1] = {0.0, 0.0, s_mid};
    c.sections[2] = {0.0, 0.0, s_out};
    return c;
}

CouplingDecomposition::CouplingDecomposition() {
    for (auto& group : parts) {
        for (auto& p : group) p.setZero();
    }
}

ActuatorLengths CouplingDecomposition::total() const {
    ActuatorLengths out;
    for (int g = 0; g < 3; ++g) {
        out.L.segment<3>(3 * g) = parts[g][0] + parts[g][1] + parts[g][2];
    }
    return out;
}

Composition compose_actuator(const ManipulatorConfig& config, const ManipulatorGeometry& geom) {
    Composition out;
    for (int g = 0; g < 3; ++g) {
        const auto group = static_cast<TendonGroup>(g);
        for (int sec = 0; sec <= driven_section(group); ++sec) {
            out.parts.part(group, sec) =
                rotated_inverse(config[sec], geom[sec], geom.passage_offset(group, sec)).vec();
        }
    }
    out.lengths = out.parts.total();
    return out;
}

Decoupling forward_decouple(const ActuatorLengths& lengths, const ManipulatorGeometry& geom) {
    Decoupling out;
    // Walk proximal to distal: each section's own group minus the passages
    // already resolved below it.
    for (int sec = 0; sec < kSections; ++sec) {
        const TendonGroup own = group_of_section(sec);
        Eigen::Vector3d residual = lengths.group(own).vec();
        for (int below = 0; below < sec; ++below) residual -= out.parts.part(own, below);
        out.parts.part(own, sec) = residual;
        try {
            out.config[sec] = forward_section(TendonLengths::from(residual), geom[sec]);
        } catch (const InvalidInput& e) {
            throw InvalidInput(std::string("section ") + section_name(sec) + ": " + e.what());
        } catch (const DomainError& e) {
            throw DomainError(std::string("section ") + section_name(sec) + ": " + e.what());
        }
        for (int g = 0; g < static_cast<int>(own); ++g) {
            const auto passing = static_cast<TendonGroup>(g);
            out.parts.part(passing, sec) =
                rotated_inverse(out.config[sec], geom[sec], geom.passage_offset(passing, sec)).vec();
        }
    }
    return out;
}

Matrix9d jacobian_inverse(const ManipulatorConfig& config, const ManipulatorGeometry& geom) {
    Matrix9d J = Matrix9d::Zero();
    for (int g = 0; g < 3; ++g) {
        const auto group = static_cast<TendonGroup>(g);
        for (int sec = 0; sec <= driven_section(group); ++sec) {
            J.block<3, 3>(first_tendon(group), 3 * sec) =
                section_jacobian_inverse(config[sec], geom[sec], geom.passage_offset(group, sec));
        }
    }
    return J;
}

namespace {

Vector9d compose_raw(const Vector9d& c, const ManipulatorGeometry& geom) {
    Vector9d L = Vector9d::Zero();
    for (int g = 0; g < 3; ++g) {
        const auto group = static_cast<TendonGroup>(g);
        for (int sec = 0; sec <= driven_section(group); ++sec) {
            L.segment<3>(first_tendon(group)) += detail::section_lengths_raw(
                c[3 * sec], c[3 * sec + 1], c[3 * sec + 2], geom[sec], geom.passage_offset(group, sec));
        }
    }
    return L;
}

}  // namespace

Matrix9d jacobian_inverse_fd(const ManipulatorConfig& config, const ManipulatorGeometry& geom, double step) {
    const Vector9d x0 = config.vec();
    Matrix9d J;
    for (int j = 0; j < 9; ++j) {
        const double hj = step * std::max(1.0, std::abs(x0[j]));
        Vector9d xp = x0;
        Vector9d xm = x0;
        xp[j] += hj;
        xm[j] -= hj;
        J.col(j) = (compose_raw(xp, geom) - compose_raw(xm, geom)) / (2.0 * hj);
    }
    return J;
}

ActuatorLengths chained_chord_oracle(const ManipulatorConfig& config, const ManipulatorGeometry& geom) {
    ActuatorLengths out;
    Pose exit_face;
    for (int sec = 0; sec < kSections; ++sec) {
        const SectionGeometry& sg = geom[sec];
        // Bend direction expressed in the transported proximal frame.
        const double direction = config[sec].phi - sec * geom.group_offset;
        const Pose arc = arc_transform(config[sec].kappa, direction, config[sec].s / sg.n);
        const Pose disk = Pose::translation({0.0, 0.0, sg.h});
        for (int seg = 0; seg < sg.n; ++seg) {
            const Pose entry_face = exit_face * arc;
            for (int g = 0; g < 3; ++g) {
                const auto group = static_cast<TendonGroup>(g);
                if (driven_section(group) < sec) continue;
                for (int i = 0; i < 3; ++i) {
                    const double a = std::numbers::pi / 2.0 - driven_section(group) * geom.group_offset -
                                     i * kTendonSpacing;
                    const Eigen::Vector3d hole(sg.d * std::cos(a), sg.d * std::sin(a), 0.0);
                    out.L[first_tendon(group) + i] +=
                        (entry_face.apply(hole) - exit_face.apply(hole)).norm() + sg.h;
                }
            }
            exit_face = entry_face * disk;
        }
    }
    return out;
}

std::vector<Pose> backbone_poses(const ManipulatorConfig& config, const ManipulatorGeometry& geom,
                                 int samples_per_section, const Pose& base) {
    std::vector<Pose> poses;
    poses.reserve(kSections * samples_per_section);
    Pose section_base = base;
    for (int sec = 0; sec < kSections; ++sec) {
        const auto part = config_to_poses(config[sec], geom[sec], section_base, samples_per_section);
        poses.insert(poses.end(), part.begin(), part.end());
        // Next section's frame has its +y axis on its own first tendon.
        section_base = part.back() * Pose::rotation_z(-geom.group_offset);
    }
    return poses;
}

}  // namespace ppcm
