#include <algorithm>
#include <cmath>

#include "ppcm/errors.hpp"
#include "ppcm/kinematics.hpp"

namespace ppcm {

Pose Pose::rotation_z(double angle) {
    Pose p;
    p.orientation = Eigen::AngleAxisd(angle, Eigen::Vector3d::UnitZ()).toRotationMatrix();
    return p;
}

Pose Pose::translation(const Eigen::Vector3d& t) {
    Pose p;
    p.position = t;
    return p;
}

Pose Pose::operator*(const Pose& rhs) const {
    Pose out;
    out.orientation = orientation * rhs.orientation;
    out.position = orientation * rhs.position + position;
    return out;
}

Pose arc_transform(double kappa, double direction, double length) {
    Pose planar;
    if (std::abs(kappa) < 1e-14) {
        planar.position = {0.0, 0.0, length};
    } else {
        const double theta = kappa * length;
        const double c = std::cos(theta);
        const double s = std::sin(theta);
        planar.orientation << c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c;
        planar.position = {(1.0 - c) / kappa, 0.0, s / kappa};
    }
    return Pose::rotation_z(direction) * planar * Pose::rotation_z(-direction);
}

namespace {

// Frame at path distance t along one section's backbone: n repetitions of
// [arc of length s/n, straight disk passage of height h].
class SectionPath {
public:
    SectionPath(const SectionConfig& config, const SectionGeometry& geom)
        : config_(config), geom_(geom), arc_len_(config.s / geom.n),
          unit_(arc_transform(config.kappa, config.phi, arc_len_) *
                Pose::translation({0.0, 0.0, geom.h})) {}

    double total() const { return config_.s + geom_.disk_length(); }

    Pose at(double t) const {
        const double period = arc_len_ + geom_.h;
        int seg = static_cast<int>(std::floor(t / period));
        seg = std::clamp(seg, 0, geom_.n - 1);
        Pose frame;
        for (int i = 0; i < seg; ++i) frame = frame * unit_;
        const double local = std::clamp(t - seg * period, 0.0, period);
        if (local <= arc_len_) {
            return frame * arc_transform(config_.kappa, config_.phi, local);
        }
        return frame * arc_transform(config_.kappa, config_.phi, arc_len_) *
               Pose::translation({0.0, 0.0, local - arc_len_});
    }

    Pose tip() const {
        Pose frame;
        for (int i = 0; i < geom_.n; ++i) frame = frame * unit_;
        return frame;
    }

private:
    SectionConfig config_;
    SectionGeometry geom_;
    double arc_len_;
    Pose unit_;
};

}  // namespace

std::vector<Pose> config_to_poses(const SectionConfig& config, const SectionGeometry& geom, const Pose& base,
                                  int samples) {
    if (samples < 2) throw InvalidInput("config_to_poses needs at least 2 samples");
    if (!(config.s > 0.0) || !std::isfinite(config.kappa)) throw InvalidInput("invalid section configuration");
    const SectionPath path(config, geom);
    std::vector<Pose> poses;
    poses.reserve(samples);
    for (int k = 0; k < samples - 1; ++k) {
        poses.push_back(base * path.at(path.total() * k / (samples - 1)));
    }
    poses.push_back(base * path.tip());
    return poses;
}

Pose section_tip(const SectionConfig& config, const SectionGeometry& geom, const Pose& base) {
    return base * SectionPath(config, geom).tip();
}

TendonLengths chord_oracle(const SectionConfig& config, const SectionGeometry& geom, double offset) {
    std::array<Eigen::Vector3d, 3> holes;
    for (int i = 0; i < 3; ++i) {
        const double a = std::numbers::pi / 2.0 - offset - i * kTendonSpacing;
        holes[i] = {geom.d * std::cos(a), geom.d * std::sin(a), 0.0};
    }
    const Pose arc = arc_transform(config.kappa, config.phi, config.s / geom.n);
    const Pose disk = Pose::translation({0.0, 0.0, geom.h});
    Eigen::Vector3d total = Eigen::Vector3d::Zero();
    Pose exit_face;  // exit face of the previous disk
    for (int seg = 0; seg < geom.n; ++seg) {
        const Pose entry_face = exit_face * arc;
        for (int i = 0; i < 3; ++i) {
            total[i] += (entry_face.apply(holes[i]) - exit_face.apply(holes[i])).norm() + geom.h;
        }
        exit_face = entry_face * disk;
    }
    return TendonLengths::from(total);
}

}  // namespace ppcm
