#include "graspref/geometry.hpp"

#include <cmath>

namespace graspref {

Mat3 skew(const Vec3& v) {
  Mat3 s;
  // clang-format off
  s <<     0.0, -v.z(),  v.y(),
         v.z(),    0.0, -v.x(),
        -v.y(),  v.x(),    0.0;
  // clang-format on
  return s;
}

Quat exp_rotation(const Vec3& rotvec) {
  const double angle = rotvec.norm();
  if (angle < 1e-12) {
    // Second-order expansion keeps the map smooth through zero.
    Quat q(1.0, 0.5 * rotvec.x(), 0.5 * rotvec.y(), 0.5 * rotvec.z());
    return q.normalized();
  }
  const double half = 0.5 * angle;
  const Vec3 axis = rotvec / angle;
  return Quat(std::cos(half), std::sin(half) * axis.x(), std::sin(half) * axis.y(),
              std::sin(half) * axis.z());
}

Vec3 log_rotation(const Quat& q_in) {
  Quat q = q_in.normalized();
  if (q.w() < 0.0) q.coeffs() = -q.coeffs();
  const Vec3 v = q.vec();
  const double s = v.norm();
  if (s < 1e-12) return 2.0 * v;
  const double angle = 2.0 * std::atan2(s, q.w());
  return v * (angle / s);
}

bool all_finite(const Vec3& v) {
  return std::isfinite(v.x()) && std::isfinite(v.y()) && std::isfinite(v.z());
}

Pose::Pose(const Vec3& translation, const Quat& rotation) : translation_(translation) {
  const double n = rotation.norm();
  if (!all_finite(translation) || !std::isfinite(n) || n < 1e-12) {
    throw Error("pose: non-finite translation or degenerate quaternion");
  }
  // Already-unit quaternions are kept bit-for-bit so serialization round-trips.
  rotation_ = std::abs(n - 1.0) > 1e-14 ? Quat(rotation.coeffs() / n) : rotation;
}

Pose Pose::operator*(const Pose& rhs) const {
  return Pose(rotation_ * rhs.translation_ + translation_, rotation_ * rhs.rotation_);
}

Pose Pose::inverse() const {
  const Quat inv = rotation_.conjugate();
  return Pose(-(inv * translation_), inv);
}

TangentStep TangentStep::from_vector(const Vec6& v) {
  return {v.head<3>(), v.tail<3>()};
}

Vec6 TangentStep::as_vector() const {
  Vec6 v;
  v << dt, dr;
  return v;
}

Pose apply_step(const Pose& pose, const TangentStep& step) {
  if (step.is_zero()) return pose;
  if (!all_finite(step.dt) || !all_finite(step.dr)) {
    throw Error("apply_step: non-finite tangent step");
  }
  return Pose(pose.translation() + step.dt, exp_rotation(step.dr) * pose.rotation());
}

}  // namespace graspref
