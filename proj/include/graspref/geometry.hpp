#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <stdexcept>
#include <string>

namespace graspref {

using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat3 = Eigen::Matrix3d;
using Quat = Eigen::Quaterniond;
using Aabb = Eigen::AlignedBox3d;

// Raised for malformed inputs and data-level failures (bad meshes, scene
// schema violations, empty observations). The CLI maps it to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kPi = 3.14159265358979323846;

inline double deg2rad(double deg) { return deg * kPi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / kPi; }

Mat3 skew(const Vec3& v);

// Rotation-vector exponential (axis * angle) as a unit quaternion.
Quat exp_rotation(const Vec3& rotvec);
// Inverse of exp_rotation; returned angle lies in [0, pi].
Vec3 log_rotation(const Quat& q);

/// Rigid transform mapping object-local coordinates to world coordinates.
///
/// The rotation is stored as a scalar-first unit quaternion (w, x, y, z) and
/// is renormalized on every construction; non-finite input is rejected.
class Pose {
 public:
  Pose() = default;
  Pose(const Vec3& translation, const Quat& rotation);

  static Pose identity() { return Pose(); }
  static Pose from_translation(const Vec3& t) { return Pose(t, Quat::Identity()); }

  const Vec3& translation() const { return translation_; }
  const Quat& rotation() const { return rotation_; }
  Mat3 rotation_matrix() const { return rotation_.toRotationMatrix(); }

  Vec3 transform(const Vec3& p) const { return rotation_ * p + translation_; }
  Vec3 inverse_transform(const Vec3& p) const {
    return rotation_.conjugate() * (p - translation_);
  }

  Pose operator*(const Pose& rhs) const;
  Pose inverse() const;

 private:
  Vec3 translation_ = Vec3::Zero();
  Quat rotation_ = Quat::Identity();
};

/// Tangent-space increment: translation `dt` (meters) plus a left-applied
/// rotation vector `dr` (radians). Gradients share this 6-vector layout.
struct TangentStep {
  Vec3 dt = Vec3::Zero();
  Vec3 dr = Vec3::Zero();

  static TangentStep from_vector(const Vec6& v);
  Vec6 as_vector() const;
  bool is_zero() const { return dt.isZero(0.0) && dr.isZero(0.0); }
  TangentStep operator-() const { return {-dt, -dr}; }
};

// translation += dt; rotation = exp(dr) * rotation. The zero step returns the
// input unchanged bit-for-bit.
Pose apply_step(const Pose& pose, const TangentStep& step);

bool all_finite(const Vec3& v);

}  // namespace graspref
