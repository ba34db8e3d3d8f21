#pragma once

#include <array>
#include <string>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace navkit {

using Point3 = Eigen::Vector3d;
using Vector3 = Eigen::Vector3d;
using Matrix3 = Eigen::Matrix3d;
using UnitQuaternion = Eigen::Quaterniond;

/// Rotation drift accepted as-is.
inline constexpr double kRotationTolerance = 1e-9;
/// Rotation drift repaired by re-orthonormalization; anything above is rejected.
inline constexpr double kRotationRepairLimit = 1e-6;

/**
 * Proper rigid motion x -> R x + t. Translations are in millimeters.
 *
 * A transform named T^a_b maps coordinates expressed in frame b into frame a,
 * so compose(T^a_b, T^b_c) = T^a_c.
 *
 * The rotation is validated on construction: drift up to 1e-9 is kept, drift
 * up to 1e-6 is projected back onto SO(3), larger drift or a reflection throws
 * ErrorCode::InvalidArgument.
 */
class RigidTransform {
public:
  RigidTransform() : rotation_(Matrix3::Identity()), translation_(Vector3::Zero()) {}
  RigidTransform(const Matrix3& rotation, const Vector3& translation);

  static RigidTransform identity() { return {}; }
  static RigidTransform from_translation(const Vector3& t);
  /// Rotation of `degrees` about `axis` (normalized internally), followed by `t`.
  static RigidTransform from_axis_angle(const Vector3& axis, double degrees,
                                        const Vector3& t = Vector3::Zero());
  static RigidTransform from_quaternion(const UnitQuaternion& q, const Vector3& t);

  const Matrix3& rotation() const noexcept { return rotation_; }
  const Vector3& translation() const noexcept { return translation_; }

  /// Unit quaternion with non-negative w.
  UnitQuaternion quaternion() const;
  Eigen::Matrix4d matrix() const;

private:
  Matrix3 rotation_;
  Vector3 translation_;
};

/// Rotation Ra*Rb, translation Ra*tb + ta.
RigidTransform compose(const RigidTransform& a, const RigidTransform& b);
RigidTransform invert(const RigidTransform& t);
Point3 transform_point(const RigidTransform& t, const Point3& p);
/// Angle of Ra^T Rb in degrees, in [0, 180].
double rotation_angle_between(const RigidTransform& a, const RigidTransform& b);
double rotation_angle(const Matrix3& r);
/// Nearest rotation in Frobenius norm. Throws DegenerateMatrix for rank < 3.
Matrix3 orthonormalize(const Matrix3& m);

inline RigidTransform operator*(const RigidTransform& a, const RigidTransform& b) {
  return compose(a, b);
}

double deg_to_rad(double deg);
double rad_to_deg(double rad);

/// Serialized pose "tx ty tz qx qy qz qw". Holds the exact values that appear
/// in text so that parse/format round trips are value-identical.
struct PoseValues {
  std::array<double, 7> values{0, 0, 0, 0, 0, 0, 1};

  static PoseValues from_transform(const RigidTransform& t);
  RigidTransform to_transform() const;

  friend bool operator==(const PoseValues&, const PoseValues&) = default;
};

std::string format_pose(const PoseValues& pose);

}  // namespace navkit
