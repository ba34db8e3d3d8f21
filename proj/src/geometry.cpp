#include "navkit/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/SVD>

#include "navkit/error.hpp"
#include "navkit/text.hpp"

namespace navkit {

namespace {

double orthonormality_error(const Matrix3& r) {
  double err = (r.transpose() * r - Matrix3::Identity()).cwiseAbs().maxCoeff();
  return std::max(err, std::abs(r.determinant() - 1.0));
}

}  // namespace

double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

RigidTransform::RigidTransform(const Matrix3& rotation, const Vector3& translation)
    : rotation_(rotation), translation_(translation) {
  if (!rotation.allFinite() || !translation.allFinite()) {
    throw Error(ErrorCode::InvalidArgument, "transform has non-finite entries");
  }
  double err = orthonormality_error(rotation);
  if (err <= kRotationTolerance) return;
  if (err <= kRotationRepairLimit && rotation.determinant() > 0) {
    rotation_ = orthonormalize(rotation);
    return;
  }
  throw Error(ErrorCode::InvalidArgument,
              "rotation is not orthonormal (drift " + text::format_double(err) + ")");
}

RigidTransform RigidTransform::from_translation(const Vector3& t) {
  return RigidTransform(Matrix3::Identity(), t);
}

RigidTransform RigidTransform::from_axis_angle(const Vector3& axis, double degrees, const Vector3& t) {
  double n = axis.norm();
  if (!(n > 0.0)) throw Error(ErrorCode::InvalidArgument, "rotation axis has zero length");
  Eigen::AngleAxisd aa(deg_to_rad(degrees), axis / n);
  return RigidTransform(aa.toRotationMatrix(), t);
}

RigidTransform RigidTransform::from_quaternion(const UnitQuaternion& q, const Vector3& t) {
  double n = q.norm();
  if (!(n > 1e-12) || !std::isfinite(n)) {
    throw Error(ErrorCode::InvalidArgument, "quaternion has zero length");
  }
  return RigidTransform(q.normalized().toRotationMatrix(), t);
}

UnitQuaternion RigidTransform::quaternion() const {
  UnitQuaternion q(rotation_);
  q.normalize();
  if (q.w() < 0) q.coeffs() = -q.coeffs();
  return q;
}

Eigen::Matrix4d RigidTransform::matrix() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = rotation_;
  m.topRightCorner<3, 1>() = translation_;
  return m;
}

RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
  return RigidTransform(a.rotation() * b.rotation(),
                        a.rotation() * b.translation() + a.translation());
}

RigidTransform invert(const RigidTransform& t) {
  Matrix3 rt = t.rotation().transpose();
  return RigidTransform(rt, -(rt * t.translation()));
}

Point3 transform_point(const RigidTransform& t, const Point3& p) {
  return t.rotation() * p + t.translation();
}

double rotation_angle(const Matrix3& r) {
  // atan2 form keeps full precision near 0 and 180 degrees, where acos((tr-1)/2) loses half the digits.
  Vector3 v(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
  double angle = rad_to_deg(std::atan2(v.norm(), r.trace() - 1.0));
  return std::clamp(angle, 0.0, 180.0);
}

double rotation_angle_between(const RigidTransform& a, const RigidTransform& b) {
  return rotation_angle(a.rotation().transpose() * b.rotation());
}

Matrix3 orthonormalize(const Matrix3& m) {
  if (!m.allFinite()) throw Error(ErrorCode::DegenerateMatrix, "matrix has non-finite entries");
  Eigen::JacobiSVD<Matrix3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vector3& s = svd.singularValues();
  if (!(s(0) > 0.0) || s(2) <= 1e-12 * s(0)) {
    throw Error(ErrorCode::DegenerateMatrix, "matrix is rank deficient");
  }
  Matrix3 u = svd.matrixU();
  Matrix3 v = svd.matrixV();
  Matrix3 d = Matrix3::Identity();
  d(2, 2) = (u * v.transpose()).determinant() < 0 ? -1.0 : 1.0;
  return u * d * v.transpose();
}

PoseValues PoseValues::from_transform(const RigidTransform& t) {
  UnitQuaternion q = t.quaternion();
  const Vector3& p = t.translation();
  PoseValues out;
  out.values = {p.x(), p.y(), p.z(), q.x(), q.y(), q.z(), q.w()};
  for (double& v : out.values) {
    if (v == 0.0) v = 0.0;
  }
  return out;
}

RigidTransform PoseValues::to_transform() const {
  const auto& v = values;
  return RigidTransform::from_quaternion(UnitQuaternion(v[6], v[3], v[4], v[5]),
                                         Vector3(v[0], v[1], v[2]));
}

std::string format_pose(const PoseValues& pose) {
  std::string out;
  for (std::size_t i = 0; i < pose.values.size(); ++i) {
    if (i) out.push_back(' ');
    out += text::format_double(pose.values[i]);
  }
  return out;
}

}  // namespace navkit
