#include "navkit/registration.hpp"

#include <cmath>
#include <set>

#include <Eigen/SVD>

#include "navkit/error.hpp"
#include "navkit/metrics.hpp"

namespace navkit {

std::string_view to_string(LandmarkFrame f) { return f == LandmarkFrame::Image ? "image" : "patient"; }

void LandmarkSet::validate() const {
  if (landmarks.empty()) throw Error(ErrorCode::InsufficientData, "landmark set is empty");
  std::set<std::pair<std::string, LandmarkFrame>> seen;
  for (const auto& lm : landmarks) {
    if (!lm.position.allFinite()) {
      throw Error(ErrorCode::InvalidArgument, "landmark '" + lm.label + "' is not finite");
    }
    if (!seen.emplace(lm.label, lm.frame).second) {
      throw Error(ErrorCode::UniquenessError,
                  "duplicate landmark '" + lm.label + "' in " + std::string(to_string(lm.frame)) + " frame");
    }
  }
}

std::vector<Landmark> LandmarkSet::in_frame(LandmarkFrame f) const {
  std::vector<Landmark> out;
  for (const auto& lm : landmarks) {
    if (lm.frame == f) out.push_back(lm);
  }
  return out;
}

MatchedPoints match_by_order(const LandmarkSet& set) {
  set.validate();
  auto image = set.in_frame(LandmarkFrame::Image);
  auto patient = set.in_frame(LandmarkFrame::Patient);
  if (image.size() != patient.size()) {
    throw Error(ErrorCode::CountMismatch, std::to_string(image.size()) + " image landmarks vs " +
                                              std::to_string(patient.size()) + " patient landmarks");
  }
  MatchedPoints out;
  for (std::size_t i = 0; i < image.size(); ++i) {
    if (image[i].label != patient[i].label) {
      throw Error(ErrorCode::CountMismatch, "landmark order differs at position " + std::to_string(i + 1) +
                                                ": '" + image[i].label + "' vs '" + patient[i].label + "'");
    }
    out.labels.push_back(image[i].label);
    out.model.push_back(image[i].position);
    out.patient.push_back(patient[i].position);
  }
  return out;
}

namespace {

Point3 centroid(std::span<const Point3> pts) {
  Point3 c = Point3::Zero();
  for (const auto& p : pts) c += p;
  return c / static_cast<double>(pts.size());
}

bool collinear(std::span<const Point3> pts, const Point3& c) {
  Eigen::MatrixXd centered(3, pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) centered.col(static_cast<Eigen::Index>(i)) = pts[i] - c;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered);
  const auto& s = svd.singularValues();
  return !(s(0) > 0.0) || s(1) <= 1e-9 * s(0);
}

}  // namespace

RegistrationResult point_based_register(std::span<const Point3> model, std::span<const Point3> patient) {
  if (model.size() != patient.size()) {
    throw Error(ErrorCode::CountMismatch, "model has " + std::to_string(model.size()) +
                                              " points, patient has " + std::to_string(patient.size()));
  }
  if (model.size() < 3) throw Error(ErrorCode::InsufficientData, "registration needs at least 3 point pairs");
  for (std::size_t i = 0; i < model.size(); ++i) {
    if (!model[i].allFinite() || !patient[i].allFinite()) {
      throw Error(ErrorCode::InvalidArgument, "registration points must be finite");
    }
  }
  const Point3 cm = centroid(model);
  const Point3 cp = centroid(patient);
  if (collinear(model, cm) || collinear(patient, cp)) {
    throw Error(ErrorCode::DegenerateConfiguration, "registration points are collinear");
  }
  Matrix3 h = Matrix3::Zero();
  for (std::size_t i = 0; i < model.size(); ++i) {
    h += (model[i] - cm) * (patient[i] - cp).transpose();
  }
  Eigen::JacobiSVD<Matrix3> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Matrix3 u = svd.matrixU();
  Matrix3 v = svd.matrixV();
  Matrix3 d = Matrix3::Identity();
  d(2, 2) = (v * u.transpose()).determinant() < 0.0 ? -1.0 : 1.0;
  Matrix3 r = v * d * u.transpose();

  RegistrationResult out;
  out.image_to_world = RigidTransform(r, cp - r * cm);
  out.fre = fre(model, patient, out.image_to_world);
  out.per_fiducial_residuals = point_residuals(model, patient, out.image_to_world);
  out.point_count = model.size();
  return out;
}

ManualAdjustment ManualAdjustment::translate(const Vector3& axis, double mm) {
  ManualAdjustment a;
  a.kind = Kind::TranslateAxis;
  a.axis = axis;
  a.delta = mm;
  return a;
}

ManualAdjustment ManualAdjustment::rotate(const Vector3& axis, double degrees, std::optional<Point3> pivot) {
  ManualAdjustment a;
  a.kind = Kind::RotateAxis;
  a.axis = axis;
  a.delta = degrees;
  a.pivot = pivot;
  return a;
}

ManualAdjustment ManualAdjustment::free(const RigidTransform& delta) {
  ManualAdjustment a;
  a.kind = Kind::Free6Dof;
  a.free_delta = delta;
  return a;
}

RigidTransform apply_manual_adjustment(const RigidTransform& current, const ManualAdjustment& adj,
                                       const Point3& model_centroid) {
  if (adj.kind == ManualAdjustment::Kind::Free6Dof) return compose(adj.free_delta, current);
  if (!std::isfinite(adj.delta)) throw Error(ErrorCode::InvalidArgument, "adjustment delta is not finite");
  if (!adj.axis.allFinite() || std::abs(adj.axis.norm() - 1.0) > 1e-9) {
    throw Error(ErrorCode::InvalidArgument, "adjustment axis must be a unit vector");
  }
  if (adj.kind == ManualAdjustment::Kind::TranslateAxis) {
    return RigidTransform(current.rotation(), current.translation() + adj.delta * adj.axis);
  }
  const Point3 pivot = adj.pivot.value_or(transform_point(current, model_centroid));
  Matrix3 r = Eigen::AngleAxisd(deg_to_rad(adj.delta), adj.axis).toRotationMatrix();
  RigidTransform about_pivot(r, pivot - r * pivot);
  return compose(about_pivot, current);
}

}  // namespace navkit
