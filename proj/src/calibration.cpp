#include "navkit/calibration.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/SVD>

#include "navkit/error.hpp"
#include "navkit/text.hpp"

namespace navkit {

std::string_view to_string(CalibrationMethod m) {
  switch (m) {
    case CalibrationMethod::Pivot: return "pivot";
    case CalibrationMethod::Calibrator: return "calibrator";
    case CalibrationMethod::MarkerToMarker: return "marker_to_marker";
    case CalibrationMethod::ByDesign: return "by_design";
  }
  return "by_design";
}

std::optional<CalibrationMethod> calibration_method_from_string(std::string_view s) {
  if (s == "pivot") return CalibrationMethod::Pivot;
  if (s == "calibrator") return CalibrationMethod::Calibrator;
  if (s == "marker_to_marker") return CalibrationMethod::MarkerToMarker;
  if (s == "by_design") return CalibrationMethod::ByDesign;
  return std::nullopt;
}

namespace {

PivotResult solve_pivot(const std::vector<const PivotSample*>& samples, double condition_limit) {
  const auto n = static_cast<Eigen::Index>(samples.size());
  Eigen::MatrixXd a(3 * n, 6);
  Eigen::VectorXd b(3 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const RigidTransform& pose = samples[i]->marker_world_pose;
    a.block<3, 3>(3 * i, 0) = pose.rotation();
    a.block<3, 3>(3 * i, 3) = -Matrix3::Identity();
    b.segment<3>(3 * i) = -pose.translation();
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  double smallest = sv(sv.size() - 1);
  if (!(smallest > 0.0) || sv(0) / smallest > condition_limit) {
    throw Error(ErrorCode::InsufficientRotationalDiversity,
                "pivot system is ill-conditioned; pivot the tool through a wider range of orientations");
  }
  Eigen::Matrix<double, 6, 1> x = svd.solve(b);

  PivotResult out;
  out.tip_in_marker = x.head<3>();
  out.pivot_in_world = x.tail<3>();
  double ss = 0.0;
  for (const PivotSample* s : samples) {
    ss += (transform_point(s->marker_world_pose, out.tip_in_marker) - out.pivot_in_world).squaredNorm();
  }
  out.rms_residual = std::sqrt(ss / static_cast<double>(n));
  out.sample_count = samples.size();
  return out;
}

ToolCalibration chain_calibrate(const std::string& tool_marker_id, std::span<const MarkerPair> samples,
                                const DivotSpec& divot, CalibrationMethod method) {
  if (samples.empty()) throw Error(ErrorCode::InsufficientData, "no calibration samples");
  std::vector<RigidTransform> per_sample;
  per_sample.reserve(samples.size());
  for (const auto& s : samples) {
    per_sample.push_back(
        compose(compose(invert(s.tool_marker_world), s.other_marker_world), divot.divot_in_marker));
  }
  ToolCalibration out;
  out.tool_marker_id = tool_marker_id;
  out.tip_in_marker = per_sample.size() == 1 ? per_sample.front() : average_transforms(per_sample);
  out.method = method;
  double ss = 0.0;
  for (const auto& t : per_sample) {
    ss += (t.translation() - out.tip_in_marker.translation()).squaredNorm();
  }
  out.rms_residual = std::sqrt(ss / static_cast<double>(per_sample.size()));
  return out;
}

}  // namespace

PivotResult pivot_calibrate(std::span<const PivotSample> samples, const PivotOptions& options) {
  if (samples.size() < 3) {
    throw Error(ErrorCode::InsufficientData, "pivot calibration needs at least 3 samples");
  }
  std::vector<const PivotSample*> used;
  used.reserve(samples.size());
  for (const auto& s : samples) used.push_back(&s);
  PivotResult result = solve_pivot(used, options.condition_limit);
  if (!options.trim_outliers) return result;

  std::vector<double> residuals;
  residuals.reserve(used.size());
  for (const PivotSample* s : used) {
    residuals.push_back(
        (transform_point(s->marker_world_pose, result.tip_in_marker) - result.pivot_in_world).norm());
  }
  std::vector<double> sorted = residuals;
  std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
  double median = sorted[sorted.size() / 2];
  std::vector<const PivotSample*> kept;
  for (std::size_t i = 0; i < used.size(); ++i) {
    if (residuals[i] <= 3.0 * median) kept.push_back(used[i]);
  }
  if (kept.size() == used.size()) return result;
  if (kept.size() < 3) {
    throw Error(ErrorCode::InsufficientData, "fewer than 3 samples survive outlier trimming");
  }
  return solve_pivot(kept, options.condition_limit);
}

ToolCalibration to_tool_calibration(const std::string& tool_marker_id, const PivotResult& pivot) {
  ToolCalibration out;
  out.tool_marker_id = tool_marker_id;
  out.tip_in_marker = RigidTransform::from_translation(pivot.tip_in_marker);
  out.method = CalibrationMethod::Pivot;
  out.position_only = true;
  out.rms_residual = pivot.rms_residual;
  return out;
}

ToolCalibration calibrate_with_calibrator(const std::string& tool_marker_id,
                                          std::span<const MarkerPair> samples, const DivotSpec& hole) {
  return chain_calibrate(tool_marker_id, samples, hole, CalibrationMethod::Calibrator);
}

ToolCalibration calibrate_marker_to_marker(const std::string& tool_marker_id,
                                           std::span<const MarkerPair> samples, const DivotSpec& divot) {
  return chain_calibrate(tool_marker_id, samples, divot, CalibrationMethod::MarkerToMarker);
}

RigidTransform average_transforms(std::span<const RigidTransform> transforms) {
  if (transforms.empty()) throw Error(ErrorCode::InsufficientData, "nothing to average");
  Vector3 t = Vector3::Zero();
  Eigen::Vector4d q_sum = Eigen::Vector4d::Zero();
  const Eigen::Vector4d first = transforms.front().quaternion().coeffs();
  for (const auto& tr : transforms) {
    t += tr.translation();
    Eigen::Vector4d q = tr.quaternion().coeffs();
    if (q.dot(first) < 0.0) q = -q;
    q_sum += q;
  }
  t /= static_cast<double>(transforms.size());
  UnitQuaternion q(q_sum(3), q_sum(0), q_sum(1), q_sum(2));
  return RigidTransform::from_quaternion(q, t);
}

RigidTransform tooltip_world(const RigidTransform& marker_world, const ToolCalibration& calib) {
  return compose(marker_world, calib.tip_in_marker);
}

CalibrationPoseError calibration_pose_error(const ToolCalibration& estimated,
                                            const ToolCalibration& ground_truth) {
  if (estimated.tool_marker_id != ground_truth.tool_marker_id) {
    throw Error(ErrorCode::MarkerMismatch, "calibrations belong to different markers ('" +
                                               estimated.tool_marker_id + "' vs '" +
                                               ground_truth.tool_marker_id + "')");
  }
  CalibrationPoseError out;
  out.tip_distance = (estimated.tip_in_marker.translation() - ground_truth.tip_in_marker.translation()).norm();
  if (!estimated.position_only && !ground_truth.position_only) {
    Vector3 a = estimated.tip_in_marker.rotation().col(2);
    Vector3 b = ground_truth.tip_in_marker.rotation().col(2);
    out.axis_angle = rad_to_deg(std::atan2(a.cross(b).norm(), a.dot(b)));
  }
  return out;
}

}  // namespace navkit
