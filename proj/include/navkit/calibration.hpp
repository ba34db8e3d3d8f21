#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "navkit/geometry.hpp"

namespace navkit {

struct PivotSample {
  RigidTransform marker_world_pose;  // T^world_m at one time point
  double timestamp = 0.0;
};

struct PivotResult {
  Point3 tip_in_marker = Point3::Zero();   // mm
  Point3 pivot_in_world = Point3::Zero();  // mm
  double rms_residual = 0.0;               // mm
  std::size_t sample_count = 0;            // samples used in the final solve
};

struct PivotOptions {
  /// Single pass: drop samples whose residual exceeds 3x the median, then re-solve.
  bool trim_outliers = false;
  double condition_limit = 1e8;
};

/**
 * Least-squares pivot calibration. Solves the stacked system
 *   [R_i | -I] [p_m; p_w] = -t_i
 * over all samples. Throws InsufficientData for fewer than 3 samples and
 * InsufficientRotationalDiversity when cond(A) > options.condition_limit.
 */
PivotResult pivot_calibrate(std::span<const PivotSample> samples, const PivotOptions& options = {});

enum class CalibrationMethod { Pivot, Calibrator, MarkerToMarker, ByDesign };

std::string_view to_string(CalibrationMethod m);
std::optional<CalibrationMethod> calibration_method_from_string(std::string_view s);

struct ToolCalibration {
  std::string tool_marker_id;
  RigidTransform tip_in_marker;  // T^m_tip
  CalibrationMethod method = CalibrationMethod::ByDesign;
  /// Pivot results carry no orientation; rotation is then the identity.
  bool position_only = false;
  double rms_residual = 0.0;
};

ToolCalibration to_tool_calibration(const std::string& tool_marker_id, const PivotResult& pivot);

/// A divot (calibrator hole or printed reference divot) fixed relative to its owner marker.
struct DivotSpec {
  std::string owner_marker_id;
  RigidTransform divot_in_marker;  // T^owner_tip
};

/// Simultaneous world poses of the tool marker and the divot-owning marker.
struct MarkerPair {
  RigidTransform tool_marker_world;
  RigidTransform other_marker_world;
};

/// (T^w_tool)^-1 * T^w_calibrator * T^calibrator_tip, averaged over samples.
ToolCalibration calibrate_with_calibrator(const std::string& tool_marker_id,
                                          std::span<const MarkerPair> samples,
                                          const DivotSpec& hole);

/// (T^w_tool)^-1 * T^w_reference * T^reference_tip, averaged over samples.
ToolCalibration calibrate_marker_to_marker(const std::string& tool_marker_id,
                                           std::span<const MarkerPair> samples,
                                           const DivotSpec& divot);

/// Arithmetic mean translation; rotation is the normalized mean of quaternions
/// sign-aligned to the first sample.
RigidTransform average_transforms(std::span<const RigidTransform> transforms);

/// T^world_tip = T^world_m * T^m_tip.
RigidTransform tooltip_world(const RigidTransform& marker_world, const ToolCalibration& calib);

struct CalibrationPoseError {
  double tip_distance = 0.0;  // mm
  double axis_angle = 0.0;    // degrees between the local z (shaft) axes
};

/// Axis angle is 0 when either side is position-only. Throws MarkerMismatch.
CalibrationPoseError calibration_pose_error(const ToolCalibration& estimated,
                                            const ToolCalibration& ground_truth);

}  // namespace navkit
