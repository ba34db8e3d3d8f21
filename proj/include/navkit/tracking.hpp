#pragma once

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "navkit/geometry.hpp"

namespace navkit {

using Pixel = Eigen::Vector2d;

/// Distortion-free pinhole camera. Camera frame: x right, y down, z along the optical axis.
struct CameraIntrinsics {
  double fx = 1000.0;
  double fy = 1000.0;
  double cx = 0.0;
  double cy = 0.0;
  int image_width = 1920;
  int image_height = 1080;

  /// Throws InvalidArgument when focal lengths are not positive or the principal point lies outside the image.
  void validate() const;
  Pixel project(const Point3& camera_point) const;

  friend bool operator==(const CameraIntrinsics&, const CameraIntrinsics&) = default;
};

enum class MarkerRole { Patient, Tool, Reference, Calibrator };

std::string_view to_string(MarkerRole role);
std::optional<MarkerRole> marker_role_from_string(std::string_view s);

struct MarkerSpec {
  std::string id;
  std::string family;  // opaque dictionary/pattern tag
  double edge_length = 0.0;  // mm
  MarkerRole role = MarkerRole::Patient;

  friend bool operator==(const MarkerSpec&, const MarkerSpec&) = default;
};

/**
 * Corners of a square marker in its own frame. The origin sits at the pattern
 * center, x points right, y up and z out of the pattern. Corners are listed
 * counterclockwise starting top-left: (-h, h), (-h, -h), (h, -h), (h, h).
 */
std::array<Point3, 4> marker_corners(double edge_length);

struct MarkerObservation {
  std::string marker_id;
  std::optional<std::array<Pixel, 4>> corners;   // same winding as marker_corners
  std::optional<RigidTransform> pose_in_camera;  // T^c_m
  double timestamp = 0.0;
};

struct CameraSample {
  RigidTransform pose_world;  // T^world_c
  double timestamp = 0.0;
};

struct PlanarCorrespondence {
  Pixel image;           // px
  Point3 marker_point;   // mm, z must be 0
};

struct PnpResult {
  RigidTransform pose;  // T^c_m
  double reprojection_rmse = 0.0;  // px
  int iterations = 0;
};

/**
 * Pose of a planar target from >= 4 image correspondences.
 *
 * A normalized DLT homography yields two sign candidates for the pose; the
 * one with positive depth (and, if both qualify, lower reprojection error) is
 * refined by Gauss-Newton on reprojection error (at most 20 iterations,
 * stopping once the relative cost improvement drops below 1e-10).
 *
 * Errors: InsufficientData (< 4 points), DegenerateConfiguration (non-planar
 * or collinear layout), NoValidPose (target behind the camera).
 */
PnpResult solve_planar_pnp(std::span<const PlanarCorrespondence> correspondences,
                           const CameraIntrinsics& intrinsics);

PnpResult solve_marker_pose(const std::array<Pixel, 4>& corners, double edge_length,
                            const CameraIntrinsics& intrinsics);

/// T^world_m = T^world_c * T^c_m.
RigidTransform marker_world_pose(const RigidTransform& obs_pose, const CameraSample& camera);

enum class TrackingMode { NeverSeen, Tracked, ExtendedTracked };

std::string_view to_string(TrackingMode mode);

struct TrackedMarkerState {
  std::string marker_id;
  TrackingMode mode = TrackingMode::NeverSeen;
  std::optional<RigidTransform> world_pose;  // absent iff never seen
  std::optional<double> last_seen;
};

/// Value-type marker registry. Extended tracking holds the last world pose without expiry;
/// callers police staleness through last_seen.
class TrackingRegistry {
public:
  TrackingRegistry() = default;
  explicit TrackingRegistry(std::vector<MarkerSpec> specs);

  const std::vector<MarkerSpec>& specs() const noexcept { return specs_; }
  const MarkerSpec& spec(const std::string& id) const;
  const TrackedMarkerState& state(const std::string& id) const;
  bool contains(const std::string& id) const { return states_.count(id) != 0; }
  std::optional<double> last_frame_time() const noexcept { return last_time_; }

private:
  friend TrackingRegistry step_tracking(const TrackingRegistry&, std::span<const MarkerObservation>,
                                        const CameraSample&, const CameraIntrinsics*);
  std::vector<MarkerSpec> specs_;
  std::map<std::string, TrackedMarkerState> states_;
  std::optional<double> last_time_;
};

/**
 * Advances the registry by one camera frame (frame time = camera.timestamp).
 * Observations without a pose are solved from their corners, which requires
 * `intrinsics`.
 *
 * Errors: UnregisteredMarker, OutOfOrder (frame or observation time earlier
 * than the previous frame), InvalidArgument (duplicate marker in one frame or
 * an observation with neither pose nor usable corners).
 */
TrackingRegistry step_tracking(const TrackingRegistry& registry,
                               std::span<const MarkerObservation> frame,
                               const CameraSample& camera,
                               const CameraIntrinsics* intrinsics = nullptr);

}  // namespace navkit
