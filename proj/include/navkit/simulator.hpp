#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "navkit/calibration.hpp"
#include "navkit/config.hpp"
#include "navkit/geometry.hpp"
#include "navkit/metrics.hpp"
#include "navkit/random.hpp"
#include "navkit/registration.hpp"
#include "navkit/tracking.hpp"

namespace navkit {

/**
 * Observation noise, applied in the camera frame. Translation gets an
 * isotropic per-axis Gaussian; rotation gets a Gaussian angle about a
 * uniformly random axis. When sigma_px is set, observations carry projected
 * corners with per-coordinate pixel noise instead of a pose, and pose
 * recovery goes through PnP.
 */
struct NoiseModel {
  std::string name;
  double sigma_t = 0.0;  // mm
  double sigma_r = 0.0;  // degrees
  std::optional<double> sigma_px;
  std::uint64_t seed = 0;

  void validate() const;
};

/// 1920x1080 pinhole, 1000 px focal length, centered principal point.
CameraIntrinsics default_intrinsics();

struct PixelContext {
  CameraIntrinsics intrinsics;
  double edge_length = 0.0;  // mm
};

/**
 * One noisy observation of a marker. The ideal camera-frame pose is
 * invert(camera.pose_world) * true_marker_world. Throws NotVisible when the
 * marker origin (or, in pixel mode, any corner) is not in front of the camera.
 * Random draws are consumed identically whatever the sigmas, so streams stay
 * aligned across noise conditions.
 */
MarkerObservation synthesize_observation(const std::string& marker_id, const RigidTransform& true_marker_world,
                                         const CameraSample& camera, const NoiseModel& noise, Rng& rng,
                                         const PixelContext* pixels = nullptr);

/// World pose recovered from an observation (pose form, or PnP on corners).
RigidTransform observed_world_pose(const MarkerObservation& obs, const CameraSample& camera,
                                   const PixelContext* pixels = nullptr);

/// Geometry shared by the simulated calibration sessions. Defaults: camera
/// 600 mm above the world origin looking straight down, pivot point at the origin.
struct SessionSetup {
  RigidTransform camera_pose = RigidTransform::from_axis_angle(Vector3::UnitX(), 180.0, Vector3(0, 0, 600));
  Point3 pivot_point = Point3::Zero();
  double frame_rate = 30.0;
  double max_spin = 30.0;  // degrees of random roll about the shaft
  std::optional<CameraIntrinsics> intrinsics;  // pixel mode falls back to default_intrinsics()
};

struct SimulatedFrame {
  CameraSample camera;
  std::vector<MarkerObservation> observations;
};

/**
 * Tool pivoting about a fixed tip. Shaft directions are drawn uniformly from
 * the spherical cap of `cone_half_angle` around world -z, with random roll.
 * The generator is seeded from noise.seed.
 */
std::vector<SimulatedFrame> simulate_pivot_frames(const ToolCalibration& truth, double cone_half_angle,
                                                  std::size_t count, const NoiseModel& noise,
                                                  const SessionSetup& setup, double edge_length = 50.0);

std::vector<PivotSample> simulate_pivot_session(const ToolCalibration& truth, double cone_half_angle,
                                                std::size_t count, const NoiseModel& noise,
                                                const SessionSetup& setup = {}, double edge_length = 50.0);

/// Static recording of the tool tip seated in a divot owned by another marker.
std::vector<MarkerPair> simulate_static_pairs(const ToolCalibration& truth, const RigidTransform& owner_world,
                                              const DivotSpec& divot, std::size_t count, const NoiseModel& noise,
                                              const SessionSetup& setup = {}, double tool_edge = 50.0,
                                              double owner_edge = 80.0);

struct RegistrationTrial {
  RegistrationResult result;
  double tre = 0.0;  // mm, on noise-free held-out targets
};

/// Patient points = true_transform(model) + per-axis N(0, sigma_t^2) annotation noise (seeded from noise.seed).
RegistrationTrial simulate_registration_trial(std::span<const Point3> model, const RigidTransform& true_transform,
                                              const NoiseModel& noise, std::span<const Point3> heldout);

/// Ground-truth scene driving the Monte-Carlo metrics.
struct Scenario {
  std::vector<MarkerSpec> markers;
  SessionSetup setup;
  double duration = 40.0;         // s, pivot recording
  double static_duration = 6.0;   // s, calibrator / marker-to-marker recordings
  double cone_half_angle = 30.0;  // degrees

  ToolCalibration tool_truth;
  double tool_edge = 50.0;
  RigidTransform calibrator_world;
  DivotSpec calibrator_hole;
  RigidTransform reference_world;
  DivotSpec reference_divot;
  double fixture_edge = 80.0;

  std::vector<Point3> model_landmarks;  // image frame, used in order
  std::vector<Point3> heldout_targets;  // image frame
  std::vector<Trajectory> trajectories; // image frame
  std::vector<Point3> surface_points;   // image frame
  RigidTransform image_to_world;
  std::size_t registration_points = 10;

  std::size_t pivot_sample_count() const;
  std::size_t static_sample_count() const;
  void validate() const;
};

/// Desk-scale phantom: 80 mm patient marker, 50 mm tool marker on a 150 mm pointer,
/// calibrator and reference fixtures, ten surface landmarks on a head-sized ellipsoid.
Scenario default_scenario();

/// Scenario from a configuration's simulation section; model files resolve relative to `base_dir`.
Scenario scenario_from_config(const NavConfig& config, const std::filesystem::path& base_dir);

/// Noise conditions from the configuration, each seeded with derive_seed(seed, index).
std::vector<NoiseModel> noise_conditions(const NavConfig& config, std::uint64_t seed);

const std::vector<std::string>& metric_names();

/// One trial of a named metric, seeded from noise.seed. Throws UnknownMetric.
double run_trial(const Scenario& scenario, const NoiseModel& noise, std::string_view metric);

struct TrialStatistics {
  std::string condition;
  std::string metric;
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation, 0 for a single trial
  double min = 0.0;
  double max = 0.0;
  std::size_t n = 0;
};

/// Trial i of a condition uses seed derive_seed(condition.seed, i); results are aggregated in trial order.
std::vector<TrialStatistics> run_monte_carlo(const Scenario& scenario, std::span<const NoiseModel> conditions,
                                             std::size_t trials, std::string_view metric);

TrialStatistics summarize(std::string condition, std::string metric, std::span<const double> values);

/// CSV with header "condition,metric,mean,std,min,max,n"; reals with six decimals.
std::string format_statistics_csv(std::span<const TrialStatistics> stats);

}  // namespace navkit
