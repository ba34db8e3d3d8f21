#include "navkit/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "navkit/error.hpp"
#include "navkit/files.hpp"
#include "navkit/text.hpp"

namespace navkit {

namespace {

// Tip frame whose z axis (handle -> tip) points along `shaft`, rolled by `spin` degrees.
Matrix3 shaft_rotation(const Vector3& shaft, double spin) {
  Matrix3 down = Eigen::AngleAxisd(std::numbers::pi, Vector3::UnitX()).toRotationMatrix();
  Matrix3 tilt = Eigen::Quaterniond::FromTwoVectors(-Vector3::UnitZ(), shaft.normalized()).toRotationMatrix();
  Matrix3 roll = Eigen::AngleAxisd(deg_to_rad(spin), Vector3::UnitZ()).toRotationMatrix();
  return orthonormalize(tilt * down * roll);
}

Point3 ellipsoid_point(const Vector3& radii, double azimuth, double elevation, double scale = 1.0) {
  double az = deg_to_rad(azimuth);
  double el = deg_to_rad(elevation);
  return scale * Point3(radii.x() * std::cos(el) * std::cos(az), radii.y() * std::cos(el) * std::sin(az),
                        radii.z() * std::sin(el));
}

std::optional<PixelContext> pixel_context(const NoiseModel& noise, const SessionSetup& setup, double edge) {
  if (!noise.sigma_px) return std::nullopt;
  return PixelContext{setup.intrinsics.value_or(default_intrinsics()), edge};
}

std::vector<Point3> first_n(const std::vector<Point3>& pts, std::size_t n) {
  return {pts.begin(), pts.begin() + static_cast<std::ptrdiff_t>(std::min(n, pts.size()))};
}

}  // namespace

CameraIntrinsics default_intrinsics() { return {1000.0, 1000.0, 960.0, 540.0, 1920, 1080}; }

void NoiseModel::validate() const {
  if (!(sigma_t >= 0.0) || !(sigma_r >= 0.0) || (sigma_px && !(*sigma_px >= 0.0))) {
    throw Error(ErrorCode::InvalidArgument, "noise sigmas must be non-negative");
  }
}

MarkerObservation synthesize_observation(const std::string& marker_id, const RigidTransform& true_marker_world,
                                         const CameraSample& camera, const NoiseModel& noise, Rng& rng,
                                         const PixelContext* pixels) {
  noise.validate();
  const RigidTransform ideal = compose(invert(camera.pose_world), true_marker_world);
  if (!(ideal.translation().z() > 0.0)) {
    throw Error(ErrorCode::NotVisible, "marker '" + marker_id + "' is behind the camera");
  }
  const Vector3 dt = rng.normal3();
  const Vector3 axis = rng.unit_vector();
  const double angle = rng.normal();
  std::array<double, 8> px_noise{};
  for (double& v : px_noise) v = rng.normal();

  MarkerObservation obs;
  obs.marker_id = marker_id;
  obs.timestamp = camera.timestamp;
  if (noise.sigma_px) {
    if (!pixels) throw Error(ErrorCode::InvalidArgument, "pixel noise needs camera intrinsics and marker size");
    auto model = marker_corners(pixels->edge_length);
    std::array<Pixel, 4> corners;
    for (std::size_t i = 0; i < 4; ++i) {
      Point3 pc = transform_point(ideal, model[i]);
      if (!(pc.z() > 0.0)) throw Error(ErrorCode::NotVisible, "marker '" + marker_id + "' corner behind the camera");
      corners[i] = pixels->intrinsics.project(pc) + *noise.sigma_px * Pixel(px_noise[2 * i], px_noise[2 * i + 1]);
    }
    obs.corners = corners;
    return obs;
  }
  Matrix3 r = ideal.rotation();
  if (noise.sigma_r > 0.0) {
    r = Eigen::AngleAxisd(deg_to_rad(noise.sigma_r * angle), axis).toRotationMatrix() * r;
  }
  Vector3 t = ideal.translation();
  if (noise.sigma_t > 0.0) t += noise.sigma_t * dt;
  obs.pose_in_camera = RigidTransform(r, t);
  return obs;
}

RigidTransform observed_world_pose(const MarkerObservation& obs, const CameraSample& camera,
                                   const PixelContext* pixels) {
  if (obs.pose_in_camera) return marker_world_pose(*obs.pose_in_camera, camera);
  if (!obs.corners || !pixels) {
    throw Error(ErrorCode::InvalidArgument, "observation of '" + obs.marker_id + "' has no pose");
  }
  return marker_world_pose(solve_marker_pose(*obs.corners, pixels->edge_length, pixels->intrinsics).pose, camera);
}

std::vector<SimulatedFrame> simulate_pivot_frames(const ToolCalibration& truth, double cone_half_angle,
                                                  std::size_t count, const NoiseModel& noise,
                                                  const SessionSetup& setup, double edge_length) {
  if (!(cone_half_angle > 0.0 && cone_half_angle < 90.0)) {
    throw Error(ErrorCode::InvalidArgument, "cone half angle must lie in (0, 90) degrees");
  }
  if (count < 3) throw Error(ErrorCode::InsufficientData, "a pivot session needs at least 3 samples");
  Rng rng(noise.seed);
  auto pixels = pixel_context(noise, setup, edge_length);
  const RigidTransform tip_to_marker = invert(truth.tip_in_marker);
  const double cos_max = std::cos(deg_to_rad(cone_half_angle));

  std::vector<SimulatedFrame> frames;
  frames.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    double cos_theta = 1.0 - rng.uniform() * (1.0 - cos_max);
    double sin_theta = std::sqrt(std::max(0.0, 1.0 - cos_theta * cos_theta));
    double phi = 2.0 * std::numbers::pi * rng.uniform();
    double spin = rng.uniform(-setup.max_spin, setup.max_spin);
    Vector3 shaft(sin_theta * std::cos(phi), sin_theta * std::sin(phi), -cos_theta);
    RigidTransform tip_world(shaft_rotation(shaft, spin), setup.pivot_point);
    RigidTransform marker_world = compose(tip_world, tip_to_marker);

    SimulatedFrame f;
    f.camera = {setup.camera_pose, static_cast<double>(i) / setup.frame_rate};
    f.observations.push_back(synthesize_observation(truth.tool_marker_id, marker_world, f.camera, noise, rng,
                                                    pixels ? &*pixels : nullptr));
    frames.push_back(std::move(f));
  }
  return frames;
}

std::vector<PivotSample> simulate_pivot_session(const ToolCalibration& truth, double cone_half_angle,
                                                std::size_t count, const NoiseModel& noise,
                                                const SessionSetup& setup, double edge_length) {
  auto frames = simulate_pivot_frames(truth, cone_half_angle, count, noise, setup, edge_length);
  auto pixels = pixel_context(noise, setup, edge_length);
  std::vector<PivotSample> out;
  out.reserve(frames.size());
  for (const auto& f : frames) {
    out.push_back({observed_world_pose(f.observations.front(), f.camera, pixels ? &*pixels : nullptr),
                   f.camera.timestamp});
  }
  return out;
}

std::vector<MarkerPair> simulate_static_pairs(const ToolCalibration& truth, const RigidTransform& owner_world,
                                              const DivotSpec& divot, std::size_t count, const NoiseModel& noise,
                                              const SessionSetup& setup, double tool_edge, double owner_edge) {
  if (count < 1) throw Error(ErrorCode::InsufficientData, "a static session needs at least 1 sample");
  Rng rng(noise.seed);
  auto tool_px = pixel_context(noise, setup, tool_edge);
  auto owner_px = pixel_context(noise, setup, owner_edge);
  const RigidTransform tool_world = compose(compose(owner_world, divot.divot_in_marker), invert(truth.tip_in_marker));
  std::vector<MarkerPair> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    CameraSample cam{setup.camera_pose, static_cast<double>(i) / setup.frame_rate};
    auto tool_obs = synthesize_observation(truth.tool_marker_id, tool_world, cam, noise, rng,
                                           tool_px ? &*tool_px : nullptr);
    auto owner_obs = synthesize_observation(divot.owner_marker_id, owner_world, cam, noise, rng,
                                            owner_px ? &*owner_px : nullptr);
    out.push_back({observed_world_pose(tool_obs, cam, tool_px ? &*tool_px : nullptr),
                   observed_world_pose(owner_obs, cam, owner_px ? &*owner_px : nullptr)});
  }
  return out;
}

RegistrationTrial simulate_registration_trial(std::span<const Point3> model, const RigidTransform& true_transform,
                                              const NoiseModel& noise, std::span<const Point3> heldout) {
  noise.validate();
  if (model.size() < 3) throw Error(ErrorCode::InsufficientData, "registration needs at least 3 points");
  Rng rng(noise.seed);
  std::vector<Point3> patient;
  patient.reserve(model.size());
  for (const auto& m : model) {
    Vector3 n = rng.normal3();
    Point3 p = transform_point(true_transform, m);
    if (noise.sigma_t > 0.0) p += noise.sigma_t * n;
    patient.push_back(p);
  }
  RegistrationTrial out;
  out.result = point_based_register(model, patient);
  if (!heldout.empty()) {
    std::vector<Point3> truth;
    truth.reserve(heldout.size());
    for (const auto& h : heldout) truth.push_back(transform_point(true_transform, h));
    out.tre = tre(heldout, truth, out.result.image_to_world);
  }
  return out;
}

std::size_t Scenario::pivot_sample_count() const {
  return std::max<std::size_t>(3, static_cast<std::size_t>(std::llround(setup.frame_rate * duration)));
}

std::size_t Scenario::static_sample_count() const {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(setup.frame_rate * static_duration)));
}

void Scenario::validate() const {
  if (!(duration > 0.0) || !(static_duration > 0.0)) throw Error(ErrorCode::InvalidArgument, "durations must be positive");
  if (!(setup.frame_rate > 0.0)) throw Error(ErrorCode::InvalidArgument, "frame rate must be positive");
  if (!(cone_half_angle > 0.0 && cone_half_angle < 90.0)) {
    throw Error(ErrorCode::InvalidArgument, "cone half angle must lie in (0, 90) degrees");
  }
  if (registration_points < 3 || registration_points > model_landmarks.size()) {
    throw Error(ErrorCode::InvalidArgument, "registration needs between 3 and " +
                                                std::to_string(model_landmarks.size()) + " points");
  }
}

Scenario default_scenario() {
  Scenario s;
  s.markers = {{"patient", "vuforia", 80.0, MarkerRole::Patient},
               {"tool", "vuforia", 50.0, MarkerRole::Tool},
               {"calibrator", "vuforia", 100.0, MarkerRole::Calibrator},
               {"reference", "vuforia", 80.0, MarkerRole::Reference}};

  const Matrix3 down = Eigen::AngleAxisd(std::numbers::pi, Vector3::UnitX()).toRotationMatrix();
  s.tool_truth.tool_marker_id = "tool";
  s.tool_truth.method = CalibrationMethod::ByDesign;
  s.tool_truth.tip_in_marker =
      RigidTransform(orthonormalize(down * Eigen::AngleAxisd(deg_to_rad(3.0), Vector3::UnitY()).toRotationMatrix()),
                     Vector3(4.0, -2.0, -150.0));
  s.tool_edge = 50.0;

  s.calibrator_world = RigidTransform::from_axis_angle(Vector3::UnitZ(), 15.0, Vector3(80, 40, 0));
  s.calibrator_hole = {"calibrator", RigidTransform(down, Vector3(0, -70, -20))};
  s.reference_world = RigidTransform::from_axis_angle(Vector3::UnitZ(), -10.0, Vector3(-80, 30, 0));
  s.reference_divot = {"reference", RigidTransform(down, Vector3(0, 100, 0))};
  s.fixture_edge = 80.0;

  const Vector3 radii(75, 95, 85);
  const double landmark_angles[10][2] = {{0, 20},   {36, 35},  {72, 10},  {108, 45}, {144, 25},
                                         {180, 15}, {216, 40}, {252, 20}, {288, 50}, {324, 30}};
  for (const auto& a : landmark_angles) s.model_landmarks.push_back(ellipsoid_point(radii, a[0], a[1]));
  const double target_angles[10][3] = {{18, 30, 0.6},  {90, 20, 0.5},  {162, 40, 0.7}, {234, 10, 0.4},
                                       {306, 35, 0.6}, {45, -10, 0.5}, {135, 60, 0.3}, {225, 55, 0.5},
                                       {315, -5, 0.7}, {0, 0, 0.0}};
  for (const auto& a : target_angles) s.heldout_targets.push_back(ellipsoid_point(radii, a[0], a[1], a[2]));
  const double traj_angles[5][2] = {{20, 60}, {60, 55}, {160, 60}, {200, 55}, {300, 65}};
  for (int i = 0; i < 5; ++i) {
    Point3 entry = ellipsoid_point(radii, traj_angles[i][0], traj_angles[i][1]);
    Point3 exit = entry - 60.0 * entry.normalized();
    s.trajectories.push_back({"traj" + std::to_string(i + 1), entry, exit});
  }
  Rng surface(12345);
  for (int i = 0; i < 200; ++i) {
    Vector3 u = surface.unit_vector();
    if (u.z() < 0) u.z() = -u.z();
    s.surface_points.push_back(radii.cwiseProduct(u));
  }
  s.image_to_world = compose(RigidTransform::from_axis_angle(Vector3::UnitZ(), 25.0, Vector3(10, -20, -80)),
                             RigidTransform::from_axis_angle(Vector3::UnitX(), 10.0));
  s.registration_points = 10;
  return s;
}

Scenario scenario_from_config(const NavConfig& config, const std::filesystem::path& base_dir) {
  Scenario s = default_scenario();
  if (!config.markers.empty()) s.markers = config.markers;
  if (config.camera) s.setup.intrinsics = config.camera;
  if (!config.simulation) return s;
  const SimulationConfig& sim = *config.simulation;
  s.setup.frame_rate = sim.frame_rate;
  s.duration = sim.duration;
  s.static_duration = sim.static_duration;
  s.cone_half_angle = sim.cone_half_angle;
  if (sim.camera_pose) s.setup.camera_pose = sim.camera_pose->to_transform();
  if (sim.image_to_world) s.image_to_world = sim.image_to_world->to_transform();

  const ToolConfig* pivot_tool = nullptr;
  if (!sim.pivot_tool.empty()) {
    pivot_tool = config.find_tool(sim.pivot_tool);
  } else {
    for (const auto& t : config.tools) {
      const MarkerSpec* m = config.find_marker(t.marker);
      if (m && m->role == MarkerRole::Tool) {
        pivot_tool = &t;
        break;
      }
    }
  }
  if (pivot_tool) {
    s.tool_truth.tool_marker_id = pivot_tool->marker;
    if (pivot_tool->method && pivot_tool->tip_in_marker) s.tool_truth = tool_calibration(*pivot_tool);
    s.tool_edge = config.find_marker(pivot_tool->marker)->edge_length;
  }
  for (const auto& t : config.tools) {
    if (!t.divot_in_marker) continue;
    const MarkerSpec* m = config.find_marker(t.marker);
    DivotSpec d{t.marker, t.divot_in_marker->to_transform()};
    if (m->role == MarkerRole::Calibrator) s.calibrator_hole = d;
    if (m->role == MarkerRole::Reference) s.reference_divot = d;
  }

  if (!sim.registration_model.empty()) {
    const ModelConfig* model = config.find_model(sim.registration_model);
    auto landmarks = parse_landmark_file(read_text_file(base_dir / model->landmarks));
    s.model_landmarks.clear();
    for (const auto& lm : landmarks.in_frame(LandmarkFrame::Image)) s.model_landmarks.push_back(lm.position);
    if (!model->trajectories.empty()) {
      s.trajectories = parse_trajectory_file(read_text_file(base_dir / model->trajectories));
    }
    if (!model->surface_points.empty()) {
      s.surface_points = parse_point_file(read_text_file(base_dir / model->surface_points));
    }
  }
  s.registration_points = static_cast<std::size_t>(sim.registration_points);
  if (sim.heldout_points < static_cast<int>(s.heldout_targets.size())) {
    s.heldout_targets.resize(static_cast<std::size_t>(sim.heldout_points));
  }
  s.validate();
  return s;
}

std::vector<NoiseModel> noise_conditions(const NavConfig& config, std::uint64_t seed) {
  std::vector<NoiseModel> out;
  if (config.simulation) {
    const auto& conds = config.simulation->conditions;
    for (std::size_t i = 0; i < conds.size(); ++i) {
      out.push_back({conds[i].name, conds[i].sigma_t, conds[i].sigma_r, conds[i].sigma_px, derive_seed(seed, i)});
    }
  }
  if (out.empty()) out.push_back({"noise-free", 0.0, 0.0, std::nullopt, derive_seed(seed, 0)});
  return out;
}

const std::vector<std::string>& metric_names() {
  static const std::vector<std::string> names = {
      "pivot_tip_error",          "calibrator_tip_error", "calibrator_axis_angle",
      "marker_to_marker_tip_error", "marker_to_marker_axis_angle", "registration_fre",
      "registration_tre",         "trajectory_distance",  "trajectory_angle",
      "surface_deviation",        "insertion_error"};
  return names;
}

double run_trial(const Scenario& s, const NoiseModel& noise, std::string_view metric) {
  if (metric == "pivot_tip_error") {
    auto samples = simulate_pivot_session(s.tool_truth, s.cone_half_angle, s.pivot_sample_count(), noise, s.setup,
                                          s.tool_edge);
    auto result = pivot_calibrate(samples);
    return (result.tip_in_marker - s.tool_truth.tip_in_marker.translation()).norm();
  }
  if (metric.starts_with("calibrator_") || metric.starts_with("marker_to_marker_")) {
    const bool calibrator = metric.starts_with("calibrator_");
    std::string_view rest = metric.substr(calibrator ? 11 : 17);
    if (rest != "tip_error" && rest != "axis_angle") {
      throw Error(ErrorCode::UnknownMetric, "unknown metric '" + std::string(metric) + "'");
    }
    const DivotSpec& divot = calibrator ? s.calibrator_hole : s.reference_divot;
    const RigidTransform& owner = calibrator ? s.calibrator_world : s.reference_world;
    auto pairs = simulate_static_pairs(s.tool_truth, owner, divot, s.static_sample_count(), noise, s.setup,
                                       s.tool_edge, s.fixture_edge);
    ToolCalibration est = calibrator ? calibrate_with_calibrator(s.tool_truth.tool_marker_id, pairs, divot)
                                     : calibrate_marker_to_marker(s.tool_truth.tool_marker_id, pairs, divot);
    auto err = calibration_pose_error(est, s.tool_truth);
    return rest == "tip_error" ? err.tip_distance : err.axis_angle;
  }

  static const std::vector<std::string_view> registration_metrics = {
      "registration_fre", "registration_tre", "trajectory_distance", "trajectory_angle", "surface_deviation",
      "insertion_error"};
  if (std::find(registration_metrics.begin(), registration_metrics.end(), metric) == registration_metrics.end()) {
    throw Error(ErrorCode::UnknownMetric, "unknown metric '" + std::string(metric) + "'");
  }
  auto model = first_n(s.model_landmarks, s.registration_points);
  auto trial = simulate_registration_trial(model, s.image_to_world, noise, s.heldout_targets);
  const RigidTransform& est = trial.result.image_to_world;
  if (metric == "registration_fre") return trial.result.fre;
  if (metric == "registration_tre") return trial.tre;
  if (metric == "surface_deviation") return surface_deviation(s.surface_points, est, s.image_to_world).mean;
  if (s.trajectories.empty()) throw Error(ErrorCode::InvalidArgument, "scenario has no trajectories");

  double sum = 0.0;
  if (metric == "insertion_error") {
    // The operator aligns a tracked tool with the displayed plan; error is measured against the true plan.
    Rng rng(derive_seed(noise.seed, 1));
    NoiseModel pose_noise = noise;
    pose_noise.sigma_px.reset();
    for (const auto& traj : s.trajectories) {
      Trajectory shown = transform_trajectory(est, traj);
      RigidTransform tip_world(shaft_rotation(shown.exit - shown.entry, 0.0), shown.entry);
      RigidTransform marker_world = compose(tip_world, invert(s.tool_truth.tip_in_marker));
      CameraSample cam{s.setup.camera_pose, 0.0};
      auto obs = synthesize_observation(s.tool_truth.tool_marker_id, marker_world, cam, pose_noise, rng);
      RigidTransform tip = tooltip_world(observed_world_pose(obs, cam), s.tool_truth);
      ToolLine line{tip.translation(), tip.rotation().col(2)};
      sum += insertion_error(line, transform_trajectory(s.image_to_world, traj)).mean;
    }
    return sum / static_cast<double>(s.trajectories.size());
  }
  for (const auto& traj : s.trajectories) {
    auto dev = trajectory_deviation(transform_trajectory(est, traj), transform_trajectory(s.image_to_world, traj));
    sum += metric == "trajectory_distance" ? dev.distance : dev.angle;
  }
  return sum / static_cast<double>(s.trajectories.size());
}

TrialStatistics summarize(std::string condition, std::string metric, std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::InsufficientData, "no trial values");
  TrialStatistics st;
  st.condition = std::move(condition);
  st.metric = std::move(metric);
  st.n = values.size();
  double sum = 0.0;
  st.min = values.front();
  st.max = values.front();
  for (double v : values) {
    sum += v;
    st.min = std::min(st.min, v);
    st.max = std::max(st.max, v);
  }
  st.mean = sum / static_cast<double>(st.n);
  if (st.n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - st.mean) * (v - st.mean);
    st.std = std::sqrt(ss / static_cast<double>(st.n - 1));
  }
  return st;
}

std::vector<TrialStatistics> run_monte_carlo(const Scenario& scenario, std::span<const NoiseModel> conditions,
                                             std::size_t trials, std::string_view metric) {
  if (trials < 1) throw Error(ErrorCode::InvalidArgument, "at least one trial is required");
  if (std::find(metric_names().begin(), metric_names().end(), metric) == metric_names().end()) {
    throw Error(ErrorCode::UnknownMetric, "unknown metric '" + std::string(metric) + "'");
  }
  scenario.validate();
  std::vector<TrialStatistics> out;
  for (const auto& cond : conditions) {
    std::vector<double> values(trials);
    for (std::size_t i = 0; i < trials; ++i) {
      NoiseModel trial_noise = cond;
      trial_noise.seed = derive_seed(cond.seed, i);
      values[i] = run_trial(scenario, trial_noise, metric);
    }
    out.push_back(summarize(cond.name, std::string(metric), values));
  }
  return out;
}

std::string format_statistics_csv(std::span<const TrialStatistics> stats) {
  std::string out = "condition,metric,mean,std,min,max,n\n";
  for (const auto& s : stats) {
    out += s.condition + ',' + s.metric + ',' + text::format_fixed(s.mean, 6) + ',' + text::format_fixed(s.std, 6) +
           ',' + text::format_fixed(s.min, 6) + ',' + text::format_fixed(s.max, 6) + ',' + std::to_string(s.n) + '\n';
  }
  return out;
}

}  // namespace navkit
