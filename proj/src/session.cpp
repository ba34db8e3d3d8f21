#include "navkit/session.hpp"

#include "navkit/error.hpp"
#include "navkit/text.hpp"

namespace navkit {

SessionPipeline::SessionPipeline(std::vector<MarkerSpec> markers, std::optional<CameraIntrinsics> intrinsics)
    : registry_(std::move(markers)), intrinsics_(intrinsics) {}

void SessionPipeline::feed(const Record& record) {
  const Micros t = record_time(record);
  if (last_time_ && t < *last_time_) throw Error(ErrorCode::OutOfOrder, "record time went backwards");
  last_time_ = t;
  if (const auto* cam = std::get_if<CamRecord>(&record)) {
    flush();
    pending_camera_ = *cam;
  } else if (const auto* obs = std::get_if<ObsRecord>(&record)) {
    if (!pending_camera_ || pending_camera_->time != obs->time) {
      throw Error(ErrorCode::InvalidArgument, "OBS for '" + obs->marker_id + "' has no CAM with the same timestamp");
    }
    pending_obs_.push_back(to_observation(*obs));
  } else if (const auto* lm = std::get_if<LmRecord>(&record)) {
    landmarks_.push_back(*lm);
  }
}

void SessionPipeline::flush() {
  if (!pending_camera_) return;
  CameraSample camera{pending_camera_->pose.to_transform(), text::micros_to_seconds(pending_camera_->time)};
  registry_ = step_tracking(registry_, pending_obs_, camera, intrinsics_ ? &*intrinsics_ : nullptr);
  for (const auto& obs : pending_obs_) {
    poses_[obs.marker_id].push_back({pending_camera_->time, *registry_.state(obs.marker_id).world_pose});
  }
  pending_camera_.reset();
  pending_obs_.clear();
}

const std::vector<TrackedPose>& SessionPipeline::poses_of(const std::string& marker_id) const {
  static const std::vector<TrackedPose> none;
  auto it = poses_.find(marker_id);
  return it == poses_.end() ? none : it->second;
}

std::vector<CalRecord> SessionPipeline::pivot_calibrations() const {
  std::vector<CalRecord> out;
  for (const auto& spec : registry_.specs()) {
    if (spec.role != MarkerRole::Tool) continue;
    const auto& tracked = poses_of(spec.id);
    if (tracked.size() < 3) continue;
    std::vector<PivotSample> samples;
    samples.reserve(tracked.size());
    for (const auto& p : tracked) samples.push_back({p.world, text::micros_to_seconds(p.time)});
    out.push_back(to_cal_record(tracked.back().time, to_tool_calibration(spec.id, pivot_calibrate(samples))));
  }
  return out;
}

std::optional<RegRecord> SessionPipeline::registration(const std::string& label) const {
  if (landmarks_.empty()) return std::nullopt;
  LandmarkSet set;
  for (const auto& lm : landmarks_) {
    set.landmarks.push_back({lm.label, Point3(lm.position[0], lm.position[1], lm.position[2]), lm.frame});
  }
  auto matched = match_by_order(set);
  return to_reg_record(landmarks_.back().time, label, point_based_register(matched.model, matched.patient));
}

std::vector<Record> SessionPipeline::finish(const std::string& registration_label) {
  flush();
  // Derived records are appended after the inputs, so they carry the stream's final time.
  const Micros end = last_time_.value_or(0);
  std::vector<Record> out;
  for (auto& c : pivot_calibrations()) {
    c.time = end;
    out.emplace_back(std::move(c));
  }
  if (auto reg = registration(registration_label)) {
    reg->time = end;
    out.emplace_back(std::move(*reg));
  }
  return out;
}

MarkerObservation to_observation(const ObsRecord& record) {
  MarkerObservation obs;
  obs.marker_id = record.marker_id;
  obs.timestamp = text::micros_to_seconds(record.time);
  if (const auto* c = std::get_if<std::array<double, 8>>(&record.payload)) {
    std::array<Pixel, 4> corners;
    for (std::size_t i = 0; i < 4; ++i) corners[i] = Pixel((*c)[2 * i], (*c)[2 * i + 1]);
    obs.corners = corners;
  } else {
    obs.pose_in_camera = std::get<PoseValues>(record.payload).to_transform();
  }
  return obs;
}

ObsRecord to_record(const MarkerObservation& obs) {
  ObsRecord r;
  r.time = text::seconds_to_micros(obs.timestamp);
  r.marker_id = obs.marker_id;
  if (obs.pose_in_camera) {
    r.payload = PoseValues::from_transform(*obs.pose_in_camera);
  } else if (obs.corners) {
    std::array<double, 8> c{};
    for (std::size_t i = 0; i < 4; ++i) {
      c[2 * i] = (*obs.corners)[i].x();
      c[2 * i + 1] = (*obs.corners)[i].y();
    }
    r.payload = c;
  } else {
    throw Error(ErrorCode::InvalidArgument, "observation of '" + obs.marker_id + "' has neither pose nor corners");
  }
  return r;
}

std::vector<MarkerPair> paired_poses(const SessionPipeline& session, const std::string& tool_marker,
                                     const std::string& other_marker) {
  const auto& tool = session.poses_of(tool_marker);
  const auto& other = session.poses_of(other_marker);
  std::vector<MarkerPair> out;
  std::size_t j = 0;
  for (const auto& t : tool) {
    while (j < other.size() && other[j].time < t.time) ++j;
    if (j < other.size() && other[j].time == t.time) out.push_back({t.world, other[j].world});
  }
  return out;
}

CalRecord to_cal_record(Micros time, const ToolCalibration& calib) {
  return {time, calib.tool_marker_id, calib.method, PoseValues::from_transform(calib.tip_in_marker),
          calib.rms_residual};
}

RegRecord to_reg_record(Micros time, const std::string& label, const RegistrationResult& result) {
  return {time, label, PoseValues::from_transform(result.image_to_world), result.fre,
          static_cast<std::uint64_t>(result.point_count)};
}

std::vector<Record> simulate_recording(const Scenario& scenario, const NoiseModel& noise,
                                       const std::string& registration_label) {
  scenario.validate();
  std::vector<Record> out;
  auto frames = simulate_pivot_frames(scenario.tool_truth, scenario.cone_half_angle, scenario.pivot_sample_count(),
                                      noise, scenario.setup, scenario.tool_edge);
  for (const auto& f : frames) {
    const Micros t = text::seconds_to_micros(f.camera.timestamp);
    out.emplace_back(CamRecord{t, PoseValues::from_transform(f.camera.pose_world)});
    for (const auto& obs : f.observations) out.emplace_back(to_record(obs));
  }

  const Micros t_lm = record_time(out.back());
  Rng rng(derive_seed(noise.seed, 2));
  std::vector<LmRecord> patient;
  for (std::size_t i = 0; i < scenario.registration_points; ++i) {
    const std::string label = "F" + std::to_string(i + 1);
    const Point3& m = scenario.model_landmarks[i];
    Point3 p = transform_point(scenario.image_to_world, m);
    Vector3 n = rng.normal3();
    if (noise.sigma_t > 0.0) p += noise.sigma_t * n;
    out.emplace_back(LmRecord{t_lm, label, LandmarkFrame::Image, {m.x(), m.y(), m.z()}});
    patient.push_back({t_lm, label, LandmarkFrame::Patient, {p.x(), p.y(), p.z()}});
  }
  for (auto& lm : patient) out.emplace_back(std::move(lm));

  SessionPipeline pipeline(scenario.markers, scenario.setup.intrinsics.value_or(default_intrinsics()));
  for (const auto& r : out) pipeline.feed(r);
  for (auto& r : pipeline.finish(registration_label)) out.push_back(std::move(r));
  return out;
}

}  // namespace navkit
