#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "navkit/calibration.hpp"
#include "navkit/records.hpp"
#include "navkit/simulator.hpp"
#include "navkit/tracking.hpp"

namespace navkit {

/// World pose of a marker in one frame where it was actually observed.
struct TrackedPose {
  Micros time = 0;
  RigidTransform world;
};

/**
 * Drives tracking from a record stream. CAM opens a frame, OBS records with
 * the same timestamp join it, and the frame is stepped through the tracking
 * registry when the next CAM (or finish) arrives. LM records are collected
 * for registration; CAL, REG and TRAJ input records are passed over, since
 * they are outputs of an earlier run.
 */
class SessionPipeline {
public:
  explicit SessionPipeline(std::vector<MarkerSpec> markers, std::optional<CameraIntrinsics> intrinsics = {});

  void feed(const Record& record);
  /// Flushes the pending frame. Idempotent.
  void flush();

  const TrackingRegistry& registry() const noexcept { return registry_; }
  const std::map<std::string, std::vector<TrackedPose>>& poses() const noexcept { return poses_; }
  const std::vector<TrackedPose>& poses_of(const std::string& marker_id) const;
  const std::vector<LmRecord>& landmarks() const noexcept { return landmarks_; }
  std::optional<Micros> last_time() const noexcept { return last_time_; }

  /// Tool-tip calibrations of every tool-role marker with at least three tracked poses (pivot method).
  std::vector<CalRecord> pivot_calibrations() const;
  /// Point-based registration from the collected LM records, if any.
  std::optional<RegRecord> registration(const std::string& label) const;
  /// flush, then pivot_calibrations followed by registration, all stamped with the last stream time.
  std::vector<Record> finish(const std::string& registration_label);

private:
  TrackingRegistry registry_;
  std::optional<CameraIntrinsics> intrinsics_;
  std::optional<CamRecord> pending_camera_;
  std::vector<MarkerObservation> pending_obs_;
  std::map<std::string, std::vector<TrackedPose>> poses_;
  std::vector<LmRecord> landmarks_;
  std::optional<Micros> last_time_;
};

/// Camera-frame observation carried by an OBS record.
MarkerObservation to_observation(const ObsRecord& record);
ObsRecord to_record(const MarkerObservation& obs);

/// Pairs of tool/other world poses from frames where both markers were observed.
std::vector<MarkerPair> paired_poses(const SessionPipeline& session, const std::string& tool_marker,
                                     const std::string& other_marker);

CalRecord to_cal_record(Micros time, const ToolCalibration& calib);
RegRecord to_reg_record(Micros time, const std::string& label, const RegistrationResult& result);

/**
 * Recording of one simulated session: the pivot frames (CAM + OBS of the tool
 * marker), then the first registration_points landmarks as LM pairs (image
 * frame, then patient frame with sigma_t annotation noise), then the records
 * derived by replaying those inputs through SessionPipeline.
 */
std::vector<Record> simulate_recording(const Scenario& scenario, const NoiseModel& noise,
                                       const std::string& registration_label = "registration");

}  // namespace navkit
