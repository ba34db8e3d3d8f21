#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "navkit/calibration.hpp"
#include "navkit/geometry.hpp"
#include "navkit/tracking.hpp"

namespace navkit {

struct ToolConfig {
  std::string name;
  std::string marker;
  /// Absent means "uncalibrated".
  std::optional<CalibrationMethod> method;
  std::optional<PoseValues> tip_in_marker;
  /// Present when this tool carries a divot or insertion hole (calibrator, printed reference).
  std::optional<PoseValues> divot_in_marker;

  friend bool operator==(const ToolConfig&, const ToolConfig&) = default;
};

struct ModelConfig {
  std::string name;
  std::string landmarks;
  std::string trajectories;    // may be empty
  std::string surface_points;  // may be empty
  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

enum class RegistrationMethod { PointBased, Manual };

struct NoiseCondition {
  std::string name;
  double sigma_t = 0.0;  // mm
  double sigma_r = 0.0;  // degrees
  std::optional<double> sigma_px;
  friend bool operator==(const NoiseCondition&, const NoiseCondition&) = default;
};

struct SimulationConfig {
  std::uint64_t seed = 1;
  double frame_rate = 30.0;       // Hz
  double duration = 40.0;         // s, pivot recording
  double static_duration = 6.0;   // s, calibrator / marker-to-marker recordings
  int trials = 100;
  std::string metric = "pivot_tip_error";
  std::vector<NoiseCondition> conditions;
  std::string pivot_tool;         // tool name; empty = first tool with a tool-role marker
  double cone_half_angle = 30.0;  // degrees
  std::string registration_model; // model name; empty = built-in landmark set
  int registration_points = 10;
  int heldout_points = 10;
  std::optional<PoseValues> camera_pose;
  std::optional<PoseValues> image_to_world;

  friend bool operator==(const SimulationConfig&, const SimulationConfig&) = default;
};

/**
 * Navigation configuration. Stored as JSON with the top-level sections
 * "markers", "tools", "models", "registration", "camera" and "simulation";
 * unknown keys are rejected at every level. See README for the schema.
 */
struct NavConfig {
  std::vector<MarkerSpec> markers;
  std::vector<ToolConfig> tools;
  std::vector<ModelConfig> models;
  RegistrationMethod registration_method = RegistrationMethod::PointBased;
  std::optional<CameraIntrinsics> camera;
  std::optional<SimulationConfig> simulation;

  const MarkerSpec* find_marker(std::string_view id) const;
  const ToolConfig* find_tool(std::string_view name) const;
  const ModelConfig* find_model(std::string_view name) const;

  friend bool operator==(const NavConfig&, const NavConfig&) = default;
};

/// Errors: SchemaError (malformed JSON, missing field, bad type, unknown key; message names the field),
/// UniquenessError (duplicate marker id or tool name), ReferenceError (dangling reference).
NavConfig parse_config(std::string_view text);
/// Canonical JSON with every field spelled out; parse(serialize(c)) == c.
std::string serialize_config(const NavConfig& config);
NavConfig load_config(const std::filesystem::path& path);

ToolCalibration tool_calibration(const ToolConfig& tool);

}  // namespace navkit
