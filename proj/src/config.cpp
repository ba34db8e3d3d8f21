#include "navkit/config.hpp"

#include <set>

#include <json.hpp>

#include "navkit/error.hpp"
#include "navkit/files.hpp"

namespace navkit {

using json = nlohmann::ordered_json;

namespace {

[[noreturn]] void schema_error(const std::string& path, const std::string& msg) {
  throw Error(ErrorCode::SchemaError, path + ": " + msg);
}

// Reads fields of one JSON object and rejects keys nobody asked for.
class ObjectReader {
public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) schema_error(path_, "expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }
  std::string child(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json& required(const std::string& key) {
    used_.insert(key);
    if (!j_.contains(key)) schema_error(child(key), "missing required field");
    return j_.at(key);
  }

  const json* optional(const std::string& key) {
    used_.insert(key);
    if (!j_.contains(key) || j_.at(key).is_null()) return nullptr;
    return &j_.at(key);
  }

  std::string string(const std::string& key) { return as_string(required(key), child(key)); }
  double number(const std::string& key) { return as_number(required(key), child(key)); }

  std::string string_or(const std::string& key, std::string fallback) {
    const json* v = optional(key);
    return v ? as_string(*v, child(key)) : fallback;
  }
  double number_or(const std::string& key, double fallback) {
    const json* v = optional(key);
    return v ? as_number(*v, child(key)) : fallback;
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!used_.count(key)) schema_error(child(key), "unknown key");
    }
  }

  static std::string as_string(const json& v, const std::string& path) {
    if (!v.is_string()) schema_error(path, "expected a string");
    auto s = v.get<std::string>();
    if (s.empty()) schema_error(path, "must not be empty");
    return s;
  }

  static double as_number(const json& v, const std::string& path) {
    if (!v.is_number()) schema_error(path, "expected a number");
    double d = v.get<double>();
    if (!std::isfinite(d)) schema_error(path, "must be finite");
    return d;
  }

private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

const json& array_at(ObjectReader& r, const std::string& key) {
  const json& a = r.required(key);
  if (!a.is_array()) schema_error(r.child(key), "expected an array");
  return a;
}

PoseValues pose_from_json(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 7) schema_error(path, "expected 7 numbers [tx, ty, tz, qx, qy, qz, qw]");
  PoseValues p;
  for (std::size_t i = 0; i < 7; ++i) p.values[i] = ObjectReader::as_number(v[i], path + "[" + std::to_string(i) + "]");
  try {
    (void)p.to_transform();
  } catch (const Error& e) {
    schema_error(path, e.what());
  }
  return p;
}

json pose_to_json(const PoseValues& p) {
  json a = json::array();
  for (double v : p.values) a.push_back(v);
  return a;
}

std::string indexed(const std::string& key, std::size_t i) { return key + "[" + std::to_string(i) + "]"; }

MarkerSpec parse_marker(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  MarkerSpec m;
  m.id = r.string("id");
  m.family = r.string_or("family", "generic");
  m.edge_length = r.number("edge_length");
  if (!(m.edge_length > 0.0)) schema_error(r.child("edge_length"), "must be positive");
  auto role = marker_role_from_string(r.string("role"));
  if (!role) schema_error(r.child("role"), "must be one of patient, tool, reference, calibrator");
  m.role = *role;
  r.finish();
  return m;
}

ToolConfig parse_tool(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  ToolConfig t;
  t.name = r.string("name");
  t.marker = r.string("marker");
  if (const json* cal = r.optional("calibration")) {
    const std::string cpath = r.child("calibration");
    if (cal->is_string()) {
      if (cal->get<std::string>() != "uncalibrated") schema_error(cpath, "string form must be \"uncalibrated\"");
    } else {
      ObjectReader c(*cal, cpath);
      auto method = calibration_method_from_string(c.string("method"));
      if (!method) schema_error(c.child("method"), "must be one of pivot, calibrator, marker_to_marker, by_design");
      t.method = method;
      t.tip_in_marker = pose_from_json(c.required("tip_in_marker"), c.child("tip_in_marker"));
      c.finish();
    }
  }
  if (const json* d = r.optional("divot")) t.divot_in_marker = pose_from_json(*d, r.child("divot"));
  r.finish();
  return t;
}

ModelConfig parse_model(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  ModelConfig m;
  m.name = r.string("name");
  m.landmarks = r.string("landmarks");
  m.trajectories = r.string_or("trajectories", "");
  m.surface_points = r.string_or("surface_points", "");
  r.finish();
  return m;
}

CameraIntrinsics parse_camera(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  CameraIntrinsics k;
  k.fx = r.number("fx");
  k.fy = r.number("fy");
  k.cx = r.number("cx");
  k.cy = r.number("cy");
  k.image_width = static_cast<int>(r.number("width"));
  k.image_height = static_cast<int>(r.number("height"));
  r.finish();
  try {
    k.validate();
  } catch (const Error& e) {
    schema_error(path, e.what());
  }
  return k;
}

int positive_int(ObjectReader& r, const std::string& key, int fallback) {
  double v = r.number_or(key, fallback);
  if (!(v >= 1.0) || v != std::floor(v) || v > 1e9) schema_error(r.child(key), "must be a positive integer");
  return static_cast<int>(v);
}

SimulationConfig parse_simulation(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  SimulationConfig s;
  if (const json* seed = r.optional("seed")) {
    if (!seed->is_number_unsigned() && !(seed->is_number_integer() && seed->get<std::int64_t>() >= 0)) {
      schema_error(r.child("seed"), "expected a non-negative integer");
    }
    s.seed = seed->get<std::uint64_t>();
  }
  s.frame_rate = r.number_or("frame_rate", s.frame_rate);
  s.duration = r.number_or("duration", s.duration);
  s.static_duration = r.number_or("static_duration", s.static_duration);
  if (!(s.frame_rate > 0.0)) schema_error(r.child("frame_rate"), "must be positive");
  if (!(s.duration > 0.0)) schema_error(r.child("duration"), "must be positive");
  if (!(s.static_duration > 0.0)) schema_error(r.child("static_duration"), "must be positive");
  s.trials = positive_int(r, "trials", s.trials);
  s.metric = r.string_or("metric", s.metric);
  if (const json* conds = r.optional("conditions")) {
    if (!conds->is_array()) schema_error(r.child("conditions"), "expected an array");
    for (std::size_t i = 0; i < conds->size(); ++i) {
      ObjectReader c((*conds)[i], r.child(indexed("conditions", i)));
      NoiseCondition n;
      n.name = c.string("name");
      n.sigma_t = c.number_or("sigma_t", 0.0);
      n.sigma_r = c.number_or("sigma_r", 0.0);
      if (const json* px = c.optional("sigma_px")) n.sigma_px = ObjectReader::as_number(*px, c.child("sigma_px"));
      if (n.sigma_t < 0.0 || n.sigma_r < 0.0 || (n.sigma_px && *n.sigma_px < 0.0)) {
        schema_error(c.child("sigma_t"), "noise sigmas must be non-negative");
      }
      c.finish();
      s.conditions.push_back(std::move(n));
    }
  }
  if (const json* pivot = r.optional("pivot")) {
    ObjectReader p(*pivot, r.child("pivot"));
    s.pivot_tool = p.string_or("tool", "");
    s.cone_half_angle = p.number_or("cone_half_angle", s.cone_half_angle);
    if (!(s.cone_half_angle > 0.0 && s.cone_half_angle < 90.0)) {
      schema_error(p.child("cone_half_angle"), "must lie in (0, 90) degrees");
    }
    p.finish();
  }
  if (const json* reg = r.optional("registration")) {
    ObjectReader p(*reg, r.child("registration"));
    s.registration_model = p.string_or("model", "");
    s.registration_points = positive_int(p, "points", s.registration_points);
    s.heldout_points = positive_int(p, "heldout", s.heldout_points);
    if (s.registration_points < 3) schema_error(p.child("points"), "must be at least 3");
    p.finish();
  }
  if (const json* cam = r.optional("camera_pose")) s.camera_pose = pose_from_json(*cam, r.child("camera_pose"));
  if (const json* reg = r.optional("image_to_world")) {
    s.image_to_world = pose_from_json(*reg, r.child("image_to_world"));
  }
  r.finish();
  return s;
}

}  // namespace

const MarkerSpec* NavConfig::find_marker(std::string_view id) const {
  for (const auto& m : markers) {
    if (m.id == id) return &m;
  }
  return nullptr;
}

const ToolConfig* NavConfig::find_tool(std::string_view name) const {
  for (const auto& t : tools) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

const ModelConfig* NavConfig::find_model(std::string_view name) const {
  for (const auto& m : models) {
    if (m.name == name) return &m;
  }
  return nullptr;
}

NavConfig parse_config(std::string_view text) {
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::SchemaError, std::string("malformed JSON: ") + e.what());
  }
  ObjectReader r(root, "");
  NavConfig cfg;

  const json& markers = array_at(r, "markers");
  for (std::size_t i = 0; i < markers.size(); ++i) cfg.markers.push_back(parse_marker(markers[i], indexed("markers", i)));
  if (const json* tools = r.optional("tools")) {
    if (!tools->is_array()) schema_error("tools", "expected an array");
    for (std::size_t i = 0; i < tools->size(); ++i) cfg.tools.push_back(parse_tool((*tools)[i], indexed("tools", i)));
  }
  if (const json* models = r.optional("models")) {
    if (!models->is_array()) schema_error("models", "expected an array");
    for (std::size_t i = 0; i < models->size(); ++i) cfg.models.push_back(parse_model((*models)[i], indexed("models", i)));
  }
  if (const json* reg = r.optional("registration")) {
    ObjectReader rr(*reg, "registration");
    std::string method = rr.string("method");
    if (method == "point_based") {
      cfg.registration_method = RegistrationMethod::PointBased;
    } else if (method == "manual") {
      cfg.registration_method = RegistrationMethod::Manual;
    } else {
      schema_error("registration.method", "must be point_based or manual");
    }
    rr.finish();
  }
  if (const json* cam = r.optional("camera")) cfg.camera = parse_camera(*cam, "camera");
  if (const json* sim = r.optional("simulation")) cfg.simulation = parse_simulation(*sim, "simulation");
  r.finish();

  std::set<std::string> ids;
  for (const auto& m : cfg.markers) {
    if (!ids.insert(m.id).second) throw Error(ErrorCode::UniquenessError, "duplicate marker id '" + m.id + "'");
  }
  std::set<std::string> names;
  for (const auto& t : cfg.tools) {
    if (!names.insert(t.name).second) throw Error(ErrorCode::UniquenessError, "duplicate tool name '" + t.name + "'");
    if (!cfg.find_marker(t.marker)) {
      throw Error(ErrorCode::ReferenceError, "tool '" + t.name + "' references undeclared marker '" + t.marker + "'");
    }
  }
  std::set<std::string> model_names;
  for (const auto& m : cfg.models) {
    if (!model_names.insert(m.name).second) {
      throw Error(ErrorCode::UniquenessError, "duplicate model name '" + m.name + "'");
    }
  }
  if (cfg.simulation) {
    const auto& s = *cfg.simulation;
    if (!s.pivot_tool.empty() && !cfg.find_tool(s.pivot_tool)) {
      throw Error(ErrorCode::ReferenceError, "simulation.pivot.tool references undeclared tool '" + s.pivot_tool + "'");
    }
    if (!s.registration_model.empty() && !cfg.find_model(s.registration_model)) {
      throw Error(ErrorCode::ReferenceError,
                  "simulation.registration.model references undeclared model '" + s.registration_model + "'");
    }
  }
  return cfg;
}

std::string serialize_config(const NavConfig& cfg) {
  json root = json::object();
  json markers = json::array();
  for (const auto& m : cfg.markers) {
    markers.push_back({{"id", m.id},
                       {"family", m.family},
                       {"edge_length", m.edge_length},
                       {"role", std::string(to_string(m.role))}});
  }
  root["markers"] = markers;

  json tools = json::array();
  for (const auto& t : cfg.tools) {
    json jt = {{"name", t.name}, {"marker", t.marker}};
    if (t.method && t.tip_in_marker) {
      jt["calibration"] = {{"method", std::string(to_string(*t.method))},
                           {"tip_in_marker", pose_to_json(*t.tip_in_marker)}};
    } else {
      jt["calibration"] = "uncalibrated";
    }
    if (t.divot_in_marker) jt["divot"] = pose_to_json(*t.divot_in_marker);
    tools.push_back(jt);
  }
  root["tools"] = tools;

  json models = json::array();
  for (const auto& m : cfg.models) {
    json jm = {{"name", m.name}, {"landmarks", m.landmarks}};
    if (!m.trajectories.empty()) jm["trajectories"] = m.trajectories;
    if (!m.surface_points.empty()) jm["surface_points"] = m.surface_points;
    models.push_back(jm);
  }
  root["models"] = models;
  root["registration"] = {
      {"method", cfg.registration_method == RegistrationMethod::PointBased ? "point_based" : "manual"}};

  if (cfg.camera) {
    const auto& k = *cfg.camera;
    root["camera"] = {{"fx", k.fx}, {"fy", k.fy}, {"cx", k.cx}, {"cy", k.cy},
                      {"width", k.image_width}, {"height", k.image_height}};
  }
  if (cfg.simulation) {
    const auto& s = *cfg.simulation;
    json js = {{"seed", s.seed},
               {"frame_rate", s.frame_rate},
               {"duration", s.duration},
               {"static_duration", s.static_duration},
               {"trials", s.trials},
               {"metric", s.metric}};
    json conds = json::array();
    for (const auto& c : s.conditions) {
      json jc = {{"name", c.name}, {"sigma_t", c.sigma_t}, {"sigma_r", c.sigma_r}};
      if (c.sigma_px) jc["sigma_px"] = *c.sigma_px;
      conds.push_back(jc);
    }
    js["conditions"] = conds;
    json pivot = {{"cone_half_angle", s.cone_half_angle}};
    if (!s.pivot_tool.empty()) pivot["tool"] = s.pivot_tool;
    js["pivot"] = pivot;
    json reg = {{"points", s.registration_points}, {"heldout", s.heldout_points}};
    if (!s.registration_model.empty()) reg["model"] = s.registration_model;
    js["registration"] = reg;
    if (s.camera_pose) js["camera_pose"] = pose_to_json(*s.camera_pose);
    if (s.image_to_world) js["image_to_world"] = pose_to_json(*s.image_to_world);
    root["simulation"] = js;
  }
  return root.dump(2) + "\n";
}

NavConfig load_config(const std::filesystem::path& path) { return parse_config(read_text_file(path)); }

ToolCalibration tool_calibration(const ToolConfig& tool) {
  if (!tool.method || !tool.tip_in_marker) {
    throw Error(ErrorCode::InvalidArgument, "tool '" + tool.name + "' is uncalibrated");
  }
  ToolCalibration c;
  c.tool_marker_id = tool.marker;
  c.tip_in_marker = tool.tip_in_marker->to_transform();
  c.method = *tool.method;
  c.position_only = *tool.method == CalibrationMethod::Pivot;
  return c;
}

}  // namespace navkit
