#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "navkit/config.hpp"
#include "navkit/files.hpp"
#include "navkit/frame_graph.hpp"
#include "navkit/records.hpp"
#include "navkit/session.hpp"
#include "navkit/text.hpp"
#include "test_util.hpp"

using namespace navkit;
using testutil::near;

namespace {

std::filesystem::path data_dir() {
  const char* env = std::getenv("NAVKIT_TEST_DATA");
  return env ? std::filesystem::path(env) : std::filesystem::path("tests/data");
}

std::string data(const std::string& name) { return read_text_file(data_dir() / name); }

double random_real(Rng& rng) {
  switch (static_cast<int>(rng.uniform() * 4.0)) {
    case 0: return rng.uniform(-1000.0, 1000.0);
    case 1: return std::ldexp(rng.uniform(-1.0, 1.0), static_cast<int>(rng.uniform(-60.0, 60.0)));
    case 2: return std::round(rng.uniform(-100.0, 100.0));
    default: return rng.normal() * 1e-3;
  }
}

std::array<double, 3> random_xyz(Rng& rng) { return {random_real(rng), random_real(rng), random_real(rng)}; }

PoseValues random_pose(Rng& rng) { return PoseValues::from_transform(testutil::random_transform(rng, 1000.0)); }

std::string random_id(Rng& rng) {
  static const std::string chars = "abcdefghijklmnopqrstuvwxyz0123456789_-.";
  std::string s;
  int n = 1 + static_cast<int>(rng.uniform() * 12.0);
  for (int i = 0; i < n; ++i) s += chars[static_cast<std::size_t>(rng.uniform() * chars.size())];
  return s;
}

Record random_record(Rng& rng, Micros t) {
  switch (static_cast<int>(rng.uniform() * 7.0)) {
    case 0: return CamRecord{t, random_pose(rng)};
    case 1: {
      std::array<double, 8> c{};
      for (double& v : c) v = random_real(rng);
      return ObsRecord{t, random_id(rng), c};
    }
    case 2: return ObsRecord{t, random_id(rng), random_pose(rng)};
    case 3: {
      auto m = static_cast<CalibrationMethod>(static_cast<int>(rng.uniform() * 4.0));
      return CalRecord{t, random_id(rng), m, random_pose(rng), std::abs(random_real(rng))};
    }
    case 4: return RegRecord{t, random_id(rng), random_pose(rng), std::abs(random_real(rng)), rng.next_u64() % 1000};
    case 5: return LmRecord{t, random_id(rng), rng.uniform() < 0.5 ? LandmarkFrame::Image : LandmarkFrame::Patient, random_xyz(rng)};
    default: return TrajRecord{t, random_id(rng), random_xyz(rng), random_xyz(rng)};
  }
}

}  // namespace

TEST_CASE("config: minimal round trip") {
  NavConfig c = parse_config(data("minimal.json"));
  CHECK(c.markers.size() == 1);
  CHECK(c.tools.empty());
  std::string once = serialize_config(c);
  CHECK(parse_config(once) == c);
  CHECK(serialize_config(parse_config(once)) == once);
}

TEST_CASE("config: pointer setup") {
  NavConfig c = parse_config(data("pointer_setup.json"));
  CHECK(c.markers.size() == 2);
  CHECK(c.tools.size() == 1);
  CHECK(c.find_marker("patient")->edge_length == 80.0);
  CHECK(c.find_marker("pointer_marker")->edge_length == 50.0);
  CHECK(c.find_marker("pointer_marker")->role == MarkerRole::Tool);
  CHECK(c.find_tool("pointer")->marker == "pointer_marker");
  CHECK_FALSE(c.find_tool("pointer")->method.has_value());
  CHECK(c.registration_method == RegistrationMethod::PointBased);
  // golden canonical form
  CHECK(serialize_config(c) == data("pointer_setup.canonical.json"));
}

TEST_CASE("config: full example round trip") {
  NavConfig c = parse_config(data("desk_phantom.json"));
  CHECK(c.markers.size() == 4);
  CHECK(c.tools.size() == 3);
  CHECK(c.simulation->conditions.size() == 3);
  CHECK(c.simulation->conditions[2].sigma_px == 0.5);
  CHECK(c.camera->cx == 960.0);
  std::string once = serialize_config(c);
  CHECK(parse_config(once) == c);
  CHECK(serialize_config(parse_config(once)) == once);
  ToolCalibration pointer = tool_calibration(*c.find_tool("pointer"));
  CHECK(pointer.method == CalibrationMethod::ByDesign);
  CHECK((pointer.tip_in_marker.translation() - Vector3(4, -2, -150)).norm() == 0.0);
  CHECK_NAVKIT_ERROR(tool_calibration(*c.find_tool("calibration_block")), ErrorCode::InvalidArgument);
}

TEST_CASE("config: errors name what is wrong") {
  auto message = [](const std::string& text) {
    try {
      parse_config(text);
    } catch (const Error& e) {
      return std::pair<ErrorCode, std::string>{e.code(), e.what()};
    }
    return std::pair<ErrorCode, std::string>{ErrorCode::IoError, "no error"};
  };
  auto [c1, m1] = message(data("dangling_tool.json"));
  CHECK(c1 == ErrorCode::ReferenceError);
  CHECK(m1.find("pointer_marker") != std::string::npos);
  auto [c2, m2] = message(data("duplicate_marker.json"));
  CHECK(c2 == ErrorCode::UniquenessError);
  CHECK(m2.find("'patient'") != std::string::npos);
  auto [c3, m3] = message(data("missing_edge.json"));
  CHECK(c3 == ErrorCode::SchemaError);
  CHECK(m3.find("markers[0].edge_length") != std::string::npos);
  auto [c4, m4] = message(data("unknown_key.json"));
  CHECK(c4 == ErrorCode::SchemaError);
  CHECK(m4.find("colour") != std::string::npos);
  auto [c5, m5] = message("{\"markers\": [");
  CHECK(c5 == ErrorCode::SchemaError);
  auto [c6, m6] = message(R"({"markers": [{"id": "a", "edge_length": -1, "role": "tool"}]})");
  CHECK(c6 == ErrorCode::SchemaError);
  auto [c7, m7] = message(R"({"markers": [{"id": "a", "edge_length": 5, "role": "wand"}]})");
  CHECK(c7 == ErrorCode::SchemaError);
  CHECK(m7.find("markers[0].role") != std::string::npos);
  auto [c8, m8] = message(R"({"markers": [{"id": "a", "edge_length": 5, "role": "tool"}], "simulation": {"pivot": {"tool": "x"}}})");
  CHECK(c8 == ErrorCode::ReferenceError);
  CHECK_NAVKIT_ERROR(load_config(data_dir() / "absent.json"), ErrorCode::IoError);
}

TEST_CASE("records: hand examples") {
  CHECK(format_record(CamRecord{1500000, PoseValues{}}) == "CAM 1.500000 0 0 0 0 0 0 1");
  Record r = parse_record("CAM 1.500000 0 0 0 0 0 0 1", 1);
  CHECK(std::get<CamRecord>(r) == CamRecord{1500000, PoseValues{}});
  CHECK(format_record(ObsRecord{0, "m1", std::array<double, 8>{1, 2, 3, 4, 5, 6, 7, 8.5}}) ==
        "OBS 0.000000 m1 1 2 3 4 5 6 7 8.5");
  CHECK(format_record(LmRecord{2000000, "F1", LandmarkFrame::Patient, {1, 2, 3}}) == "LM 2.000000 F1 patient 1 2 3");
  CHECK(format_record(CalRecord{0, "tool", CalibrationMethod::MarkerToMarker, PoseValues{}, 0.25}) ==
        "CAL 0.000000 tool marker_to_marker 0 0 0 0 0 0 1 0.25");
}

TEST_CASE("records: writer ordering") {
  std::ostringstream out;
  RecordWriter w(out);
  w.record(CamRecord{1000, PoseValues{}});
  w.record(CamRecord{1000, PoseValues{}});  // equal timestamps are fine, kept in order
  CHECK_NAVKIT_ERROR(w.record(CamRecord{999, PoseValues{}}), ErrorCode::OutOfOrder);
  CHECK(out.str() == "CAM 0.001000 0 0 0 0 0 0 1\nCAM 0.001000 0 0 0 0 0 0 1\n");
  CHECK_NAVKIT_ERROR(w.record(ObsRecord{2000, "has space", PoseValues{}}), ErrorCode::InvalidArgument);
}

TEST_CASE("records: 1000 randomized round trips") {
  Rng rng(71);
  std::ostringstream stream;
  RecordWriter writer(stream);
  std::vector<Record> written;
  Micros t = 0;
  for (int i = 0; i < 1000; ++i) {
    t += static_cast<Micros>(rng.uniform() * 50000.0);
    Record r = random_record(rng, t);
    std::string line = format_record(r);
    CHECK(parse_record(line, 1) == r);
    CHECK(format_record(parse_record(line, 1)) == line);
    writer.record(r);
    written.push_back(r);
  }
  CHECK(replay(stream.str()) == written);
}

TEST_CASE("replay: malformed streams") {
  CHECK(replay("").empty());
  CHECK(replay("# only a comment\n\n").empty());
  auto line_of = [](const std::string& text) {
    try {
      replay(text);
    } catch (const ParseError& e) {
      return e.line();
    }
    return std::size_t{0};
  };
  CHECK(line_of("CAM 0.000000 0 0 0 0 0 0 1\nCAM 1.000000 0 0 0 0 0 0 1") == 2);  // truncated final line
  CHECK(line_of("CAM 0.000000 0 0 0 0 0 0 1\nCAM 1.000000 0 0 0 0 0 0\n") == 2);   // missing value
  CHECK(line_of("# c\nXYZ 0.000000 1\n") == 2);
  CHECK(line_of("CAM 1.000000 0 0 0 0 0 0 1\nCAM 0.500000 0 0 0 0 0 0 1\n") == 2);  // regression
  CHECK(line_of("CAM 1.0000000 0 0 0 0 0 0 1\n") == 1);  // seven fractional digits
  CHECK(line_of("CAM 1.000000 0 0 0 0 0 0 2\n") == 1);   // not a unit quaternion
  CHECK(line_of("LM 1.000000 a skull 1 2 3\n") == 1);
  CHECK(line_of("OBS 1.000000 m 1 2 3 4 5 6 7 8 9\n") == 1);
  CHECK(line_of("CAL 1.000000 t guess 0 0 0 0 0 0 1 0.1\n") == 1);
  CHECK(line_of("REG 1.000000 r 0 0 0 0 0 0 1 0.1 -3\n") == 1);
  CHECK(line_of("CAM 1.000000 0 0 0 0 0 0 1 \n") == 0);  // trailing space is whitespace, not a token
}

TEST_CASE("files: landmark, trajectory, polyline and point formats") {
  LandmarkSet lm = parse_landmark_file(data("phantom.lm"));
  CHECK(lm.landmarks.size() == 20);
  CHECK(parse_landmark_file(format_landmark_file(lm)).landmarks == lm.landmarks);
  auto traj = parse_trajectory_file(data("phantom.traj"));
  CHECK(traj.size() == 5);
  auto again = parse_trajectory_file(format_trajectory_file(traj));
  CHECK((again[4].exit - traj[4].exit).norm() == 0.0);
  CHECK(parse_point_file(data("phantom_surface.xyz")).size() == 200);

  std::vector<Polyline> pl{{"cut1", {{0, 0, 0}, {10, 0, 0}, {10, 5, 0}}}, {"cut2", {{1, 1, 1}, {2, 2, 2}}}};
  auto parsed = parse_polyline_file(format_polyline_file(pl));
  REQUIRE(parsed.size() == 2);
  CHECK(parsed[0].label == "cut1");
  CHECK(parsed[0].points.size() == 3);
  CHECK_THROWS_AS(parse_landmark_file("LM a image 1 2\n"), ParseError);
  CHECK_THROWS_AS(parse_polyline_file("1 2 3\n"), ParseError);
  CHECK_NAVKIT_ERROR(parse_landmark_file("LM a image 1 2 3\nLM a image 4 5 6\n"), ErrorCode::UniquenessError);
}

TEST_CASE("frame graph") {
  Rng rng(72);
  RigidTransform cam = testutil::random_transform(rng);
  RigidTransform marker = testutil::random_transform(rng);
  ToolCalibration calib;
  calib.tip_in_marker = testutil::random_transform(rng, 150.0);
  RigidTransform image = testutil::random_transform(rng);

  FrameGraph g;
  g.add_edge("world", "camera", cam, EdgeSource::Tracked);
  g.add_edge("camera", "tool", marker, EdgeSource::Tracked);
  g.add_edge("tool", "tooltip", calib.tip_in_marker, EdgeSource::Calibrated);
  g.add_edge("world", "image", image, EdgeSource::Registered);
  g.add_frame("lonely");

  CHECK(near(resolve_frame(g, "world", "world"), RigidTransform::identity(), 0.0));
  RigidTransform tool_world = marker_world_pose(marker, {cam, 0.0});
  CHECK(near(resolve_frame(g, "world", "tooltip"), tooltip_world(tool_world, calib)));
  CHECK(near(resolve_frame(g, "image", "tooltip"), compose(invert(image), tooltip_world(tool_world, calib))));

  const std::vector<std::string> frames{"world", "camera", "tool", "tooltip", "image"};
  for (const auto& a : frames) {
    for (const auto& b : frames) CHECK(near(resolve_frame(g, a, b), invert(resolve_frame(g, b, a))));
  }

  CHECK_NAVKIT_ERROR(g.add_edge("image", "tooltip", RigidTransform::identity(), EdgeSource::Fixed), ErrorCode::CycleError);
  CHECK_NAVKIT_ERROR(g.add_edge("tool", "world", RigidTransform::identity(), EdgeSource::Fixed), ErrorCode::CycleError);
  CHECK_NAVKIT_ERROR(g.add_edge("tool", "tool", RigidTransform::identity(), EdgeSource::Fixed), ErrorCode::CycleError);
  CHECK(g.edges().size() == 4);
  CHECK_NAVKIT_ERROR(resolve_frame(g, "world", "lonely"), ErrorCode::NoPath);
  CHECK_NAVKIT_ERROR(resolve_frame(g, "world", "nowhere"), ErrorCode::UnknownFrame);

  RigidTransform moved = testutil::random_transform(rng);
  g.update_edge("tool", "camera", moved);
  CHECK(near(resolve_frame(g, "camera", "tool"), invert(moved)));
}

TEST_CASE("pipeline: zero-noise recording re-derives the truth") {
  Scenario s = default_scenario();
  NoiseModel clean{"clean", 0.0, 0.0, std::nullopt, 1};
  auto records = simulate_recording(s, clean);
  std::size_t cams = 0;
  const CalRecord* cal = nullptr;
  const RegRecord* reg = nullptr;
  for (const auto& r : records) {
    if (std::holds_alternative<CamRecord>(r)) ++cams;
    if (const auto* c = std::get_if<CalRecord>(&r)) cal = c;
    if (const auto* g = std::get_if<RegRecord>(&r)) reg = g;
  }
  CHECK(cams == 1200);
  REQUIRE(cal != nullptr);
  REQUIRE(reg != nullptr);
  CHECK((cal->pose.to_transform().translation() - s.tool_truth.tip_in_marker.translation()).norm() < 1e-9);
  CHECK(cal->method == CalibrationMethod::Pivot);
  CHECK(testutil::translation_distance(reg->pose.to_transform(), s.image_to_world) < 1e-9);
  CHECK(reg->point_count == 10);

  // text round trip then replay reproduces the derived records
  std::ostringstream text;
  RecordWriter w(text);
  for (const auto& r : records) w.record(r);
  auto parsed = replay(text.str());
  CHECK(parsed == records);
  SessionPipeline p(s.markers, default_intrinsics());
  for (const auto& r : parsed) p.feed(r);
  auto derived = p.finish("registration");
  REQUIRE(derived.size() == 2);
  CHECK(std::get<CalRecord>(derived[0]) == *cal);
  CHECK(std::get<RegRecord>(derived[1]) == *reg);
  CHECK(p.registry().state("tool").mode == TrackingMode::Tracked);
  CHECK(p.registry().state("patient").mode == TrackingMode::NeverSeen);
}

TEST_CASE("pipeline: pixel-mode recording") {
  Scenario s = default_scenario();
  s.duration = 2.0;
  NoiseModel clean{"px", 0.0, 0.0, 0.0, 1};
  auto records = simulate_recording(s, clean);
  const CalRecord* cal = nullptr;
  for (const auto& r : records) {
    if (const auto* o = std::get_if<ObsRecord>(&r)) CHECK(std::holds_alternative<std::array<double, 8>>(o->payload));
    if (const auto* c = std::get_if<CalRecord>(&r)) cal = c;
  }
  REQUIRE(cal != nullptr);
  CHECK((cal->pose.to_transform().translation() - s.tool_truth.tip_in_marker.translation()).norm() < 1e-6);
}

TEST_CASE("pipeline: input errors") {
  Scenario s = default_scenario();
  SessionPipeline p(s.markers);
  CHECK_NAVKIT_ERROR(p.feed(ObsRecord{0, "tool", PoseValues{}}), ErrorCode::InvalidArgument);
  p.feed(CamRecord{10, PoseValues{}});
  CHECK_NAVKIT_ERROR(p.feed(CamRecord{5, PoseValues{}}), ErrorCode::OutOfOrder);
  p.feed(ObsRecord{10, "ghost", PoseValues{}});
  CHECK_NAVKIT_ERROR(p.flush(), ErrorCode::UnregisteredMarker);
}

TEST_CASE("paired poses need simultaneous observations") {
  Scenario s = default_scenario();
  SessionPipeline p(s.markers);
  PoseValues below = PoseValues::from_transform(RigidTransform::from_translation({0, 0, 500}));
  p.feed(CamRecord{0, PoseValues{}});
  p.feed(ObsRecord{0, "tool", below});
  p.feed(ObsRecord{0, "calibrator", below});
  p.feed(CamRecord{1, PoseValues{}});
  p.feed(ObsRecord{1, "tool", below});
  p.feed(CamRecord{2, PoseValues{}});
  p.feed(ObsRecord{2, "calibrator", below});
  p.feed(ObsRecord{2, "tool", below});
  p.flush();
  CHECK(paired_poses(p, "tool", "calibrator").size() == 2);
  CHECK(p.registry().state("calibrator").mode == TrackingMode::Tracked);
}
