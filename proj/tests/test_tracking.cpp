#include <cmath>
#include <vector>

#include "navkit/tracking.hpp"
#include "test_util.hpp"

using namespace navkit;
using testutil::near;

namespace {

const RigidTransform kFacing = RigidTransform::from_axis_angle(Vector3::UnitX(), 180.0);

std::array<Pixel, 4> project_corners(const RigidTransform& pose, double edge, const CameraIntrinsics& k) {
  auto model = marker_corners(edge);
  std::array<Pixel, 4> px;
  for (std::size_t i = 0; i < 4; ++i) px[i] = k.project(transform_point(pose, model[i]));
  return px;
}

// Marker somewhere in the field of view, tilted up to 50 degrees away from facing the camera.
RigidTransform random_visible_pose(Rng& rng, const CameraIntrinsics& k) {
  double z = rng.uniform(300.0, 1200.0);
  double u = rng.uniform(200.0, k.image_width - 200.0);
  double v = rng.uniform(200.0, k.image_height - 200.0);
  Vector3 t((u - k.cx) * z / k.fx, (v - k.cy) * z / k.fy, z);
  Vector3 axis = rng.unit_vector();
  RigidTransform tilt = RigidTransform::from_axis_angle(Vector3(axis.x(), axis.y(), 0.0), rng.uniform(-50.0, 50.0));
  RigidTransform spin = RigidTransform::from_axis_angle(Vector3::UnitZ(), rng.uniform(-180.0, 180.0));
  return compose(compose(RigidTransform::from_translation(t), compose(tilt, kFacing)), spin);
}

}  // namespace

TEST_CASE("marker corners follow the documented winding") {
  auto c = marker_corners(80.0);
  CHECK((c[0] - Point3(-40, 40, 0)).norm() == 0.0);
  CHECK((c[1] - Point3(-40, -40, 0)).norm() == 0.0);
  CHECK((c[2] - Point3(40, -40, 0)).norm() == 0.0);
  CHECK((c[3] - Point3(40, 40, 0)).norm() == 0.0);
}

TEST_CASE("intrinsics validation") {
  CameraIntrinsics k;
  CHECK_NOTHROW(k.validate());
  k.fx = 0.0;
  CHECK_NAVKIT_ERROR(k.validate(), ErrorCode::InvalidArgument);
  k = CameraIntrinsics{};
  k.cx = 2000.0;
  CHECK_NAVKIT_ERROR(k.validate(), ErrorCode::InvalidArgument);
}

TEST_CASE("pnp hand example") {
  CameraIntrinsics k{1000, 1000, 0, 0, 1920, 1080};
  RigidTransform truth(kFacing.rotation(), Vector3(0, 0, 500));
  auto px = project_corners(truth, 80.0, k);
  for (const auto& p : px) {
    CHECK(std::abs(std::abs(p.x()) - 80.0) < 1e-12);
    CHECK(std::abs(std::abs(p.y()) - 80.0) < 1e-12);
  }
  // top-left corner (-40, 40) lands at (-80, -80): image y points down
  CHECK((px[0] - Pixel(-80, -80)).norm() < 1e-12);

  PnpResult r = solve_marker_pose(px, 80.0, k);
  CHECK(testutil::translation_distance(r.pose, truth) < 1e-6);
  CHECK(rotation_angle_between(r.pose, truth) < 1e-6);
  CHECK(r.reprojection_rmse < 1e-9);
}

TEST_CASE("pnp round trip on random poses") {
  Rng rng(11);
  CameraIntrinsics k{1000, 1000, 960, 540, 1920, 1080};
  double worst_t = 0.0, worst_r = 0.0;
  for (int i = 0; i < 100; ++i) {
    RigidTransform truth = random_visible_pose(rng, k);
    double edge = rng.uniform(40.0, 120.0);
    PnpResult r = solve_marker_pose(project_corners(truth, edge, k), edge, k);
    worst_t = std::max(worst_t, testutil::translation_distance(r.pose, truth));
    worst_r = std::max(worst_r, rotation_angle_between(r.pose, truth));
    CHECK(r.pose.translation().z() > 0.0);
  }
  CHECK(worst_t < 1e-6);
  CHECK(worst_r < 1e-6);
}

TEST_CASE("pnp with more than four points") {
  Rng rng(12);
  CameraIntrinsics k{900, 950, 640, 360, 1280, 720};
  RigidTransform truth = random_visible_pose(rng, k);
  std::vector<PlanarCorrespondence> pts;
  for (int i = 0; i < 12; ++i) {
    Point3 m(rng.uniform(-60, 60), rng.uniform(-60, 60), 0.0);
    pts.push_back({k.project(transform_point(truth, m)), m});
  }
  PnpResult r = solve_planar_pnp(pts, k);
  CHECK(testutil::translation_distance(r.pose, truth) < 1e-6);
  CHECK(rotation_angle_between(r.pose, truth) < 1e-6);
}

TEST_CASE("pnp pixel noise grows translation error") {
  CameraIntrinsics k{1000, 1000, 960, 540, 1920, 1080};
  std::vector<double> means;
  for (double sigma : {0.1, 0.5, 1.0}) {
    Rng rng(13);  // paired poses and noise directions across sigmas
    double sum = 0.0;
    for (int i = 0; i < 200; ++i) {
      RigidTransform truth = random_visible_pose(rng, k);
      auto px = project_corners(truth, 80.0, k);
      for (auto& p : px) p += sigma * Pixel(rng.normal(), rng.normal());
      sum += testutil::translation_distance(solve_marker_pose(px, 80.0, k).pose, truth);
    }
    means.push_back(sum / 200.0);
  }
  CHECK(means[0] < means[1]);
  CHECK(means[1] < means[2]);
}

TEST_CASE("pnp degenerate inputs") {
  CameraIntrinsics k{1000, 1000, 960, 540, 1920, 1080};
  std::vector<PlanarCorrespondence> three = {
      {{900, 500}, {-40, 40, 0}}, {{900, 580}, {-40, -40, 0}}, {{980, 580}, {40, -40, 0}}};
  CHECK_NAVKIT_ERROR(solve_planar_pnp(three, k), ErrorCode::InsufficientData);

  std::vector<PlanarCorrespondence> collinear = {
      {{900, 500}, {-40, 0, 0}}, {{920, 500}, {-10, 0, 0}}, {{940, 500}, {20, 0, 0}}, {{1000, 560}, {40, 40, 0}}};
  CHECK_NAVKIT_ERROR(solve_planar_pnp(collinear, k), ErrorCode::DegenerateConfiguration);

  std::vector<PlanarCorrespondence> off_plane = {
      {{900, 500}, {-40, 40, 0}}, {{900, 580}, {-40, -40, 0}}, {{980, 580}, {40, -40, 5}}, {{980, 500}, {40, 40, 0}}};
  CHECK_NAVKIT_ERROR(solve_planar_pnp(off_plane, k), ErrorCode::DegenerateConfiguration);
}

TEST_CASE("marker_world_pose") {
  Rng rng(14);
  RigidTransform obs = testutil::random_transform(rng);
  CHECK(near(marker_world_pose(obs, {RigidTransform::identity(), 0.0}), obs));
  RigidTransform w = marker_world_pose(RigidTransform::from_translation({0, 0, 500}),
                                       {RigidTransform::from_translation({0, 0, 1000}), 0.0});
  CHECK((w.translation() - Vector3(0, 0, 1500)).norm() == 0.0);
  CHECK(near(marker_world_pose(obs, {invert(obs), 0.0}), RigidTransform::identity()));
  RigidTransform cam = testutil::random_transform(rng);
  RigidTransform chained = marker_world_pose(obs, {cam, 0.0});
  RigidTransform direct = compose(cam, obs);
  CHECK(chained.rotation() == direct.rotation());
  CHECK(chained.translation() == direct.translation());
}

namespace {

enum class Event { Observed, Absent };

MarkerObservation pose_obs(const std::string& id, const RigidTransform& pose, double t) {
  MarkerObservation o;
  o.marker_id = id;
  o.pose_in_camera = pose;
  o.timestamp = t;
  return o;
}

TrackingRegistry reach(TrackingMode mode, const CameraSample& cam0, const RigidTransform& obs0) {
  TrackingRegistry reg({{"m", "", 50.0, MarkerRole::Tool}, {"other", "", 50.0, MarkerRole::Patient}});
  if (mode == TrackingMode::NeverSeen) return step_tracking(reg, {}, cam0);
  std::vector<MarkerObservation> f{pose_obs("m", obs0, cam0.timestamp)};
  reg = step_tracking(reg, f, cam0);
  if (mode == TrackingMode::Tracked) return reg;
  CameraSample later{cam0.pose_world, cam0.timestamp + 0.5};
  return step_tracking(reg, {}, later);
}

}  // namespace

TEST_CASE("tracking state machine: exhaustive mode x event") {
  Rng rng(15);
  const CameraSample cam0{testutil::random_transform(rng), 1.0};
  const RigidTransform obs0 = testutil::random_transform(rng);
  const RigidTransform obs1 = testutil::random_transform(rng);

  for (TrackingMode from : {TrackingMode::NeverSeen, TrackingMode::Tracked, TrackingMode::ExtendedTracked}) {
    TrackingRegistry reg = reach(from, cam0, obs0);
    REQUIRE(reg.state("m").mode == from);
    const TrackedMarkerState before = reg.state("m");
    const double t = *reg.last_frame_time() + 1.0;
    const CameraSample cam{testutil::random_transform(rng), t};

    for (Event ev : {Event::Observed, Event::Absent}) {
      CAPTURE(to_string(from));
      CAPTURE(static_cast<int>(ev));
      std::vector<MarkerObservation> frame;
      if (ev == Event::Observed) frame.push_back(pose_obs("m", obs1, t));
      TrackingRegistry next = step_tracking(reg, frame, cam);
      const TrackedMarkerState& s = next.state("m");
      if (ev == Event::Observed) {
        CHECK(s.mode == TrackingMode::Tracked);
        CHECK(near(*s.world_pose, compose(cam.pose_world, obs1), 0.0));
        CHECK(*s.last_seen == t);
      } else if (from == TrackingMode::NeverSeen) {
        CHECK(s.mode == TrackingMode::NeverSeen);
        CHECK_FALSE(s.world_pose.has_value());
        CHECK_FALSE(s.last_seen.has_value());
      } else {
        CHECK(s.mode == TrackingMode::ExtendedTracked);
        CHECK(near(*s.world_pose, *before.world_pose, 0.0));
        CHECK(*s.last_seen == *before.last_seen);
      }
      CHECK(next.state("other").mode == TrackingMode::NeverSeen);
      // the input registry is a value and stays untouched
      CHECK(reg.state("m").mode == from);
    }

    // error events leave no state behind
    std::vector<MarkerObservation> unknown{pose_obs("ghost", obs1, t)};
    CHECK_NAVKIT_ERROR(step_tracking(reg, unknown, cam), ErrorCode::UnregisteredMarker);
    CameraSample past{cam.pose_world, *reg.last_frame_time() - 0.25};
    CHECK_NAVKIT_ERROR(step_tracking(reg, {}, past), ErrorCode::OutOfOrder);
    std::vector<MarkerObservation> stale{pose_obs("m", obs1, t - 10.0)};
    CHECK_NAVKIT_ERROR(step_tracking(reg, stale, cam), ErrorCode::OutOfOrder);
    std::vector<MarkerObservation> twice{pose_obs("m", obs1, t), pose_obs("m", obs1, t)};
    CHECK_NAVKIT_ERROR(step_tracking(reg, twice, cam), ErrorCode::InvalidArgument);
    CHECK(reg.state("m").mode == from);
  }
}

TEST_CASE("tracking worked examples") {
  TrackingRegistry reg({{"m", "", 50.0, MarkerRole::Patient}});
  CHECK(reg.state("m").mode == TrackingMode::NeverSeen);
  RigidTransform cam = RigidTransform::from_translation({0, 0, 1000});
  RigidTransform obs = RigidTransform::from_translation({0, 0, 500});
  std::vector<MarkerObservation> f1{pose_obs("m", obs, 1.0)};
  reg = step_tracking(reg, f1, {cam, 1.0});
  CHECK(reg.state("m").mode == TrackingMode::Tracked);
  CHECK((reg.state("m").world_pose->translation() - Vector3(0, 0, 1500)).norm() == 0.0);
  reg = step_tracking(reg, {}, {RigidTransform::from_translation({50, 0, 0}), 2.0});
  CHECK(reg.state("m").mode == TrackingMode::ExtendedTracked);
  CHECK((reg.state("m").world_pose->translation() - Vector3(0, 0, 1500)).norm() == 0.0);
  CHECK(*reg.state("m").last_seen == 1.0);
  // equal timestamps are accepted
  CHECK_NOTHROW(step_tracking(reg, {}, {cam, 2.0}));
  CHECK_NAVKIT_ERROR(reg.state("nope"), ErrorCode::UnregisteredMarker);
}

TEST_CASE("tracking solves corners with intrinsics") {
  CameraIntrinsics k{1000, 1000, 960, 540, 1920, 1080};
  RigidTransform truth(kFacing.rotation(), Vector3(20, -10, 600));
  TrackingRegistry reg({{"m", "", 80.0, MarkerRole::Patient}});
  MarkerObservation o;
  o.marker_id = "m";
  o.corners = project_corners(truth, 80.0, k);
  std::vector<MarkerObservation> f{o};
  CameraSample cam{RigidTransform::from_translation({1, 2, 3}), 0.0};
  CHECK_NAVKIT_ERROR(step_tracking(reg, f, cam), ErrorCode::InvalidArgument);
  reg = step_tracking(reg, f, cam, &k);
  CHECK(testutil::translation_distance(*reg.state("m").world_pose, compose(cam.pose_world, truth)) < 1e-6);
}

TEST_CASE("registry rejects bad specs") {
  CHECK_NAVKIT_ERROR(TrackingRegistry({{"a", "", 50.0, MarkerRole::Tool}, {"a", "", 50.0, MarkerRole::Tool}}),
                     ErrorCode::UniquenessError);
  CHECK_NAVKIT_ERROR(TrackingRegistry({{"a", "", 0.0, MarkerRole::Tool}}), ErrorCode::InvalidArgument);
}
