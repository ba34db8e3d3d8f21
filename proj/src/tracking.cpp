#include "navkit/tracking.hpp"

#include <cmath>
#include <set>

#include <Eigen/Cholesky>
#include <Eigen/SVD>

#include "navkit/error.hpp"

namespace navkit {

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "focal lengths must be positive");
  }
  if (image_width <= 0 || image_height <= 0 || cx < 0.0 || cy < 0.0 || cx > image_width ||
      cy > image_height) {
    throw Error(ErrorCode::InvalidArgument, "principal point must lie inside the image");
  }
}

Pixel CameraIntrinsics::project(const Point3& p) const {
  return {fx * p.x() / p.z() + cx, fy * p.y() / p.z() + cy};
}

std::string_view to_string(MarkerRole role) {
  switch (role) {
    case MarkerRole::Patient: return "patient";
    case MarkerRole::Tool: return "tool";
    case MarkerRole::Reference: return "reference";
    case MarkerRole::Calibrator: return "calibrator";
  }
  return "patient";
}

std::optional<MarkerRole> marker_role_from_string(std::string_view s) {
  if (s == "patient") return MarkerRole::Patient;
  if (s == "tool") return MarkerRole::Tool;
  if (s == "reference") return MarkerRole::Reference;
  if (s == "calibrator") return MarkerRole::Calibrator;
  return std::nullopt;
}

std::string_view to_string(TrackingMode mode) {
  switch (mode) {
    case TrackingMode::NeverSeen: return "never_seen";
    case TrackingMode::Tracked: return "tracked";
    case TrackingMode::ExtendedTracked: return "extended_tracked";
  }
  return "never_seen";
}

std::array<Point3, 4> marker_corners(double edge_length) {
  double h = edge_length / 2.0;
  return {Point3(-h, h, 0), Point3(-h, -h, 0), Point3(h, -h, 0), Point3(h, h, 0)};
}

namespace {

// Similarity taking points to zero centroid and mean distance sqrt(2).
Eigen::Matrix3d normalizing_transform(const std::vector<Eigen::Vector2d>& pts) {
  Eigen::Vector2d c = Eigen::Vector2d::Zero();
  for (const auto& p : pts) c += p;
  c /= static_cast<double>(pts.size());
  double mean_dist = 0.0;
  for (const auto& p : pts) mean_dist += (p - c).norm();
  mean_dist /= static_cast<double>(pts.size());
  double s = std::sqrt(2.0) / mean_dist;
  Eigen::Matrix3d t;
  t << s, 0, -s * c.x(), 0, s, -s * c.y(), 0, 0, 1;
  return t;
}

double reprojection_cost(const RigidTransform& pose, std::span<const PlanarCorrespondence> corr,
                         const CameraIntrinsics& k, bool& all_in_front) {
  double cost = 0.0;
  all_in_front = true;
  for (const auto& c : corr) {
    Point3 pc = transform_point(pose, c.marker_point);
    if (!(pc.z() > 0.0)) {
      all_in_front = false;
      continue;
    }
    cost += (k.project(pc) - c.image).squaredNorm();
  }
  return cost;
}

void check_layout(std::span<const PlanarCorrespondence> corr) {
  double scale = 0.0;
  for (const auto& c : corr) {
    if (!c.marker_point.allFinite() || !c.image.allFinite()) {
      throw Error(ErrorCode::InvalidArgument, "correspondence has non-finite coordinates");
    }
    scale = std::max(scale, c.marker_point.head<2>().norm());
  }
  if (!(scale > 0.0)) throw Error(ErrorCode::DegenerateConfiguration, "marker points coincide");
  for (const auto& c : corr) {
    if (std::abs(c.marker_point.z()) > 1e-9 * scale) {
      throw Error(ErrorCode::DegenerateConfiguration, "marker points must lie on the z = 0 plane");
    }
  }
  const std::size_t n = corr.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      for (std::size_t k = j + 1; k < n; ++k) {
        Eigen::Vector2d a = corr[j].marker_point.head<2>() - corr[i].marker_point.head<2>();
        Eigen::Vector2d b = corr[k].marker_point.head<2>() - corr[i].marker_point.head<2>();
        double cross = a.x() * b.y() - a.y() * b.x();
        if (std::abs(cross) <= 1e-9 * scale * scale) {
          throw Error(ErrorCode::DegenerateConfiguration, "three marker points are collinear");
        }
      }
    }
  }
}

}  // namespace

PnpResult solve_planar_pnp(std::span<const PlanarCorrespondence> corr, const CameraIntrinsics& k) {
  if (corr.size() < 4) {
    throw Error(ErrorCode::InsufficientData, "planar PnP needs at least 4 correspondences");
  }
  k.validate();
  check_layout(corr);

  const std::size_t n = corr.size();
  std::vector<Eigen::Vector2d> img(n), plane(n);
  for (std::size_t i = 0; i < n; ++i) {
    img[i] = corr[i].image;
    plane[i] = corr[i].marker_point.head<2>();
  }
  Eigen::Matrix3d t_img = normalizing_transform(img);
  Eigen::Matrix3d t_plane = normalizing_transform(plane);

  Eigen::MatrixXd a(2 * n, 9);
  for (std::size_t i = 0; i < n; ++i) {
    Eigen::Vector3d x = t_plane * plane[i].homogeneous();
    Eigen::Vector3d u = t_img * img[i].homogeneous();
    a.row(2 * i) << -x.x(), -x.y(), -1, 0, 0, 0, u.x() * x.x(), u.x() * x.y(), u.x();
    a.row(2 * i + 1) << 0, 0, 0, -x.x(), -x.y(), -1, u.y() * x.x(), u.y() * x.y(), u.y();
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  if (sv(7) <= 1e-10 * sv(0)) {
    throw Error(ErrorCode::DegenerateConfiguration, "homography is not uniquely determined");
  }
  Eigen::Matrix<double, 9, 1> h = svd.matrixV().col(8);
  Eigen::Matrix3d hn;
  hn << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);
  Eigen::Matrix3d homography = t_img.inverse() * hn * t_plane;

  Eigen::Matrix3d kmat;
  kmat << k.fx, 0, k.cx, 0, k.fy, k.cy, 0, 0, 1;
  Eigen::Matrix3d m = kmat.inverse() * homography;
  double lambda = 2.0 / (m.col(0).norm() + m.col(1).norm());

  std::optional<RigidTransform> best;
  double best_cost = 0.0;
  for (double sign : {1.0, -1.0}) {
    Vector3 r1 = sign * lambda * m.col(0);
    Vector3 r2 = sign * lambda * m.col(1);
    Matrix3 r;
    r.col(0) = r1;
    r.col(1) = r2;
    r.col(2) = r1.cross(r2);
    Vector3 t = sign * lambda * m.col(2);
    if (!(t.z() > 0.0)) continue;
    Matrix3 rot;
    try {
      rot = orthonormalize(r);
    } catch (const Error&) {
      continue;
    }
    RigidTransform cand(rot, t);
    bool in_front = false;
    double cost = reprojection_cost(cand, corr, k, in_front);
    if (!in_front) continue;
    if (!best || cost < best_cost) {
      best = cand;
      best_cost = cost;
    }
  }
  if (!best) throw Error(ErrorCode::NoValidPose, "no pose candidate places the marker in front of the camera");

  // Gauss-Newton with a left-multiplied rotation increment.
  RigidTransform pose = *best;
  double cost = best_cost;
  int iterations = 0;
  for (; iterations < 20 && cost > 0.0; ++iterations) {
    Eigen::Matrix<double, 6, 6> jtj = Eigen::Matrix<double, 6, 6>::Zero();
    Eigen::Matrix<double, 6, 1> jtr = Eigen::Matrix<double, 6, 1>::Zero();
    for (const auto& c : corr) {
      Vector3 rx = pose.rotation() * c.marker_point;
      Vector3 pc = rx + pose.translation();
      double iz = 1.0 / pc.z();
      Eigen::Matrix<double, 2, 3> dproj;
      dproj << k.fx * iz, 0, -k.fx * pc.x() * iz * iz, 0, k.fy * iz, -k.fy * pc.y() * iz * iz;
      Matrix3 skew;
      skew << 0, -rx.z(), rx.y(), rx.z(), 0, -rx.x(), -rx.y(), rx.x(), 0;
      Eigen::Matrix<double, 2, 6> j;
      j.leftCols<3>() = -dproj * skew;
      j.rightCols<3>() = dproj;
      Eigen::Vector2d res = k.project(pc) - c.image;
      jtj += j.transpose() * j;
      jtr += j.transpose() * res;
    }
    Eigen::Matrix<double, 6, 1> delta = jtj.ldlt().solve(-jtr);
    if (!delta.allFinite()) break;
    Vector3 w = delta.head<3>();
    double angle = w.norm();
    Matrix3 dr = angle > 0.0 ? Eigen::AngleAxisd(angle, w / angle).toRotationMatrix()
                             : Matrix3::Identity();
    RigidTransform next(orthonormalize(dr * pose.rotation()), pose.translation() + delta.tail<3>());
    bool in_front = false;
    double next_cost = reprojection_cost(next, corr, k, in_front);
    if (!in_front || next_cost >= cost) break;
    double improvement = (cost - next_cost) / cost;
    pose = next;
    cost = next_cost;
    if (improvement < 1e-10) {
      ++iterations;
      break;
    }
  }
  return {pose, std::sqrt(cost / static_cast<double>(n)), iterations};
}

PnpResult solve_marker_pose(const std::array<Pixel, 4>& corners, double edge_length,
                            const CameraIntrinsics& intrinsics) {
  if (!(edge_length > 0.0)) throw Error(ErrorCode::InvalidArgument, "marker edge length must be positive");
  auto model = marker_corners(edge_length);
  std::array<PlanarCorrespondence, 4> corr;
  for (std::size_t i = 0; i < 4; ++i) corr[i] = {corners[i], model[i]};
  return solve_planar_pnp(corr, intrinsics);
}

RigidTransform marker_world_pose(const RigidTransform& obs_pose, const CameraSample& camera) {
  return compose(camera.pose_world, obs_pose);
}

TrackingRegistry::TrackingRegistry(std::vector<MarkerSpec> specs) : specs_(std::move(specs)) {
  for (const auto& s : specs_) {
    if (!(s.edge_length > 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "marker '" + s.id + "' needs a positive edge length");
    }
    TrackedMarkerState st;
    st.marker_id = s.id;
    if (!states_.emplace(s.id, st).second) {
      throw Error(ErrorCode::UniquenessError, "duplicate marker id '" + s.id + "'");
    }
  }
}

const MarkerSpec& TrackingRegistry::spec(const std::string& id) const {
  for (const auto& s : specs_) {
    if (s.id == id) return s;
  }
  throw Error(ErrorCode::UnregisteredMarker, "marker '" + id + "' is not registered");
}

const TrackedMarkerState& TrackingRegistry::state(const std::string& id) const {
  auto it = states_.find(id);
  if (it == states_.end()) {
    throw Error(ErrorCode::UnregisteredMarker, "marker '" + id + "' is not registered");
  }
  return it->second;
}

TrackingRegistry step_tracking(const TrackingRegistry& registry,
                               std::span<const MarkerObservation> frame,
                               const CameraSample& camera, const CameraIntrinsics* intrinsics) {
  const double now = camera.timestamp;
  if (registry.last_time_ && now < *registry.last_time_) {
    throw Error(ErrorCode::OutOfOrder, "frame time precedes the previous frame");
  }
  std::set<std::string> seen;
  std::map<std::string, RigidTransform> observed;
  for (const auto& obs : frame) {
    if (!registry.contains(obs.marker_id)) {
      throw Error(ErrorCode::UnregisteredMarker, "marker '" + obs.marker_id + "' is not registered");
    }
    if (registry.last_time_ && obs.timestamp < *registry.last_time_) {
      throw Error(ErrorCode::OutOfOrder, "observation of '" + obs.marker_id + "' precedes the previous frame");
    }
    if (!seen.insert(obs.marker_id).second) {
      throw Error(ErrorCode::InvalidArgument, "marker '" + obs.marker_id + "' observed twice in one frame");
    }
    RigidTransform in_camera;
    if (obs.pose_in_camera) {
      in_camera = *obs.pose_in_camera;
    } else if (obs.corners && intrinsics) {
      in_camera = solve_marker_pose(*obs.corners, registry.spec(obs.marker_id).edge_length, *intrinsics).pose;
    } else {
      throw Error(ErrorCode::InvalidArgument,
                  "observation of '" + obs.marker_id + "' has no pose and no solvable corners");
    }
    observed.emplace(obs.marker_id, marker_world_pose(in_camera, camera));
  }

  TrackingRegistry next = registry;
  next.last_time_ = now;
  for (auto& [id, st] : next.states_) {
    auto it = observed.find(id);
    if (it != observed.end()) {
      st.mode = TrackingMode::Tracked;
      st.world_pose = it->second;
      st.last_seen = now;
    } else if (st.mode != TrackingMode::NeverSeen) {
      st.mode = TrackingMode::ExtendedTracked;
    }
  }
  return next;
}

}  // namespace navkit
