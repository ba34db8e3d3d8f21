#include "navkit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "navkit/error.hpp"

namespace navkit {

namespace {

void check_pairs(std::span<const Point3> model, std::span<const Point3> patient) {
  if (model.size() != patient.size()) {
    throw Error(ErrorCode::CountMismatch, "model has " + std::to_string(model.size()) +
                                              " points, patient has " + std::to_string(patient.size()));
  }
  if (model.empty()) throw Error(ErrorCode::InsufficientData, "no points");
}

double angle_between(const Vector3& a, const Vector3& b) {
  return rad_to_deg(std::atan2(a.cross(b).norm(), a.dot(b)));
}

Vector3 direction(const Trajectory& t) {
  Vector3 d = t.exit - t.entry;
  double n = d.norm();
  if (!(n > 0.0)) throw Error(ErrorCode::InvalidArgument, "trajectory '" + t.label + "' has entry == exit");
  return d / n;
}

double distance_to_line(const Point3& q, const ToolLine& line) {
  return (q - line.tip).cross(line.direction).norm();
}

void check_polyline(const Polyline& p) {
  if (p.points.size() < 2) {
    throw Error(ErrorCode::InvalidArgument, "polyline '" + p.label + "' needs at least 2 points");
  }
  for (std::size_t i = 1; i < p.points.size(); ++i) {
    if (p.points[i] == p.points[i - 1]) {
      throw Error(ErrorCode::InvalidArgument, "polyline '" + p.label + "' repeats a point");
    }
  }
}

}  // namespace

std::vector<double> point_residuals(std::span<const Point3> model, std::span<const Point3> patient,
                                    const RigidTransform& transform) {
  check_pairs(model, patient);
  std::vector<double> out;
  out.reserve(model.size());
  for (std::size_t i = 0; i < model.size(); ++i) {
    out.push_back((patient[i] - transform_point(transform, model[i])).norm());
  }
  return out;
}

double fre(std::span<const Point3> model, std::span<const Point3> patient, const RigidTransform& transform) {
  check_pairs(model, patient);
  double sum = 0.0;
  for (std::size_t i = 0; i < model.size(); ++i) {
    sum += (patient[i] - transform_point(transform, model[i])).squaredNorm();
  }
  return std::sqrt(sum / static_cast<double>(model.size()));
}

double tre(std::span<const Point3> heldout_model, std::span<const Point3> heldout_patient,
           const RigidTransform& transform) {
  return fre(heldout_model, heldout_patient, transform);
}

Trajectory transform_trajectory(const RigidTransform& t, const Trajectory& traj) {
  return {traj.label, transform_point(t, traj.entry), transform_point(t, traj.exit)};
}

TrajectoryDeviation trajectory_deviation(const Trajectory& a, const Trajectory& b) {
  TrajectoryDeviation out;
  out.distance = 0.5 * ((a.entry - b.entry).norm() + (a.exit - b.exit).norm());
  out.angle = angle_between(direction(a), direction(b));
  return out;
}

SurfaceDeviation surface_deviation(std::span<const Point3> points, const RigidTransform& t1,
                                   const RigidTransform& t2) {
  if (points.empty()) throw Error(ErrorCode::InsufficientData, "no surface points");
  SurfaceDeviation out;
  out.per_point.reserve(points.size());
  double sum = 0.0;
  for (const auto& p : points) {
    double d = (transform_point(t1, p) - transform_point(t2, p)).norm();
    out.per_point.push_back(d);
    sum += d;
    out.max = std::max(out.max, d);
  }
  out.mean = sum / static_cast<double>(points.size());
  return out;
}

InsertionError insertion_error(const ToolLine& tool, const Trajectory& planned, int samples) {
  if (samples < 2) throw Error(ErrorCode::InvalidArgument, "insertion error needs at least 2 samples");
  if (std::abs(tool.direction.norm() - 1.0) > 1e-9) {
    throw Error(ErrorCode::InvalidArgument, "tool direction must be a unit vector");
  }
  Vector3 dir = direction(planned);
  InsertionError out;
  out.entry = distance_to_line(planned.entry, tool);
  out.exit = distance_to_line(planned.exit, tool);
  double sum = 0.0;
  for (int k = 0; k < samples; ++k) {
    double s = static_cast<double>(k) / static_cast<double>(samples - 1);
    sum += distance_to_line(planned.entry + s * (planned.exit - planned.entry), tool);
  }
  out.mean = sum / static_cast<double>(samples);
  out.angle = angle_between(tool.direction, dir);
  return out;
}

double point_to_polyline_distance(const Point3& p, const Polyline& line) {
  check_polyline(line);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < line.points.size(); ++i) {
    const Point3& a = line.points[i - 1];
    Vector3 ab = line.points[i] - a;
    double s = std::clamp((p - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
    best = std::min(best, (p - (a + s * ab)).norm());
  }
  return best;
}

double incision_deviation(const Polyline& drawn, const Polyline& planned, int samples) {
  if (samples < 2) throw Error(ErrorCode::InvalidArgument, "incision deviation needs at least 2 samples");
  check_polyline(drawn);
  check_polyline(planned);
  std::vector<double> cumulative{0.0};
  for (std::size_t i = 1; i < drawn.points.size(); ++i) {
    cumulative.push_back(cumulative.back() + (drawn.points[i] - drawn.points[i - 1]).norm());
  }
  const double total = cumulative.back();
  double sum = 0.0;
  std::size_t seg = 1;
  for (int k = 0; k < samples; ++k) {
    double s = total * static_cast<double>(k) / static_cast<double>(samples - 1);
    while (seg + 1 < cumulative.size() && cumulative[seg] < s) ++seg;
    double len = cumulative[seg] - cumulative[seg - 1];
    double f = std::clamp((s - cumulative[seg - 1]) / len, 0.0, 1.0);
    Point3 q = drawn.points[seg - 1] + f * (drawn.points[seg] - drawn.points[seg - 1]);
    sum += point_to_polyline_distance(q, planned);
  }
  return sum / static_cast<double>(samples);
}

}  // namespace navkit
