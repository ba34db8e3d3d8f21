#pragma once

#include <span>
#include <string>
#include <vector>

#include "navkit/geometry.hpp"

namespace navkit {

/// Per-point distances |P_p - (R P_m + T)|. Throws CountMismatch or InsufficientData (empty).
std::vector<double> point_residuals(std::span<const Point3> model, std::span<const Point3> patient,
                                    const RigidTransform& transform);

/// Fiducial registration error: sqrt(sum |P_p - (R P_m + T)|^2 / N) over the registration fiducials.
double fre(std::span<const Point3> model, std::span<const Point3> patient, const RigidTransform& transform);

/// Target registration error: the same RMSE over points excluded from the registration.
/// The library cannot check the exclusion; that is the caller's contract. For the
/// reference-tracker variant pass patient points already expressed in the patient-marker frame.
double tre(std::span<const Point3> heldout_model, std::span<const Point3> heldout_patient,
           const RigidTransform& transform);

struct Trajectory {
  std::string label;
  Point3 entry = Point3::Zero();
  Point3 exit = Point3::Zero();
};

Trajectory transform_trajectory(const RigidTransform& t, const Trajectory& traj);

struct TrajectoryDeviation {
  double distance = 0.0;  // mm, mean of entry and exit distances
  double angle = 0.0;     // degrees
};

TrajectoryDeviation trajectory_deviation(const Trajectory& a, const Trajectory& b);

struct SurfaceDeviation {
  double mean = 0.0;
  double max = 0.0;
  std::vector<double> per_point;
};

/// Distances |t1(p) - t2(p)| for every point. Throws InsufficientData on an empty set.
SurfaceDeviation surface_deviation(std::span<const Point3> points, const RigidTransform& t1,
                                   const RigidTransform& t2);

struct ToolLine {
  Point3 tip = Point3::Zero();
  Vector3 direction = Vector3::UnitZ();  // unit shaft axis
};

struct InsertionError {
  double entry = 0.0;  // mm
  double exit = 0.0;   // mm
  double mean = 0.0;   // mm
  double angle = 0.0;  // degrees
};

/// Distances are measured to the infinite tool line; `mean` averages `samples`
/// equally spaced points from the planned entry to the planned exit.
InsertionError insertion_error(const ToolLine& tool, const Trajectory& planned, int samples = 100);

struct Polyline {
  std::string label;
  std::vector<Point3> points;
};

double point_to_polyline_distance(const Point3& p, const Polyline& line);

/// Directed drawn -> planned deviation: mean closest-point distance of `samples`
/// arc-length-equidistant points along `drawn`.
double incision_deviation(const Polyline& drawn, const Polyline& planned, int samples = 100);

}  // namespace navkit
