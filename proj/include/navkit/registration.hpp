#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "navkit/geometry.hpp"

namespace navkit {

enum class LandmarkFrame { Image, Patient };

std::string_view to_string(LandmarkFrame f);

struct Landmark {
  std::string label;
  Point3 position = Point3::Zero();
  LandmarkFrame frame = LandmarkFrame::Image;

  friend bool operator==(const Landmark&, const Landmark&) = default;
};

/// Labelled landmarks in image and/or patient coordinates. Labels are unique per frame.
struct LandmarkSet {
  std::vector<Landmark> landmarks;

  void validate() const;
  std::vector<Landmark> in_frame(LandmarkFrame f) const;
};

/// Image and patient points paired by index order; the labels at each index must agree.
struct MatchedPoints {
  std::vector<std::string> labels;
  std::vector<Point3> model;
  std::vector<Point3> patient;
};

MatchedPoints match_by_order(const LandmarkSet& set);

struct RegistrationResult {
  RigidTransform image_to_world;  // T^world_img
  double fre = 0.0;               // mm
  std::vector<double> per_fiducial_residuals;
  std::size_t point_count = 0;
};

/**
 * Least-squares rigid alignment patient ~= R model + T (centroid subtraction,
 * cross-covariance SVD, determinant-corrected rotation). Correspondence is by
 * index.
 *
 * Errors: CountMismatch, InsufficientData (< 3 pairs), DegenerateConfiguration
 * (either point set collinear, leaving the rotation about the line free).
 */
RegistrationResult point_based_register(std::span<const Point3> model_points,
                                        std::span<const Point3> patient_points);

struct ManualAdjustment {
  enum class Kind { TranslateAxis, RotateAxis, Free6Dof };

  Kind kind = Kind::Free6Dof;
  Vector3 axis = Vector3::UnitX();       // world frame, unit length
  double delta = 0.0;                    // mm or degrees
  std::optional<Point3> pivot;           // rotation center in world coordinates
  RigidTransform free_delta;             // used by Free6Dof

  static ManualAdjustment translate(const Vector3& axis, double mm);
  static ManualAdjustment rotate(const Vector3& axis, double degrees, std::optional<Point3> pivot = std::nullopt);
  static ManualAdjustment free(const RigidTransform& delta);
};

/**
 * Applies one manipulation step in the world frame. Rotations turn about
 * `adj.pivot`, or about the transformed model centroid when no pivot is given.
 * Throws InvalidArgument for a non-unit axis or non-finite delta.
 */
RigidTransform apply_manual_adjustment(const RigidTransform& current, const ManualAdjustment& adj,
                                       const Point3& model_centroid = Point3::Zero());

}  // namespace navkit
