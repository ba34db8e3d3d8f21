#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "navkit/calibration.hpp"
#include "navkit/cli.hpp"
#include "navkit/error.hpp"
#include "navkit/metrics.hpp"
#include "navkit/records.hpp"
#include "navkit/registration.hpp"
#include "navkit/simulator.hpp"
#include "navkit/tracking.hpp"

namespace py = pybind11;
using namespace pybind11::literals;
using namespace navkit;

namespace {

using Points = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;
using Matrix4 = Eigen::Matrix4d;

RigidTransform from_matrix(const Matrix4& m) {
  if ((m.row(3) - Eigen::RowVector4d(0, 0, 0, 1)).cwiseAbs().maxCoeff() > 1e-12) {
    throw Error(ErrorCode::InvalidArgument, "last row of a pose matrix must be 0 0 0 1");
  }
  return RigidTransform(m.topLeftCorner<3, 3>(), m.topRightCorner<3, 1>());
}

std::vector<Point3> to_points(const Points& p) {
  std::vector<Point3> out;
  out.reserve(static_cast<std::size_t>(p.rows()));
  for (Eigen::Index i = 0; i < p.rows(); ++i) out.emplace_back(p.row(i).transpose());
  return out;
}

Points from_points(const std::vector<Point3>& p) {
  Points out(static_cast<Eigen::Index>(p.size()), 3);
  for (std::size_t i = 0; i < p.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = p[i].transpose();
  return out;
}

CameraIntrinsics intrinsics_from(const py::dict& d) {
  CameraIntrinsics k = default_intrinsics();
  if (d.contains("fx")) k.fx = d["fx"].cast<double>();
  if (d.contains("fy")) k.fy = d["fy"].cast<double>();
  if (d.contains("cx")) k.cx = d["cx"].cast<double>();
  if (d.contains("cy")) k.cy = d["cy"].cast<double>();
  if (d.contains("width")) k.image_width = d["width"].cast<int>();
  if (d.contains("height")) k.image_height = d["height"].cast<int>();
  return k;
}

}  // namespace

PYBIND11_MODULE(_navkit, m) {
  m.doc() = "Marker-based surgical navigation toolkit";

  static py::exception<Error> navkit_error(m, "NavkitError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object err = navkit_error;
      py::object instance = err(e.what());
      instance.attr("code") = std::string(to_string(e.code()));
      PyErr_SetObject(navkit_error.ptr(), instance.ptr());
    }
  });

  m.def("compose", [](const Matrix4& a, const Matrix4& b) { return compose(from_matrix(a), from_matrix(b)).matrix(); });
  m.def("invert", [](const Matrix4& a) { return invert(from_matrix(a)).matrix(); });
  m.def("from_axis_angle", [](const Vector3& axis, double degrees, const Vector3& t) {
    return RigidTransform::from_axis_angle(axis, degrees, t).matrix();
  }, "axis"_a, "degrees"_a, "translation"_a = Vector3::Zero());
  m.def("rotation_angle_between", [](const Matrix4& a, const Matrix4& b) {
    return rotation_angle_between(from_matrix(a), from_matrix(b));
  });
  m.def("orthonormalize", &orthonormalize);

  m.def("pivot_calibrate", [](const std::vector<Matrix4>& poses, bool trim) {
    std::vector<PivotSample> samples;
    for (const auto& p : poses) samples.push_back({from_matrix(p), 0.0});
    PivotResult r = pivot_calibrate(samples, PivotOptions{trim});
    return py::dict("tip_in_marker"_a = r.tip_in_marker, "pivot_in_world"_a = r.pivot_in_world,
                    "rms_residual"_a = r.rms_residual, "sample_count"_a = r.sample_count);
  }, "poses"_a, "trim_outliers"_a = false);

  m.def("point_based_register", [](const Points& model, const Points& patient) {
    auto r = point_based_register(to_points(model), to_points(patient));
    return py::dict("image_to_world"_a = r.image_to_world.matrix(), "fre"_a = r.fre,
                    "residuals"_a = r.per_fiducial_residuals);
  });
  m.def("fre", [](const Points& model, const Points& patient, const Matrix4& t) {
    return fre(to_points(model), to_points(patient), from_matrix(t));
  });
  m.def("tre", [](const Points& model, const Points& patient, const Matrix4& t) {
    return tre(to_points(model), to_points(patient), from_matrix(t));
  });

  m.def("trajectory_deviation", [](const Point3& a_entry, const Point3& a_exit, const Point3& b_entry, const Point3& b_exit) {
    auto d = trajectory_deviation({"a", a_entry, a_exit}, {"b", b_entry, b_exit});
    return py::make_tuple(d.distance, d.angle);
  });
  m.def("surface_deviation", [](const Points& points, const Matrix4& t1, const Matrix4& t2) {
    auto d = surface_deviation(to_points(points), from_matrix(t1), from_matrix(t2));
    return py::dict("mean"_a = d.mean, "max"_a = d.max, "per_point"_a = d.per_point);
  });
  m.def("insertion_error", [](const Point3& tip, const Vector3& direction, const Point3& entry, const Point3& exit) {
    auto e = insertion_error({tip, direction}, {"plan", entry, exit});
    return py::dict("entry"_a = e.entry, "exit"_a = e.exit, "mean"_a = e.mean, "angle"_a = e.angle);
  });
  m.def("incision_deviation", [](const Points& drawn, const Points& planned) {
    return incision_deviation({"drawn", to_points(drawn)}, {"planned", to_points(planned)});
  });

  m.def("marker_corners", [](double edge) {
    auto c = marker_corners(edge);
    return from_points({c.begin(), c.end()});
  });
  m.def("solve_marker_pose", [](const Eigen::Matrix<double, 4, 2, Eigen::RowMajor>& corners, double edge,
                                const py::dict& intrinsics) {
    std::array<Pixel, 4> px;
    for (int i = 0; i < 4; ++i) px[i] = corners.row(i).transpose();
    auto r = solve_marker_pose(px, edge, intrinsics_from(intrinsics));
    return py::make_tuple(r.pose.matrix(), r.reprojection_rmse);
  }, "corners"_a, "edge_length"_a, "intrinsics"_a = py::dict());
  m.def("project", [](const Points& camera_points, const py::dict& intrinsics) {
    CameraIntrinsics k = intrinsics_from(intrinsics);
    Eigen::Matrix<double, Eigen::Dynamic, 2, Eigen::RowMajor> out(camera_points.rows(), 2);
    for (Eigen::Index i = 0; i < camera_points.rows(); ++i) out.row(i) = k.project(camera_points.row(i).transpose()).transpose();
    return out;
  }, "camera_points"_a, "intrinsics"_a = py::dict());

  m.def("derive_seed", &derive_seed);
  m.def("metric_names", &metric_names);
  m.def("run_monte_carlo", [](const std::string& metric, std::size_t trials, double sigma_t, double sigma_r,
                              std::uint64_t seed, std::optional<double> sigma_px) {
    std::vector<NoiseModel> cond{{"custom", sigma_t, sigma_r, sigma_px, derive_seed(seed, 0)}};
    auto stats = run_monte_carlo(default_scenario(), cond, trials, metric);
    const auto& s = stats.at(0);
    return py::dict("mean"_a = s.mean, "std"_a = s.std, "min"_a = s.min, "max"_a = s.max, "n"_a = s.n);
  }, "metric"_a, "trials"_a, "sigma_t"_a, "sigma_r"_a, "seed"_a = 0, "sigma_px"_a = py::none());

  m.def("replay", [](const std::string& text) {
    std::vector<std::string> lines;
    for (const auto& r : replay(text)) lines.push_back(format_record(r));
    return lines;
  }, "Parse a recording and return its records in canonical text form.");

  m.def("run_cli", [](const std::vector<std::string>& args) {
    std::ostringstream out, err;
    int code = cli::run(args, out, err);
    return py::make_tuple(code, out.str(), err.str());
  });
}
