#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "navkit/metrics.hpp"
#include "navkit/registration.hpp"

namespace navkit {

// Plain-text data files. Blank lines and '#' comments are ignored; numbers use '.' as separator.

/// Lines "LM <label> <image|patient> <x> <y> <z>".
LandmarkSet parse_landmark_file(std::string_view text);
std::string format_landmark_file(const LandmarkSet& set);

/// Lines "TRAJ <label> <ex> <ey> <ez> <xx> <xy> <xz>".
std::vector<Trajectory> parse_trajectory_file(std::string_view text);
std::string format_trajectory_file(const std::vector<Trajectory>& trajectories);

/// "PL <label>" header followed by "<x> <y> <z>" lines, repeated per polyline.
std::vector<Polyline> parse_polyline_file(std::string_view text);
std::string format_polyline_file(const std::vector<Polyline>& lines);

/// One "<x> <y> <z>" point per line.
std::vector<Point3> parse_point_file(std::string_view text);

/// Reads a whole file; throws IoError naming the path.
std::string read_text_file(const std::filesystem::path& path);

}  // namespace navkit
