#include "navkit/files.hpp"

#include <fstream>
#include <sstream>

#include "navkit/error.hpp"
#include "navkit/text.hpp"

namespace navkit {

namespace {

// Calls fn(tokens, line_number) for every non-blank, non-comment line.
template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    ++line_no;
    std::size_t eol = text.find('\n', pos);
    std::string_view line = text.substr(pos, eol == std::string_view::npos ? text.size() - pos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() : eol + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    auto tokens = text::split_ws(line);
    if (tokens.empty() || tokens.front().front() == '#') continue;
    fn(tokens, line_no);
  }
}

Point3 parse_point(const std::vector<std::string_view>& tokens, std::size_t first, std::size_t line) {
  Point3 p;
  for (int k = 0; k < 3; ++k) {
    if (!text::parse_double(tokens[first + k], p[k])) {
      throw ParseError(line, "bad number '" + std::string(tokens[first + k]) + "'");
    }
  }
  return p;
}

std::string format_point(const Point3& p) {
  return text::format_double(p.x()) + ' ' + text::format_double(p.y()) + ' ' + text::format_double(p.z());
}

}  // namespace

LandmarkSet parse_landmark_file(std::string_view text) {
  LandmarkSet set;
  for_each_line(text, [&set](const auto& tokens, std::size_t line) {
    if (tokens[0] != "LM" || tokens.size() != 6) {
      throw ParseError(line, "expected 'LM <label> <image|patient> <x> <y> <z>'");
    }
    Landmark lm;
    lm.label = std::string(tokens[1]);
    if (tokens[2] == "image") {
      lm.frame = LandmarkFrame::Image;
    } else if (tokens[2] == "patient") {
      lm.frame = LandmarkFrame::Patient;
    } else {
      throw ParseError(line, "landmark frame must be 'image' or 'patient'");
    }
    lm.position = parse_point(tokens, 3, line);
    set.landmarks.push_back(std::move(lm));
  });
  set.validate();
  return set;
}

std::string format_landmark_file(const LandmarkSet& set) {
  std::string out;
  for (const auto& lm : set.landmarks) {
    out += "LM " + lm.label + ' ' + std::string(to_string(lm.frame)) + ' ' + format_point(lm.position) + '\n';
  }
  return out;
}

std::vector<Trajectory> parse_trajectory_file(std::string_view text) {
  std::vector<Trajectory> out;
  for_each_line(text, [&out](const auto& tokens, std::size_t line) {
    if (tokens[0] != "TRAJ" || tokens.size() != 8) {
      throw ParseError(line, "expected 'TRAJ <label> <ex> <ey> <ez> <xx> <xy> <xz>'");
    }
    Trajectory t{std::string(tokens[1]), parse_point(tokens, 2, line), parse_point(tokens, 5, line)};
    if (t.entry == t.exit) throw ParseError(line, "trajectory entry equals exit");
    out.push_back(std::move(t));
  });
  return out;
}

std::string format_trajectory_file(const std::vector<Trajectory>& trajectories) {
  std::string out;
  for (const auto& t : trajectories) {
    out += "TRAJ " + t.label + ' ' + format_point(t.entry) + ' ' + format_point(t.exit) + '\n';
  }
  return out;
}

std::vector<Polyline> parse_polyline_file(std::string_view text) {
  std::vector<Polyline> out;
  std::size_t last_line = 0;
  for_each_line(text, [&out, &last_line](const auto& tokens, std::size_t line) {
    last_line = line;
    if (tokens[0] == "PL") {
      if (tokens.size() != 2) throw ParseError(line, "expected 'PL <label>'");
      if (!out.empty() && out.back().points.size() < 2) {
        throw ParseError(line, "polyline '" + out.back().label + "' has fewer than 2 points");
      }
      out.push_back({std::string(tokens[1]), {}});
      return;
    }
    if (out.empty()) throw ParseError(line, "point before any 'PL <label>' header");
    if (tokens.size() != 3) throw ParseError(line, "expected '<x> <y> <z>'");
    Point3 p = parse_point(tokens, 0, line);
    if (!out.back().points.empty() && out.back().points.back() == p) {
      throw ParseError(line, "consecutive polyline points coincide");
    }
    out.back().points.push_back(p);
  });
  if (!out.empty() && out.back().points.size() < 2) {
    throw ParseError(last_line, "polyline '" + out.back().label + "' has fewer than 2 points");
  }
  return out;
}

std::string format_polyline_file(const std::vector<Polyline>& lines) {
  std::string out;
  for (const auto& pl : lines) {
    out += "PL " + pl.label + '\n';
    for (const auto& p : pl.points) out += format_point(p) + '\n';
  }
  return out;
}

std::vector<Point3> parse_point_file(std::string_view text) {
  std::vector<Point3> out;
  for_each_line(text, [&out](const auto& tokens, std::size_t line) {
    if (tokens.size() != 3) throw ParseError(line, "expected '<x> <y> <z>'");
    out.push_back(parse_point(tokens, 0, line));
  });
  return out;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace navkit
