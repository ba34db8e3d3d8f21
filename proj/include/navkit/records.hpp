#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "navkit/calibration.hpp"
#include "navkit/geometry.hpp"
#include "navkit/registration.hpp"

namespace navkit {

/// Record timestamps are integral microseconds so that text round trips are exact.
using Micros = std::int64_t;

struct CamRecord {
  Micros time = 0;
  PoseValues pose;  // T^world_c
  friend bool operator==(const CamRecord&, const CamRecord&) = default;
};

/// Either eight corner coordinates (u0 v0 ... u3 v3, px) or a solved camera-frame pose.
struct ObsRecord {
  Micros time = 0;
  std::string marker_id;
  std::variant<std::array<double, 8>, PoseValues> payload;
  friend bool operator==(const ObsRecord&, const ObsRecord&) = default;
};

struct CalRecord {
  Micros time = 0;
  std::string tool_marker_id;
  CalibrationMethod method = CalibrationMethod::Pivot;
  PoseValues pose;  // T^m_tip
  double rms_residual = 0.0;
  friend bool operator==(const CalRecord&, const CalRecord&) = default;
};

struct RegRecord {
  Micros time = 0;
  std::string label;
  PoseValues pose;  // T^world_img
  double fre = 0.0;
  std::uint64_t point_count = 0;
  friend bool operator==(const RegRecord&, const RegRecord&) = default;
};

struct LmRecord {
  Micros time = 0;
  std::string label;
  LandmarkFrame frame = LandmarkFrame::Image;
  std::array<double, 3> position{};
  friend bool operator==(const LmRecord&, const LmRecord&) = default;
};

struct TrajRecord {
  Micros time = 0;
  std::string label;
  std::array<double, 3> entry{};
  std::array<double, 3> exit{};
  friend bool operator==(const TrajRecord&, const TrajRecord&) = default;
};

using Record = std::variant<CamRecord, ObsRecord, CalRecord, RegRecord, LmRecord, TrajRecord>;

Micros record_time(const Record& r);

/**
 * One LF-free line in the grammar `<TYPE> <timestamp> <payload...>`:
 *
 *   CAM <t> <tx ty tz qx qy qz qw>
 *   OBS <t> <marker_id> <u0 v0 u1 v1 u2 v2 u3 v3>   (corner form)
 *   OBS <t> <marker_id> <tx ty tz qx qy qz qw>      (pose form)
 *   CAL <t> <tool_marker_id> <method> <7 pose values> <rms_residual>
 *   REG <t> <label> <7 pose values> <fre> <point_count>
 *   LM  <t> <label> <image|patient> <x y z>
 *   TRAJ <t> <label> <ex ey ez> <xx xy xz>
 *
 * Timestamps carry exactly six fractional digits; all other reals use the
 * shortest representation that parses back to the same double.
 */
std::string format_record(const Record& r);
Record parse_record(std::string_view line, std::size_t line_number);

/// Appends records to a stream, refusing timestamp regressions (equal timestamps are fine).
class RecordWriter {
public:
  explicit RecordWriter(std::ostream& out) : out_(&out) {}
  void comment(std::string_view text);
  void record(const Record& r);
  std::optional<Micros> last_time() const noexcept { return last_; }

private:
  std::ostream* out_;
  std::optional<Micros> last_;
};

/**
 * Parses a recorded stream. Blank lines and lines starting with '#' are
 * skipped. A final line without a terminating LF is treated as a partial
 * write and rejected, as are malformed lines and timestamp regressions; the
 * ParseError carries the offending line number.
 */
std::vector<Record> replay(std::string_view text);

}  // namespace navkit
