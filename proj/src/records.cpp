#include "navkit/records.hpp"

#include <cmath>
#include <charconv>
#include <ostream>

#include "navkit/error.hpp"
#include "navkit/text.hpp"

namespace navkit {

namespace {

void check_identifier(std::string_view id, std::string_view what) {
  if (id.empty()) throw Error(ErrorCode::InvalidArgument, std::string(what) + " is empty");
  for (char c : id) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      throw Error(ErrorCode::InvalidArgument, std::string(what) + " '" + std::string(id) + "' contains whitespace");
    }
  }
}

template <std::size_t N>
void append_values(std::string& out, const std::array<double, N>& values) {
  for (double v : values) {
    out.push_back(' ');
    out += text::format_double(v);
  }
}

struct LineParser {
  std::vector<std::string_view> tokens;
  std::size_t line;

  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(line, msg); }

  double real(std::size_t i) const {
    double v = 0.0;
    if (!text::parse_double(tokens[i], v)) fail("bad number '" + std::string(tokens[i]) + "'");
    return v;
  }

  template <std::size_t N>
  std::array<double, N> reals(std::size_t first) const {
    std::array<double, N> out{};
    for (std::size_t k = 0; k < N; ++k) out[k] = real(first + k);
    return out;
  }

  PoseValues pose(std::size_t first) const {
    PoseValues p;
    p.values = reals<7>(first);
    const auto& v = p.values;
    double qn = v[3] * v[3] + v[4] * v[4] + v[5] * v[5] + v[6] * v[6];
    if (!(std::abs(qn - 1.0) <= 1e-6)) fail("pose quaternion is not unit length");
    return p;
  }

  void expect(std::size_t count, std::string_view type) const {
    if (tokens.size() != count) {
      fail(std::string(type) + " record needs " + std::to_string(count) + " fields, got " +
           std::to_string(tokens.size()));
    }
  }
};

}  // namespace

Micros record_time(const Record& r) {
  return std::visit([](const auto& rec) { return rec.time; }, r);
}

std::string format_record(const Record& r) {
  std::string out;
  std::visit(
      [&out](const auto& rec) {
        using T = std::decay_t<decltype(rec)>;
        auto head = [&out, &rec](std::string_view type) {
          out += type;
          out.push_back(' ');
          out += text::format_micros(rec.time);
        };
        if constexpr (std::is_same_v<T, CamRecord>) {
          head("CAM");
          append_values(out, rec.pose.values);
        } else if constexpr (std::is_same_v<T, ObsRecord>) {
          check_identifier(rec.marker_id, "marker id");
          head("OBS");
          out += ' ' + rec.marker_id;
          if (const auto* corners = std::get_if<std::array<double, 8>>(&rec.payload)) {
            append_values(out, *corners);
          } else {
            append_values(out, std::get<PoseValues>(rec.payload).values);
          }
        } else if constexpr (std::is_same_v<T, CalRecord>) {
          check_identifier(rec.tool_marker_id, "marker id");
          head("CAL");
          out += ' ' + rec.tool_marker_id + ' ' + std::string(to_string(rec.method));
          append_values(out, rec.pose.values);
          out += ' ' + text::format_double(rec.rms_residual);
        } else if constexpr (std::is_same_v<T, RegRecord>) {
          check_identifier(rec.label, "label");
          head("REG");
          out += ' ' + rec.label;
          append_values(out, rec.pose.values);
          out += ' ' + text::format_double(rec.fre) + ' ' + std::to_string(rec.point_count);
        } else if constexpr (std::is_same_v<T, LmRecord>) {
          check_identifier(rec.label, "label");
          head("LM");
          out += ' ' + rec.label + ' ' + std::string(to_string(rec.frame));
          append_values(out, rec.position);
        } else {
          check_identifier(rec.label, "label");
          head("TRAJ");
          out += ' ' + rec.label;
          append_values(out, rec.entry);
          append_values(out, rec.exit);
        }
      },
      r);
  return out;
}

Record parse_record(std::string_view line, std::size_t line_number) {
  LineParser p{text::split_ws(line), line_number};
  if (p.tokens.size() < 2) p.fail("record needs a type and a timestamp");
  Micros t = 0;
  if (!text::parse_micros(p.tokens[1], t)) p.fail("bad timestamp '" + std::string(p.tokens[1]) + "'");
  const std::string_view type = p.tokens[0];

  if (type == "CAM") {
    p.expect(9, type);
    return CamRecord{t, p.pose(2)};
  }
  if (type == "OBS") {
    if (p.tokens.size() == 11) return ObsRecord{t, std::string(p.tokens[2]), p.reals<8>(3)};
    if (p.tokens.size() == 10) return ObsRecord{t, std::string(p.tokens[2]), p.pose(3)};
    p.fail("OBS record needs 8 corner values or 7 pose values");
  }
  if (type == "CAL") {
    p.expect(12, type);
    auto method = calibration_method_from_string(p.tokens[3]);
    if (!method) p.fail("unknown calibration method '" + std::string(p.tokens[3]) + "'");
    double rms = p.real(11);
    if (rms < 0.0) p.fail("negative rms residual");
    return CalRecord{t, std::string(p.tokens[2]), *method, p.pose(4), rms};
  }
  if (type == "REG") {
    p.expect(12, type);
    double fre = p.real(10);
    std::uint64_t n = 0;
    auto tok = p.tokens[11];
    auto res = std::from_chars(tok.data(), tok.data() + tok.size(), n);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) p.fail("bad point count");
    return RegRecord{t, std::string(p.tokens[2]), p.pose(3), fre, n};
  }
  if (type == "LM") {
    p.expect(7, type);
    LandmarkFrame frame;
    if (p.tokens[3] == "image") {
      frame = LandmarkFrame::Image;
    } else if (p.tokens[3] == "patient") {
      frame = LandmarkFrame::Patient;
    } else {
      p.fail("landmark frame must be 'image' or 'patient'");
    }
    return LmRecord{t, std::string(p.tokens[2]), frame, p.reals<3>(4)};
  }
  if (type == "TRAJ") {
    p.expect(9, type);
    return TrajRecord{t, std::string(p.tokens[2]), p.reals<3>(3), p.reals<3>(6)};
  }
  p.fail("unknown record type '" + std::string(type) + "'");
}

void RecordWriter::comment(std::string_view text) { *out_ << "# " << text << '\n'; }

void RecordWriter::record(const Record& r) {
  Micros t = record_time(r);
  if (last_ && t < *last_) {
    throw Error(ErrorCode::OutOfOrder, "record at " + text::format_micros(t) + " precedes " +
                                           text::format_micros(*last_));
  }
  std::string line = format_record(r);
  *out_ << line << '\n';
  last_ = t;
}

std::vector<Record> replay(std::string_view text) {
  std::vector<Record> out;
  std::optional<Micros> last;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    ++line_no;
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) {
      throw ParseError(line_no, "truncated final line (no terminating newline)");
    }
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    auto first = line.find_first_not_of(" \t");
    if (first == std::string_view::npos || line[first] == '#') continue;
    Record r = parse_record(line, line_no);
    Micros t = record_time(r);
    if (last && t < *last) throw ParseError(line_no, "timestamp goes backwards");
    last = t;
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace navkit
