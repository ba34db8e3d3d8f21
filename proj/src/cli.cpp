#include "navkit/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "navkit/config.hpp"
#include "navkit/error.hpp"
#include "navkit/files.hpp"
#include "navkit/metrics.hpp"
#include "navkit/records.hpp"
#include "navkit/session.hpp"
#include "navkit/simulator.hpp"
#include "navkit/text.hpp"

namespace navkit::cli {

namespace {

namespace fs = std::filesystem;

struct Options {
  std::string config;
  std::string in;
  std::string out;
  std::string ref;
  std::string targets;
  std::string tool;
  std::string reference;
  std::string label = "registration";
  std::string metric;
  std::string noise;
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  std::optional<int> points;
  bool trim = false;
};

void require_file(const std::string& path, const char* flag) {
  if (path.empty()) return;
  if (!fs::is_regular_file(path)) {
    throw Error(ErrorCode::IoError, std::string(flag) + ": no such file '" + path + "'");
  }
}

// Built-in desk phantom stands in when no configuration is given.
struct Context {
  std::optional<NavConfig> config;
  fs::path base_dir;
  Scenario scenario;
  CameraIntrinsics intrinsics;
};

Context load_context(const Options& o) {
  Context c;
  c.scenario = default_scenario();
  if (!o.config.empty()) {
    c.config = load_config(o.config);
    c.base_dir = fs::path(o.config).parent_path();
    c.scenario = scenario_from_config(*c.config, c.base_dir);
  }
  c.intrinsics = c.scenario.setup.intrinsics.value_or(default_intrinsics());
  return c;
}

void write_output(const Options& o, std::ostream& out, const std::string& text) {
  if (o.out.empty()) {
    out << text;
    return;
  }
  std::ofstream f(o.out, std::ios::binary);
  if (!f) throw Error(ErrorCode::IoError, "cannot write '" + o.out + "'");
  f << text;
  if (!f.flush()) throw Error(ErrorCode::IoError, "write to '" + o.out + "' failed");
}

SessionPipeline run_pipeline(const Context& c, const std::vector<Record>& records) {
  SessionPipeline p(c.scenario.markers, c.intrinsics);
  for (const auto& r : records) p.feed(r);
  p.flush();
  return p;
}

std::string find_role(const Context& c, MarkerRole role, const std::string& preferred) {
  if (!preferred.empty()) return preferred;
  for (const auto& m : c.scenario.markers) {
    if (m.role == role) return m.id;
  }
  throw Error(ErrorCode::ReferenceError, "no marker with role " + std::string(to_string(role)));
}

DivotSpec find_divot(const Context& c, const std::string& owner) {
  if (c.config) {
    for (const auto& t : c.config->tools) {
      if (t.marker == owner && t.divot_in_marker) return {owner, t.divot_in_marker->to_transform()};
    }
  }
  for (const DivotSpec* d : {&c.scenario.calibrator_hole, &c.scenario.reference_divot}) {
    if (d->owner_marker_id == owner) return *d;
  }
  throw Error(ErrorCode::ReferenceError, "no divot declared for marker '" + owner + "'");
}

void cmd_calibrate(const Options& o, CalibrationMethod method, std::ostream& out) {
  require_file(o.in, "--in");
  Context c = load_context(o);
  auto records = replay(read_text_file(o.in));
  auto session = run_pipeline(c, records);
  const std::string tool = find_role(c, MarkerRole::Tool, o.tool);
  if (!session.registry().contains(tool)) throw Error(ErrorCode::UnregisteredMarker, "unknown marker '" + tool + "'");

  ToolCalibration calib;
  if (method == CalibrationMethod::Pivot) {
    std::vector<PivotSample> samples;
    for (const auto& p : session.poses_of(tool)) samples.push_back({p.world, text::micros_to_seconds(p.time)});
    PivotOptions opts;
    opts.trim_outliers = o.trim;
    calib = to_tool_calibration(tool, pivot_calibrate(samples, opts));
  } else {
    const bool calibrator = method == CalibrationMethod::Calibrator;
    const std::string owner =
        find_role(c, calibrator ? MarkerRole::Calibrator : MarkerRole::Reference, o.reference);
    auto pairs = paired_poses(session, tool, owner);
    auto divot = find_divot(c, owner);
    calib = calibrator ? calibrate_with_calibrator(tool, pairs, divot) : calibrate_marker_to_marker(tool, pairs, divot);
  }
  out << format_record(to_cal_record(session.last_time().value_or(0), calib)) << '\n';
}

LandmarkSet load_landmarks(const std::string& path) {
  const std::string text = read_text_file(path);
  try {
    return parse_landmark_file(text);
  } catch (const ParseError&) {
    // Fall back to the LM records of a recorded stream.
    LandmarkSet set;
    for (const auto& r : replay(text)) {
      if (const auto* lm = std::get_if<LmRecord>(&r)) {
        set.landmarks.push_back({lm->label, Point3(lm->position[0], lm->position[1], lm->position[2]), lm->frame});
      }
    }
    return set;
  }
}

MatchedPoints first_points(MatchedPoints m, const std::optional<int>& points) {
  if (!points) return m;
  if (*points < 3 || static_cast<std::size_t>(*points) > m.model.size()) {
    throw Error(ErrorCode::InvalidArgument, "--points must lie in [3, " + std::to_string(m.model.size()) + "]");
  }
  const auto n = static_cast<std::size_t>(*points);
  m.labels.resize(n);
  m.model.resize(n);
  m.patient.resize(n);
  return m;
}

void cmd_register(const Options& o, std::ostream& out) {
  require_file(o.in, "--in");
  auto matched = first_points(match_by_order(load_landmarks(o.in)), o.points);
  auto result = point_based_register(matched.model, matched.patient);
  out << format_record(to_reg_record(0, o.label, result)) << '\n';
}

std::vector<NoiseModel> cli_conditions(const Options& o, const Context& c, std::uint64_t seed) {
  if (o.noise.empty()) {
    return c.config ? noise_conditions(*c.config, seed) : noise_conditions(NavConfig{}, seed);
  }
  std::vector<double> v;
  std::stringstream ss(o.noise);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    double x = 0.0;
    if (!text::parse_double(tok, x)) throw Error(ErrorCode::InvalidArgument, "--noise: bad value '" + tok + "'");
    v.push_back(x);
  }
  if (v.size() < 2 || v.size() > 3) {
    throw Error(ErrorCode::InvalidArgument, "--noise expects sigma_t,sigma_r[,sigma_px]");
  }
  NoiseModel n{"cli", v[0], v[1], std::nullopt, derive_seed(seed, 0)};
  if (v.size() == 3) n.sigma_px = v[2];
  n.validate();
  return {n};
}

void cmd_simulate(const Options& o, std::ostream& out) {
  require_file(o.config, "--config");
  Context c = load_context(o);
  const SimulationConfig sim = c.config && c.config->simulation ? *c.config->simulation : SimulationConfig{};
  const std::uint64_t seed = o.seed.value_or(sim.seed);
  const int trials = o.trials.value_or(sim.trials);
  const std::string metric = o.metric.empty() ? sim.metric : o.metric;
  if (trials < 1) throw Error(ErrorCode::InvalidArgument, "--trials must be at least 1");
  if (o.points) {
    if (*o.points < 0) throw Error(ErrorCode::InvalidArgument, "--points must be positive");
    c.scenario.registration_points = static_cast<std::size_t>(*o.points);
  }
  auto conditions = cli_conditions(o, c, seed);

  if (!o.out.empty()) {
    NoiseModel first = conditions.front();
    first.seed = derive_seed(first.seed, 0);
    std::ostringstream rec;
    RecordWriter writer(rec);
    writer.comment("navkit recording seed=" + std::to_string(seed) + " condition=" + first.name);
    for (const auto& r : simulate_recording(c.scenario, first, o.label)) writer.record(r);
    write_output(o, out, rec.str());
  }
  auto stats = run_monte_carlo(c.scenario, conditions, static_cast<std::size_t>(trials), metric);
  out << "# navkit simulate seed=" << seed << " trials=" << trials << " metric=" << metric << '\n';
  out << format_statistics_csv(stats);
}

void cmd_replay(const Options& o, std::ostream& out) {
  require_file(o.in, "--in");
  require_file(o.config, "--config");
  Context c = load_context(o);
  auto records = replay(read_text_file(o.in));
  SessionPipeline p(c.scenario.markers, c.intrinsics);
  for (const auto& r : records) p.feed(r);
  std::string text;
  for (const auto& r : p.finish(o.label)) text += format_record(r) + '\n';
  write_output(o, out, text);
}

template <class T>
const T& by_label(const std::vector<T>& items, const std::string& label, const std::string& path) {
  for (const auto& i : items) {
    if (i.label == label) return i;
  }
  throw Error(ErrorCode::ReferenceError, "'" + label + "' not found in " + path);
}

void cmd_metrics(const std::string& which, const Options& o, std::ostream& out) {
  require_file(o.in, "--in");
  require_file(o.ref, "--ref");
  using text::format_fixed;
  if (which == "trajectory" || which == "insertion") {
    auto measured = parse_trajectory_file(read_text_file(o.in));
    auto planned = parse_trajectory_file(read_text_file(o.ref));
    if (which == "trajectory") {
      out << "label,distance,angle\n";
      for (const auto& m : measured) {
        auto d = trajectory_deviation(m, by_label(planned, m.label, o.ref));
        out << m.label << ',' << format_fixed(d.distance, 6) << ',' << format_fixed(d.angle, 6) << '\n';
      }
    } else {
      out << "label,entry,exit,mean,angle\n";
      for (const auto& m : measured) {
        Vector3 dir = m.exit - m.entry;
        if (!(dir.norm() > 0.0)) throw Error(ErrorCode::DegenerateConfiguration, "tool line '" + m.label + "' has no length");
        auto e = insertion_error({m.entry, dir.normalized()}, by_label(planned, m.label, o.ref));
        out << m.label << ',' << format_fixed(e.entry, 6) << ',' << format_fixed(e.exit, 6) << ','
            << format_fixed(e.mean, 6) << ',' << format_fixed(e.angle, 6) << '\n';
      }
    }
  } else if (which == "incision") {
    auto drawn = parse_polyline_file(read_text_file(o.in));
    auto planned = parse_polyline_file(read_text_file(o.ref));
    out << "label,deviation\n";
    for (const auto& d : drawn) {
      out << d.label << ',' << format_fixed(incision_deviation(d, by_label(planned, d.label, o.ref)), 6) << '\n';
    }
  } else {
    auto fid = first_points(match_by_order(load_landmarks(o.in)), o.points);
    auto reg = point_based_register(fid.model, fid.patient);
    out << "n,fre,tre\n" << reg.point_count << ',' << format_fixed(reg.fre, 6) << ',';
    if (o.ref.empty()) {
      out << '\n';
    } else {
      auto targets = match_by_order(load_landmarks(o.ref));
      out << format_fixed(tre(targets.model, targets.patient, reg.image_to_world), 6) << '\n';
    }
  }
}

void cmd_validate(const std::string& path, std::ostream& out) {
  require_file(path, "config");
  NavConfig c = load_config(path);
  out << "ok markers=" << c.markers.size() << " tools=" << c.tools.size() << " models=" << c.models.size() << '\n';
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Marker-based navigation toolkit", "navkit"};
  app.require_subcommand(1);
  Options o;
  std::function<void()> action;

  auto add_config = [&](CLI::App* sub) {
    sub->add_option("--config,--scenario", o.config, "Configuration file");
  };

  auto* calibrate = app.add_subcommand("calibrate", "Tool-tip calibration from a recording");
  calibrate->require_subcommand(1);
  struct CalibrateKind {
    const char* name;
    CalibrationMethod method;
    const char* help;
  };
  for (auto [name, method, help] :
       {CalibrateKind{"pivot", CalibrationMethod::Pivot, "Least-squares pivot about a fixed tip point"},
        CalibrateKind{"calibrator", CalibrationMethod::Calibrator, "Tip seated in the calibration block hole"},
        CalibrateKind{"marker", CalibrationMethod::MarkerToMarker, "Tip seated in the reference marker divot"}}) {
    auto* sub = calibrate->add_subcommand(name, help);
    sub->add_option("--in", o.in, "Recorded stream")->required();
    add_config(sub);
    sub->add_option("--tool", o.tool, "Tool marker id");
    if (method == CalibrationMethod::Pivot) {
      sub->add_flag("--trim", o.trim, "Drop samples with residual above 3x the median and re-solve");
    } else {
      sub->add_option("--reference", o.reference, "Marker owning the hole or divot");
    }
    sub->callback([&, method] { action = [&, method] { cmd_calibrate(o, method, out); }; });
  }

  auto* reg = app.add_subcommand("register", "Point-based registration from landmark pairs");
  reg->add_option("--in", o.in, "Landmark file or recorded stream")->required();
  reg->add_option("--points", o.points, "Use the first N landmark pairs");
  reg->add_option("--label", o.label, "Label of the REG record");
  reg->callback([&] { action = [&] { cmd_register(o, out); }; });

  auto* sim = app.add_subcommand("simulate", "Monte-Carlo statistics, optionally writing one recorded session");
  add_config(sim);
  sim->add_option("--seed", o.seed, "Global seed");
  sim->add_option("--trials", o.trials, "Trials per condition");
  sim->add_option("--noise", o.noise, "sigma_t,sigma_r[,sigma_px] replacing the configured conditions");
  sim->add_option("--points", o.points, "Registration landmarks per trial");
  sim->add_option("--metric", o.metric, "Metric name");
  sim->add_option("--out", o.out, "Write a recording of the first condition here");
  sim->callback([&] { action = [&] { cmd_simulate(o, out); }; });

  auto* rep = app.add_subcommand("replay", "Re-derive calibration and registration records from a recording");
  rep->add_option("--in", o.in, "Recorded stream")->required();
  add_config(rep);
  rep->add_option("--out", o.out, "Output file instead of stdout");
  rep->add_option("--label", o.label, "Label of the REG record");
  rep->callback([&] { action = [&] { cmd_replay(o, out); }; });

  auto* metrics = app.add_subcommand("metrics", "Accuracy metrics between measured and planned geometry");
  metrics->require_subcommand(1);
  for (auto [name, help] : {std::pair{"trajectory", "Endpoint distance and angle per labeled trajectory"},
                            std::pair{"insertion", "Tool line (TRAJ file) against planned trajectories"},
                            std::pair{"incision", "Drawn polylines against planned incision lines"},
                            std::pair{"tre", "FRE of a landmark registration, TRE on held-out targets"}}) {
    auto* sub = metrics->add_subcommand(name, help);
    sub->add_option("--in", o.in, "Measured input")->required();
    const bool tre = std::string_view(name) == "tre";
    auto* ref = sub->add_option("--ref", o.ref, tre ? "Held-out target pairs" : "Planned reference");
    if (!tre) ref->required();
    if (tre) sub->add_option("--points", o.points, "Use the first N fiducial pairs");
    std::string n = name;
    sub->callback([&, n] { action = [&, n] { cmd_metrics(n, o, out); }; });
  }

  auto* val = app.add_subcommand("validate-config", "Check a configuration file");
  val->add_option("path,--config", o.config, "Configuration file");
  val->callback([&] { action = [&] { cmd_validate(o.config, out); }; });

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "navkit: usage: " << e.what() << '\n';
    return 1;
  }
  if (val->parsed() && o.config.empty()) {
    err << "navkit: usage: validate-config needs a file\n";
    return 1;
  }

  try {
    action();
  } catch (const Error& e) {
    err << "navkit: " << e.what() << '\n';
    return is_input_error(e.code()) ? 2 : 3;
  } catch (const std::exception& e) {
    err << "navkit: " << e.what() << '\n';
    return 3;
  }
  return 0;
}

}  // namespace navkit::cli
