// hguide: command-line front end for the haptic guidance toolkit.
// Exit codes: 0 success, 1 domain or data error, 2 usage error.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "haptic_guide/haptic_guide.hpp"

namespace fs = std::filesystem;
using namespace hg;

namespace {

constexpr int kExitDomain = 1;
constexpr int kExitUsage = 2;

// Raised for malformed user-supplied scripts; maps to the usage exit code.
class UsageError : public Error {
  using Error::Error;
};

std::string num(double v) {
  std::string s;
  append_number(s, v);
  return s;
}

DeviceConfig load_config(const std::string& path) {
  if (path.empty()) return {};
  return load_device_config(path);
}

int cmd_fk(const DeviceConfig& cfg, double theta1_deg, double theta2_deg) {
  const PlanarPoint p = forward_kinematics(cfg.pantograph, {deg2rad(theta1_deg), deg2rad(theta2_deg)});
  std::cout << "u_mm=" << num(p.u) << " v_mm=" << num(p.v) << "\n";
  return 0;
}

int cmd_ik(const DeviceConfig& cfg, double u_mm, double v_mm) {
  const JointAngles q = inverse_kinematics(cfg.pantograph, {u_mm, v_mm});
  std::cout << "theta1_deg=" << num(rad2deg(q.theta1)) << " theta2_deg=" << num(rad2deg(q.theta2)) << "\n";
  return 0;
}

int cmd_force_map(const DeviceConfig& cfg, const GridSpec& grid, const fs::path& out) {
  const auto cells = force_map(cfg.pantograph, grid);
  std::string csv = "u_mm,v_mm,force_N,reachable\n";
  for (const auto& c : cells) {
    append_number(csv, c.p.u);
    csv += ",";
    append_number(csv, c.p.v);
    csv += ",";
    append_number(csv, c.force_n);
    csv += c.reachable ? ",1\n" : ",0\n";
  }
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  write_text_file(out, csv);
  const PlanarPoint center = workspace_center(cfg.pantograph, cfg.cue.region_radius_mm);
  std::cout << "wrote " << cells.size() << " cells to " << out.string() << "\n"
            << "workspace_center u_mm=" << num(center.u) << " v_mm=" << num(center.v)
            << " force_N=" << num(isotropic_force(cfg.pantograph, center)) << "\n";
  return 0;
}

struct ScriptedCue {
  CueSpec spec;
  double start_time_s = 0.0;
};

std::vector<ScriptedCue> default_script(const DeviceConfig& cfg) {
  std::vector<ScriptedCue> cues;
  double start = 0.0;
  for (Direction d : kAllDirections) {
    cues.push_back({cfg.cue.spec(d), start});
    start += cfg.cue.spec(d).duration_s() + cfg.loop.settle_tail_s;
  }
  return cues;
}

std::vector<ScriptedCue> load_script(const fs::path& path, const DeviceConfig& cfg) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(detail::read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw UsageError("cue script '" + path.string() + "' is not valid JSON: " + e.what());
  }
  if (!j.is_array()) throw UsageError("cue script must be a JSON array of cue objects");
  std::vector<ScriptedCue> cues;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto& e = j[i];
    const std::string where = "cue script entry " + std::to_string(i);
    if (!e.is_object()) throw UsageError(where + " is not an object");
    ScriptedCue c{cfg.cue.spec(Direction::Up), 0.0};
    for (const auto& [key, value] : e.items()) {
      if (key == "direction") {
        if (!value.is_string()) throw UsageError(where + ": direction must be a string");
        const auto d = parse_direction(value.get<std::string>());
        if (!d) throw UsageError(where + ": unknown direction '" + value.get<std::string>() + "'");
        c.spec.direction = *d;
        continue;
      }
      double* target = key == "amplitude_mm"  ? &c.spec.amplitude_mm
                       : key == "ramp_out_s"  ? &c.spec.ramp_out_s
                       : key == "hold_s"      ? &c.spec.hold_s
                       : key == "ramp_back_s" ? &c.spec.ramp_back_s
                       : key == "start_time_s" ? &c.start_time_s
                                               : nullptr;
      if (!target) throw UsageError(where + ": unknown key '" + key + "'");
      if (!value.is_number()) throw UsageError(where + ": " + key + " must be a number");
      *target = value.get<double>();
    }
    if (!e.contains("direction")) throw UsageError(where + ": missing direction");
    try {
      c.spec.validate();
    } catch (const InvalidConfig& err) {
      throw UsageError(where + ": " + err.what());
    }
    cues.push_back(c);
  }
  return cues;
}

int cmd_simulate(const DeviceConfig& cfg, const std::string& script, const fs::path& out) {
  const auto cues = script.empty() ? default_script(cfg) : load_script(script, cfg);
  for (const auto& c : cues) {
    const auto report = validate_cue_region(c.spec, cfg.pantograph, cfg.cue.region_radius_mm);
    if (!report.ok()) {
      const auto& v = report.violations.front();
      throw OutOfWorkspace("cue " + std::string(to_string(c.spec.direction)) +
                           " leaves the workspace (validate_cue_region: " + v.reason + " at t=" + num(v.t) + " s)");
    }
  }
  fs::create_directories(out);
  nlohmann::ordered_json summary = nlohmann::ordered_json::array();
  std::map<std::string, int> used;
  for (const auto& c : cues) {
    const TrackingResult r = track_trajectory(c.spec, cfg.pantograph, cfg.gains, cfg.loop, cfg.cue.region_radius_mm);
    std::string name = "track_" + std::string(to_string(c.spec.direction));
    if (const int k = ++used[name]; k > 1) name += "_" + std::to_string(k);
    name += ".csv";
    std::string csv =
        "t_s,ref_left_u,ref_left_v,act_left_u,act_left_v,ref_right_u,ref_right_v,act_right_u,act_right_v,i_left_A,"
        "i_right_A\n";
    for (const auto& s : r.samples) {
      const double row[] = {c.start_time_s + s.t, s.ref_left.u,  s.ref_left.v,  s.act_left.u,
                            s.act_left.v,         s.ref_right.u, s.ref_right.v, s.act_right.u,
                            s.act_right.v,        s.i_left,      s.i_right};
      for (std::size_t k = 0; k < std::size(row); ++k) {
        if (k) csv += ",";
        append_number(csv, row[k]);
      }
      csv += "\n";
    }
    write_text_file(out / name, csv);
    summary.push_back({{"direction", to_string(c.spec.direction)},
                       {"file", name},
                       {"start_time_s", c.start_time_s},
                       {"max_error_mm", r.max_error_mm},
                       {"rms_error_mm", r.rms_error_mm},
                       {"max_error_u_mm", r.max_error_u_mm},
                       {"max_error_v_mm", r.max_error_v_mm},
                       {"saturation_fraction", r.saturation_fraction}});
    std::cout << to_string(c.spec.direction) << ": max_error_mm=" << num(r.max_error_mm)
              << " rms_error_mm=" << num(r.rms_error_mm) << " saturation=" << num(r.saturation_fraction) << "\n";
  }
  write_text_file(out / "summary.json", summary.dump(2) + "\n");
  return 0;
}

int cmd_synth(const DeviceConfig& cfg, int subjects, std::uint64_t seed, const fs::path& out) {
  StudyRecipe recipe;
  if (subjects != 20) {
    recipe.n_fast = (subjects * 13 + 10) / 20;
    recipe.n_slow = subjects - recipe.n_fast;
  }
  recipe.motion.rate_hz = cfg.analysis.tracker_rate_hz;
  recipe.motion.sensor_to_handle = cfg.sensor_to_handle.offset();
  const StudyData data = synth_study(recipe, seed);
  write_study(data, out);
  std::cout << "wrote " << data.profiles.size() << " subjects (" << recipe.n_fast << " Fast, " << recipe.n_slow
            << " Slow), " << data.movements.size() << " movement trials, " << data.choices.size()
            << " choice trials to " << out.string() << "\n";
  return 0;
}

int cmd_analyze(const DeviceConfig& cfg, const fs::path& logs_dir, const fs::path& out) {
  if (!fs::is_directory(logs_dir)) throw EmptyFile("no trials found: '" + logs_dir.string() + "' is not a directory");
  const StudyLogs logs = load_study_dir(logs_dir);
  const StudySummary s = summarize_study(logs, cfg.analysis_params());
  write_report(s, out);
  if (s.confusion) std::cout << "overall_percent_correct=" << num(s.confusion->overall_percent_correct) << "\n";
  if (s.mixture)
    std::cout << "delay_mixture_means_s=" << num(s.mixture->means[0]) << "," << num(s.mixture->means[1]) << "\n";
  if (s.clusters) std::cout << "clusters fast=" << s.clusters->sizes[0] << " slow=" << s.clusters->sizes[1] << "\n";
  std::cout << "report written to " << out.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Haptic guidance toolkit: pantograph kinematics, cue simulation, study synthesis and analysis"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "Device config JSON (see default-config)")
      ->envname(kConfigEnvVar)
      ->check(CLI::ExistingFile);

  double theta1 = 0.0, theta2 = 0.0;
  auto* fk = app.add_subcommand("fk", "Forward kinematics: joint angles (deg) -> end-effector point (mm)");
  fk->add_option("--theta1-deg", theta1, "Motor 1 angle, degrees")->required();
  fk->add_option("--theta2-deg", theta2, "Motor 2 angle, degrees")->required();

  double u = 0.0, v = 0.0;
  auto* ik = app.add_subcommand("ik", "Inverse kinematics: end-effector point (mm) -> joint angles (deg)");
  ik->add_option("--u-mm", u, "Lateral coordinate, mm")->required();
  ik->add_option("--v-mm", v, "Distal coordinate, mm (negative: below the motor axis line)")->required();

  GridSpec grid;
  int resolution = 100;
  std::string map_out = "force_map.csv";
  auto* fm = app.add_subcommand("force-map", "Isotropic force (N) over a grid of end-effector points (mm)");
  fm->add_option("--u-min-mm", grid.u_min, "Grid lower u bound, mm")->capture_default_str();
  fm->add_option("--u-max-mm", grid.u_max, "Grid upper u bound, mm")->capture_default_str();
  fm->add_option("--v-min-mm", grid.v_min, "Grid lower v bound, mm")->capture_default_str();
  fm->add_option("--v-max-mm", grid.v_max, "Grid upper v bound, mm")->capture_default_str();
  fm->add_option("--resolution", resolution, "Nodes per axis")->capture_default_str()->check(CLI::Range(2, 100000));
  fm->add_option("--out", map_out, "Output CSV path")->capture_default_str();

  std::string script, sim_out = "simulation";
  auto* sim = app.add_subcommand("simulate", "Closed-loop rendering of cues; writes tracking CSVs (mm, A) + summary");
  sim->add_option("--script", script,
                  "JSON array of {direction, amplitude_mm, ramp_out_s, hold_s, ramp_back_s, start_time_s}; "
                  "default: all 8 cues with config defaults")
      ->check(CLI::ExistingFile);
  sim->add_option("--out", sim_out, "Output directory")->capture_default_str();

  int subjects = 20;
  std::uint64_t seed = 1;
  std::string synth_out = "study";
  auto* syn = app.add_subcommand("synth", "Generate a seeded synthetic study (poses in mm/deg, times in s)");
  syn->add_option("--subjects", subjects, "Number of subjects (split 13:7 Fast:Slow)")
      ->capture_default_str()
      ->check(CLI::Range(1, 10000));
  syn->add_option("--seed", seed, "Generator seed")->capture_default_str();
  syn->add_option("--out", synth_out, "Output directory")->capture_default_str();

  std::string logs_dir, report_out = "report";
  auto* ana = app.add_subcommand("analyze", "Analyze a study directory; writes report.json and CSV tables");
  ana->add_option("--logs", logs_dir, "Directory with movement*.csv, choices*.csv, subjects.csv")->required();
  ana->add_option("--out", report_out, "Report directory")->capture_default_str();

  std::string config_out;
  auto* def = app.add_subcommand("default-config", "Print the default device config (units in key names)");
  def->add_option("--out", config_out, "Write to this file instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    const DeviceConfig cfg = load_config(config_path);
    if (*fk) return cmd_fk(cfg, theta1, theta2);
    if (*ik) return cmd_ik(cfg, u, v);
    if (*fm) {
      grid.resolution_u = grid.resolution_v = resolution;
      return cmd_force_map(cfg, grid, map_out);
    }
    if (*sim) return cmd_simulate(cfg, script, sim_out);
    if (*syn) return cmd_synth(cfg, subjects, seed, synth_out);
    if (*ana) return cmd_analyze(cfg, logs_dir, report_out);
    if (*def) {
      const std::string text = emit_device_config(cfg);
      if (config_out.empty()) std::cout << text;
      else write_text_file(config_out, text);
      return 0;
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDomain;
  }
  return kExitUsage;
}
