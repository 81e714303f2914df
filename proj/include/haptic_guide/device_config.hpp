#pragma once

// Single hierarchical JSON document holding every tunable constant. Keys carry
// their unit; unknown keys are rejected; emit(parse(text)) is a fixed point.

#include <array>
#include <filesystem>
#include <set>
#include <string>

#include "json.hpp"

#include "haptic_guide/actuation.hpp"
#include "haptic_guide/cues.hpp"
#include "haptic_guide/errors.hpp"
#include "haptic_guide/features.hpp"
#include "haptic_guide/kinematics.hpp"
#include "haptic_guide/trial_log.hpp"

namespace hg {

inline constexpr const char* kConfigEnvVar = "HAPTIC_GUIDE_CONFIG";

struct CueDefaults {
  double amplitude_mm = 3.0;
  double ramp_out_s = 0.2;
  double hold_s = 0.6;
  double ramp_back_s = 0.5;
  RampShape shape = RampShape::MinimumJerk;
  double region_radius_mm = 3.0;

  CueSpec spec(Direction d) const { return {d, amplitude_mm, ramp_out_s, hold_s, ramp_back_s, shape}; }
};

// Sensor-to-handle offset kept as its Euler parameters so it re-emits exactly.
struct OffsetParams {
  double x_mm = 0.0, y_mm = 0.0, z_mm = 60.0;
  double yaw_deg = 0.0, pitch_deg = 0.0, roll_deg = 0.0;

  RigidOffset offset() const { return RigidOffset::from_euler({x_mm, y_mm, z_mm}, yaw_deg, pitch_deg, roll_deg); }
};

struct DeviceConfig {
  PantographConfig pantograph;
  ControllerGains gains;
  LoopConfig loop;
  CueDefaults cue;
  AnalysisParams analysis;  // sensor_to_handle is derived from `sensor_to_handle`
  OffsetParams sensor_to_handle;

  AnalysisParams analysis_params() const {
    AnalysisParams p = analysis;
    p.sensor_to_handle = sensor_to_handle.offset();
    return p;
  }

  void validate() const {
    pantograph.validate();
    gains.validate();
    loop.validate();
    cue.spec(Direction::Up).validate();
    if (!(cue.region_radius_mm >= 0.0)) throw InvalidConfig("cue region radius must be non-negative");
    analysis_params().validate();
  }
};

namespace detail {

class Section {
 public:
  Section(const nlohmann::json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) throw InvalidConfig("config section '" + name_ + "' must be an object");
  }

  void get(const char* key, double& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    const auto& v = j_.at(key);
    if (!v.is_number()) throw InvalidConfig(name_ + "." + key + " must be a number");
    out = v.get<double>();
  }
  void get(const char* key, bool& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    const auto& v = j_.at(key);
    if (!v.is_boolean()) throw InvalidConfig(name_ + "." + key + " must be a boolean");
    out = v.get<bool>();
  }
  void get(const char* key, std::string& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    const auto& v = j_.at(key);
    if (!v.is_string()) throw InvalidConfig(name_ + "." + key + " must be a string");
    out = v.get<std::string>();
  }
  const nlohmann::json* child(const char* key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }
  void finish() const {
    for (const auto& [key, _] : j_.items())
      if (!seen_.contains(key)) throw InvalidConfig("unknown config key '" + name_ + "." + key + "'");
  }

 private:
  const nlohmann::json& j_;
  std::string name_;
  std::set<std::string> seen_;
};

inline std::string shape_name(RampShape s) { return s == RampShape::Linear ? "linear" : "minimum_jerk"; }

}  // namespace detail

inline DeviceConfig parse_device_config(const nlohmann::json& j) {
  DeviceConfig c;
  detail::Section root(j, "config");
  if (const auto* p = root.child("pantograph")) {
    detail::Section s(*p, "pantograph");
    auto& k = c.pantograph;
    s.get("upper_link_mm", k.upper_link_mm);
    s.get("lower_link_mm", k.lower_link_mm);
    s.get("base_separation_mm", k.base_separation_mm);
    s.get("joint1_min_rad", k.joint_range[0].min);
    s.get("joint1_max_rad", k.joint_range[0].max);
    s.get("joint2_min_rad", k.joint_range[1].min);
    s.get("joint2_max_rad", k.joint_range[1].max);
    s.get("torque_constant_nm_per_a", k.torque_constant_nm_per_a);
    s.get("gear_ratio", k.gear_ratio);
    s.get("gearbox_efficiency", k.gearbox_efficiency);
    s.get("current_limit_a", k.current_limit_a);
    s.get("encoder_counts_per_rev", k.encoder_counts_per_rev);
    s.get("quadrature_multiplier", k.quadrature_multiplier);
    s.get("singularity_tolerance_mm2_per_rad2", k.singularity_tolerance);
    s.finish();
  }
  if (const auto* p = root.child("controller")) {
    detail::Section s(*p, "controller");
    s.get("kp_nm_per_rad", c.gains.kp_nm_per_rad);
    s.get("kd_nm_s_per_rad", c.gains.kd_nm_s_per_rad);
    s.finish();
  }
  if (const auto* p = root.child("loop")) {
    detail::Section s(*p, "loop");
    s.get("control_rate_hz", c.loop.control_rate_hz);
    s.get("reflected_inertia_kg_m2", c.loop.reflected_inertia_kg_m2);
    s.get("viscous_damping_nm_s_per_rad", c.loop.viscous_damping_nm_s_per_rad);
    s.get("derivative_cutoff_hz", c.loop.derivative_cutoff_hz);
    s.get("settle_tail_s", c.loop.settle_tail_s);
    s.get("velocity_limit_rad_per_s", c.loop.velocity_limit_rad_per_s);
    s.finish();
  }
  if (const auto* p = root.child("cue")) {
    detail::Section s(*p, "cue");
    s.get("amplitude_mm", c.cue.amplitude_mm);
    s.get("ramp_out_s", c.cue.ramp_out_s);
    s.get("hold_s", c.cue.hold_s);
    s.get("ramp_back_s", c.cue.ramp_back_s);
    s.get("region_radius_mm", c.cue.region_radius_mm);
    std::string shape = detail::shape_name(c.cue.shape);
    s.get("shape", shape);
    if (shape == "minimum_jerk") c.cue.shape = RampShape::MinimumJerk;
    else if (shape == "linear") c.cue.shape = RampShape::Linear;
    else throw InvalidConfig("cue.shape must be 'minimum_jerk' or 'linear'");
    s.finish();
  }
  if (const auto* p = root.child("analysis")) {
    detail::Section s(*p, "analysis");
    auto& a = c.analysis;
    s.get("tracker_rate_hz", a.tracker_rate_hz);
    s.get("smoothing", a.smoothing);
    s.get("lowpass_cutoff_hz", a.lowpass_cutoff_hz);
    s.get("lever_arm_mm", a.lever_arm_mm);
    s.get("delay_threshold_factor", a.delay_threshold_factor);
    s.get("min_noise_floor_mm_s2", a.min_noise_floor_mm_s2);
    s.get("baseline_window_s", a.baseline_window_s);
    s.get("cue_onset_s", a.cue_onset_s);
    s.get("alpha", a.alpha);
    if (const auto* q = s.child("sensor_to_handle")) {
      detail::Section o(*q, "analysis.sensor_to_handle");
      auto& t = c.sensor_to_handle;
      o.get("x_mm", t.x_mm);
      o.get("y_mm", t.y_mm);
      o.get("z_mm", t.z_mm);
      o.get("yaw_deg", t.yaw_deg);
      o.get("pitch_deg", t.pitch_deg);
      o.get("roll_deg", t.roll_deg);
      o.finish();
    }
    s.finish();
  }
  root.finish();
  c.validate();
  return c;
}

inline DeviceConfig parse_device_config(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidConfig(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_device_config(j);
}

inline nlohmann::ordered_json to_json(const DeviceConfig& c) {
  const auto& k = c.pantograph;
  const auto& a = c.analysis;
  const auto& t = c.sensor_to_handle;
  nlohmann::ordered_json j;
  j["pantograph"] = {{"upper_link_mm", k.upper_link_mm},
                     {"lower_link_mm", k.lower_link_mm},
                     {"base_separation_mm", k.base_separation_mm},
                     {"joint1_min_rad", k.joint_range[0].min},
                     {"joint1_max_rad", k.joint_range[0].max},
                     {"joint2_min_rad", k.joint_range[1].min},
                     {"joint2_max_rad", k.joint_range[1].max},
                     {"torque_constant_nm_per_a", k.torque_constant_nm_per_a},
                     {"gear_ratio", k.gear_ratio},
                     {"gearbox_efficiency", k.gearbox_efficiency},
                     {"current_limit_a", k.current_limit_a},
                     {"encoder_counts_per_rev", k.encoder_counts_per_rev},
                     {"quadrature_multiplier", k.quadrature_multiplier},
                     {"singularity_tolerance_mm2_per_rad2", k.singularity_tolerance}};
  j["controller"] = {{"kp_nm_per_rad", c.gains.kp_nm_per_rad}, {"kd_nm_s_per_rad", c.gains.kd_nm_s_per_rad}};
  j["loop"] = {{"control_rate_hz", c.loop.control_rate_hz},
               {"reflected_inertia_kg_m2", c.loop.reflected_inertia_kg_m2},
               {"viscous_damping_nm_s_per_rad", c.loop.viscous_damping_nm_s_per_rad},
               {"derivative_cutoff_hz", c.loop.derivative_cutoff_hz},
               {"settle_tail_s", c.loop.settle_tail_s},
               {"velocity_limit_rad_per_s", c.loop.velocity_limit_rad_per_s}};
  j["cue"] = {{"amplitude_mm", c.cue.amplitude_mm},
              {"ramp_out_s", c.cue.ramp_out_s},
              {"hold_s", c.cue.hold_s},
              {"ramp_back_s", c.cue.ramp_back_s},
              {"shape", detail::shape_name(c.cue.shape)},
              {"region_radius_mm", c.cue.region_radius_mm}};
  j["analysis"] = {{"tracker_rate_hz", a.tracker_rate_hz},
                   {"smoothing", a.smoothing},
                   {"lowpass_cutoff_hz", a.lowpass_cutoff_hz},
                   {"lever_arm_mm", a.lever_arm_mm},
                   {"delay_threshold_factor", a.delay_threshold_factor},
                   {"min_noise_floor_mm_s2", a.min_noise_floor_mm_s2},
                   {"baseline_window_s", a.baseline_window_s},
                   {"cue_onset_s", a.cue_onset_s},
                   {"alpha", a.alpha},
                   {"sensor_to_handle",
                    {{"x_mm", t.x_mm},
                     {"y_mm", t.y_mm},
                     {"z_mm", t.z_mm},
                     {"yaw_deg", t.yaw_deg},
                     {"pitch_deg", t.pitch_deg},
                     {"roll_deg", t.roll_deg}}}};
  return j;
}

inline std::string emit_device_config(const DeviceConfig& c) { return to_json(c).dump(2) + "\n"; }

inline DeviceConfig load_device_config(const std::filesystem::path& path) {
  return parse_device_config(detail::read_text_file(path));
}

}  // namespace hg
