#pragma once

// Sampled-data simulation of the geared DC motors under the PD current law
//
//   i = (kp * theta_err + kd * dtheta_err) / (N * kt)
//
// with an encoder-quantized position measurement, a filtered backward
// difference for the derivative term and a semi-implicit Euler plant.

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "haptic_guide/cues.hpp"
#include "haptic_guide/errors.hpp"
#include "haptic_guide/kinematics.hpp"

namespace hg {

struct ControllerGains {
  double kp_nm_per_rad = 5.5;
  double kd_nm_s_per_rad = 0.004;

  void validate() const {
    if (!(kp_nm_per_rad > 0.0) || !(kd_nm_s_per_rad >= 0.0))
      throw InvalidConfig("controller gains must satisfy kp > 0, kd >= 0");
  }
};

struct LoopConfig {
  double control_rate_hz = 830.0;
  double reflected_inertia_kg_m2 = 1e-5;
  double viscous_damping_nm_s_per_rad = 1e-5;
  double derivative_cutoff_hz = 50.0;
  double settle_tail_s = 0.2;            // simulated time past the cue end
  double velocity_limit_rad_per_s = 1e4;  // blow-up sanity bound

  double period_s() const { return 1.0 / control_rate_hz; }

  void validate() const {
    if (!(control_rate_hz > 0.0)) throw InvalidConfig("control rate must be positive");
    if (!(reflected_inertia_kg_m2 > 0.0)) throw InvalidConfig("reflected inertia must be positive");
    if (!(viscous_damping_nm_s_per_rad >= 0.0)) throw InvalidConfig("damping must be non-negative");
    if (!(derivative_cutoff_hz > 0.0)) throw InvalidConfig("derivative cutoff must be positive");
    if (!(settle_tail_s >= 0.0)) throw InvalidConfig("settle tail must be non-negative");
  }
};

struct MotorState {
  double theta_out = 0.0;  // rad
  double omega_out = 0.0;  // rad/s
  double time = 0.0;       // s
  long long encoder_count = 0;
};

struct CurrentCommand {
  double current_a = 0.0;
  double unclamped_a = 0.0;
  bool saturated = false;
};

inline CurrentCommand pd_current(const ControllerGains& gains, const PantographConfig& cfg, double theta_err,
                                 double theta_err_rate) {
  const double raw = (gains.kp_nm_per_rad * theta_err + gains.kd_nm_s_per_rad * theta_err_rate) /
                     (cfg.gear_ratio * cfg.torque_constant_nm_per_a);
  const double lim = cfg.current_limit_a;
  const double clamped = std::clamp(raw, -lim, lim);
  return {clamped, raw, clamped != raw};
}

inline double counts_per_output_rev(const PantographConfig& cfg) {
  return cfg.encoder_counts_per_rev * cfg.quadrature_multiplier * cfg.gear_ratio;
}

inline long long encoder_read(const PantographConfig& cfg, double theta_out) {
  return static_cast<long long>(std::floor(theta_out / (2.0 * std::numbers::pi) * counts_per_output_rev(cfg)));
}

inline double encoder_angle(const PantographConfig& cfg, long long counts) {
  return static_cast<double>(counts) * (2.0 * std::numbers::pi) / counts_per_output_rev(cfg);
}

inline MotorState plant_step(const MotorState& state, double i_cmd, double dt, const LoopConfig& loop,
                             const PantographConfig& cfg) {
  if (!(dt > 0.0)) throw InvalidConfig("plant step requires dt > 0");
  const double i = std::clamp(i_cmd, -cfg.current_limit_a, cfg.current_limit_a);
  const double torque = cfg.gearbox_efficiency * cfg.gear_ratio * cfg.torque_constant_nm_per_a * i -
                        loop.viscous_damping_nm_s_per_rad * state.omega_out;
  MotorState next = state;
  next.omega_out += torque / loop.reflected_inertia_kg_m2 * dt;
  next.theta_out += next.omega_out * dt;
  next.time += dt;
  if (!std::isfinite(next.omega_out) || std::abs(next.omega_out) > loop.velocity_limit_rad_per_s)
    throw NumericalBlowup("motor velocity exceeded sanity bound; check dt and plant parameters");
  next.encoder_count = encoder_read(cfg, next.theta_out);
  return next;
}

// One motor's PD loop: count-domain error, filtered backward difference.
class JointController {
 public:
  JointController(const ControllerGains& gains, const PantographConfig& cfg, const LoopConfig& loop)
      : gains_(gains), cfg_(cfg), dt_(loop.period_s()) {
    const double tau = 1.0 / (2.0 * std::numbers::pi * loop.derivative_cutoff_hz);
    alpha_ = dt_ / (dt_ + tau);
  }

  CurrentCommand update(double theta_ref, long long measured_count) {
    const long long ref_count = encoder_read(cfg_, theta_ref);
    const double err = encoder_angle(cfg_, ref_count - measured_count);
    const double raw_rate = primed_ ? (err - last_err_) / dt_ : 0.0;
    rate_ += alpha_ * (raw_rate - rate_);
    last_err_ = err;
    primed_ = true;
    return pd_current(gains_, cfg_, err, rate_);
  }

 private:
  ControllerGains gains_;
  PantographConfig cfg_;
  double dt_;
  double alpha_ = 1.0;
  double last_err_ = 0.0;
  double rate_ = 0.0;
  bool primed_ = false;
};

struct TrackingSample {
  double t = 0.0;
  PlanarPoint ref_left, act_left, ref_right, act_right;
  double i_left = 0.0;   // A, motor 1 of the left pantograph
  double i_right = 0.0;  // A, motor 1 of the right pantograph
};

struct TrackingResult {
  std::vector<TrackingSample> samples;
  double max_error_mm = 0.0;
  double rms_error_mm = 0.0;
  double max_error_u_mm = 0.0;
  double max_error_v_mm = 0.0;
  double saturation_fraction = 0.0;  // fraction of motor-steps saturated
};

// Closed-loop rendering of a cue on both pantographs, from cue onset to
// `settle_tail_s` past its end. The reference is the inverse kinematics of
// the cue waveform about the workspace center.
inline TrackingResult track_trajectory(const CueSpec& cue, const PantographConfig& cfg, const ControllerGains& gains,
                                       const LoopConfig& loop, double region_radius_mm = 3.0) {
  cue.validate();
  cfg.validate();
  gains.validate();
  loop.validate();
  const PlanarPoint center = workspace_center(cfg, region_radius_mm);
  const double dt = loop.period_s();
  const auto steps = static_cast<long>(std::ceil((cue.duration_s() + loop.settle_tail_s) / dt));

  auto reference = [&](double t) {
    const CueFrame f = cue_waveform(cue, t);
    return std::array<PlanarPoint, 2>{center + f.left_offset, center + f.right_offset};
  };

  std::array<std::array<MotorState, 2>, 2> motors{};
  std::array<std::array<JointController, 2>, 2> controllers{
      std::array<JointController, 2>{JointController(gains, cfg, loop), JointController(gains, cfg, loop)},
      std::array<JointController, 2>{JointController(gains, cfg, loop), JointController(gains, cfg, loop)}};
  {
    const auto ref0 = reference(0.0);
    for (int side = 0; side < 2; ++side) {
      const JointAngles q = inverse_kinematics(cfg, ref0[side]);
      motors[side][0] = {q.theta1, 0.0, 0.0, encoder_read(cfg, q.theta1)};
      motors[side][1] = {q.theta2, 0.0, 0.0, encoder_read(cfg, q.theta2)};
    }
  }

  TrackingResult result;
  result.samples.reserve(static_cast<std::size_t>(steps) + 1);
  double sq_sum = 0.0;
  long saturated = 0;
  for (long k = 0; k <= steps; ++k) {
    const double t = static_cast<double>(k) * dt;
    const auto ref = reference(t);
    TrackingSample sample;
    sample.t = t;
    std::array<std::array<double, 2>, 2> current{};
    std::array<PlanarPoint, 2> actual{};
    for (int side = 0; side < 2; ++side) {
      const JointAngles q_ref = inverse_kinematics(cfg, ref[side]);
      const std::array<double, 2> theta_ref{q_ref.theta1, q_ref.theta2};
      for (int m = 0; m < 2; ++m) {
        const CurrentCommand cmd = controllers[side][m].update(theta_ref[m], motors[side][m].encoder_count);
        current[side][m] = cmd.current_a;
        saturated += cmd.saturated ? 1 : 0;
      }
      actual[side] = forward_kinematics(cfg, {motors[side][0].theta_out, motors[side][1].theta_out});
      const PlanarPoint err = actual[side] - ref[side];
      const double e = norm(err);
      result.max_error_mm = std::max(result.max_error_mm, e);
      result.max_error_u_mm = std::max(result.max_error_u_mm, std::abs(err.u));
      result.max_error_v_mm = std::max(result.max_error_v_mm, std::abs(err.v));
      sq_sum += e * e;
    }
    sample.ref_left = ref[0];
    sample.ref_right = ref[1];
    sample.act_left = actual[0];
    sample.act_right = actual[1];
    sample.i_left = current[0][0];
    sample.i_right = current[1][0];
    result.samples.push_back(sample);

    for (int side = 0; side < 2; ++side)
      for (int m = 0; m < 2; ++m) motors[side][m] = plant_step(motors[side][m], current[side][m], dt, loop, cfg);
  }
  const double n = static_cast<double>(result.samples.size());
  result.rms_error_mm = std::sqrt(sq_sum / (2.0 * n));
  result.saturation_fraction = static_cast<double>(saturated) / (4.0 * n);
  return result;
}

}  // namespace hg
