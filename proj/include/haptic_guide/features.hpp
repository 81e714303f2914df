#pragma once

// Per-trial features: handle-frame displacement series, motion delay (first
// acceleration peak in any DOF after cue onset) and signed peak excursions.

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

#include "haptic_guide/errors.hpp"
#include "haptic_guide/pose.hpp"
#include "haptic_guide/signal.hpp"
#include "haptic_guide/trial_log.hpp"

namespace hg {

struct AnalysisParams {
  double tracker_rate_hz = 80.0;
  bool smoothing = true;
  double lowpass_cutoff_hz = 8.0;
  double lever_arm_mm = 100.0;        // rotational channels: 1 deg ~ lever * pi/180 mm
  double delay_threshold_factor = 5.0;
  double min_noise_floor_mm_s2 = 20.0;
  double baseline_window_s = 0.2;
  double cue_onset_s = 0.0;
  double alpha = 0.01;  // family-wise level for pairwise comparisons
  RigidOffset sensor_to_handle = RigidOffset::from_euler({0.0, 0.0, 60.0}, 0.0, 0.0, 0.0);

  void validate() const {
    if (!(tracker_rate_hz > 0.0)) throw InvalidConfig("tracker rate must be positive");
    if (smoothing && !(lowpass_cutoff_hz > 0.0 && lowpass_cutoff_hz < 0.5 * tracker_rate_hz))
      throw InvalidConfig("low-pass cutoff must lie in (0, Nyquist)");
    if (!(lever_arm_mm > 0.0)) throw InvalidConfig("lever arm must be positive");
    if (!(delay_threshold_factor > 0.0) || !(min_noise_floor_mm_s2 >= 0.0))
      throw InvalidConfig("delay threshold parameters invalid");
    if (!(baseline_window_s > 0.0)) throw InvalidConfig("baseline window must be positive");
    if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidConfig("alpha must lie in (0, 1)");
    sensor_to_handle.validate();
  }
};

struct TrialKinematics {
  std::vector<double> t;
  std::array<std::vector<double>, kNumDof> disp;  // mm / deg, re-zeroed to the pre-cue mean
  std::array<std::vector<double>, kNumDof> vel;
  std::array<std::vector<double>, kNumDof> acc;
  double dt = 0.0;
};

inline double rotational_scale_mm_per_deg(const AnalysisParams& params) {
  return params.lever_arm_mm * std::numbers::pi / 180.0;
}

inline TrialKinematics kinematics_of_trial(const TrialRecord& trial, const AnalysisParams& params = {}) {
  const std::size_t n = trial.samples.size();
  if (n < 5) throw TooShort("trial needs at least 5 samples");
  TrialKinematics k;
  k.t.reserve(n);
  std::array<std::vector<double>, kNumDof> raw;
  for (auto& ch : raw) ch.reserve(n);
  for (const auto& s : trial.samples) {
    const Pose6 h = to_handle_frame(s, params.sensor_to_handle);
    k.t.push_back(h.t);
    const auto v = h.values();
    for (int d = 0; d < kNumDof; ++d) {
      double value = v[d];
      if (is_rotational(static_cast<Dof>(d)) && !raw[d].empty())
        value = raw[d].back() + normalize_deg(value - raw[d].back());  // unwrap
      raw[d].push_back(value);
    }
  }
  k.dt = (k.t.back() - k.t.front()) / static_cast<double>(n - 1);

  const double onset = params.cue_onset_s;
  for (int d = 0; d < kNumDof; ++d) {
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (k.t[i] >= onset - params.baseline_window_s && k.t[i] < onset) {
        sum += raw[d][i];
        ++count;
      }
    const double baseline = count ? sum / static_cast<double>(count) : raw[d][0];
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = raw[d][i] - baseline;
    if (params.smoothing) {
      const auto lp = Biquad::butterworth_lowpass(params.lowpass_cutoff_hz, 1.0 / k.dt);
      x = filtfilt(lp, x);
    }
    k.vel[d] = first_difference(x, k.dt);
    k.acc[d] = second_difference(x, k.dt);
    k.disp[d] = std::move(x);
  }
  return k;
}

// Time from cue onset to the first local maximum of |acceleration| in any DOF
// that exceeds factor * pre-cue noise floor. Rotational channels are scaled
// to mm by the lever arm; the floor is the RMS over all channels in the
// baseline window. Refined by a parabola through the peak and neighbours.
inline double detect_delay(const TrialKinematics& k, double cue_onset_s, const AnalysisParams& params = {}) {
  const std::size_t n = k.t.size();
  const double rot = rotational_scale_mm_per_deg(params);
  auto mag = [&](int d, std::size_t i) {
    return std::abs(k.acc[d][i]) * (is_rotational(static_cast<Dof>(d)) ? rot : 1.0);
  };

  double sq = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (k.t[i] >= cue_onset_s - params.baseline_window_s && k.t[i] < cue_onset_s)
      for (int d = 0; d < kNumDof; ++d) {
        sq += mag(d, i) * mag(d, i);
        ++count;
      }
  const double floor = count ? std::sqrt(sq / static_cast<double>(count)) : 0.0;
  const double threshold = params.delay_threshold_factor * std::max(floor, params.min_noise_floor_mm_s2);

  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (k.t[i] < cue_onset_s) continue;
    std::optional<int> hit;
    for (int d = 0; d < kNumDof; ++d) {
      const double y0 = mag(d, i);
      if (y0 >= threshold && y0 >= mag(d, i - 1) && y0 > mag(d, i + 1) && (!hit || y0 > mag(*hit, i))) hit = d;
    }
    if (!hit) continue;
    const double ym = mag(*hit, i - 1), y0 = mag(*hit, i), yp = mag(*hit, i + 1);
    const double curvature = ym - 2.0 * y0 + yp;
    const double shift = curvature < 0.0 ? std::clamp(0.5 * (ym - yp) / curvature, -0.5, 0.5) : 0.0;
    return std::max(0.0, k.t[i] + shift * k.dt - cue_onset_s);
  }
  throw NoMotionDetected("no acceleration peak above threshold after cue onset");
}

using PeakVector = std::array<double, kNumDof>;

// Signed value of the largest |displacement| per DOF within [t0, t1].
inline PeakVector peak_displacement(const TrialKinematics& k, double t0, double t1) {
  PeakVector peak{};
  bool any = false;
  for (std::size_t i = 0; i < k.t.size(); ++i) {
    if (k.t[i] < t0 || k.t[i] > t1) continue;
    any = true;
    for (int d = 0; d < kNumDof; ++d)
      if (std::abs(k.disp[d][i]) > std::abs(peak[d])) peak[d] = k.disp[d][i];
  }
  if (!any) throw TooShort("peak window contains no samples");
  return peak;
}

struct TrialFeatures {
  int subject_id = 0;
  int part = 1;
  int trial_index = 0;
  Direction cue = Direction::Forward;
  int repeats = 0;
  std::optional<double> delay_s;  // empty when no motion was detected
  PeakVector peak{};
};

inline TrialFeatures extract_features(const TrialRecord& trial, const AnalysisParams& params = {}) {
  const TrialKinematics k = kinematics_of_trial(trial, params);
  TrialFeatures f{trial.subject_id, trial.part, trial.trial_index, trial.cue, trial.repeats, std::nullopt, {}};
  try {
    f.delay_s = detect_delay(k, params.cue_onset_s, params);
  } catch (const NoMotionDetected&) {
  }
  f.peak = peak_displacement(k, params.cue_onset_s, k.t.back());
  return f;
}

}  // namespace hg
