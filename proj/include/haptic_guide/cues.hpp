#pragma once

// 4-DOF guidance cues rendered as synchronized left/right end-effector
// displacements about the workspace center.
//
// Translation cues move both end-effectors the same way; rotation cues move
// them in opposite directions. Device convention (right-handed, +x distal,
// +z up, left pantograph on the +y side):
//   TwistLeft  = left back / right forward  -> +yaw
//   TiltLeft   = left down / right up       -> -roll

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "haptic_guide/errors.hpp"
#include "haptic_guide/kinematics.hpp"

namespace hg {

enum class Direction { Forward, Backward, Up, Down, TwistLeft, TwistRight, TiltLeft, TiltRight };

inline constexpr std::array<Direction, 8> kAllDirections{
    Direction::Forward,   Direction::Backward,   Direction::Up,       Direction::Down,
    Direction::TwistLeft, Direction::TwistRight, Direction::TiltLeft, Direction::TiltRight};

inline constexpr std::array<std::string_view, 8> kDirectionNames{
    "Forward", "Backward", "Up", "Down", "TwistLeft", "TwistRight", "TiltLeft", "TiltRight"};

inline constexpr int index_of(Direction d) { return static_cast<int>(d); }
inline std::string_view to_string(Direction d) { return kDirectionNames[index_of(d)]; }

inline std::optional<Direction> parse_direction(std::string_view s) {
  for (std::size_t i = 0; i < kDirectionNames.size(); ++i)
    if (kDirectionNames[i] == s) return kAllDirections[i];
  return std::nullopt;
}

inline Direction direction_from_string(std::string_view s) {
  if (auto d = parse_direction(s)) return *d;
  throw UnknownLabel("unknown cue direction '" + std::string(s) + "'");
}

inline bool is_rotation(Direction d) { return index_of(d) >= index_of(Direction::TwistLeft); }

// Cue obtained by swapping the left and right end-effector motions.
inline Direction mirror(Direction d) {
  switch (d) {
    case Direction::TwistLeft: return Direction::TwistRight;
    case Direction::TwistRight: return Direction::TwistLeft;
    case Direction::TiltLeft: return Direction::TiltRight;
    case Direction::TiltRight: return Direction::TiltLeft;
    default: return d;
  }
}

struct DirectionPair {
  PlanarPoint left;
  PlanarPoint right;
};

inline DirectionPair direction_vectors(Direction d) {
  switch (d) {
    case Direction::Forward: return {{1, 0}, {1, 0}};
    case Direction::Backward: return {{-1, 0}, {-1, 0}};
    case Direction::Up: return {{0, 1}, {0, 1}};
    case Direction::Down: return {{0, -1}, {0, -1}};
    case Direction::TwistLeft: return {{-1, 0}, {1, 0}};
    case Direction::TwistRight: return {{1, 0}, {-1, 0}};
    case Direction::TiltLeft: return {{0, -1}, {0, 1}};
    case Direction::TiltRight: return {{0, 1}, {0, -1}};
  }
  return {};
}

enum class RampShape { MinimumJerk, Linear };

struct CueSpec {
  Direction direction = Direction::Up;
  double amplitude_mm = 3.0;
  double ramp_out_s = 0.2;
  double hold_s = 0.6;
  double ramp_back_s = 0.5;
  RampShape shape = RampShape::MinimumJerk;

  double duration_s() const { return ramp_out_s + hold_s + ramp_back_s; }

  void validate() const {
    if (!(amplitude_mm >= 0.0) || !std::isfinite(amplitude_mm))
      throw InvalidConfig("cue amplitude must be finite and non-negative");
    if (!(ramp_out_s > 0.0) || !(hold_s > 0.0) || !(ramp_back_s > 0.0))
      throw InvalidConfig("cue durations must be positive");
  }
};

struct CueFrame {
  double t = 0.0;
  PlanarPoint left_offset;
  PlanarPoint right_offset;
};

// 10 s^3 - 15 s^4 + 6 s^5 on [0, 1].
inline double minimum_jerk(double s) {
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return 1.0;
  return s * s * s * (10.0 + s * (-15.0 + 6.0 * s));
}

// Normalized cue profile in [0, 1].
inline double cue_profile(const CueSpec& spec, double t) {
  auto ramp = [&](double s) { return spec.shape == RampShape::Linear ? std::clamp(s, 0.0, 1.0) : minimum_jerk(s); };
  if (t <= 0.0) return 0.0;
  if (t < spec.ramp_out_s) return ramp(t / spec.ramp_out_s);
  const double back_start = spec.ramp_out_s + spec.hold_s;
  if (t <= back_start) return 1.0;
  if (t < back_start + spec.ramp_back_s) return 1.0 - ramp((t - back_start) / spec.ramp_back_s);
  return 0.0;
}

inline CueFrame cue_waveform(const CueSpec& spec, double t) {
  const double s = cue_profile(spec, t) * spec.amplitude_mm;
  const auto dirs = direction_vectors(spec.direction);
  return {t, s * dirs.left, s * dirs.right};
}

struct CueViolation {
  double t = 0.0;
  bool left = true;
  PlanarPoint point;
  std::string reason;
};

struct CueRegionReport {
  std::vector<CueViolation> violations;
  bool ok() const { return violations.empty(); }
};

// Samples the waveform every `step_s` and checks both end-effectors stay in
// the cue circle around the workspace center and inside the workspace.
inline CueRegionReport validate_cue_region(const CueSpec& spec, const PantographConfig& cfg,
                                           double region_radius_mm = 3.0, double step_s = 1e-3) {
  spec.validate();
  const PlanarPoint center = workspace_center(cfg, region_radius_mm);
  CueRegionReport report;
  const auto steps = static_cast<long>(std::ceil(spec.duration_s() / step_s));
  for (long k = 0; k <= steps; ++k) {
    const double t = static_cast<double>(k) * step_s;
    const CueFrame f = cue_waveform(spec, t);
    for (bool left : {true, false}) {
      const PlanarPoint offset = left ? f.left_offset : f.right_offset;
      const PlanarPoint p = center + offset;
      if (norm(offset) > region_radius_mm + 1e-9) {
        report.violations.push_back({t, left, p, "outside cue region"});
      } else if (!try_isotropic_force(cfg, p)) {
        report.violations.push_back({t, left, p, "outside actuatable workspace"});
      }
    }
  }
  return report;
}

}  // namespace hg
