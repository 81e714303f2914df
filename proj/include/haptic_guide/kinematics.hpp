#pragma once

// Planar five-bar pantograph: forward/inverse kinematics, velocity Jacobian and
// the isotropic force capability derived from it.
//
// Frame: origin midway between the two motor axes, +u distal (device x),
// +v up (device z). Motor 1 sits at (-d/2, 0), motor 2 at (+d/2, 0). Joint
// angles are output-shaft angles measured counter-clockwise from +u.
//
// Working branch: elbows outward, end-effector below the motor line. FK picks
// the intersection lying to the right of the directed elbow line E1 -> E2.

#include <Eigen/Core>
#include <Eigen/LU>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <optional>
#include <tuple>
#include <vector>

#include "haptic_guide/errors.hpp"

namespace hg {

struct PlanarPoint {
  double u = 0.0;  // mm
  double v = 0.0;  // mm

  friend PlanarPoint operator+(PlanarPoint a, PlanarPoint b) { return {a.u + b.u, a.v + b.v}; }
  friend PlanarPoint operator-(PlanarPoint a, PlanarPoint b) { return {a.u - b.u, a.v - b.v}; }
  friend PlanarPoint operator*(double s, PlanarPoint a) { return {s * a.u, s * a.v}; }
  friend bool operator==(const PlanarPoint&, const PlanarPoint&) = default;
};

inline double norm(PlanarPoint p) { return std::hypot(p.u, p.v); }
inline double cross(PlanarPoint a, PlanarPoint b) { return a.u * b.v - a.v * b.u; }
inline double dot(PlanarPoint a, PlanarPoint b) { return a.u * b.u + a.v * b.v; }

struct JointAngles {
  double theta1 = 0.0;  // rad, motor 1 (left, u < 0)
  double theta2 = 0.0;  // rad, motor 2 (right, u > 0)
};

struct JointRange {
  double min = -std::numbers::pi;
  double max = std::numbers::pi;
  bool contains(double theta) const { return theta >= min && theta <= max; }
};

struct PantographConfig {
  double upper_link_mm = 10.0;
  double lower_link_mm = 13.0;
  double base_separation_mm = 15.0;
  std::array<JointRange, 2> joint_range{};
  double torque_constant_nm_per_a = 0.00196;
  double gear_ratio = 64.0;
  double gearbox_efficiency = 1.0;
  double current_limit_a = 1.0;
  double encoder_counts_per_rev = 50.0;
  double quadrature_multiplier = 4.0;
  double singularity_tolerance = 1e-6;  // |det J| in mm^2/rad^2

  // Peak output-shaft torque available to each joint.
  double max_joint_torque_nm() const {
    return gearbox_efficiency * gear_ratio * torque_constant_nm_per_a * current_limit_a;
  }

  void validate() const {
    if (!(upper_link_mm > 0.0) || !(lower_link_mm > 0.0) || !(base_separation_mm >= 0.0))
      throw InvalidConfig("link lengths must be positive and base separation non-negative");
    if (!(2.0 * (upper_link_mm + lower_link_mm) > base_separation_mm))
      throw InvalidConfig("base separation too large: workspace is empty");
    for (const auto& r : joint_range)
      if (!(r.min < r.max)) throw InvalidConfig("joint range min must be below max");
    if (!(torque_constant_nm_per_a > 0.0) || !(gear_ratio > 0.0) || !(current_limit_a > 0.0) ||
        !(gearbox_efficiency > 0.0))
      throw InvalidConfig("motor constants must be positive");
    if (!(encoder_counts_per_rev > 0.0) || !(quadrature_multiplier > 0.0))
      throw InvalidConfig("encoder constants must be positive");
  }

  friend bool operator==(const PantographConfig& a, const PantographConfig& b) {
    auto key = [](const PantographConfig& c) {
      return std::tuple(c.upper_link_mm, c.lower_link_mm, c.base_separation_mm, c.joint_range[0].min,
                        c.joint_range[0].max, c.joint_range[1].min, c.joint_range[1].max,
                        c.torque_constant_nm_per_a, c.gear_ratio, c.gearbox_efficiency,
                        c.current_limit_a, c.encoder_counts_per_rev, c.quadrature_multiplier,
                        c.singularity_tolerance);
    };
    return key(a) == key(b);
  }
};

using Jacobian = Eigen::Matrix2d;  // mm/rad

namespace detail {

inline std::array<PlanarPoint, 2> motor_axes(const PantographConfig& cfg) {
  const double h = 0.5 * cfg.base_separation_mm;
  return {PlanarPoint{-h, 0.0}, PlanarPoint{h, 0.0}};
}

inline std::array<PlanarPoint, 2> elbows(const PantographConfig& cfg, const JointAngles& q) {
  const auto base = motor_axes(cfg);
  const double a = cfg.upper_link_mm;
  return {base[0] + PlanarPoint{a * std::cos(q.theta1), a * std::sin(q.theta1)},
          base[1] + PlanarPoint{a * std::cos(q.theta2), a * std::sin(q.theta2)}};
}

inline double wrap_angle(double theta) {
  theta = std::remainder(theta, 2.0 * std::numbers::pi);
  if (theta <= -std::numbers::pi) theta += 2.0 * std::numbers::pi;
  return theta;
}

}  // namespace detail

inline PlanarPoint forward_kinematics(const PantographConfig& cfg, const JointAngles& q) {
  const auto e = detail::elbows(cfg, q);
  const double b = cfg.lower_link_mm;
  const PlanarPoint chord = e[1] - e[0];
  const double span = norm(chord);
  if (!std::isfinite(span)) throw UnreachableConfiguration("non-finite joint angles");
  if (span > 2.0 * b) throw UnreachableConfiguration("elbows further apart than two distal links");
  if (span < 1e-12 * b) throw UnreachableConfiguration("coincident elbows: end-effector undetermined");
  const double half = 0.5 * span;
  const double h2 = b * b - half * half;
  const double h = std::sqrt(std::max(h2, 0.0));
  if (h < 1e-9 * b) throw SingularBranch("distal links collinear: both solutions coincide");
  const PlanarPoint mid = 0.5 * (e[0] + e[1]);
  // unit chord rotated clockwise -> right-hand side of E1 -> E2
  const PlanarPoint normal{chord.v / span, -chord.u / span};
  return mid + h * normal;
}

inline JointAngles inverse_kinematics(const PantographConfig& cfg, const PlanarPoint& p) {
  const auto base = detail::motor_axes(cfg);
  const double a = cfg.upper_link_mm;
  const double b = cfg.lower_link_mm;
  if (!std::isfinite(p.u) || !std::isfinite(p.v)) throw OutOfWorkspace("non-finite target point");
  if (!(p.v < 0.0)) throw OutOfWorkspace("out of workspace: target above the motor line");

  std::array<double, 2> theta{};
  for (int i = 0; i < 2; ++i) {
    const PlanarPoint r = p - base[i];
    const double reach = norm(r);
    if (reach > a + b || reach < std::abs(a - b) || reach == 0.0)
      throw OutOfWorkspace("out of workspace: target beyond link reach");
    const double c = std::clamp((a * a + reach * reach - b * b) / (2.0 * a * reach), -1.0, 1.0);
    const double bend = std::acos(c);
    const double heading = std::atan2(r.v, r.u);
    theta[i] = detail::wrap_angle(i == 0 ? heading - bend : heading + bend);
  }
  const JointAngles q{theta[0], theta[1]};

  const auto e = detail::elbows(cfg, q);
  if (!(cross(e[1] - e[0], p - e[0]) < 0.0))
    throw OutOfWorkspace("out of workspace: target not on the working branch");

  for (int i = 0; i < 2; ++i)
    if (!cfg.joint_range[i].contains(theta[i])) throw JointLimit("joint solution violates joint range");
  return q;
}

// Velocity kinematics from the loop-closure constraints |P - E_i| = b:
//   (P - E_i)^T dP = (P - E_i)^T dE_i/dtheta_i * dtheta_i
inline Jacobian jacobian(const PantographConfig& cfg, const JointAngles& q) {
  const PlanarPoint p = forward_kinematics(cfg, q);
  const auto e = detail::elbows(cfg, q);
  const double a = cfg.upper_link_mm;
  const std::array<double, 2> th{q.theta1, q.theta2};

  Eigen::Matrix2d lhs;
  Eigen::Matrix2d rhs = Eigen::Matrix2d::Zero();
  for (int i = 0; i < 2; ++i) {
    const PlanarPoint link = p - e[i];
    lhs(i, 0) = link.u;
    lhs(i, 1) = link.v;
    rhs(i, i) = dot(link, PlanarPoint{-a * std::sin(th[i]), a * std::cos(th[i])});
  }
  const double b = cfg.lower_link_mm;
  if (std::abs(lhs.determinant()) < 1e-12 * b * b)
    throw SingularConfiguration("distal links collinear");
  Jacobian jac = lhs.inverse() * rhs;
  if (std::abs(jac.determinant()) < cfg.singularity_tolerance)
    throw SingularConfiguration("Jacobian determinant below singularity tolerance");
  return jac;
}

// Radius (N) of the largest disc inscribed in the force polytope
// { F : |(J^T F)_i| <= tau_max }. Zero at singular configurations.
inline double isotropic_force(const PantographConfig& cfg, const PlanarPoint& p) {
  const JointAngles q = inverse_kinematics(cfg, p);
  Jacobian jac;
  try {
    jac = jacobian(cfg, q);
  } catch (const SingularConfiguration&) {
    return 0.0;
  } catch (const SingularBranch&) {
    return 0.0;
  }
  const Jacobian jac_m = jac * 1e-3;  // m/rad
  const double longest = std::max(jac_m.col(0).norm(), jac_m.col(1).norm());
  return cfg.max_joint_torque_nm() / longest;
}

// Reachable and nonzero-force isotropic value, or nullopt.
inline std::optional<double> try_isotropic_force(const PantographConfig& cfg, const PlanarPoint& p) {
  try {
    const double f = isotropic_force(cfg, p);
    if (f > 0.0) return f;
  } catch (const Error&) {
  }
  return std::nullopt;
}

struct GridSpec {
  double u_min = -30.0;
  double u_max = 30.0;
  double v_min = -30.0;
  double v_max = 30.0;
  int resolution_u = 100;
  int resolution_v = 100;

  // Node coordinates are built from integer offsets about the center so that
  // a grid symmetric about u = 0 has exactly mirrored nodes.
  double u_at(int j) const { return axis(u_min, u_max, resolution_u, j); }
  double v_at(int i) const { return axis(v_min, v_max, resolution_v, i); }

 private:
  static double axis(double lo, double hi, int n, int k) {
    const double center = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    return center + half * static_cast<double>(2 * k - (n - 1)) / static_cast<double>(n - 1);
  }
};

struct ForceCell {
  PlanarPoint p;
  double force_n = 0.0;
  bool reachable = false;
};

// Row-major over v (outer) then u (inner).
inline std::vector<ForceCell> force_map(const PantographConfig& cfg, const GridSpec& grid) {
  if (grid.resolution_u < 2 || grid.resolution_v < 2)
    throw InvalidConfig("force map resolution must be at least 2x2");
  std::vector<ForceCell> cells;
  cells.reserve(static_cast<std::size_t>(grid.resolution_u) * grid.resolution_v);
  for (int i = 0; i < grid.resolution_v; ++i) {
    for (int j = 0; j < grid.resolution_u; ++j) {
      ForceCell cell{{grid.u_at(j), grid.v_at(i)}, 0.0, false};
      try {
        cell.force_n = isotropic_force(cfg, cell.p);
        cell.reachable = true;
      } catch (const Error&) {
      }
      cells.push_back(cell);
    }
  }
  return cells;
}

namespace detail {

inline constexpr int kRegionSamples = 72;

// Force at p if p and the whole circle of the given radius around it are
// reachable with nonzero force.
inline std::optional<double> admissible_force(const PantographConfig& cfg, PlanarPoint p, double radius) {
  const auto f = try_isotropic_force(cfg, p);
  if (!f) return std::nullopt;
  if (radius > 0.0) {
    // Reach annuli checked exactly; sampling alone misses the cusp where the two
    // outer reach circles meet.
    if (!(p.v + radius < 0.0)) return std::nullopt;
    const double a = cfg.upper_link_mm, b = cfg.lower_link_mm;
    for (const PlanarPoint base : motor_axes(cfg)) {
      const double dist = norm(p - base);
      if (dist + radius > a + b || dist - radius < std::abs(a - b)) return std::nullopt;
    }
    for (int k = 0; k < kRegionSamples; ++k) {
      const double ang = 2.0 * std::numbers::pi * k / kRegionSamples;
      if (!try_isotropic_force(cfg, p + PlanarPoint{radius * std::cos(ang), radius * std::sin(ang)}))
        return std::nullopt;
    }
  }
  return f;
}

struct Candidate {
  PlanarPoint p;
  double force;
};

// Strictly better, or equal within rounding and closer to the mirror axis.
inline bool better(const Candidate& a, const Candidate& b) {
  const double tol = 1e-12 * std::max(std::abs(a.force), std::abs(b.force));
  if (a.force > b.force + tol) return true;
  if (b.force > a.force + tol) return false;
  return std::abs(a.p.u) < std::abs(b.p.u);
}

inline PlanarPoint compute_workspace_center(const PantographConfig& cfg, double radius) {
  const double a = cfg.upper_link_mm, b = cfg.lower_link_mm, d = cfg.base_separation_mm;
  const int nu = static_cast<int>(std::ceil(0.5 * d + a + b));
  const int nv = static_cast<int>(std::ceil(a + b));
  const int width = 2 * nu + 1;

  std::vector<std::optional<double>> coarse(static_cast<std::size_t>(width) * (nv + 1));
  auto at = [&](int iu, int iv) -> std::optional<double>& { return coarse[iv * width + (iu + nu)]; };
  for (int iv = 0; iv <= nv; ++iv)
    for (int iu = -nu; iu <= nu; ++iu)
      at(iu, iv) = admissible_force(cfg, {static_cast<double>(iu), -static_cast<double>(iv)}, radius);

  std::vector<Candidate> seeds;
  for (int iv = 0; iv <= nv; ++iv) {
    for (int iu = -nu; iu <= nu; ++iu) {
      const auto& f = at(iu, iv);
      if (!f) continue;
      bool local_max = true;
      for (int dv = -1; dv <= 1 && local_max; ++dv)
        for (int du = -1; du <= 1; ++du) {
          const int ju = iu + du, jv = iv + dv;
          if ((du == 0 && dv == 0) || ju < -nu || ju > nu || jv < 0 || jv > nv) continue;
          if (const auto& g = at(ju, jv); g && *g > *f) {
            local_max = false;
            break;
          }
        }
      if (local_max) seeds.push_back({{static_cast<double>(iu), -static_cast<double>(iv)}, *f});
    }
  }
  if (seeds.empty()) throw EmptyWorkspace("no admissible workspace point for the cue region");

  std::optional<Candidate> best;
  for (Candidate cur : seeds) {
    double step = 1.0;
    for (int round = 0; round < 3; ++round) {
      step /= 10.0;
      Candidate next = cur;
      for (int ku = -10; ku <= 10; ++ku)
        for (int kv = -10; kv <= 10; ++kv) {
          const PlanarPoint p{cur.p.u + ku * step, cur.p.v + kv * step};
          if (const auto f = admissible_force(cfg, p, radius)) {
            const Candidate c{p, *f};
            if (better(c, next)) next = c;
          }
        }
      cur = next;
    }
    if (!best || better(cur, *best)) best = cur;
  }
  return best->p;
}

}  // namespace detail

// Argmax of isotropic force over points whose whole cue-region circle is
// actuatable: 1 mm coarse grid, then three rounds of 10x local refinement
// around every coarse local maximum. Cached per (config, radius).
inline PlanarPoint workspace_center(const PantographConfig& cfg, double region_radius_mm = 3.0) {
  static std::mutex mutex;
  static std::vector<std::tuple<PantographConfig, double, PlanarPoint>> cache;
  {
    std::lock_guard lock(mutex);
    for (const auto& [c, r, p] : cache)
      if (c == cfg && r == region_radius_mm) return p;
  }
  cfg.validate();
  const PlanarPoint center = detail::compute_workspace_center(cfg, region_radius_mm);
  std::lock_guard lock(mutex);
  cache.emplace_back(cfg, region_radius_mm, center);
  return center;
}

}  // namespace hg
