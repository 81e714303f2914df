#pragma once

// Handle poses from the 6-DOF tracker and the rigid sensor-to-handle offset.
// Orientation is yaw (z), pitch (y), roll (x) in degrees, composed as
// R = Rz(yaw) * Ry(pitch) * Rx(roll).

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "haptic_guide/errors.hpp"

namespace hg {

enum class Dof { X, Y, Z, Yaw, Pitch, Roll };
inline constexpr int kNumDof = 6;
inline constexpr std::array<const char*, kNumDof> kDofNames{"x", "y", "z", "yaw", "pitch", "roll"};
inline constexpr bool is_rotational(Dof d) { return static_cast<int>(d) >= static_cast<int>(Dof::Yaw); }

struct Pose6 {
  double t = 0.0;  // s
  double x = 0.0, y = 0.0, z = 0.0;              // mm
  double yaw = 0.0, pitch = 0.0, roll = 0.0;     // deg

  std::array<double, kNumDof> values() const { return {x, y, z, yaw, pitch, roll}; }
  double& operator[](Dof d) {
    switch (d) {
      case Dof::X: return x;
      case Dof::Y: return y;
      case Dof::Z: return z;
      case Dof::Yaw: return yaw;
      case Dof::Pitch: return pitch;
      default: return roll;
    }
  }
  double operator[](Dof d) const { return const_cast<Pose6&>(*this)[d]; }
  friend bool operator==(const Pose6&, const Pose6&) = default;
};

inline double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / std::numbers::pi; }

// Wrap to (-180, 180].
inline double normalize_deg(double deg) {
  double r = std::remainder(deg, 360.0);
  if (r <= -180.0) r += 360.0;
  return r;
}

inline Eigen::Matrix3d rotation_from_euler_deg(double yaw, double pitch, double roll) {
  return (Eigen::AngleAxisd(deg2rad(yaw), Eigen::Vector3d::UnitZ()) *
          Eigen::AngleAxisd(deg2rad(pitch), Eigen::Vector3d::UnitY()) *
          Eigen::AngleAxisd(deg2rad(roll), Eigen::Vector3d::UnitX()))
      .toRotationMatrix();
}

// ZYX Euler angles (deg) of a rotation matrix.
inline std::array<double, 3> euler_deg_from_rotation(const Eigen::Matrix3d& r) {
  const double pitch = std::asin(std::clamp(-r(2, 0), -1.0, 1.0));
  const double yaw = std::atan2(r(1, 0), r(0, 0));
  const double roll = std::atan2(r(2, 1), r(2, 2));
  return {normalize_deg(rad2deg(yaw)), normalize_deg(rad2deg(pitch)), normalize_deg(rad2deg(roll))};
}

struct RigidOffset {
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();  // mm, in the sensor frame
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();

  static RigidOffset identity() { return {}; }

  static RigidOffset from_euler(const Eigen::Vector3d& translation_mm, double yaw, double pitch, double roll) {
    return {translation_mm, rotation_from_euler_deg(yaw, pitch, roll)};
  }

  RigidOffset inverse() const {
    const Eigen::Matrix3d rt = rotation.transpose();
    return {-rt * translation, rt};
  }

  void validate() const {
    if ((rotation * rotation.transpose() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > 1e-9 ||
        std::abs(rotation.determinant() - 1.0) > 1e-9)
      throw InvalidConfig("rigid offset rotation must be orthonormal with det +1");
  }
};

// Pose of the point rigidly attached to the sensor by `offset`.
inline Pose6 to_handle_frame(const Pose6& sensor, const RigidOffset& offset) {
  const Eigen::Matrix3d r_sensor = rotation_from_euler_deg(sensor.yaw, sensor.pitch, sensor.roll);
  const Eigen::Vector3d p = Eigen::Vector3d(sensor.x, sensor.y, sensor.z) + r_sensor * offset.translation;
  const auto euler = euler_deg_from_rotation(r_sensor * offset.rotation);
  return {sensor.t, p.x(), p.y(), p.z(), euler[0], euler[1], euler[2]};
}

}  // namespace hg
