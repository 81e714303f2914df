#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "haptic_guide/haptic_guide.hpp"

namespace hg::test {

inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::path(HG_TEST_TMP) / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// Uniformly sampled end-effector points that inverse kinematics accepts.
inline std::vector<PlanarPoint> reachable_points(const PantographConfig& cfg, std::size_t count, std::uint64_t seed) {
  RandomStream rng(seed);
  std::vector<PlanarPoint> pts;
  while (pts.size() < count) {
    const PlanarPoint p{rng.uniform(-25.0, 25.0), rng.uniform(-25.0, -0.5)};
    try {
      inverse_kinematics(cfg, p);
      pts.push_back(p);
    } catch (const Error&) {
    }
  }
  return pts;
}

}  // namespace hg::test
