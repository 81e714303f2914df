#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "haptic_guide/errors.hpp"

namespace hg {

// Second-order Butterworth low-pass, bilinear transform with prewarping.
struct Biquad {
  std::array<double, 3> b{};
  std::array<double, 3> a{1.0, 0.0, 0.0};  // a[0] == 1

  static Biquad butterworth_lowpass(double cutoff_hz, double sample_rate_hz) {
    if (!(cutoff_hz > 0.0) || !(cutoff_hz < 0.5 * sample_rate_hz))
      throw InvalidConfig("low-pass cutoff must lie in (0, Nyquist)");
    const double k = std::tan(std::numbers::pi * cutoff_hz / sample_rate_hz);
    const double s2 = std::numbers::sqrt2;
    const double norm = 1.0 / (1.0 + s2 * k + k * k);
    Biquad f;
    f.b = {k * k * norm, 2.0 * k * k * norm, k * k * norm};
    f.a = {1.0, 2.0 * (k * k - 1.0) * norm, (1.0 - s2 * k + k * k) * norm};
    return f;
  }

  // |H(f)| of a single pass.
  static double butterworth_magnitude(double f_hz, double cutoff_hz, double sample_rate_hz) {
    const double ratio = std::tan(std::numbers::pi * f_hz / sample_rate_hz) /
                         std::tan(std::numbers::pi * cutoff_hz / sample_rate_hz);
    return 1.0 / std::sqrt(1.0 + std::pow(ratio, 4));
  }

  // Transposed direct form II, starting from the steady state for x0.
  std::vector<double> filter(std::span<const double> x) const {
    std::vector<double> y(x.size());
    if (x.empty()) return y;
    double z1 = (1.0 - b[0]) * x[0];
    double z2 = (b[2] - a[2]) * x[0];
    for (std::size_t n = 0; n < x.size(); ++n) {
      const double out = b[0] * x[n] + z1;
      z1 = b[1] * x[n] - a[1] * out + z2;
      z2 = b[2] * x[n] - a[2] * out;
      y[n] = out;
    }
    return y;
  }
};

// Zero-phase forward-backward filtering with odd-reflection padding.
inline std::vector<double> filtfilt(const Biquad& f, std::span<const double> x) {
  const std::size_t n = x.size();
  if (n < 2) return {x.begin(), x.end()};
  const std::size_t pad = std::min<std::size_t>(9, n - 1);
  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  for (std::size_t k = pad; k >= 1; --k) ext.push_back(2.0 * x[0] - x[k]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (std::size_t k = 1; k <= pad; ++k) ext.push_back(2.0 * x[n - 1] - x[n - 1 - k]);

  auto fwd = f.filter(ext);
  std::vector<double> rev(fwd.rbegin(), fwd.rend());
  auto back = f.filter(rev);
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) out[k] = back[back.size() - 1 - (pad + k)];
  return out;
}

// Central first difference; one-sided at the ends.
inline std::vector<double> first_difference(std::span<const double> x, double dt) {
  const std::size_t n = x.size();
  std::vector<double> d(n, 0.0);
  if (n < 2) return d;
  d[0] = (x[1] - x[0]) / dt;
  d[n - 1] = (x[n - 1] - x[n - 2]) / dt;
  for (std::size_t k = 1; k + 1 < n; ++k) d[k] = (x[k + 1] - x[k - 1]) / (2.0 * dt);
  return d;
}

// Central second difference; end values copied from their neighbours.
inline std::vector<double> second_difference(std::span<const double> x, double dt) {
  const std::size_t n = x.size();
  std::vector<double> d(n, 0.0);
  if (n < 3) return d;
  for (std::size_t k = 1; k + 1 < n; ++k) d[k] = (x[k + 1] - 2.0 * x[k] + x[k - 1]) / (dt * dt);
  d[0] = d[1];
  d[n - 1] = d[n - 2];
  return d;
}

}  // namespace hg
