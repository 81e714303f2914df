#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include "haptic_guide/errors.hpp"
#include "haptic_guide/synth.hpp"

namespace hg {

// Per-subject clustering features: (mean delay s, peak-magnitude variance).
using ResponderFeatures = std::array<double, 2>;

struct ClusterResult {
  std::vector<ResponderClass> labels;
  std::array<ResponderFeatures, 2> centroids{};  // original units; [0] Fast, [1] Slow
  std::array<int, 2> sizes{};
  double inertia = 0.0;  // in standardized units
};

namespace detail {

struct KMeansRun {
  std::vector<int> assign;
  std::array<ResponderFeatures, 2> centers{};
  double inertia = std::numeric_limits<double>::infinity();
};

inline double sq_dist(const ResponderFeatures& a, const ResponderFeatures& b) {
  return (a[0] - b[0]) * (a[0] - b[0]) + (a[1] - b[1]) * (a[1] - b[1]);
}

inline KMeansRun lloyd(std::span<const ResponderFeatures> z, ResponderFeatures c0, ResponderFeatures c1) {
  KMeansRun run;
  run.centers = {c0, c1};
  run.assign.assign(z.size(), -1);
  for (int iter = 0; iter < 100; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < z.size(); ++i) {
      const int k = sq_dist(z[i], run.centers[1]) < sq_dist(z[i], run.centers[0]) ? 1 : 0;
      changed |= k != run.assign[i];
      run.assign[i] = k;
    }
    std::array<ResponderFeatures, 2> sum{};
    std::array<int, 2> count{};
    for (std::size_t i = 0; i < z.size(); ++i) {
      const int k = run.assign[i];
      sum[k][0] += z[i][0];
      sum[k][1] += z[i][1];
      ++count[k];
    }
    if (count[0] == 0 || count[1] == 0) return {};
    for (int k = 0; k < 2; ++k) run.centers[k] = {sum[k][0] / count[k], sum[k][1] / count[k]};
    if (!changed) break;
  }
  run.inertia = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) run.inertia += sq_dist(z[i], run.centers[run.assign[i]]);
  return run;
}

}  // namespace detail

// k-means with k = 2 on z-scored features (population SD). Every pair of
// distinct points seeds one Lloyd run (a strided subset beyond 64 points);
// the lowest-inertia run wins, earliest seed pair on ties.
inline ClusterResult cluster_responders(std::span<const ResponderFeatures> features) {
  const std::size_t n = features.size();
  if (n < 2) throw InsufficientData("clustering needs at least 2 subjects");
  std::array<double, 2> mean{}, sd{};
  for (int f = 0; f < 2; ++f) {
    for (const auto& x : features) mean[f] += x[f];
    mean[f] /= static_cast<double>(n);
    for (const auto& x : features) sd[f] += (x[f] - mean[f]) * (x[f] - mean[f]);
    sd[f] = std::sqrt(sd[f] / static_cast<double>(n));
  }
  for (const auto& x : features)
    if (!std::isfinite(x[0]) || !std::isfinite(x[1])) throw DegenerateFeatures("clustering features must be finite");
  if (sd[0] == 0.0 && sd[1] == 0.0) throw DegenerateFeatures("all subjects have identical features");

  std::vector<ResponderFeatures> z(n);
  for (std::size_t i = 0; i < n; ++i)
    for (int f = 0; f < 2; ++f) z[i][f] = sd[f] > 0.0 ? (features[i][f] - mean[f]) / sd[f] : 0.0;

  const std::size_t stride = std::max<std::size_t>(1, (n + 63) / 64);
  detail::KMeansRun best;
  for (std::size_t i = 0; i < n; i += stride)
    for (std::size_t j = i + stride; j < n; j += stride) {
      if (z[i] == z[j]) continue;
      auto run = detail::lloyd(z, z[i], z[j]);
      if (run.inertia < best.inertia - 1e-12) best = std::move(run);
    }
  if (best.assign.empty()) throw DegenerateFeatures("no two-cluster partition exists");

  ClusterResult out;
  out.inertia = best.inertia;
  std::array<ResponderFeatures, 2> centroid{};
  std::array<int, 2> count{};
  for (std::size_t i = 0; i < n; ++i) {
    const int k = best.assign[i];
    centroid[k][0] += features[i][0];
    centroid[k][1] += features[i][1];
    ++count[k];
  }
  for (int k = 0; k < 2; ++k) centroid[k] = {centroid[k][0] / count[k], centroid[k][1] / count[k]};
  const int fast = centroid[0][0] <= centroid[1][0] ? 0 : 1;
  out.centroids = {centroid[fast], centroid[1 - fast]};
  out.sizes = {count[fast], count[1 - fast]};
  out.labels.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    out.labels.push_back(best.assign[i] == fast ? ResponderClass::Fast : ResponderClass::Slow);
  return out;
}

struct MixtureResult {
  std::array<double, 2> means{};  // ascending
  std::array<double, 2> sds{};
  std::array<double, 2> weights{};
  double log_likelihood = 0.0;
  int iterations = 0;
  bool converged = false;
  bool degenerate = false;  // components not separated (Ashman D < 2)
};

namespace detail {

inline double percentile_sorted(std::span<const double> s, double q) {
  const double pos = q * static_cast<double>(s.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, s.size() - 1);
  return s[lo] + (pos - static_cast<double>(lo)) * (s[hi] - s[lo]);
}

}  // namespace detail

// Two-component 1-D Gaussian mixture by EM. Data are sorted first so the
// result does not depend on input order. Non-convergence is reported in the
// result, never thrown.
inline MixtureResult delay_mixture(std::span<const double> delays, int max_iterations = 500, double tol = 1e-10) {
  if (delays.size() < 4) throw InsufficientData("mixture needs at least 4 observations");
  std::vector<double> x(delays.begin(), delays.end());
  for (double v : x)
    if (!std::isfinite(v)) throw DegenerateFeatures("mixture input must be finite");
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());

  double total = 0.0;
  for (double v : x) total += v;
  const double grand_mean = total / n;
  double var = 0.0;
  for (double v : x) var += (v - grand_mean) * (v - grand_mean);
  var /= n;
  const double var_floor = std::max(var * 1e-6, 1e-12);

  MixtureResult r;
  std::array<double, 2> mu{detail::percentile_sorted(x, 0.25), detail::percentile_sorted(x, 0.75)};
  std::array<double, 2> s2{std::max(var / 4.0, var_floor), std::max(var / 4.0, var_floor)};
  std::array<double, 2> w{0.5, 0.5};
  std::vector<double> resp(x.size());
  double prev_ll = -std::numeric_limits<double>::infinity();

  auto log_pdf = [](double v, double m, double s) {
    return -0.5 * std::log(2.0 * std::numbers::pi * s) - 0.5 * (v - m) * (v - m) / s;
  };

  for (int iter = 1; iter <= max_iterations; ++iter) {
    double ll = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double l0 = std::log(w[0]) + log_pdf(x[i], mu[0], s2[0]);
      const double l1 = std::log(w[1]) + log_pdf(x[i], mu[1], s2[1]);
      const double mx = std::max(l0, l1);
      const double lse = mx + std::log(std::exp(l0 - mx) + std::exp(l1 - mx));
      resp[i] = std::exp(l1 - lse);
      ll += lse;
    }
    std::array<double, 2> nk{}, sum{};
    for (std::size_t i = 0; i < x.size(); ++i) {
      nk[0] += 1.0 - resp[i];
      nk[1] += resp[i];
      sum[0] += (1.0 - resp[i]) * x[i];
      sum[1] += resp[i] * x[i];
    }
    for (int k = 0; k < 2; ++k) {
      if (nk[k] < 1e-9) {
        nk[k] = 1e-9;
        sum[k] = grand_mean * nk[k];
      }
      mu[k] = sum[k] / nk[k];
      double ss = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double rk = k == 1 ? resp[i] : 1.0 - resp[i];
        ss += rk * (x[i] - mu[k]) * (x[i] - mu[k]);
      }
      s2[k] = std::max(ss / nk[k], var_floor);
      w[k] = nk[k] / n;
    }
    r.iterations = iter;
    r.log_likelihood = ll;
    if (std::abs(ll - prev_ll) <= tol * std::max(1.0, std::abs(ll))) {
      r.converged = true;
      break;
    }
    prev_ll = ll;
  }

  const int lo = mu[0] <= mu[1] ? 0 : 1;
  r.means = {mu[lo], mu[1 - lo]};
  r.sds = {std::sqrt(s2[lo]), std::sqrt(s2[1 - lo])};
  r.weights = {w[lo], w[1 - lo]};
  const double ashman = std::sqrt(2.0) * std::abs(r.means[1] - r.means[0]) /
                        std::sqrt(r.sds[0] * r.sds[0] + r.sds[1] * r.sds[1]);
  r.degenerate = !(ashman >= 2.0);
  return r;
}

}  // namespace hg
