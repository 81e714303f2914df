#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "support.hpp"

using namespace hg;

namespace {

// Published forced-choice percentages (rows: presented cue, columns: response).
constexpr std::array<std::array<double, 8>, 8> kPublishedPercent{{
    {96.7, 1.7, 1.7, 0.0, 0.0, 0.0, 0.0, 0.0},
    {1.7, 95.0, 0.0, 3.3, 0.0, 0.0, 0.0, 0.0},
    {1.7, 0.0, 93.3, 0.0, 1.7, 0.0, 0.0, 3.3},
    {1.7, 1.7, 3.3, 91.7, 0.0, 0.0, 1.7, 0.0},
    {0.0, 1.7, 0.0, 0.0, 93.3, 3.3, 1.7, 0.0},
    {0.0, 0.0, 0.0, 0.0, 1.7, 96.7, 0.0, 1.7},
    {0.0, 0.0, 0.0, 1.7, 0.0, 0.0, 96.7, 1.7},
    {0.0, 0.0, 0.0, 0.0, 0.0, 3.3, 1.7, 95.0},
}};

std::vector<ChoiceRecord> choices_from_counts(const std::array<std::array<int, 8>, 8>& counts) {
  std::vector<ChoiceRecord> out;
  int idx = 0;
  for (int r = 0; r < 8; ++r)
    for (int c = 0; c < 8; ++c)
      for (int k = 0; k < counts[r][c]; ++k)
        out.push_back({1 + idx % 20, idx / 20, kAllDirections[r], kAllDirections[c], 0}), ++idx;
  return out;
}

std::vector<ResponderFeatures> two_clouds(int n_fast, int n_slow, std::uint64_t seed) {
  RandomStream rng(seed);
  std::vector<ResponderFeatures> f;
  for (int i = 0; i < n_fast; ++i) f.push_back({rng.normal(0.33, 0.05), rng.normal(4.0, 1.0)});
  for (int i = 0; i < n_slow; ++i) f.push_back({rng.normal(1.56, 0.15), rng.normal(20.0, 4.0)});
  return f;
}

std::vector<double> mixture_sample(std::size_t n_fast, std::size_t n_slow, std::uint64_t seed) {
  RandomStream rng(seed);
  std::vector<double> x;
  for (std::size_t i = 0; i < n_fast; ++i) x.push_back(rng.normal(0.33, 0.08));
  for (std::size_t i = 0; i < n_slow; ++i) x.push_back(rng.normal(1.56, 0.25));
  return x;
}

}  // namespace

TEST(KMeans, SeparatesTwoClouds) {
  const auto f = two_clouds(13, 7, 3);
  const auto r = cluster_responders(f);
  EXPECT_EQ(r.sizes[0], 13);
  EXPECT_EQ(r.sizes[1], 7);
  for (std::size_t i = 0; i < f.size(); ++i)
    EXPECT_EQ(r.labels[i], i < 13 ? ResponderClass::Fast : ResponderClass::Slow) << i;
  EXPECT_LT(r.centroids[0][0], r.centroids[1][0]);
}

TEST(KMeans, CentroidsAreMembersMeans) {
  const auto f = two_clouds(9, 6, 8);
  const auto r = cluster_responders(f);
  for (int k = 0; k < 2; ++k) {
    ResponderFeatures sum{};
    int n = 0;
    for (std::size_t i = 0; i < f.size(); ++i)
      if (static_cast<int>(r.labels[i]) == k) {
        sum[0] += f[i][0];
        sum[1] += f[i][1];
        ++n;
      }
    EXPECT_EQ(n, r.sizes[k]);
    EXPECT_NEAR(r.centroids[k][0], sum[0] / n, 1e-12);
    EXPECT_NEAR(r.centroids[k][1], sum[1] / n, 1e-12);
  }
}

TEST(KMeans, DuplicatingDataKeepsCentroids) {
  auto f = two_clouds(8, 5, 4);
  const auto a = cluster_responders(f);
  const auto copy = f;
  f.insert(f.end(), copy.begin(), copy.end());
  const auto b = cluster_responders(f);
  for (int k = 0; k < 2; ++k) {
    EXPECT_NEAR(a.centroids[k][0], b.centroids[k][0], 1e-12);
    EXPECT_NEAR(a.centroids[k][1], b.centroids[k][1], 1e-12);
    EXPECT_EQ(2 * a.sizes[k], b.sizes[k]);
  }
}

TEST(KMeans, InvariantToOrder) {
  auto f = two_clouds(11, 9, 5);
  const auto a = cluster_responders(f);
  std::reverse(f.begin(), f.end());
  const auto b = cluster_responders(f);
  EXPECT_EQ(a.sizes, b.sizes);
  EXPECT_NEAR(a.inertia, b.inertia, 1e-12);
}

TEST(KMeans, DegenerateInputs) {
  const std::vector<ResponderFeatures> same(5, {0.5, 3.0});
  EXPECT_THROW(cluster_responders(same), DegenerateFeatures);
  const std::vector<ResponderFeatures> one{{0.5, 3.0}};
  EXPECT_THROW(cluster_responders(one), InsufficientData);
  const std::vector<ResponderFeatures> nan{{0.5, 3.0}, {std::nan(""), 1.0}, {1.0, 2.0}};
  EXPECT_THROW(cluster_responders(nan), DegenerateFeatures);
}

TEST(Mixture, RecoversBimodalDelays) {
  const auto x = mixture_sample(1040, 560, 6);
  const auto m = delay_mixture(x);
  EXPECT_TRUE(m.converged);
  EXPECT_FALSE(m.degenerate);
  EXPECT_NEAR(m.means[0], 0.33, 0.02);
  EXPECT_NEAR(m.means[1], 1.56, 0.05);
  EXPECT_NEAR(m.weights[0], 0.65, 0.03);
  EXPECT_NEAR(m.weights[0] + m.weights[1], 1.0, 1e-12);
}

TEST(Mixture, OrderOfObservationsIrrelevant) {
  auto x = mixture_sample(300, 200, 7);
  const auto a = delay_mixture(x);
  RandomStream rng(1);
  rng.shuffle(std::span(x));
  const auto b = delay_mixture(x);
  EXPECT_EQ(a.means, b.means);
  EXPECT_EQ(a.iterations, b.iterations);
}

TEST(Mixture, UnimodalDataFlaggedDegenerate) {
  RandomStream rng(9);
  std::vector<double> x(500);
  for (double& v : x) v = rng.normal(0.5, 0.05);
  EXPECT_TRUE(delay_mixture(x).degenerate);
  EXPECT_THROW(delay_mixture(std::vector<double>{1, 2, 3}), InsufficientData);
}

TEST(Mixture, LikelihoodNotWorseThanSingleGaussian) {
  const auto x = mixture_sample(200, 100, 10);
  double mean = 0, var = 0;
  for (double v : x) mean += v / x.size();
  for (double v : x) var += (v - mean) * (v - mean) / x.size();
  double ll1 = 0;
  for (double v : x) ll1 += -0.5 * std::log(2 * std::numbers::pi * var) - (v - mean) * (v - mean) / (2 * var);
  EXPECT_GE(delay_mixture(x).log_likelihood, ll1);
}

TEST(Confusion, PublishedTableReproduced) {
  const auto stats = confusion_stats(choices_from_counts(kTableICounts));
  EXPECT_EQ(stats.total, 480);
  for (int r = 0; r < 8; ++r) {
    EXPECT_EQ(stats.row_totals[r], 60);
    for (int c = 0; c < 8; ++c) EXPECT_NEAR(stats.percent[r][c], kPublishedPercent[r][c], 0.05) << r << "," << c;
  }
  EXPECT_NEAR(stats.overall_percent_correct, 94.79, 0.01);
}

TEST(Confusion, AllCorrect) {
  std::array<std::array<int, 8>, 8> counts{};
  for (int r = 0; r < 8; ++r) counts[r][r] = 3;
  const auto stats = confusion_stats(choices_from_counts(counts));
  EXPECT_EQ(stats.overall_percent_correct, 100.0);
  for (int r = 0; r < 8; ++r) EXPECT_EQ(stats.percent[r][r], 100.0);
}

TEST(Confusion, UniformResponsesNearChance) {
  SubjectProfile p;
  for (auto& row : p.misclassification) row.fill(1.0 / 8.0);
  RandomStream rng(30);
  std::vector<ChoiceRecord> choices;
  for (int k = 0; k < 48000; ++k) {
    const Direction cue = kAllDirections[k % 8];
    choices.push_back({1, k, cue, synth_forced_choice(p, cue, rng), 0});
  }
  const auto stats = confusion_stats(choices);
  EXPECT_NEAR(stats.overall_percent_correct, 12.5, 0.5);
}

TEST(Confusion, EmptyInput) {
  const auto stats = confusion_stats(std::vector<ChoiceRecord>{});
  EXPECT_EQ(stats.total, 0);
  EXPECT_EQ(stats.overall_percent_correct, 0.0);
}
