#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"

using namespace hg;

namespace {

DesignMatrix line_design(std::span<const double> x) {
  return DesignBuilder(x.size()).intercept().numeric("x", x).build();
}

Eigen::VectorXd vec(std::span<const double> v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

// Simple-regression closed forms.
struct LineOracle {
  double slope, intercept, se_slope;
};

LineOracle line_oracle(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i] / n;
    my += y[i] / n;
  }
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  const double slope = sxy / sxx, intercept = my - slope * mx;
  double rss = 0;
  for (std::size_t i = 0; i < x.size(); ++i) rss += std::pow(y[i] - intercept - slope * x[i], 2);
  return {slope, intercept, std::sqrt(rss / (n - 2) / sxx)};
}

}  // namespace

TEST(Distributions, ReferenceValues) {
  // Two-sided tail of t(10) at 2 and the 97.5% quantile of t(1).
  EXPECT_NEAR(two_sided_t_pvalue(2.0, 10.0), 0.0733880, 1e-6);
  const std::vector<double> two{0.0, 2.0};
  const auto ci = mean_ci(two);
  EXPECT_NEAR(ci.hi - ci.mean, 12.7062047, 1e-6);
}

TEST(Distributions, SquaredTMatchesF) {
  for (double t : {0.3, 1.0, 2.5, 4.0})
    for (double df : {3.0, 17.0, 200.0}) EXPECT_NEAR(f_upper_pvalue(t * t, 1.0, df), two_sided_t_pvalue(t, df), 1e-10);
  EXPECT_EQ(two_sided_t_pvalue(0.0, 5.0), 1.0);
}

TEST(Ols, ExactLineRecovered) {
  const std::vector<double> x{0, 1, 2, 3}, y{1, 3, 5, 7};
  const auto r = ols_fit(line_design(x), vec(y));
  EXPECT_NEAR(r.coef(r.index_of("x")), 2.0, 1e-12);
  EXPECT_NEAR(r.coef(r.index_of("(intercept)")), 1.0, 1e-12);
  EXPECT_NEAR(r.r2, 1.0, 1e-12);
  EXPECT_NEAR(r.rss, 0.0, 1e-20);
}

TEST(Ols, MatchesClosedFormLine) {
  const std::vector<double> x{0, 1, 2, 3, 4.5, 6}, y{1.2, 2.9, 5.4, 6.8, 10.1, 12.0};
  const auto r = ols_fit(line_design(x), vec(y));
  const auto o = line_oracle(x, y);
  const std::size_t k = r.index_of("x");
  EXPECT_NEAR(r.coef(k), o.slope, 1e-12);
  EXPECT_NEAR(r.coef(0), o.intercept, 1e-12);
  EXPECT_NEAR(r.se(k), o.se_slope, 1e-12);
  EXPECT_NEAR(r.p(k), two_sided_t_pvalue(o.slope / o.se_slope, 4.0), 1e-12);
  EXPECT_EQ(r.df_resid, 4.0);
}

TEST(Ols, ResidualsOrthogonalToColumns) {
  RandomStream rng(4);
  const std::size_t n = 60;
  std::vector<double> a(n), b(n), y(n);
  std::vector<std::string> g(n);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = rng.normal();
    b[i] = rng.uniform(0, 5);
    g[i] = std::to_string(i % 3);
    y[i] = 1 + 2 * a[i] - b[i] + (i % 3) + rng.normal();
  }
  const std::vector<std::string> levels{"0", "1", "2"};
  const auto d = DesignBuilder(n).intercept().numeric("a", a).numeric("b", b).categorical("g", g, levels).build();
  const auto r = ols_fit(d, vec(y));
  EXPECT_LT((d.x.transpose() * r.residuals).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Ols, RecoversSmallSlopeOnLargeSample) {
  RandomStream rng(8);
  const std::size_t n = 3200;
  std::vector<double> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = 1 + static_cast<double>(i % 4);
    y[i] = 0.5 - 0.041 * x[i] + rng.normal(0.0, 0.1);
  }
  const auto r = ols_fit(line_design(x), vec(y));
  const std::size_t k = r.index_of("x");
  EXPECT_NEAR(r.coef(k), -0.041, 4 * r.se(k));
  EXPECT_NEAR(r.se(k), line_oracle(x, y).se_slope, 1e-12);
  EXPECT_LT(r.p(k), 1e-6);
}

TEST(Ols, CollinearColumnsNamed) {
  const std::vector<double> x{1, 2, 3, 4, 5}, twice{2, 4, 6, 8, 10}, y{1, 2, 2, 3, 5};
  const auto d = DesignBuilder(5).intercept().numeric("x", x).numeric("twice_x", twice).build();
  try {
    ols_fit(d, vec(y));
    FAIL() << "expected RankDeficient";
  } catch (const RankDeficient& e) {
    const std::string msg = e.what();
    EXPECT_TRUE(msg.find("x") != std::string::npos);
  }
}

TEST(Ols, TooFewRows) {
  const std::vector<double> x{1, 2}, y{1, 2};
  EXPECT_THROW(ols_fit(line_design(x), vec(y)), InsufficientData);
}

TEST(Design, DummyCodingUsesFirstPresentLevel) {
  const std::vector<std::string> v{"b", "c", "b", "c"}, order{"a", "b", "c"};
  const auto d = DesignBuilder(4).intercept().categorical("f", v, order).build();
  ASSERT_EQ(d.names, (std::vector<std::string>{"(intercept)", "f[c]"}));
  EXPECT_EQ(d.x(1, 1), 1.0);
  EXPECT_EQ(d.x(0, 1), 0.0);
  const std::vector<std::string> bad{"a", "z", "a", "a"};
  EXPECT_THROW(DesignBuilder(4).categorical("f", bad, order), UnknownLabel);
}

TEST(MeanCi, ContainsMeanAndShrinksWithN) {
  RandomStream rng(12);
  std::vector<double> x;
  double prev_width = 1e9;
  for (int n : {5, 50, 500}) {
    x.clear();
    for (int i = 0; i < n; ++i) x.push_back(rng.normal(3.0, 1.0));
    const auto c = mean_ci(x);
    EXPECT_LT(c.lo, c.mean);
    EXPECT_GT(c.hi, c.mean);
    EXPECT_LT(c.hi - c.lo, prev_width);
    prev_width = c.hi - c.lo;
  }
  EXPECT_THROW(mean_ci(std::vector<double>{1.0}), InsufficientData);
}

TEST(MeanCi, CoverageNearNominal) {
  RandomStream rng(13);
  int covered = 0;
  const int reps = 2000;
  for (int r = 0; r < reps; ++r) {
    std::vector<double> x(10);
    for (double& v : x) v = rng.normal(1.0, 2.0);
    const auto c = mean_ci(x);
    covered += c.lo <= 1.0 && 1.0 <= c.hi;
  }
  EXPECT_NEAR(static_cast<double>(covered) / reps, 0.95, 0.015);
}

TEST(Welch, MatchesHandFormula) {
  const std::vector<double> a{1.0, 2.0, 3.0, 4.0}, b{2.0, 4.0, 9.0};
  const auto w = welch_t_test(a, b);
  const double va = (5.0 / 3.0) / 4.0, vb = 13.0 / 3.0;  // sample variances / n
  EXPECT_NEAR(w.mean_diff, 2.5 - 5.0, 1e-12);
  EXPECT_NEAR(w.t, -2.5 / std::sqrt(va + vb), 1e-12);
  EXPECT_NEAR(w.df, std::pow(va + vb, 2) / (va * va / 3.0 + vb * vb / 2.0), 1e-12);
  EXPECT_NEAR(w.p, two_sided_t_pvalue(w.t, w.df), 1e-12);
}

TEST(Anova, OneWayFMatchesSumsOfSquares) {
  const std::vector<int> g{0, 0, 0, 1, 1, 1, 2, 2, 2, 2};
  const std::vector<double> y{1.0, 2.0, 1.5, 3.0, 3.5, 2.5, 0.5, 1.0, 0.0, 1.5};
  const auto r = anova_with_bonferroni(g, 3, {}, y);
  const std::array<double, 3> mean{1.5, 3.0, 0.75};
  const double grand = 16.5 / 10.0;
  double ssb = 0, ssw = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    ssb += std::pow(mean[g[i]] - grand, 2);
    ssw += std::pow(y[i] - mean[g[i]], 2);
  }
  const double f = (ssb / 2.0) / (ssw / 7.0);
  ASSERT_TRUE(r.group.defined);
  EXPECT_NEAR(r.group.f, f, 1e-10);
  EXPECT_EQ(r.group.df1, 2.0);
  EXPECT_EQ(r.group.df2, 7.0);
  EXPECT_FALSE(r.block.defined);
  EXPECT_EQ(r.pairs.size(), 3u);
  for (const auto& c : r.pairs) EXPECT_NEAR(c.p_adjusted, std::min(1.0, 3.0 * c.test.p), 1e-15);
}

TEST(Anova, ConstantResponseLeavesFUndefined) {
  const std::vector<int> g{0, 0, 1, 1, 2, 2};
  const std::vector<double> y(6, 4.0);
  const auto r = anova_with_bonferroni(g, 3, {}, y);
  EXPECT_FALSE(r.group.defined);
  for (const auto& c : r.pairs) EXPECT_FALSE(c.significant);
}

TEST(Anova, SeparatedGroupsSignificantAfterAdjustment) {
  RandomStream rng(21);
  std::vector<int> g, block;
  std::vector<double> y;
  for (int s = 0; s < 10; ++s)
    for (int k = 0; k < 3; ++k)
      for (int grp = 0; grp < 3; ++grp) {
        g.push_back(grp);
        block.push_back(s);
        y.push_back(grp == 2 ? 5.0 : 0.0 + 0.3 * s + rng.normal(0, 0.2));
      }
  const auto r = anova_with_bonferroni(g, 3, block, y, 0.01);
  EXPECT_LT(r.group.p, 1e-10);
  EXPECT_TRUE(r.pair(0, 2).significant);
  EXPECT_TRUE(r.pair(2, 1).significant);
  EXPECT_FALSE(r.pair(0, 1).significant);
  EXPECT_TRUE(r.block.defined);
}

TEST(Anova, ShapeErrors) {
  const std::vector<int> g{0, 0, 1};
  const std::vector<double> y{1, 2, 3};
  EXPECT_THROW(anova_with_bonferroni(g, 2, {}, y), InsufficientData);
  EXPECT_THROW(anova_with_bonferroni(g, 2, {}, std::vector<double>{1, 2}), InvalidConfig);
}
