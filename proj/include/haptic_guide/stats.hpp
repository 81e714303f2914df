#pragma once

#include <Eigen/Dense>
#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "haptic_guide/errors.hpp"

namespace hg {

struct DesignMatrix {
  Eigen::MatrixXd x;
  std::vector<std::string> names;
};

// Column-wise builder. Categorical predictors get reference-level dummy
// coding; the reference is the first level of `level_order` present in the data.
class DesignBuilder {
 public:
  explicit DesignBuilder(std::size_t rows) : rows_(rows) {}

  DesignBuilder& intercept() {
    push("(intercept)", std::vector<double>(rows_, 1.0));
    return *this;
  }

  DesignBuilder& numeric(const std::string& name, std::span<const double> values) {
    if (values.size() != rows_) throw InvalidConfig("predictor '" + name + "' has wrong length");
    push(name, {values.begin(), values.end()});
    return *this;
  }

  DesignBuilder& categorical(const std::string& name, std::span<const std::string> values,
                             std::span<const std::string> level_order) {
    if (values.size() != rows_) throw InvalidConfig("predictor '" + name + "' has wrong length");
    std::vector<std::string> present;
    for (const auto& level : level_order)
      if (std::find(values.begin(), values.end(), level) != values.end()) present.push_back(level);
    for (const auto& v : values)
      if (std::find(level_order.begin(), level_order.end(), v) == level_order.end())
        throw UnknownLabel("level '" + v + "' of '" + name + "' not in level order");
    for (std::size_t l = 1; l < present.size(); ++l) {
      std::vector<double> col(rows_, 0.0);
      for (std::size_t r = 0; r < rows_; ++r) col[r] = values[r] == present[l] ? 1.0 : 0.0;
      push(name + "[" + present[l] + "]", std::move(col));
    }
    return *this;
  }

  DesignMatrix build() const {
    DesignMatrix d;
    d.x.resize(static_cast<Eigen::Index>(rows_), static_cast<Eigen::Index>(cols_.size()));
    for (std::size_t c = 0; c < cols_.size(); ++c)
      for (std::size_t r = 0; r < rows_; ++r)
        d.x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = cols_[c][r];
    d.names = names_;
    return d;
  }

 private:
  void push(std::string name, std::vector<double> col) {
    names_.push_back(std::move(name));
    cols_.push_back(std::move(col));
  }

  std::size_t rows_;
  std::vector<std::string> names_;
  std::vector<std::vector<double>> cols_;
};

inline double two_sided_t_pvalue(double t, double df) {
  if (std::isnan(t)) return 1.0;
  if (std::isinf(t)) return 0.0;
  boost::math::students_t dist(df);
  return std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))));
}

inline double f_upper_pvalue(double f, double df1, double df2) {
  if (std::isnan(f)) return 1.0;
  if (std::isinf(f)) return 0.0;
  boost::math::fisher_f dist(df1, df2);
  return boost::math::cdf(boost::math::complement(dist, std::max(f, 0.0)));
}

struct OlsResult {
  std::vector<std::string> names;
  Eigen::VectorXd coef, se, t, p;
  Eigen::VectorXd residuals;
  double rss = 0.0;
  double r2 = 0.0;
  double df_resid = 0.0;
  std::size_t n = 0;

  std::size_t index_of(const std::string& name) const {
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw InvalidConfig("no coefficient named '" + name + "'");
    return static_cast<std::size_t>(it - names.begin());
  }
};

inline OlsResult ols_fit(const DesignMatrix& design, const Eigen::VectorXd& y) {
  const Eigen::Index n = design.x.rows(), p = design.x.cols();
  if (y.size() != n) throw InvalidConfig("response length does not match design rows");
  if (p == 0 || n <= p) throw InsufficientData("OLS needs more observations than coefficients");

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design.x);
  qr.setThreshold(1e-10);
  if (qr.rank() < p) {
    std::string cols;
    for (Eigen::Index k = qr.rank(); k < p; ++k) {
      if (!cols.empty()) cols += ", ";
      cols += design.names[static_cast<std::size_t>(qr.colsPermutation().indices()(k))];
    }
    throw RankDeficient("design matrix is rank deficient; collinear columns: " + cols);
  }

  OlsResult r;
  r.names = design.names;
  r.n = static_cast<std::size_t>(n);
  r.coef = qr.solve(y);
  r.residuals = y - design.x * r.coef;
  r.rss = r.residuals.squaredNorm();
  r.df_resid = static_cast<double>(n - p);
  const double tss = (y.array() - y.mean()).matrix().squaredNorm();
  r.r2 = tss > 0.0 ? 1.0 - r.rss / tss : 1.0;

  const double sigma2 = r.rss / r.df_resid;
  const Eigen::MatrixXd xtx_inv = (design.x.transpose() * design.x).inverse();
  r.se.resize(p);
  r.t.resize(p);
  r.p.resize(p);
  for (Eigen::Index k = 0; k < p; ++k) {
    r.se(k) = std::sqrt(std::max(0.0, sigma2 * xtx_inv(k, k)));
    if (r.se(k) > 0.0) {
      r.t(k) = r.coef(k) / r.se(k);
    } else {
      r.t(k) = std::abs(r.coef(k)) > 0.0 ? std::copysign(std::numeric_limits<double>::infinity(), r.coef(k))
                                         : std::numeric_limits<double>::quiet_NaN();
    }
    r.p(k) = two_sided_t_pvalue(r.t(k), r.df_resid);
  }
  return r;
}

struct FTest {
  double f = std::numeric_limits<double>::quiet_NaN();
  double df1 = 0.0, df2 = 0.0;
  double p = 1.0;
  bool defined = false;  // false when the full model leaves no residual variance
};

// Nested-model comparison: `reduced` columns must span a subspace of `full`.
inline FTest nested_f_test(const OlsResult& reduced, const OlsResult& full) {
  FTest out;
  out.df1 = reduced.df_resid - full.df_resid;
  out.df2 = full.df_resid;
  if (out.df1 <= 0.0) throw InvalidConfig("F test needs a strictly larger full model");
  const double scale = std::max(reduced.rss, 1.0) * 1e-12;
  if (full.rss <= scale) {
    if (reduced.rss - full.rss > scale) {
      out.f = std::numeric_limits<double>::infinity();
      out.p = 0.0;
      out.defined = true;
    }
    return out;
  }
  out.f = ((reduced.rss - full.rss) / out.df1) / (full.rss / out.df2);
  out.p = f_upper_pvalue(out.f, out.df1, out.df2);
  out.defined = true;
  return out;
}

struct MeanCi {
  std::size_t n = 0;
  double mean = 0.0;
  double sd = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

inline MeanCi mean_ci(std::span<const double> x, double level = 0.95) {
  if (x.size() < 2) throw InsufficientData("confidence interval needs at least 2 observations");
  MeanCi c;
  c.n = x.size();
  const double n = static_cast<double>(x.size());
  double sum = 0.0;
  for (double v : x) sum += v;
  c.mean = sum / n;
  double ss = 0.0;
  for (double v : x) ss += (v - c.mean) * (v - c.mean);
  c.sd = std::sqrt(ss / (n - 1.0));
  boost::math::students_t dist(n - 1.0);
  const double half = boost::math::quantile(dist, 0.5 + 0.5 * level) * c.sd / std::sqrt(n);
  c.lo = c.mean - half;
  c.hi = c.mean + half;
  return c;
}

struct WelchTest {
  double mean_diff = 0.0;  // mean(a) - mean(b)
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;
};

inline WelchTest welch_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) throw InsufficientData("t test needs at least 2 observations per group");
  const MeanCi ca = mean_ci(a), cb = mean_ci(b);
  const double va = ca.sd * ca.sd / static_cast<double>(ca.n);
  const double vb = cb.sd * cb.sd / static_cast<double>(cb.n);
  WelchTest w;
  w.mean_diff = ca.mean - cb.mean;
  const double se2 = va + vb;
  if (se2 <= 0.0) {
    w.df = static_cast<double>(ca.n + cb.n - 2);
    w.t = w.mean_diff == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), w.mean_diff);
    w.p = w.mean_diff == 0.0 ? 1.0 : 0.0;
    return w;
  }
  w.t = w.mean_diff / std::sqrt(se2);
  w.df = se2 * se2 /
         (va * va / static_cast<double>(ca.n - 1) + vb * vb / static_cast<double>(cb.n - 1));
  w.p = two_sided_t_pvalue(w.t, w.df);
  return w;
}

struct PairwiseComparison {
  int a = 0, b = 0;  // group indices, a < b
  WelchTest test;
  double p_adjusted = 1.0;
  bool significant = false;
};

struct AnovaResult {
  FTest group;  // main effect of the grouping factor, adjusted for blocks
  FTest block;  // main effect of the blocking factor (undefined without blocks)
  std::vector<double> group_means;
  std::vector<std::size_t> group_sizes;
  std::vector<PairwiseComparison> pairs;
  double alpha = 0.01;

  const PairwiseComparison& pair(int a, int b) const {
    const int lo = std::min(a, b), hi = std::max(a, b);
    for (const auto& c : pairs)
      if (c.a == lo && c.b == hi) return c;
    throw InvalidConfig("no such pair");
  }
};

// Additive fixed-effects model y ~ group + block. F tests compare nested
// models; pairwise Welch tests are Bonferroni-adjusted over all group pairs.
// `group` holds indices in [0, n_groups); `block` may be empty.
inline AnovaResult anova_with_bonferroni(std::span<const int> group, int n_groups, std::span<const int> block,
                                         std::span<const double> y, double alpha = 0.01) {
  if (group.size() != y.size() || (!block.empty() && block.size() != y.size()))
    throw InvalidConfig("ANOVA inputs have mismatched lengths");
  if (n_groups < 2) throw InsufficientData("ANOVA needs at least 2 groups");

  AnovaResult out;
  out.alpha = alpha;
  std::vector<std::vector<double>> by_group(static_cast<std::size_t>(n_groups));
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (group[i] < 0 || group[i] >= n_groups) throw InvalidConfig("group index out of range");
    by_group[static_cast<std::size_t>(group[i])].push_back(y[i]);
  }
  for (const auto& g : by_group)
    if (g.size() < 2) throw InsufficientData("every group needs at least 2 observations");

  std::vector<std::string> glabels(y.size()), blabels(y.size()), glevels, blevels;
  for (int g = 0; g < n_groups; ++g) glevels.push_back(std::to_string(g));
  int n_blocks = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    glabels[i] = std::to_string(group[i]);
    if (!block.empty()) {
      blabels[i] = std::to_string(block[i]);
      n_blocks = std::max(n_blocks, block[i] + 1);
    }
  }
  for (int b = 0; b < n_blocks; ++b) blevels.push_back(std::to_string(b));

  const Eigen::VectorXd yv = Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
  auto fit = [&](bool with_group, bool with_block) {
    DesignBuilder b(y.size());
    b.intercept();
    if (with_group) b.categorical("group", glabels, glevels);
    if (with_block && !block.empty()) b.categorical("block", blabels, blevels);
    return ols_fit(b.build(), yv);
  };
  const OlsResult full = fit(true, true);
  out.group = nested_f_test(fit(false, true), full);
  if (!block.empty() && n_blocks > 1) out.block = nested_f_test(fit(true, false), full);

  for (const auto& g : by_group) {
    out.group_sizes.push_back(g.size());
    out.group_means.push_back(mean_ci(g).mean);
  }
  const double m = static_cast<double>(n_groups) * (n_groups - 1) / 2.0;
  for (int a = 0; a < n_groups; ++a)
    for (int b = a + 1; b < n_groups; ++b) {
      PairwiseComparison c;
      c.a = a;
      c.b = b;
      c.test = welch_t_test(by_group[static_cast<std::size_t>(a)], by_group[static_cast<std::size_t>(b)]);
      c.p_adjusted = std::min(1.0, c.test.p * m);
      c.significant = c.p_adjusted < alpha;
      out.pairs.push_back(c);
    }
  return out;
}

}  // namespace hg
