#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "lens/gp.hpp"
#include "lens/log.hpp"

using namespace lens;

namespace {

GpHyperparams noiseless(double length = 0.2) {
  GpHyperparams p;
  p.noise_variance = 0.0;
  p.default_length_scale = length;
  return p;
}

FeatureMatrix line_points(int n) {
  FeatureMatrix x;
  for (int i = 0; i < n; ++i) x.push_back({i / double(n - 1)});
  return x;
}

}  // namespace

TEST(GpFit, SinglePointInterpolates) {
  const auto gp = GpSurrogate::fit({{0.3, 0.7}}, std::vector<double>{4.2}, noiseless());
  const auto post = gp.posterior(std::vector<double>{0.3, 0.7});
  EXPECT_NEAR(post.mean, 4.2, 1e-12);
  EXPECT_NEAR(post.variance, 0.0, 1e-10);
}

TEST(GpFit, ConstantTargets) {
  FeatureMatrix x;
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 10; ++i) x.push_back({u(rng), u(rng), u(rng)});
  const auto gp = GpSurrogate::fit(x, std::vector<double>(10, 7.5), GpHyperparams{});
  for (const auto& row : x) EXPECT_NEAR(gp.posterior(row).mean, 7.5, 1e-9);
}

TEST(GpFit, SineInterpolationWithinTolerance) {
  const auto x = line_points(5);
  std::vector<double> y;
  for (const auto& r : x) y.push_back(std::sin(r[0]));
  const auto gp = GpSurrogate::fit(x, y, noiseless(0.5));
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto post = gp.posterior(x[i]);
    EXPECT_NEAR(post.mean, y[i], 1e-6);
    EXPECT_LE(post.variance, 1e-6);
  }
}

TEST(GpFit, JitterEscalatesOnDuplicates) {
  // Duplicate rows with zero noise make K singular.
  const FeatureMatrix x{{0.1}, {0.1}, {0.5}};
  const auto gp = GpSurrogate::fit(x, std::vector<double>{1.0, 1.0, 2.0}, noiseless());
  EXPECT_GT(gp.jitter(), 0.0);
  EXPECT_LE(gp.jitter(), GpSurrogate::kMaxJitter);
  EXPECT_NEAR(gp.posterior(std::vector<double>{0.1}).mean, 1.0, 1e-3);
}

TEST(GpFit, RejectsBadInput) {
  EXPECT_THROW(GpSurrogate::fit({}, std::vector<double>{}, GpHyperparams{}), ValidationError);
  EXPECT_THROW(GpSurrogate::fit({{0.0}}, std::vector<double>{1.0, 2.0}, GpHyperparams{}), ValidationError);
  EXPECT_THROW(GpSurrogate::fit({{0.0}, {0.0, 1.0}}, std::vector<double>{1.0, 2.0}, GpHyperparams{}), ValidationError);
  GpHyperparams bad;
  bad.signal_variance = 0.0;
  EXPECT_THROW(GpSurrogate::fit({{0.0}}, std::vector<double>{1.0}, bad), ValidationError);
}

TEST(GpPosterior, FarAwayRevertsToPrior) {
  const auto x = line_points(4);
  const std::vector<double> y{1.0, 3.0, 2.0, 6.0};
  const auto gp = GpSurrogate::fit(x, y, GpHyperparams{});
  const auto post = gp.posterior(std::vector<double>{50.0});
  const double mean = 3.0;
  const double var = (4.0 + 0.0 + 1.0 + 9.0) / 4.0;
  EXPECT_NEAR(post.mean, mean, 1e-9);
  EXPECT_NEAR(post.variance, var, 1e-9);
}

TEST(GpPosterior, SymmetricMidpoint) {
  const auto gp = GpSurrogate::fit({{0.2}, {0.8}}, std::vector<double>{5.0, 5.0}, GpHyperparams{});
  EXPECT_NEAR(gp.posterior(std::vector<double>{0.5}).mean, 5.0, 1e-12);
}

TEST(GpPosterior, VarianceNonNegativeEverywhere) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0, 1);
  FeatureMatrix x;
  std::vector<double> y;
  for (int i = 0; i < 40; ++i) {
    x.push_back({u(rng), u(rng)});
    y.push_back(u(rng) * 10);
  }
  const auto gp = GpSurrogate::fit(x, y, noiseless(0.3));
  for (int i = 0; i < 2000; ++i) ASSERT_GE(gp.posterior(std::vector<double>{u(rng), u(rng)}).variance, 0.0);
  for (const auto& row : x) ASSERT_GE(gp.posterior(row).variance, 0.0);
}

TEST(GpPosterior, MatchesDirectFormulaOnTwoPoints) {
  // Closed form for two points: K = [[1, k],[k, 1]] with k = exp(-d^2 / 2l^2).
  const double l = 0.4, d = 0.3;
  const auto gp = GpSurrogate::fit({{0.0}, {d}}, std::vector<double>{-1.0, 1.0}, noiseless(l));
  const double k = std::exp(-d * d / (2 * l * l));
  const double xs = 0.1;
  const double k1 = std::exp(-xs * xs / (2 * l * l)), k2 = std::exp(-(xs - d) * (xs - d) / (2 * l * l));
  const double det = 1 - k * k;
  // standardized targets are exactly -1, 1
  const double a1 = (-1 - k * 1) / det, a2 = (1 + k) / det;
  const double mean = k1 * a1 + k2 * a2;
  const double var = 1 - (k1 * k1 - 2 * k * k1 * k2 + k2 * k2) / det;
  const auto post = gp.posterior(std::vector<double>{xs});
  EXPECT_NEAR(post.mean, mean, 1e-10);
  EXPECT_NEAR(post.variance, var, 1e-10);
}

TEST(GpSample, DegenerateAtTrainingPoints) {
  const auto x = line_points(6);
  std::vector<double> y{0.5, 1.5, -2.0, 0.0, 3.0, 1.0};
  const auto gp = GpSurrogate::fit(x, y, noiseless(0.3));
  std::mt19937_64 rng(3);
  const auto s = gp.sample_on_pool(x, rng);
  for (std::size_t i = 0; i < y.size(); ++i) EXPECT_NEAR(s[i], y[i], 1e-6);
}

TEST(GpSample, SeededDraw) {
  const auto gp = GpSurrogate::fit(line_points(5), std::vector<double>{1, 2, 3, 2, 1}, GpHyperparams{});
  const FeatureMatrix pool{{0.05}, {0.33}, {0.71}, {0.9}};
  std::mt19937_64 a(9), b(9);
  EXPECT_EQ(gp.sample_on_pool(pool, a), gp.sample_on_pool(pool, b));
}

TEST(GpSample, MonteCarloMeanAndCovariance) {
  const auto gp = GpSurrogate::fit({{0.1}, {0.4}, {0.9}}, std::vector<double>{1.0, -0.5, 2.0}, GpHyperparams{});
  const FeatureMatrix pool{{0.25}, {0.6}};
  const auto p0 = gp.posterior(pool[0]);
  const auto p1 = gp.posterior(pool[1]);
  std::mt19937_64 rng(4);
  const int n = 10000;
  double s0 = 0, s1 = 0, s00 = 0;
  for (int i = 0; i < n; ++i) {
    const auto v = gp.sample_on_pool(pool, rng);
    s0 += v[0];
    s1 += v[1];
    s00 += (v[0] - p0.mean) * (v[0] - p0.mean);
  }
  EXPECT_LT(std::abs(s0 / n - p0.mean), 3 * std::sqrt(p0.variance / n));
  EXPECT_LT(std::abs(s1 / n - p1.mean), 3 * std::sqrt(p1.variance / n));
  // sample variance within 5% of the analytic value at this sample size
  EXPECT_NEAR(s00 / n, p0.variance, 0.05 * p0.variance);
}

TEST(GpSample, SharedFactorMatchesIndividualDraws) {
  const auto x = line_points(6);
  const auto a = GpSurrogate::fit(x, std::vector<double>{1, 2, 3, 4, 5, 6}, GpHyperparams{});
  const auto b = GpSurrogate::fit(x, std::vector<double>{9, 1, 4, 1, 5, 9}, GpHyperparams{});
  const FeatureMatrix pool{{0.12}, {0.5}, {0.77}};
  std::mt19937_64 r1(5), r2(5);
  const std::vector<GpSurrogate> both{a, b};
  const auto joint = sample_posterior_on_pool(both, pool, r1);
  const auto sa = a.sample_on_pool(pool, r2);
  const auto sb = b.sample_on_pool(pool, r2);
  for (std::size_t i = 0; i < pool.size(); ++i) {
    EXPECT_NEAR(joint[0][i], sa[i], 1e-12);
    EXPECT_NEAR(joint[1][i], sb[i], 1e-12);
  }
}

TEST(GpSample, EmptyPoolRejected) {
  const auto gp = GpSurrogate::fit({{0.0}}, std::vector<double>{1.0}, GpHyperparams{});
  std::mt19937_64 rng(1);
  EXPECT_THROW(gp.sample_on_pool({}, rng), ValidationError);
}
