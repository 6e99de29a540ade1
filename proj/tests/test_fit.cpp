#include <algorithm>
#include <random>

#include <gtest/gtest.h>

#include "chaoscorr/fit.hpp"
#include "oracles.hpp"

using namespace chaoscorr;

namespace {

constexpr double kQ = 3.8834;
constexpr double kKappa = 2.9892;

std::vector<FitPoint> synthetic(int n, double q, double kappa, double amplitude = 1.02) {
  std::vector<FitPoint> pts;
  for (int i = 0; i < n; ++i) {
    const double x = 0.05 + 0.95 * i / (n - 1);
    pts.push_back({x, correspondence_curve(x, amplitude, q, kappa), 1.0});
  }
  return pts;
}

}  // namespace

TEST(NelderMead, Rosenbrock) {
  const auto f = [](const Eigen::VectorXd& x) {
    return 100.0 * std::pow(x(1) - x(0) * x(0), 2) + std::pow(1.0 - x(0), 2);
  };
  const auto r = nelder_mead(f, Eigen::Vector2d(-1.2, 1.0));
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.x(0), 1.0, 1e-7);
  EXPECT_NEAR(r.x(1), 1.0, 1e-7);
  EXPECT_LT(r.value, 1e-14);
}

TEST(NelderMead, NonFiniteTreatedAsWorst) {
  const auto f = [](const Eigen::VectorXd& x) {
    return x(0) <= 0.0 ? std::nan("") : (std::log(x(0)) - 1.0) * (std::log(x(0)) - 1.0);
  };
  const auto r = nelder_mead(f, Eigen::VectorXd::Constant(1, 0.5));
  EXPECT_NEAR(r.x(0), std::exp(1.0), 1e-6);
}

TEST(NelderMead, IterationCap) {
  NelderMeadOptions o;
  o.max_iterations = 5;
  const auto r = nelder_mead([](const Eigen::VectorXd& x) { return x.squaredNorm(); }, Eigen::Vector3d(5, 5, 5), o);
  EXPECT_FALSE(r.converged);
  EXPECT_LE(r.iterations, 5);
}

TEST(FitCorrespondence, NoiselessRecovery) {
  const auto pts = synthetic(20, kQ, kKappa);
  const auto r = fit_correspondence(pts);
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.q, kQ, 1e-6);
  EXPECT_NEAR(r.kappa, kKappa, 1e-6);
  EXPECT_LT(r.rss, 1e-20);
  EXPECT_EQ(r.n_points, 20);
  EXPECT_DOUBLE_EQ(r.amplitude, 1.02);
}

TEST(FitCorrespondence, RecoveryAcrossParameters) {
  for (auto [q, k] : {std::pair{1.5, 1.2}, std::pair{3.8328, 3.3885}, std::pair{7.0, 4.5}}) {
    const auto r = fit_correspondence(synthetic(20, q, k));
    EXPECT_NEAR(r.q, q, 1e-6);
    EXPECT_NEAR(r.kappa, k, 1e-6);
  }
}

TEST(FitCorrespondence, NoisyRecoveryAveragedOverSeeds) {
  const auto clean = synthetic(2000, kQ, kKappa);
  double sq = 0.0, sk = 0.0;
  const int seeds = 50;
  for (int s = 0; s < seeds; ++s) {
    auto pts = clean;
    const auto noise = oracle::gaussian(pts.size(), 1000 + s);
    for (std::size_t i = 0; i < pts.size(); ++i) pts[i].y *= 1.0 + 0.01 * noise[i];
    const auto r = fit_correspondence(pts);
    sq += r.q;
    sk += r.kappa;
  }
  EXPECT_NEAR(sq / seeds, kQ, 1e-3);
  EXPECT_NEAR(sk / seeds, kKappa, 1e-3);
}

TEST(FitCorrespondence, FreeAmplitude) {
  FitOptions o;
  o.free_amplitude = true;
  const auto r = fit_correspondence(synthetic(25, 2.5, 2.0, 0.97), o);
  EXPECT_TRUE(r.free_amplitude);
  EXPECT_NEAR(r.amplitude, 0.97, 1e-6);
  EXPECT_NEAR(r.q, 2.5, 1e-5);
  EXPECT_NEAR(r.kappa, 2.0, 1e-5);
}

TEST(FitCorrespondence, WeightsMatter) {
  auto pts = synthetic(15, kQ, kKappa);
  pts[3].y += 0.3;
  FitOptions w;
  w.weighted = true;
  const auto plain = fit_correspondence(pts);
  pts[3].weight = 1e-6;
  const auto weighted = fit_correspondence(pts, w);
  EXPECT_TRUE(weighted.weighted);
  EXPECT_LT(std::abs(weighted.q - kQ), std::abs(plain.q - kQ));
  pts[3].weight = 0.0;
  EXPECT_THROW(fit_correspondence(pts, w), InvalidArgument);
}

TEST(FitCorrespondence, MonotoneFittedCurve) {
  auto pts = synthetic(12, kQ, kKappa);
  std::mt19937_64 eng(3);
  std::normal_distribution<double> n(0.0, 0.05);
  for (auto& p : pts) p.y += n(eng);
  const auto r = fit_correspondence(pts);
  ASSERT_GT(r.q, 0.0);
  ASSERT_GT(r.kappa, 0.0);
  for (double x = 0.01; x <= 1.5; x += 0.01) {
    const double d = r.q * r.kappa * std::pow(x, r.kappa - 1.0) * std::exp(-r.q * std::pow(x, r.kappa));
    EXPECT_GT(d, 0.0);
  }
}

TEST(FitCorrespondence, ShuffleInvariance) {
  auto pts = synthetic(24, kQ, kKappa);
  std::mt19937_64 eng(4);
  std::normal_distribution<double> n(0.0, 0.08);
  for (auto& p : pts) p.y += n(eng);
  const auto base = fit_correspondence(pts);
  for (int k = 0; k < 5; ++k) {
    std::shuffle(pts.begin(), pts.end(), eng);
    const auto r = fit_correspondence(pts);
    EXPECT_EQ(r.q, base.q);
    EXPECT_EQ(r.kappa, base.kappa);
    EXPECT_EQ(r.rss, base.rss);
  }
}

TEST(FitCorrespondence, Preconditions) {
  const std::vector<FitPoint> one{{0.5, 0.5, 1.0}};
  EXPECT_THROW(fit_correspondence(one), InvalidArgument);
  auto pts = synthetic(5, kQ, kKappa);
  pts[2].x = 0.0;
  EXPECT_THROW(fit_correspondence(pts), InvalidArgument);
  pts[2].x = 0.4;
  pts[1].y = std::nan("");
  EXPECT_THROW(fit_correspondence(pts), InvalidArgument);
}
