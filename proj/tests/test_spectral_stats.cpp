#include <algorithm>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "chaoscorr/kicked_top_quantum.hpp"
#include "chaoscorr/spectral_stats.hpp"

using namespace chaoscorr;

namespace {

constexpr double kPi = std::numbers::pi;

RatioOptions circular() {
  RatioOptions o;
  o.circular = true;
  return o;
}

std::vector<double> kt_spectrum(int j, double gamma) {
  const KtParams p{j, kPi / 3, gamma};
  return quasienergies(build_floquet(p), p).alphas;
}

// Composite Simpson on a fixed fine mesh, independent of the adaptive rule.
double simpson(double (*f)(double), int n) {
  const double h = 1.0 / n;
  double s = f(0.0) + f(1.0);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(i * h);
  return s * h / 3.0;
}

std::vector<double> random_levels(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 eng(seed);
  std::uniform_real_distribution<double> u(-kPi, kPi);
  std::vector<double> v(n);
  for (auto& x : v) x = u(eng);
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

TEST(SpacingRatios, EquallySpaced) {
  const std::vector<double> lv{0, 1, 2, 3, 4};
  const auto s = spacing_ratios(lv);
  ASSERT_EQ(s.ratios.size(), 3u);
  for (double r : s.ratios) EXPECT_DOUBLE_EQ(r, 1.0);
  EXPECT_FALSE(s.circular);
  EXPECT_EQ(s.n_levels, 5);
}

TEST(SpacingRatios, ThreeLevels) {
  const std::vector<double> lv{0, 1, 3};
  const auto s = spacing_ratios(lv);
  ASSERT_EQ(s.ratios.size(), 1u);
  EXPECT_DOUBLE_EQ(s.ratios[0], 0.5);
}

TEST(SpacingRatios, Errors) {
  const std::vector<double> unsorted{0, 2, 1, 3};
  const std::vector<double> two{0, 1};
  EXPECT_THROW(spacing_ratios(unsorted), InvalidArgument);
  EXPECT_THROW(spacing_ratios(two), InvalidArgument);
}

TEST(SpacingRatios, CountsLinearAndCircular) {
  const auto lv = random_levels(200, 11);
  const auto lin = spacing_ratios(lv);
  EXPECT_EQ(static_cast<Index>(lin.ratios.size()), 200 - 2 - lin.n_dropped_zero);
  const auto circ = spacing_ratios(lv, circular());
  EXPECT_TRUE(circ.circular);
  EXPECT_EQ(static_cast<Index>(circ.ratios.size()) + circ.n_dropped_zero, 200);
}

TEST(SpacingRatios, ZeroGapPolicy) {
  // gaps 1, 0, 0, 2: (1,0) -> 0, (0,0) dropped, (0,2) -> 0
  const std::vector<double> lv{0, 1, 1, 1, 3};
  const auto s = spacing_ratios(lv);
  EXPECT_EQ(s.n_dropped_zero, 1);
  ASSERT_EQ(s.ratios.size(), 2u);
  EXPECT_EQ(s.ratios[0], 0.0);
  EXPECT_EQ(s.ratios[1], 0.0);
}

TEST(SpacingRatios, DegenerateKickedTopSpectrum) {
  const auto alphas = kt_spectrum(40, 0.0);
  const auto s = spacing_ratios(alphas, circular());
  EXPECT_GT(s.n_dropped_zero, 0);
  for (double r : s.ratios) EXPECT_EQ(r, 0.0);
  EXPECT_NEAR(rescaled_average(s).mean_r, 0.0, 1e-12);
}

TEST(SpacingRatios, RangeAndAffineInvariance) {
  const auto lv = random_levels(500, 5);
  const auto base = spacing_ratios(lv);
  for (double r : base.ratios) {
    EXPECT_GE(r, 0.0);
    EXPECT_LE(r, 1.0);
  }
  for (auto [a, b] : {std::pair{3.7, -12.0}, std::pair{0.01, 5.0}, std::pair{250.0, 1e3}}) {
    std::vector<double> mapped(lv.size());
    std::transform(lv.begin(), lv.end(), mapped.begin(), [=](double x) { return a * x + b; });
    const auto s = spacing_ratios(mapped);
    ASSERT_EQ(s.ratios.size(), base.ratios.size());
    EXPECT_EQ(s.n_dropped_zero, base.n_dropped_zero);
    for (std::size_t k = 0; k < s.ratios.size(); ++k) EXPECT_NEAR(s.ratios[k], base.ratios[k], 1e-9);
  }
}

TEST(SpacingRatios, CircularRotationInvariance) {
  const auto lv = random_levels(300, 9);
  auto base = spacing_ratios(lv, circular()).ratios;
  std::sort(base.begin(), base.end());
  for (double c : {0.3, 2.0, -1.7, 5.5}) {
    std::vector<double> rot;
    for (double x : lv) rot.push_back(wrap_phase(x + c));
    std::sort(rot.begin(), rot.end());
    auto r = spacing_ratios(rot, circular()).ratios;
    std::sort(r.begin(), r.end());
    ASSERT_EQ(r.size(), base.size());
    for (std::size_t k = 0; k < r.size(); ++k) EXPECT_NEAR(r[k], base[k], 1e-12);
  }
}

TEST(ReferencePdf, Values) {
  EXPECT_DOUBLE_EQ(reference_pdf(0.0, RatioReference::poisson), 2.0);
  EXPECT_DOUBLE_EQ(reference_pdf(0.0, RatioReference::wigner_dyson), 0.0);
  EXPECT_DOUBLE_EQ(reference_pdf(1.0, RatioReference::poisson), 0.5);
  const double wd1 = 27.0 / 4.0 * 2.0 / std::pow(3.0, 2.5);
  EXPECT_NEAR(reference_pdf(1.0, RatioReference::wigner_dyson), wd1, 1e-15);
  EXPECT_NEAR(wd1, 0.8660, 5e-5);
  EXPECT_THROW(reference_pdf(-0.01, RatioReference::poisson), InvalidArgument);
  EXPECT_THROW(reference_pdf(1.01, RatioReference::wigner_dyson), InvalidArgument);
}

TEST(ReferenceMeans, ClosedFormAndRoundedValues) {
  const auto& m = reference_means();
  EXPECT_NEAR(m.poisson, 2.0 * std::log(2.0) - 1.0, 1e-9);
  EXPECT_NEAR(m.poisson, 0.386294, 1e-6);
  EXPECT_NEAR(m.poisson, 0.39, 0.005);
  EXPECT_NEAR(m.wigner_dyson, 0.53, 0.01);
  EXPECT_LT(m.poisson, m.wigner_dyson);
  const double wd = simpson([](double r) { return r * reference_pdf(r, RatioReference::wigner_dyson); }, 200000);
  EXPECT_NEAR(m.wigner_dyson, wd, 1e-10);
  // the 3x3 surmise value, not the large-matrix 0.5307
  EXPECT_NEAR(m.wigner_dyson, 0.5359, 1e-4);
  EXPECT_EQ(&reference_means(), &m);
}

TEST(ReferenceMeans, Normalization) {
  for (auto kind : {RatioReference::poisson, RatioReference::wigner_dyson}) {
    const double z = integrate_adaptive([=](double r) { return reference_pdf(r, kind); }, 0.0, 1.0, 1e-12);
    EXPECT_NEAR(z, 1.0, 1e-10);
  }
}

TEST(RescaledAverage, Endpoints) {
  const auto& m = reference_means();
  RatioSample p{std::vector<double>(10, m.poisson), 12, false, 0};
  EXPECT_NEAR(rescaled_average(p).r_tilde, 0.0, 1e-15);
  RatioSample wd{std::vector<double>(10, m.wigner_dyson), 12, false, 0};
  EXPECT_NEAR(rescaled_average(wd).r_tilde, 1.0, 1e-14);
  RatioSample below{std::vector<double>(4, 0.0), 6, false, 0};
  const auto rb = rescaled_average(below);
  EXPECT_DOUBLE_EQ(rb.r_tilde, std::abs(rb.mean_r - rb.ref_poisson) / (rb.ref_wd - rb.ref_poisson));
  EXPECT_THROW(rescaled_average(RatioSample{}), InvalidArgument);
}

TEST(Histogram, SingleValue) {
  const std::vector<double> v(1000, 0.5);
  const auto t = histogram(v, 10, 0.0, 1.0);
  int nonzero = 0;
  for (double d : t.densities)
    if (d != 0.0) {
      ++nonzero;
      EXPECT_DOUBLE_EQ(d, 10.0);
    }
  EXPECT_EQ(nonzero, 1);
}

TEST(Histogram, FlatForUniformGrid) {
  std::vector<double> v;
  for (int i = 0; i < 1000; ++i) v.push_back((i + 0.5) / 1000.0);
  const auto t = histogram(v, 20, 0.0, 1.0);
  for (double d : t.densities) EXPECT_NEAR(d, 1.0, 1e-12);
  EXPECT_NEAR(t.mids.front(), 0.025, 1e-15);
}

TEST(Histogram, NormalizedAndNonNegative) {
  const auto lv = random_levels(777, 2);
  for (int bins : {1, 7, 50}) {
    const auto t = histogram(lv, bins, -kPi, kPi);
    double area = 0.0;
    for (double d : t.densities) {
      EXPECT_GE(d, 0.0);
      area += d * t.width();
    }
    EXPECT_NEAR(area, 1.0, 1e-12);
  }
}

TEST(Histogram, Errors) {
  const std::vector<double> v{0.5};
  EXPECT_THROW(histogram(std::vector<double>{}, 10, 0.0, 1.0), InvalidArgument);
  EXPECT_THROW(histogram(v, 0, 0.0, 1.0), InvalidArgument);
  EXPECT_THROW(histogram(v, 10, 1.0, 1.0), InvalidArgument);
  EXPECT_THROW(histogram(v, 10, 0.6, 1.0), InvalidArgument);
  const std::vector<double> edge{1.0};
  EXPECT_DOUBLE_EQ(histogram(edge, 4, 0.0, 1.0).densities.back(), 4.0);
}
