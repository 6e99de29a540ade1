#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "chaoscorr/chaos_measure.hpp"
#include "chaoscorr/kicked_top_classical.hpp"
#include "chaoscorr/kicked_top_quantum.hpp"
#include "oracles.hpp"

using namespace chaoscorr;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kBeta = kPi / 3;

std::vector<SphereState> random_states(int n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<SphereState> out;
  for (int i = 0; i < n; ++i) out.push_back(random_sphere_state(rng));
  return out;
}

Eigen::Matrix<double, 3, 2> tangent_frame(const Eigen::Vector3d& x) {
  Eigen::Matrix<double, 3, 2> f;
  f.col(0) = x.unitOrthogonal();
  f.col(1) = x.cross(f.col(0));
  return f;
}

}  // namespace

TEST(SphereState, RejectsOffSphere) {
  EXPECT_THROW(SphereState(Eigen::Vector3d(1.0, 1.0, 0.0)), InvalidArgument);
  EXPECT_NO_THROW(SphereState(Eigen::Vector3d(0.6, 0.8, 0.0)));
  EXPECT_THROW(SphereState::from_angles(0.0, 1.5), InvalidArgument);
  const auto s = SphereState::from_angles(2.0, -0.3);
  EXPECT_NEAR(s.phi(), 2.0, 1e-14);
  EXPECT_NEAR(s.cos_theta(), -0.3, 1e-15);
}

TEST(KtStep, ZeroKickIsZRotation) {
  for (const auto& s : random_states(50, 1)) {
    const auto t = kt_step(s, kBeta, 0.0);
    EXPECT_NEAR(t.z(), s.z(), 1e-15);
    EXPECT_NEAR(wrap_phase(t.phi() - s.phi() - kBeta), 0.0, 1e-12);
  }
}

TEST(KtStep, PoleFixedWithoutPrecession) {
  const SphereState pole(Eigen::Vector3d(0.0, 0.0, 1.0));
  for (double g : {0.5, 3.0, 7.0}) EXPECT_EQ(kt_step(pole, 0.0, g).vec(), pole.vec());
}

TEST(KtStep, RejectsNonUnitInput) {
  // built with a loose tolerance, so only kt_step's own check can reject it
  const SphereState loose(Eigen::Vector3d(0.0, 0.0, 1.0 + 1e-8), 1e-6);
  EXPECT_THROW(kt_step(loose, kBeta, 1.0), InvalidArgument);
}

TEST(KtStep, NormPreservedOverLongRun) {
  SphereState s = random_states(1, 3)[0];
  double worst_raw = 0.0;
  for (int n = 0; n < 100000; ++n) {
    worst_raw = std::max(worst_raw, std::abs(kt_step_raw(s.vec(), kBeta, 7.0).norm() - 1.0));
    s = kt_step(s, kBeta, 7.0);
    ASSERT_LT(std::abs(s.vec().norm() - 1.0), 1e-12);
  }
  EXPECT_LT(worst_raw, 1e-13);
}

TEST(KtStep, ZeroKickIsometry) {
  auto states = random_states(6, 4);
  std::vector<double> angles;
  for (std::size_t a = 0; a < states.size(); ++a)
    for (std::size_t b = a + 1; b < states.size(); ++b) angles.push_back(states[a].vec().dot(states[b].vec()));
  for (int n = 0; n < 2000; ++n)
    for (auto& s : states) s = kt_step(s, kBeta, 0.0);
  std::size_t k = 0;
  for (std::size_t a = 0; a < states.size(); ++a)
    for (std::size_t b = a + 1; b < states.size(); ++b) EXPECT_NEAR(states[a].vec().dot(states[b].vec()), angles[k++], 1e-12);
}

TEST(KtJacobian, ZeroKickIsConstantRotation) {
  Eigen::Matrix3d rz;
  rz << std::cos(kBeta), -std::sin(kBeta), 0, std::sin(kBeta), std::cos(kBeta), 0, 0, 0, 1;
  for (const auto& s : random_states(5, 5)) EXPECT_LT((kt_jacobian(s, kBeta, 0.0) - rz).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(KtJacobian, FiniteDifferences) {
  std::mt19937_64 eng(6);
  std::uniform_real_distribution<double> ub(0.0, 2.0 * kPi), ug(0.0, 8.0);
  const double h = 1e-6;
  double worst = 0.0;
  for (const auto& s : random_states(100, 7)) {
    const double beta = ub(eng), gamma = ug(eng);
    const Eigen::Matrix3d jac = kt_jacobian(s, beta, gamma);
    for (int c = 0; c < 3; ++c) {
      Eigen::Vector3d dx = Eigen::Vector3d::Zero();
      dx(c) = h;
      const Eigen::Vector3d fd = (kt_step_raw(s.vec() + dx, beta, gamma) - kt_step_raw(s.vec() - dx, beta, gamma)) / (2 * h);
      worst = std::max(worst, (fd - jac.col(c)).cwiseAbs().maxCoeff());
    }
  }
  EXPECT_LT(worst, 1e-6);
}

TEST(KtJacobian, TangentAreaPreserved) {
  for (double g : {0.2, 2.3, 7.0}) {
    for (const auto& s : random_states(40, 8)) {
      const auto next = kt_step(s, kBeta, g);
      const auto e = tangent_frame(s.vec());
      const auto f = tangent_frame(next.vec());
      const Eigen::Matrix2d m = f.transpose() * kt_jacobian(s, kBeta, g) * e;
      EXPECT_NEAR(m.determinant(), 1.0, 1e-8);
    }
  }
}

TEST(MaxLyapunov, ZeroKick) {
  for (const auto& s : random_states(3, 9)) EXPECT_NEAR(max_lyapunov(s, 100000, kBeta, 0.0), 0.0, 2e-3);
}

TEST(MaxLyapunov, StrongKickPositive) {
  for (const auto& s : random_states(5, 10)) EXPECT_GT(max_lyapunov(s, 20000, kBeta, 7.0), 0.3);
}

TEST(MaxLyapunov, NonNegativeUpToNoise) {
  for (double g : {0.0, 0.2, 1.0, 2.3}) EXPECT_GE(max_lyapunov(random_states(1, 11)[0], 100000, kBeta, g), -2e-3);
}

TEST(MaxLyapunov, MatchesQrProductOracle) {
  for (double g : {2.3, 7.0}) {
    for (const auto& s0 : random_states(3, 12)) {
      const long n = 10000;
      std::vector<Eigen::Matrix3d> jacs;
      SphereState s = s0;
      for (long k = 0; k < n; ++k) {
        jacs.push_back(kt_jacobian(s, kBeta, g));
        s = kt_step(s, kBeta, g);
      }
      EXPECT_NEAR(max_lyapunov(s0, n, kBeta, g), oracle::qr_lyapunov(jacs), 1e-3) << "gamma = " << g;
    }
  }
}

TEST(PhaseAvgLyapunov, RegularAndChaotic) {
  const auto reg = phase_avg_lyapunov(kBeta, 0.2, 100, 20000, 1);
  EXPECT_LT(std::abs(reg.mean), 0.01);
  EXPECT_EQ(reg.n, 100);
  const auto ch = phase_avg_lyapunov(kBeta, 7.0, 100, 5000, 1);
  EXPECT_GT(ch.mean - 5.0 * ch.std_error, 0.0);
  EXPECT_GT(ch.mean, 0.5 * 0.97);
}

TEST(PhaseAvgLyapunov, SeedConsistency) {
  const auto a = phase_avg_lyapunov(kBeta, 3.0, 20000, 1000, 101);
  const auto b = phase_avg_lyapunov(kBeta, 3.0, 20000, 1000, 202);
  const double combined = std::hypot(a.std_error, b.std_error);
  EXPECT_LT(std::abs(a.mean - b.mean), 3.0 * combined);
  EXPECT_NE(a.mean, b.mean);
}

TEST(PhaseAvgLyapunov, Deterministic) {
  const auto a = phase_avg_lyapunov(kBeta, 2.0, 64, 1000, 5);
  const auto b = phase_avg_lyapunov(kBeta, 2.0, 64, 1000, 5);
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.std_error, b.std_error);
}

TEST(RandomSphereState, UniformMoments) {
  Rng rng(77);
  double sz = 0.0, sz2 = 0.0, sx = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const auto s = random_sphere_state(rng);
    sz += s.z();
    sz2 += s.z() * s.z();
    sx += s.x();
  }
  EXPECT_NEAR(sz / n, 0.0, 0.01);
  EXPECT_NEAR(sz2 / n, 1.0 / 3.0, 0.01);
  EXPECT_NEAR(sx / n, 0.0, 0.01);
}

TEST(KtTrajectory, CountsAndRanges) {
  const auto s = random_states(1, 13)[0];
  const auto t = kt_trajectory(s, 1000, kBeta, 7.0);
  EXPECT_EQ(t.n_kicks(), 1000);
  EXPECT_EQ(t.cos_theta.size(), 1000u);
  for (Index k = 0; k < t.n_kicks(); ++k) {
    EXPECT_GE(t.phi[k], -kPi);
    EXPECT_LT(t.phi[k], kPi);
    EXPECT_LE(std::abs(t.cos_theta[k]), 1.0);
  }
  const auto flat = kt_trajectory(s, 500, kBeta, 0.0);
  for (double c : flat.cos_theta) EXPECT_NEAR(c, flat.cos_theta.front(), 1e-13);
}

TEST(KtTrajectory, RegularRingsAtWeakKick) {
  // 90 trajectories of 300 kicks at gamma = 0.2 stay on thin curves.
  const auto grid = build_grid(Rect::kicked_top(), 300);
  double sum = 0.0;
  for (const auto& s : random_states(90, 14)) {
    const auto t = kt_trajectory(s, 300, kBeta, 0.2);
    SectionPointCloud pc;
    for (Index k = 0; k < t.n_kicks(); ++k) pc.push_back(t.phi[k], t.cos_theta[k]);
    sum += chaos_measure(pc, grid).r_c;
  }
  EXPECT_LT(sum / 90.0, 0.4);
}
