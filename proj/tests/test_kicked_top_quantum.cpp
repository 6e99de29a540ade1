#include <algorithm>
#include <numbers>
#include <random>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "chaoscorr/kicked_top_quantum.hpp"
#include "oracles.hpp"

using namespace chaoscorr;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<Index> even_indices(int j) { return parity_sector(BasisTag::spin(2 * j), Parity::even).indices; }

// Distance on the circle between two sorted phase lists, matched after
// aligning the rotation that minimizes the first gap.
double circular_set_distance(std::vector<double> a, std::vector<double> b) {
  if (a.size() != b.size()) return 1e300;
  for (auto* v : {&a, &b}) {
    for (double& x : *v) x = wrap_phase(x);
    std::sort(v->begin(), v->end());
  }
  double best = 1e300;
  const std::size_t n = a.size();
  for (std::size_t shift = 0; shift < n; ++shift) {
    double worst = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double d = std::abs(wrap_phase(a[k] - b[(k + shift) % n]));
      worst = std::max(worst, d);
      if (worst >= best) break;
    }
    best = std::min(best, worst);
  }
  return best;
}

}  // namespace

TEST(KtParams, Validation) {
  EXPECT_THROW((KtParams{3, 1.0, 1.0}).validate(), InvalidArgument);
  EXPECT_THROW((KtParams{0, 1.0, 1.0}).validate(), InvalidArgument);
  EXPECT_THROW((KtParams{4, 1.0, -0.1}).validate(), InvalidArgument);
  EXPECT_THROW((KtParams{4, 2.0 * kPi, 1.0}).validate(), InvalidArgument);
  EXPECT_NO_THROW((KtParams{4, 0.0, 0.0}).validate());
}

TEST(BuildFloquet, ZeroKickIsDiagonalPrecession) {
  const KtParams p{4, kPi / 3, 0.0};
  const auto f = build_floquet(p).entries;
  const std::vector<double> m{-4, -2, 0, 2, 4};
  for (Index r = 0; r < 5; ++r)
    for (Index c = 0; c < 5; ++c) {
      const Complex want = r == c ? std::exp(Complex(0.0, -p.beta * m[r])) : Complex(0.0);
      EXPECT_LT(std::abs(f(r, c) - want), 1e-12);
    }
}

TEST(BuildFloquet, UnitaryAcrossSizes) {
  for (int j : {2, 4, 20, 100, 400}) {
    for (double g : {0.0, 0.2, 2.3, 7.0}) {
      const auto f = build_floquet({j, kPi / 3, g});
      EXPECT_EQ(f.dim(), j + 1);
      EXPECT_LT(unitarity_residual(f.entries), 1e-10) << "j = " << j << ", gamma = " << g;
    }
  }
}

TEST(BuildFloquet, UnitaryAtJ2000) {
  const auto f = build_floquet({2000, kPi / 3, 7.0});
  EXPECT_LT(unitarity_residual(f.entries), 1e-10);
}

TEST(BuildFloquet, MatchesScalingAndSquaringOracle) {
  const int j = 4;
  const double beta = kPi / 3, gamma = 2.3;
  const auto s = oracle::spin_matrices(2 * j);
  const Complex i(0.0, 1.0);
  const Eigen::MatrixXcd kick = oracle::expm(-i * gamma / (2.0 * j) * s.jx * s.jx);
  const Eigen::MatrixXcd prec = oracle::expm(-i * beta * s.jz);
  const auto idx = even_indices(j);
  const Eigen::MatrixXcd want = Eigen::MatrixXcd(kick(idx, idx)) * Eigen::MatrixXcd(prec(idx, idx));
  const auto f = build_floquet({j, beta, gamma}).entries;
  EXPECT_LT((f - want).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(BuildFloquet, OracleAgreementAtLargerJ) {
  const int j = 12;
  const auto s = oracle::spin_matrices(2 * j);
  const Complex i(0.0, 1.0);
  const auto idx = even_indices(j);
  for (double gamma : {0.7, 5.0}) {
    const Eigen::MatrixXcd kick = oracle::expm(-i * gamma / (2.0 * j) * s.jx * s.jx);
    const Eigen::MatrixXcd prec = oracle::expm(-i * 1.1 * s.jz);
    const Eigen::MatrixXcd want = Eigen::MatrixXcd(kick(idx, idx)) * Eigen::MatrixXcd(prec(idx, idx));
    EXPECT_LT((build_floquet({j, 1.1, gamma}).entries - want).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(BuildFloquet, SharedEigenbasisMatchesDirect) {
  const KickEigenbasis kick(40);
  for (double g : {0.5, 3.0}) {
    const KtParams p{40, 0.4, g};
    EXPECT_LT((build_floquet(p, kick).entries - build_floquet(p).entries).cwiseAbs().maxCoeff(), 1e-13);
  }
  EXPECT_THROW(build_floquet({20, 0.4, 1.0}, kick), InvalidArgument);
}

TEST(Quasienergies, DegenerateZeroKick) {
  const KtParams p{4, kPi / 3, 0.0};
  const auto spec = quasienergies(build_floquet(p), p);
  ASSERT_EQ(spec.alphas.size(), 5u);
  std::vector<double> want;
  for (double m : {-4.0, -2.0, 0.0, 2.0, 4.0}) want.push_back(wrap_phase(-p.beta * m));
  std::sort(want.begin(), want.end());
  for (std::size_t k = 0; k < 5; ++k) EXPECT_NEAR(spec.alphas[k], want[k], 1e-10);
  // only multiples of 2pi/3 occur
  for (double a : spec.alphas) {
    const double k = a / (2.0 * kPi / 3.0);
    EXPECT_NEAR(k, std::round(k), 1e-10);
  }
}

TEST(Quasienergies, RangeSortedAndCount) {
  for (int j : {4, 50, 200}) {
    const KtParams p{j, kPi / 3, 3.0};
    const auto spec = quasienergies(build_floquet(p), p);
    ASSERT_EQ(static_cast<int>(spec.alphas.size()), j + 1);
    EXPECT_TRUE(std::is_sorted(spec.alphas.begin(), spec.alphas.end()));
    EXPECT_GE(spec.alphas.front(), -kPi);
    EXPECT_LT(spec.alphas.back(), kPi);
  }
}

TEST(Quasienergies, InvariantUnderBasisPermutation) {
  const int j = 100;
  const double beta = kPi / 3, gamma = 7.0;
  const KtParams p{j, beta, gamma};
  const auto reference = quasienergies(build_floquet(p), p).alphas;

  // Rebuild the even-sector Floquet operator in a shuffled state order.
  const auto s = oracle::spin_matrices(2 * j);
  const auto idx = even_indices(j);
  const Index d = static_cast<Index>(idx.size());
  std::vector<Index> perm(idx.size());
  for (Index k = 0; k < d; ++k) perm[k] = k;
  std::shuffle(perm.begin(), perm.end(), std::mt19937_64(7));
  std::vector<Index> shuffled(idx.size());
  for (Index k = 0; k < d; ++k) shuffled[k] = idx[perm[k]];

  const Eigen::MatrixXd jx = s.jx.real();
  const Eigen::MatrixXd jx2 = jx * jx;
  const Eigen::MatrixXd gen = jx2(shuffled, shuffled);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gen);
  const Eigen::VectorXcd ph = (Complex(0.0, -gamma / (2.0 * j)) * es.eigenvalues().cast<Complex>()).array().exp();
  Eigen::VectorXcd prec(d);
  for (Index k = 0; k < d; ++k) prec(k) = std::exp(Complex(0.0, -beta * (shuffled[k] - j)));
  const Eigen::MatrixXcd v = es.eigenvectors().cast<Complex>();
  ComplexOperator f;
  f.entries = v * ph.asDiagonal() * v.adjoint() * prec.asDiagonal();
  const auto permuted = quasienergies(f, p).alphas;
  EXPECT_LT(circular_set_distance(reference, permuted), 1e-8);
}

TEST(Quasienergies, TimeReversalConjugate) {
  for (double g : {1.0, 4.0}) {
    const KtParams p{60, kPi / 3, g};
    const auto f = build_floquet(p);
    ComplexOperator fc = f;
    fc.entries = f.entries.conjugate();
    std::vector<double> neg = quasienergies(f, p).alphas;
    for (double& a : neg) a = -a;
    EXPECT_LT(circular_set_distance(neg, quasienergies(fc, p).alphas), 1e-8);
  }
}

TEST(Quasienergies, RejectsNonUnitary) {
  const KtParams p{4, kPi / 3, 1.0};
  auto f = build_floquet(p);
  f.entries *= 1.01;
  EXPECT_THROW(quasienergies(f, p), NumericalError);
}

TEST(WrapPhase, HalfOpenInterval) {
  EXPECT_DOUBLE_EQ(wrap_phase(kPi), -kPi);
  EXPECT_DOUBLE_EQ(wrap_phase(-kPi), -kPi);
  EXPECT_NEAR(wrap_phase(3.0 * kPi + 0.25), -kPi + 0.25, 1e-12);
  EXPECT_NEAR(wrap_phase(-0.5), -0.5, 0.0);
  std::mt19937_64 eng(3);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  for (int k = 0; k < 1000; ++k) {
    const double w = wrap_phase(u(eng));
    EXPECT_GE(w, -kPi);
    EXPECT_LT(w, kPi);
  }
}
