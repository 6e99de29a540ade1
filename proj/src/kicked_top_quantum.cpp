#include "chaoscorr/kicked_top_quantum.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

namespace chaoscorr {

void KtParams::validate() const {
  require(j > 0 && j % 2 == 0, "KtParams: j must be a positive even integer");
  require(gamma >= 0.0, "KtParams: gamma must be non-negative");
  require(beta >= 0.0 && beta < 2.0 * std::numbers::pi, "KtParams: beta must lie in [0, 2pi)");
}

KickEigenbasis::KickEigenbasis(int j) : j_(j) {
  require(j > 0 && j % 2 == 0, "KickEigenbasis: j must be a positive even integer");
  const SpinBasis basis(2 * j);
  const RealOperator jx = build_jx<double>(basis);
  RealOperator jx2{jx.entries * jx.entries, true, jx.basis};
  const ParitySector even = parity_sector(jx2.basis, Parity::even);
  const RealOperator sector_jx2 = project(jx2, even);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sector_jx2.entries);
  if (solver.info() != Eigen::Success) throw NumericalError("KickEigenbasis: J_x^2 eigendecomposition failed");
  values_ = solver.eigenvalues();
  vectors_ = solver.eigenvectors();

  m_values_.resize(even.size());
  for (Index k = 0; k < even.size(); ++k) m_values_(k) = basis.m(even.indices[k]);
}

ComplexOperator build_floquet(const KtParams& params) {
  params.validate();
  return build_floquet(params, KickEigenbasis(params.j));
}

ComplexOperator build_floquet(const KtParams& params, const KickEigenbasis& kick) {
  params.validate();
  require(kick.j() == params.j, "build_floquet: eigenbasis built for a different j");
  const double scale = params.gamma / (2.0 * params.j);
  const Eigen::VectorXcd kick_phases =
      (Complex(0.0, -scale) * kick.values().cast<Complex>()).array().exp();
  const Eigen::MatrixXcd vectors = kick.vectors().cast<Complex>();
  const Eigen::VectorXcd precession =
      (Complex(0.0, -params.beta) * kick.m_values().cast<Complex>()).array().exp();

  ComplexOperator floquet;
  floquet.entries = (vectors * kick_phases.asDiagonal() * vectors.transpose()) * precession.asDiagonal();
  floquet.hermitian = false;
  floquet.basis = BasisTag::spin(2 * params.j);
  floquet.basis.sector = Parity::even;
  return floquet;
}

double wrap_phase(double angle) {
  constexpr double pi = std::numbers::pi;
  double r = std::remainder(angle, 2.0 * pi);
  if (r >= pi) r -= 2.0 * pi;
  if (r < -pi) r += 2.0 * pi;
  return r;
}

QuasienergySpectrum quasienergies(const ComplexOperator& floquet, const KtParams& params) {
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(floquet.entries, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) throw NumericalError("quasienergies: eigensolver failed");

  QuasienergySpectrum spectrum;
  spectrum.params = params;
  spectrum.alphas.reserve(static_cast<std::size_t>(floquet.dim()));
  for (const Complex& lambda : solver.eigenvalues()) {
    if (std::abs(std::abs(lambda) - 1.0) > 1e-6)
      throw NumericalError("quasienergies: eigenvalue modulus deviates from 1; operator is not unitary");
    spectrum.alphas.push_back(wrap_phase(std::arg(lambda)));
  }
  std::sort(spectrum.alphas.begin(), spectrum.alphas.end());
  return spectrum;
}

double unitarity_residual(const Eigen::MatrixXcd& u) {
  const Eigen::MatrixXcd gram = u.adjoint() * u;
  return (gram - Eigen::MatrixXcd::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff();
}

}  // namespace chaoscorr
