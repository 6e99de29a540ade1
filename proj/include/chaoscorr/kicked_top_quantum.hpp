#pragma once

#include <vector>

#include "chaoscorr/spin_ops.hpp"

namespace chaoscorr {

struct KtParams {
  int j = 0;          // even
  double beta = 0.0;  // precession angle per period, [0, 2pi)
  double gamma = 0.0; // kick strength

  void validate() const;
};

/// Quasienergies alpha_k = arg(lambda_k) in [-pi, pi), sorted ascending.
struct QuasienergySpectrum {
  std::vector<double> alphas;
  KtParams params;
};

/// Even-sector J_x^2 diagonalized once per j. The kick factor for any gamma is
/// V exp(-i gamma/(2j) D) V^T, so gamma sweeps at fixed j reuse this.
class KickEigenbasis {
 public:
  explicit KickEigenbasis(int j);

  int j() const { return j_; }
  Index dim() const { return values_.size(); }
  const Eigen::VectorXd& values() const { return values_; }
  const Eigen::MatrixXd& vectors() const { return vectors_; }
  /// m values of the even-sector states, in sector order.
  const Eigen::VectorXd& m_values() const { return m_values_; }

 private:
  int j_;
  Eigen::VectorXd values_;
  Eigen::MatrixXd vectors_;
  Eigen::VectorXd m_values_;
};

/// F = exp(-i gamma/(2j) Jx^2) exp(-i beta Jz) restricted to the even sector.
ComplexOperator build_floquet(const KtParams& params);
ComplexOperator build_floquet(const KtParams& params, const KickEigenbasis& kick);

/// Eigenphases of a unitary matrix. Rejects eigenvalues whose modulus departs
/// from one by more than 1e-6.
QuasienergySpectrum quasienergies(const ComplexOperator& floquet, const KtParams& params);

/// Reduces a phase to [-pi, pi); the principal value pi maps to -pi.
double wrap_phase(double angle);

/// max |U^dagger U - I| entrywise.
double unitarity_residual(const Eigen::MatrixXcd& u);

}  // namespace chaoscorr
