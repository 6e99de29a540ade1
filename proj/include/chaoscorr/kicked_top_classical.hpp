#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "chaoscorr/ensemble.hpp"

namespace chaoscorr {

/// Unit vector (X, Y, Z) on the classical spin sphere.
class SphereState {
 public:
  SphereState() : v_(0.0, 0.0, 1.0) {}
  /// Throws if |v| differs from one by more than `tolerance`.
  explicit SphereState(const Eigen::Vector3d& v, double tolerance = 1e-9);

  static SphereState from_angles(double phi, double cos_theta);

  const Eigen::Vector3d& vec() const { return v_; }
  double x() const { return v_.x(); }
  double y() const { return v_.y(); }
  double z() const { return v_.z(); }
  /// Azimuth in [-pi, pi).
  double phi() const;
  double cos_theta() const { return v_.z(); }

 private:
  Eigen::Vector3d v_;
};

/// One kick: rotation about z by beta, then about x by Theta = gamma * X'.
/// The result is renormalized.
SphereState kt_step(const SphereState& s, double beta, double gamma);

/// Same step without renormalization, for drift audits.
Eigen::Vector3d kt_step_raw(const Eigen::Vector3d& x, double beta, double gamma);

/// d(kt_step)/dX including the dependence of Theta on X and Y.
Eigen::Matrix3d kt_jacobian(const SphereState& s, double beta, double gamma);

/// Largest Lyapunov exponent from a renormalized tangent vector (one
/// renormalization per kick, no transient discarded).
double max_lyapunov(const SphereState& s0, long n_steps, double beta, double gamma);

/// Uniform point on the sphere: cos(theta) ~ U[-1,1], phi ~ U[-pi,pi).
SphereState random_sphere_state(Rng& rng);

/// Sphere average of max_lyapunov over n_samples initial states; sample i uses
/// the stream derive_seed(seed, {i}).
EnsembleEstimate phase_avg_lyapunov(double beta, double gamma, Index n_samples, long n_steps, std::uint64_t seed);

struct KtTrajectory {
  std::vector<double> phi;        // [-pi, pi)
  std::vector<double> cos_theta;  // [-1, 1]
  SphereState initial;
  double beta = 0.0;
  double gamma = 0.0;

  Index n_kicks() const { return static_cast<Index>(phi.size()); }
};

/// Records (phi, cos theta) after each of n_kicks kicks.
KtTrajectory kt_trajectory(const SphereState& s0, Index n_kicks, double beta, double gamma);

}  // namespace chaoscorr
