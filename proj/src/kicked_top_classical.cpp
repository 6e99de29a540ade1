#include "chaoscorr/kicked_top_classical.hpp"

#include <cmath>
#include <numbers>

#include "chaoscorr/kicked_top_quantum.hpp"

namespace chaoscorr {

SphereState::SphereState(const Eigen::Vector3d& v, double tolerance) : v_(v) {
  if (!(std::abs(v.norm() - 1.0) <= tolerance))
    throw InvalidArgument("SphereState: vector is not on the unit sphere");
}

SphereState SphereState::from_angles(double phi, double cos_theta) {
  require(cos_theta >= -1.0 && cos_theta <= 1.0, "SphereState: cos(theta) outside [-1, 1]");
  const double sin_theta = std::sqrt(std::max(0.0, 1.0 - cos_theta * cos_theta));
  SphereState s;
  s.v_ = Eigen::Vector3d(sin_theta * std::cos(phi), sin_theta * std::sin(phi), cos_theta);
  s.v_.normalize();
  return s;
}

double SphereState::phi() const { return wrap_phase(std::atan2(v_.y(), v_.x())); }

Eigen::Vector3d kt_step_raw(const Eigen::Vector3d& x, double beta, double gamma) {
  const double cb = std::cos(beta);
  const double sb = std::sin(beta);
  const double xr = x.x() * cb - x.y() * sb;
  const double yr = x.x() * sb + x.y() * cb;
  const double theta = gamma * xr;
  const double ct = std::cos(theta);
  const double st = std::sin(theta);
  return {xr, yr * ct - x.z() * st, yr * st + x.z() * ct};
}

SphereState kt_step(const SphereState& s, double beta, double gamma) {
  if (!(std::abs(s.vec().norm() - 1.0) <= 1e-9)) throw InvalidArgument("kt_step: input is not a unit vector");
  Eigen::Vector3d next = kt_step_raw(s.vec(), beta, gamma);
  next.normalize();
  return SphereState(next);
}

Eigen::Matrix3d kt_jacobian(const SphereState& s, double beta, double gamma) {
  const double cb = std::cos(beta);
  const double sb = std::sin(beta);
  Eigen::Matrix3d rz;
  rz << cb, -sb, 0.0, sb, cb, 0.0, 0.0, 0.0, 1.0;
  const Eigen::Vector3d xr = rz * s.vec();
  const double theta = gamma * xr.x();
  const double ct = std::cos(theta);
  const double st = std::sin(theta);
  Eigen::Matrix3d rx;
  rx << 1.0, 0.0, 0.0, 0.0, ct, -st, 0.0, st, ct;
  // d(Rx(theta) x')/dtheta
  const Eigen::Vector3d drx(0.0, -xr.y() * st - xr.z() * ct, xr.y() * ct - xr.z() * st);
  // dtheta/dX = gamma * (first row of Rz)
  const Eigen::RowVector3d dtheta = gamma * rz.row(0);
  return rx * rz + drx * dtheta;
}

double max_lyapunov(const SphereState& s0, long n_steps, double beta, double gamma) {
  require(n_steps >= 1, "max_lyapunov: need at least one step");
  SphereState s = s0;
  // Start in the tangent plane; the map carries tangent vectors to tangent vectors.
  Eigen::Vector3d v = s.vec().unitOrthogonal();
  double log_sum = 0.0;
  for (long n = 0; n < n_steps; ++n) {
    v = kt_jacobian(s, beta, gamma) * v;
    s = kt_step(s, beta, gamma);
    v -= v.dot(s.vec()) * s.vec();
    const double norm = v.norm();
    log_sum += std::log(norm);
    v /= norm;
  }
  return log_sum / static_cast<double>(n_steps);
}

SphereState random_sphere_state(Rng& rng) {
  const double cos_theta = rng.uniform(-1.0, 1.0);
  const double phi = rng.uniform(-std::numbers::pi, std::numbers::pi);
  return SphereState::from_angles(phi, cos_theta);
}

EnsembleEstimate phase_avg_lyapunov(double beta, double gamma, Index n_samples, long n_steps, std::uint64_t seed) {
  require(n_samples >= 1, "phase_avg_lyapunov: need at least one sample");
  const std::vector<double> lambdas = parallel_map(n_samples, [&](Index i) {
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(i)}));
    return max_lyapunov(random_sphere_state(rng), n_steps, beta, gamma);
  });
  return mean_and_error(lambdas);
}

KtTrajectory kt_trajectory(const SphereState& s0, Index n_kicks, double beta, double gamma) {
  require(n_kicks >= 0, "kt_trajectory: negative kick count");
  KtTrajectory traj;
  traj.initial = s0;
  traj.beta = beta;
  traj.gamma = gamma;
  traj.phi.reserve(static_cast<std::size_t>(n_kicks));
  traj.cos_theta.reserve(static_cast<std::size_t>(n_kicks));
  SphereState s = s0;
  for (Index k = 0; k < n_kicks; ++k) {
    s = kt_step(s, beta, gamma);
    traj.phi.push_back(s.phi());
    traj.cos_theta.push_back(std::clamp(s.cos_theta(), -1.0, 1.0));
  }
  return traj;
}

}  // namespace chaoscorr
