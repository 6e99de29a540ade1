#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "chaoscorr/dicke_quantum.hpp"
#include "chaoscorr/dop853.hpp"
#include "chaoscorr/ensemble.hpp"

namespace chaoscorr {

/// Frequencies and coupling of the classical Dicke flow (the atom number only
/// enters the quantum model).
struct DickeFlowParams {
  double omega = 1.0;
  double omega0 = 1.0;
  double xi = 1.0;

  static DickeFlowParams from(const DickeParams& p) { return {p.omega, p.omega0, p.xi}; }
};

/// Boson quadratures (p, q) and atomic inversion/phase (P, Q).
struct DickeState {
  double p = 0.0;
  double q = 0.0;
  double P = 0.0;
  double Q = 0.0;

  Eigen::Vector4d vec() const { return {p, q, P, Q}; }
  static DickeState from_vec(const Eigen::Vector4d& v) { return {v(0), v(1), v(2), v(3)}; }
};

/// Distance from the coordinate poles |P| = 1 within which the canonical
/// right-hand side is rejected.
inline constexpr double kPoleMargin = 1e-12;

/// (p, q, X, Y, Z) with X = sqrt(1-P^2) cos Q, Y = sqrt(1-P^2) sin Q, Z = P.
/// Trajectories are integrated in this form, which is regular at the poles.
using BlochVector = Eigen::Matrix<double, 5, 1>;

BlochVector to_bloch(const DickeState& s);
/// Inverse of to_bloch; P is clamped to [-1, 1] and Q wrapped to [-pi, pi).
DickeState from_bloch(const BlochVector& y);

/// w0 P + (w/2)(p^2 + q^2) + 2 xi q cos(Q) sqrt(1 - P^2).
double classical_energy(const DickeState& s, const DickeFlowParams& params);

/// (dp/dt, dq/dt, dP/dt, dQ/dt). Throws NumericalError within kPoleMargin of |P| = 1.
Eigen::Vector4d dicke_rhs(const DickeState& s, const DickeFlowParams& params);

/// d(dicke_rhs)/d(p, q, P, Q).
Eigen::Matrix4d dicke_rhs_jacobian(const DickeState& s, const DickeFlowParams& params);

/// Same flow on (p, q, X, Y, Z): dJ/dt = grad_J(H) x J for the spin part.
BlochVector dicke_bloch_rhs(const BlochVector& y, const DickeFlowParams& params);

struct DickeTrajectory {
  DickeState initial;
  double t_max = 0.0;
  std::vector<DenseSegment<5>> segments;  // Bloch form

  DickeState final_state() const;
  /// Dense-output state at time t in [0, t_max].
  DickeState at(double t) const;
};

/// Adaptive DOP853 integration with rtol = atol = tol, keeping every step's
/// interpolant. After each step the state is put back on the unit sphere and
/// the initial energy surface.
DickeTrajectory integrate(const DickeState& s0, const DickeFlowParams& params, double t_max, double tol = 1e-10);

/// Endpoint of the flow after time dt (dt may be negative).
DickeState flow(const DickeState& s0, const DickeFlowParams& params, double dt, double tol = 1e-10);

struct SectionCrossing {
  double t = 0.0;
  double P = 0.0;
  double Q = 0.0;  // wrapped to [-pi, pi]
  int direction = 1;
};

/// Crossings of p = 0 with sign(dp/dt) == direction, refined on the dense
/// output until |p| < 1e-10.
std::vector<SectionCrossing> poincare_section(const DickeTrajectory& trajectory, const DickeFlowParams& params,
                                              int direction = 1);

/// Same as integrate + poincare_section without storing the trajectory.
std::vector<SectionCrossing> section_crossings(const DickeState& s0, const DickeFlowParams& params, double t_max,
                                               double tol = 1e-10, int direction = 1);

/// Mean time between consecutive crossings (0 when fewer than two).
double mean_traversal_time(std::span<const SectionCrossing> crossings);

struct ShellRoots {
  int count = 0;
  std::array<double, 2> q{};  // ascending
};

/// Real roots q of (w/2) q^2 + 2 xi cos(Q) sqrt(1-P^2) q + (w0 P - e) = 0.
ShellRoots solve_q_on_shell(double P, double Q, double e, const DickeFlowParams& params);

/// True when the p = 0 plane at (P, Q) meets the energy surface e.
bool shell_accessible(double P, double Q, double e, const DickeFlowParams& params);

/// Fraction of [-1,1] x [-pi,pi] where shell_accessible holds, by midpoint grid.
double accessible_fraction(double e, const DickeFlowParams& params, int grid = 400);

/// Rejection-samples (P, Q) uniformly over the accessible region, sets p = 0 and
/// picks one of the two q roots at random.
std::vector<DickeState> sample_shell(double e, const DickeFlowParams& params, Index n, std::uint64_t seed);

struct DickeLyapunovOptions {
  double renormalization_interval = 1.0;
  double tol = 1e-10;
};

/// Largest Lyapunov exponent from the variational equations (Bloch form),
/// renormalizing the tangent vector every renormalization_interval; no
/// transient discarded.
double max_lyapunov_dicke(const DickeState& s0, const DickeFlowParams& params, double t_max,
                          const DickeLyapunovOptions& options = {});

/// Carries (state, tangent vector) forward by dt with the canonical
/// variational equations. Throws near the poles.
std::pair<DickeState, Eigen::Vector4d> propagate_tangent(const DickeState& s0, const Eigen::Vector4d& v0,
                                                         const DickeFlowParams& params, double dt,
                                                         double tol = 1e-12);

/// Average of max_lyapunov_dicke over sample_shell(e, params, n_samples, seed).
EnsembleEstimate phase_avg_lyapunov_dicke(const DickeFlowParams& params, double e, Index n_samples, double t_max,
                                          std::uint64_t seed, const DickeLyapunovOptions& options = {});

}  // namespace chaoscorr
