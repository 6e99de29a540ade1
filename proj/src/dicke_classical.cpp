#include "chaoscorr/dicke_classical.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "chaoscorr/kicked_top_quantum.hpp"

namespace chaoscorr {

namespace {

using Vector8d = Eigen::Matrix<double, 8, 1>;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool near_pole(double P) { return !(std::abs(P) < 1.0 - kPoleMargin); }

Eigen::Vector4d rhs_unchecked(const Eigen::Vector4d& y, const DickeFlowParams& prm) {
  const double q = y(1);
  const double P = y(2);
  const double cq = std::cos(y(3));
  const double sq = std::sin(y(3));
  const double s = std::sqrt(1.0 - P * P);
  return {-prm.omega * q - 2.0 * prm.xi * cq * s, prm.omega * y(0), 2.0 * prm.xi * q * sq * s,
          prm.omega0 - 2.0 * prm.xi * q * P * cq / s};
}

Eigen::Matrix4d jacobian_unchecked(const Eigen::Vector4d& y, const DickeFlowParams& prm) {
  const double q = y(1);
  const double P = y(2);
  const double cq = std::cos(y(3));
  const double sq = std::sin(y(3));
  const double s = std::sqrt(1.0 - P * P);
  const double g = 2.0 * prm.xi;
  Eigen::Matrix4d j;
  // columns: d/dp, d/dq, d/dP, d/dQ
  j << 0.0, -prm.omega, g * P * cq / s, g * sq * s,                    //
      prm.omega, 0.0, 0.0, 0.0,                                          //
      0.0, g * sq * s, -g * q * sq * P / s, g * q * cq * s,              //
      0.0, -g * P * cq / s, -g * q * cq / (s * s * s), g * q * P * sq / s;
  return j;
}

using Vector10d = Eigen::Matrix<double, 10, 1>;
using Matrix5d = Eigen::Matrix<double, 5, 5>;

BlochVector bloch_rhs_impl(const BlochVector& y, const DickeFlowParams& prm) {
  const double g = 2.0 * prm.xi;
  const double q = y(1);
  return {-prm.omega * q - g * y(2), prm.omega * y(0), -prm.omega0 * y(3), prm.omega0 * y(2) - g * q * y(4),
          g * q * y(3)};
}

Matrix5d bloch_jacobian(const BlochVector& y, const DickeFlowParams& prm) {
  const double g = 2.0 * prm.xi;
  const double w = prm.omega;
  const double w0 = prm.omega0;
  Matrix5d j;
  // columns: d/dp, d/dq, d/dX, d/dY, d/dZ
  j << 0.0, -w, -g, 0.0, 0.0,          //
      w, 0.0, 0.0, 0.0, 0.0,           //
      0.0, 0.0, 0.0, -w0, 0.0,         //
      0.0, -g * y(4), w0, 0.0, -g * y(1),  //
      0.0, g * y(3), 0.0, g * y(1), 0.0;
  return j;
}

double bloch_energy(const BlochVector& y, const DickeFlowParams& prm) {
  return prm.omega0 * y(4) + 0.5 * prm.omega * (y(0) * y(0) + y(1) * y(1)) + 2.0 * prm.xi * y(1) * y(2);
}

struct FlowRhs {
  DickeFlowParams params;
  double sign = 1.0;
  BlochVector operator()(double, const BlochVector& y) const { return sign * bloch_rhs_impl(y, params); }
};

struct BlochTangentRhs {
  DickeFlowParams params;
  Vector10d operator()(double, const Vector10d& y) const {
    const BlochVector x = y.head<5>();
    Vector10d out;
    out.head<5>() = bloch_rhs_impl(x, params);
    out.tail<5>() = bloch_jacobian(x, params) * y.tail<5>();
    return out;
  }
};

// Canonical-coordinate tangent flow, used where tangents are wanted in (p, q, P, Q).
struct TangentRhs {
  DickeFlowParams params;
  Vector8d operator()(double, const Vector8d& y) const {
    const Eigen::Vector4d x = y.head<4>();
    if (near_pole(x(2))) return Vector8d::Constant(kNaN);
    Vector8d out;
    out.head<4>() = rhs_unchecked(x, params);
    out.tail<4>() = jacobian_unchecked(x, params) * y.tail<4>();
    return out;
  }
};

void check_pole(double P) {
  if (near_pole(P)) throw NumericalError("dicke flow: state at the coordinate pole |P| = 1");
}

Dop853Options tolerance_options(double tol, bool dense) {
  require(tol > 0.0, "dicke flow: tolerance must be positive");
  Dop853Options o;
  o.rtol = tol;
  o.atol = tol;
  o.dense = dense;
  return o;
}

// Back onto |J| = 1 and then one Newton step onto the energy surface e0,
// moving along grad H restricted to the sphere's tangent plane.
BlochVector project_to_shell(BlochVector y, double e0, const DickeFlowParams& prm) {
  y.tail<3>().normalize();
  BlochVector g;
  g << prm.omega * y(0), prm.omega * y(1) + 2.0 * prm.xi * y(2), 2.0 * prm.xi * y(1), 0.0, prm.omega0;
  const Eigen::Vector3d spin = y.tail<3>();
  g.tail<3>() -= spin.dot(g.tail<3>()) * spin;
  const double g2 = g.squaredNorm();
  if (!(g2 > 0.0)) return y;
  y -= ((bloch_energy(y, prm) - e0) / g2) * g;
  y.tail<3>().normalize();
  return y;
}

// Steps to t_end, handing each accepted step's interpolant to `on_segment`
// and then projecting the new state.
template <typename Stepper, typename OnSegment>
void advance_projected(Stepper& stepper, double t_end, double e0, const DickeFlowParams& prm, OnSegment&& on_segment) {
  while (stepper.step(t_end)) {
    on_segment(stepper.segment());
    stepper.reset_state(project_to_shell(stepper.y(), e0, prm));
  }
}

// Appends the crossing inside `seg`, if any, in the requested direction.
void refine_crossing(const DenseSegment<5>& seg, const DickeFlowParams& params, int direction,
                     std::vector<SectionCrossing>& out) {
  const double p0 = seg.y0(0);
  const double p1 = seg.y1()(0);
  const bool upward = p0 < 0.0 && p1 >= 0.0;
  const bool downward = p0 > 0.0 && p1 <= 0.0;
  if (!((direction > 0 && upward) || (direction < 0 && downward))) return;

  // Illinois false position on the interpolant, bisection as a fallback.
  double a = seg.t0;
  double b = seg.t1();
  double fa = p0;
  double fb = p1;
  double t = b;
  double ft = fb;
  int side = 0;
  for (int it = 0; it < 200 && std::abs(ft) >= 1e-10; ++it) {
    t = (a * fb - b * fa) / (fb - fa);
    if (!(t > a && t < b)) t = 0.5 * (a + b);
    ft = seg(t)(0);
    if ((ft < 0.0) == (fa < 0.0)) {
      a = t;
      fa = ft;
      if (side == -1) fb *= 0.5;
      side = -1;
    } else {
      b = t;
      fb = ft;
      if (side == 1) fa *= 0.5;
      side = 1;
    }
  }
  const BlochVector y = seg(t);
  const DickeState s = from_bloch(y);
  SectionCrossing c;
  c.t = t;
  c.P = s.P;
  c.Q = s.Q;
  c.direction = bloch_rhs_impl(y, params)(0) >= 0.0 ? 1 : -1;
  out.push_back(c);
}

}  // namespace

double classical_energy(const DickeState& s, const DickeFlowParams& params) {
  const double P = std::clamp(s.P, -1.0, 1.0);
  return params.omega0 * s.P + 0.5 * params.omega * (s.p * s.p + s.q * s.q) +
         2.0 * params.xi * s.q * std::cos(s.Q) * std::sqrt(1.0 - P * P);
}

BlochVector to_bloch(const DickeState& s) {
  const double P = std::clamp(s.P, -1.0, 1.0);
  const double r = std::sqrt(1.0 - P * P);
  BlochVector y;
  y << s.p, s.q, r * std::cos(s.Q), r * std::sin(s.Q), P;
  return y;
}

DickeState from_bloch(const BlochVector& y) {
  return {y(0), y(1), std::clamp(y(4), -1.0, 1.0), wrap_phase(std::atan2(y(3), y(2)))};
}

Eigen::Vector4d dicke_rhs(const DickeState& s, const DickeFlowParams& params) {
  check_pole(s.P);
  return rhs_unchecked(s.vec(), params);
}

Eigen::Matrix4d dicke_rhs_jacobian(const DickeState& s, const DickeFlowParams& params) {
  check_pole(s.P);
  return jacobian_unchecked(s.vec(), params);
}

BlochVector dicke_bloch_rhs(const BlochVector& y, const DickeFlowParams& params) { return bloch_rhs_impl(y, params); }

DickeState DickeTrajectory::final_state() const {
  if (segments.empty()) return initial;
  return from_bloch(segments.back().y1());
}

DickeState DickeTrajectory::at(double t) const {
  require(t >= 0.0 && t <= t_max, "DickeTrajectory::at: time outside [0, t_max]");
  if (segments.empty()) return initial;
  auto it = std::lower_bound(segments.begin(), segments.end(), t,
                             [](const DenseSegment<5>& seg, double value) { return seg.t1() < value; });
  if (it == segments.end()) --it;
  return from_bloch((*it)(t));
}

DickeTrajectory integrate(const DickeState& s0, const DickeFlowParams& params, double t_max, double tol) {
  require(std::abs(s0.P) <= 1.0, "integrate: |P| must not exceed 1");
  require(t_max >= 0.0, "integrate: t_max must be non-negative");
  DickeTrajectory traj;
  traj.initial = s0;
  traj.t_max = t_max;
  auto stepper = make_dop853<5>(FlowRhs{params}, 0.0, to_bloch(s0), tolerance_options(tol, true));
  advance_projected(stepper, t_max, classical_energy(s0, params), params,
                    [&](const DenseSegment<5>& seg) { traj.segments.push_back(seg); });
  return traj;
}

DickeState flow(const DickeState& s0, const DickeFlowParams& params, double dt, double tol) {
  require(std::abs(s0.P) <= 1.0, "flow: |P| must not exceed 1");
  auto stepper =
      make_dop853<5>(FlowRhs{params, dt < 0.0 ? -1.0 : 1.0}, 0.0, to_bloch(s0), tolerance_options(tol, false));
  advance_projected(stepper, std::abs(dt), classical_energy(s0, params), params, [](const DenseSegment<5>&) {});
  return from_bloch(stepper.y());
}

std::vector<SectionCrossing> poincare_section(const DickeTrajectory& trajectory, const DickeFlowParams& params,
                                              int direction) {
  require(direction == 1 || direction == -1, "poincare_section: direction must be +1 or -1");
  std::vector<SectionCrossing> out;
  for (const auto& seg : trajectory.segments) refine_crossing(seg, params, direction, out);
  return out;
}

std::vector<SectionCrossing> section_crossings(const DickeState& s0, const DickeFlowParams& params, double t_max,
                                               double tol, int direction) {
  require(direction == 1 || direction == -1, "section_crossings: direction must be +1 or -1");
  require(std::abs(s0.P) <= 1.0, "section_crossings: |P| must not exceed 1");
  std::vector<SectionCrossing> out;
  auto stepper = make_dop853<5>(FlowRhs{params}, 0.0, to_bloch(s0), tolerance_options(tol, true));
  advance_projected(stepper, t_max, classical_energy(s0, params), params,
                    [&](const DenseSegment<5>& seg) { refine_crossing(seg, params, direction, out); });
  return out;
}

double mean_traversal_time(std::span<const SectionCrossing> crossings) {
  if (crossings.size() < 2) return 0.0;
  return (crossings.back().t - crossings.front().t) / static_cast<double>(crossings.size() - 1);
}

ShellRoots solve_q_on_shell(double P, double Q, double e, const DickeFlowParams& params) {
  require(std::abs(P) <= 1.0, "solve_q_on_shell: |P| must not exceed 1");
  const double a = 0.5 * params.omega;
  const double b = 2.0 * params.xi * std::cos(Q) * std::sqrt(1.0 - P * P);
  const double c = params.omega0 * P - e;
  const double disc = b * b - 4.0 * a * c;
  ShellRoots roots;
  if (disc < 0.0) return roots;
  const double sq = std::sqrt(disc);
  // Cancellation-free pair: q1 from the larger-magnitude branch, q2 = c / (a q1).
  const double big = -0.5 * (b + std::copysign(sq, b));
  if (big == 0.0) {
    roots.count = 1;
    roots.q = {0.0, 0.0};
    return roots;
  }
  double q1 = big / a;
  double q2 = c / big;
  if (q1 > q2) std::swap(q1, q2);
  roots.count = disc == 0.0 ? 1 : 2;
  roots.q = {q1, q2};
  return roots;
}

bool shell_accessible(double P, double Q, double e, const DickeFlowParams& params) {
  if (std::abs(P) > 1.0) return false;
  const double b = 2.0 * params.xi * std::cos(Q) * std::sqrt(1.0 - P * P);
  return b * b - 2.0 * params.omega * (params.omega0 * P - e) >= 0.0;
}

double accessible_fraction(double e, const DickeFlowParams& params, int grid) {
  require(grid >= 1, "accessible_fraction: grid must be positive");
  Index hits = 0;
  for (int i = 0; i < grid; ++i) {
    const double P = -1.0 + 2.0 * (i + 0.5) / grid;
    for (int k = 0; k < grid; ++k) {
      const double Q = -std::numbers::pi + 2.0 * std::numbers::pi * (k + 0.5) / grid;
      if (shell_accessible(P, Q, e, params)) ++hits;
    }
  }
  return static_cast<double>(hits) / (static_cast<double>(grid) * grid);
}

std::vector<DickeState> sample_shell(double e, const DickeFlowParams& params, Index n, std::uint64_t seed) {
  require(n >= 0, "sample_shell: negative sample count");
  if (accessible_fraction(e, params) < 1e-4)
    throw InvalidArgument("sample_shell: accessible region is degenerate at this energy");
  Rng rng(derive_seed(seed, {0x5e11}));
  std::vector<DickeState> states;
  states.reserve(static_cast<std::size_t>(n));
  while (static_cast<Index>(states.size()) < n) {
    const double P = rng.uniform(-1.0, 1.0);
    const double Q = rng.uniform(-std::numbers::pi, std::numbers::pi);
    const double pick = rng.uniform();
    if (near_pole(P)) continue;
    const ShellRoots roots = solve_q_on_shell(P, Q, e, params);
    if (roots.count == 0) continue;
    const double q = (roots.count == 1 || pick < 0.5) ? roots.q[0] : roots.q[1];
    states.push_back({0.0, q, P, Q});
  }
  return states;
}

std::pair<DickeState, Eigen::Vector4d> propagate_tangent(const DickeState& s0, const Eigen::Vector4d& v0,
                                                         const DickeFlowParams& params, double dt, double tol) {
  check_pole(s0.P);
  require(dt >= 0.0, "propagate_tangent: dt must be non-negative");
  Vector8d y0;
  y0 << s0.vec(), v0;
  auto stepper = make_dop853<8>(TangentRhs{params}, 0.0, y0, tolerance_options(tol, false));
  stepper.integrate_to(dt);
  check_pole(stepper.y()(2));
  return {DickeState::from_vec(stepper.y().head<4>()), stepper.y().tail<4>()};
}

double max_lyapunov_dicke(const DickeState& s0, const DickeFlowParams& params, double t_max,
                          const DickeLyapunovOptions& options) {
  require(std::abs(s0.P) <= 1.0, "max_lyapunov_dicke: |P| must not exceed 1");
  require(t_max > 0.0, "max_lyapunov_dicke: t_max must be positive");
  require(options.renormalization_interval > 0.0, "max_lyapunov_dicke: renormalization interval must be positive");
  const BlochVector x0 = to_bloch(s0);
  // Generic start direction inside the tangent space of the sphere; J . dJ is conserved.
  BlochVector v0 = BlochVector::Constant(0.5);
  const Eigen::Vector3d spin = x0.tail<3>();
  v0.tail<3>() -= spin.dot(v0.tail<3>()) * spin;
  v0.normalize();
  Vector10d y0;
  y0 << x0, v0;
  auto stepper = make_dop853<10>(BlochTangentRhs{params}, 0.0, y0, tolerance_options(options.tol, false));
  double log_growth = 0.0;
  double t = 0.0;
  while (t < t_max) {
    const double t_next = std::min(t + options.renormalization_interval, t_max);
    stepper.integrate_to(t_next);
    Vector10d y = stepper.y();
    const double norm = y.tail<5>().norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) throw NumericalError("max_lyapunov_dicke: tangent vector degenerated");
    log_growth += std::log(norm);
    y.tail<5>() /= norm;
    stepper.reset_state(y);
    t = t_next;
  }
  return log_growth / t_max;
}

EnsembleEstimate phase_avg_lyapunov_dicke(const DickeFlowParams& params, double e, Index n_samples, double t_max,
                                          std::uint64_t seed, const DickeLyapunovOptions& options) {
  require(n_samples >= 1, "phase_avg_lyapunov_dicke: need at least one sample");
  const std::vector<DickeState> states = sample_shell(e, params, n_samples, seed);
  const std::vector<double> lambdas = parallel_map(
      n_samples, [&](Index i) { return max_lyapunov_dicke(states[static_cast<std::size_t>(i)], params, t_max, options); });
  return mean_and_error(lambdas);
}

}  // namespace chaoscorr
