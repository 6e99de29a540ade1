#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "chaoscorr/dop853_tableau.hpp"
#include "chaoscorr/errors.hpp"

namespace chaoscorr {

struct Dop853Options {
  double rtol = 1e-10;
  double atol = 1e-10;
  double h_max = std::numeric_limits<double>::infinity();
  double h_init = 0.0;  // 0 selects the initial step automatically
  bool dense = true;    // build interpolation coefficients for each accepted step
};

/// 7th-order continuous extension over one accepted step [t0, t0 + h].
template <int Dim>
struct DenseSegment {
  using State = Eigen::Matrix<double, Dim, 1>;

  double t0 = 0.0;
  double h = 0.0;
  State y0 = State::Zero();
  std::array<State, dop853::kInterpolatorPower> coeffs{};

  double t1() const { return t0 + h; }
  State y1() const { return y0 + coeffs[0]; }

  State operator()(double t) const {
    const double x = (t - t0) / h;
    State y = State::Zero();
    for (int i = 0; i < dop853::kInterpolatorPower; ++i) {
      y += coeffs[static_cast<std::size_t>(dop853::kInterpolatorPower - 1 - i)];
      y *= (i % 2 == 0) ? x : (1.0 - x);
    }
    return y + y0;
  }
};

/// Adaptive Dormand-Prince 8(5,3) stepper for y' = f(t, y) with fixed state
/// dimension. `rhs(t, y)` returns the derivative; non-finite derivatives make
/// the step fail and shrink.
template <int Dim, typename Rhs>
class Dop853 {
 public:
  using State = Eigen::Matrix<double, Dim, 1>;
  using Segment = DenseSegment<Dim>;

  Dop853(Rhs rhs, double t0, const State& y0, const Dop853Options& options = {})
      : rhs_(std::move(rhs)), options_(options), t_(t0), y_(y0) {
    require(options.rtol > 0.0 && options.atol > 0.0, "Dop853: tolerances must be positive");
    f_ = eval(t_, y_);
    if (!f_.allFinite()) throw NumericalError("Dop853: derivative not finite at the initial state");
    h_ = options.h_init > 0.0 ? options.h_init : initial_step();
  }

  double t() const { return t_; }
  const State& y() const { return y_; }
  double step_size() const { return h_; }
  long rhs_evaluations() const { return n_rhs_; }
  long accepted_steps() const { return n_accepted_; }
  long rejected_steps() const { return n_rejected_; }
  /// Interpolant of the last accepted step (valid only with options.dense).
  const Segment& segment() const { return segment_; }

  /// Replaces the current state (e.g. after renormalizing a tangent vector),
  /// keeping the current step size.
  void reset_state(const State& y) {
    y_ = y;
    f_ = eval(t_, y_);
  }

  /// Takes one accepted step, never past t_end. Returns false when t == t_end.
  bool step(double t_end) {
    if (t_ >= t_end) return false;
    using namespace dop853;
    constexpr double safety = 0.9;
    constexpr double min_factor = 0.2;
    constexpr double max_factor = 10.0;
    constexpr double exponent = -1.0 / 8.0;

    double h = std::min(h_, options_.h_max);
    bool rejected = false;
    for (;;) {
      const double min_step = 10.0 * std::abs(std::nextafter(t_, t_end) - t_);
      if (h < min_step) throw NumericalError("Dop853: step size underflow");
      double t_new = t_ + h;
      if (t_new >= t_end) {
        t_new = t_end;
        h = t_end - t_;
      }

      k_[0] = f_;
      for (int s = 1; s < kStages; ++s) {
        State dy = State::Zero();
        for (int i = 0; i < s; ++i)
          if (kA[s][i] != 0.0) dy += kA[s][i] * k_[static_cast<std::size_t>(i)];
        k_[static_cast<std::size_t>(s)] = eval(t_ + kC[s] * h, y_ + h * dy);
      }
      State incr = State::Zero();
      for (int i = 0; i < kStages; ++i)
        if (kA[kStages][i] != 0.0) incr += kA[kStages][i] * k_[static_cast<std::size_t>(i)];
      const State y_new = y_ + h * incr;
      const State f_new = eval(t_new, y_new);
      k_[kStages] = f_new;

      const double err = error_norm(h, y_new);
      if (std::isfinite(err) && err < 1.0 && y_new.allFinite() && f_new.allFinite()) {
        double factor = err == 0.0 ? max_factor : std::min(max_factor, safety * std::pow(err, exponent));
        if (rejected) factor = std::min(1.0, factor);
        if (options_.dense) build_segment(h, y_new, f_new);
        t_ = t_new;
        y_ = y_new;
        f_ = f_new;
        h_ = h * factor;
        ++n_accepted_;
        return true;
      }
      const double shrink = std::isfinite(err) ? std::max(min_factor, safety * std::pow(err, exponent)) : min_factor;
      h *= shrink;
      rejected = true;
      ++n_rejected_;
    }
  }

  /// Steps until t_end, calling observer(segment) after each accepted step.
  template <typename Observer>
  void integrate_to(double t_end, Observer&& observer) {
    while (step(t_end)) observer(segment_);
  }
  void integrate_to(double t_end) {
    while (step(t_end)) {
    }
  }

 private:
  State eval(double t, const State& y) {
    ++n_rhs_;
    return rhs_(t, y);
  }

  double rms(const State& v) const { return std::sqrt(v.squaredNorm() / static_cast<double>(v.size())); }

  State scale_for(const State& a, const State& b) const {
    return (options_.atol + options_.rtol * a.cwiseAbs().cwiseMax(b.cwiseAbs()).array()).matrix();
  }

  double initial_step() {
    const State scale = (options_.atol + options_.rtol * y_.cwiseAbs().array()).matrix();
    const double d0 = rms(y_.cwiseQuotient(scale));
    const double d1 = rms(f_.cwiseQuotient(scale));
    const double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    const State f1 = eval(t_ + h0, y_ + h0 * f_);
    const double d2 = rms((f1 - f_).cwiseQuotient(scale)) / h0;
    const double dmax = std::max(d1, d2);
    const double h1 = dmax <= 1e-15 ? std::max(1e-6, 1e-3 * h0) : std::pow(0.01 / dmax, 1.0 / 8.0);
    double h = std::min(100.0 * h0, h1);
    if (!std::isfinite(h) || h <= 0.0) h = 1e-6;
    return std::min(h, options_.h_max);
  }

  double error_norm(double h, const State& y_new) const {
    using namespace dop853;
    State err5 = State::Zero();
    State err3 = State::Zero();
    for (int i = 0; i <= kStages; ++i) {
      err5 += kE5[i] * k_[static_cast<std::size_t>(i)];
      err3 += kE3[i] * k_[static_cast<std::size_t>(i)];
    }
    const State scale = scale_for(y_, y_new);
    const double e5 = err5.cwiseQuotient(scale).squaredNorm();
    const double e3 = err3.cwiseQuotient(scale).squaredNorm();
    if (e5 == 0.0 && e3 == 0.0) return 0.0;
    const double denom = e5 + 0.01 * e3;
    return std::abs(h) * e5 / std::sqrt(denom * static_cast<double>(y_new.size()));
  }

  void build_segment(double h, const State& y_new, const State& f_new) {
    using namespace dop853;
    for (int s = kStages + 1; s < kStagesExtended; ++s) {
      State dy = State::Zero();
      for (int i = 0; i < s; ++i)
        if (kA[s][i] != 0.0) dy += kA[s][i] * k_[static_cast<std::size_t>(i)];
      k_[static_cast<std::size_t>(s)] = eval(t_ + kC[s] * h, y_ + h * dy);
    }
    const State delta = y_new - y_;
    segment_.t0 = t_;
    segment_.h = h;
    segment_.y0 = y_;
    segment_.coeffs[0] = delta;
    segment_.coeffs[1] = h * f_ - delta;
    segment_.coeffs[2] = 2.0 * delta - h * (f_new + f_);
    for (int r = 0; r < kInterpolatorPower - 3; ++r) {
      State acc = State::Zero();
      for (int i = 0; i < kStagesExtended; ++i)
        if (kD[r][i] != 0.0) acc += kD[r][i] * k_[static_cast<std::size_t>(i)];
      segment_.coeffs[static_cast<std::size_t>(r + 3)] = h * acc;
    }
  }

  Rhs rhs_;
  Dop853Options options_;
  double t_;
  State y_;
  State f_;
  double h_ = 0.0;
  std::array<State, dop853::kStagesExtended> k_{};
  Segment segment_;
  long n_rhs_ = 0;
  long n_accepted_ = 0;
  long n_rejected_ = 0;
};

template <int Dim, typename Rhs>
Dop853<Dim, Rhs> make_dop853(Rhs rhs, double t0, const Eigen::Matrix<double, Dim, 1>& y0,
                             const Dop853Options& options = {}) {
  return Dop853<Dim, Rhs>(std::move(rhs), t0, y0, options);
}

}  // namespace chaoscorr
