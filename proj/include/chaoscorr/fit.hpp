#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "chaoscorr/spin_ops.hpp"

namespace chaoscorr {

struct NelderMeadOptions {
  double diameter_tol = 1e-10;  // stop when every vertex is this close to the best one
  int max_iterations = 20000;
  double initial_step = 0.1;    // relative to max(|x0_i|, 1)
};

struct NelderMeadResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Derivative-free simplex minimization (standard reflection/expansion/
/// contraction/shrink coefficients). Non-finite objective values are treated
/// as worse than any finite one.
NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x0,
                             const NelderMeadOptions& options = {});

struct FitPoint {
  double x = 0.0;
  double y = 0.0;
  double weight = 1.0;
};

struct FitOptions {
  double amplitude = 1.02;
  bool free_amplitude = false;
  bool weighted = false;  // use FitPoint::weight; otherwise every weight is 1
  NelderMeadOptions simplex{};
};

struct FitResult {
  double amplitude = 1.02;
  double kappa = 0.0;
  double q = 0.0;
  double rss = 0.0;
  Index n_points = 0;
  bool converged = false;
  bool weighted = false;
  bool free_amplitude = false;
};

/// y = A - exp(-q x^kappa)
inline double correspondence_curve(double x, double amplitude, double q, double kappa) {
  return amplitude - std::exp(-q * std::pow(x, kappa));
}

/// Least squares over (q, kappa) (and A with free_amplitude) by multistart
/// simplex from q in {1, 4, 8}, kappa in {1, 3, 5}. Needs >= 3 points with x > 0.
FitResult fit_correspondence(std::span<const FitPoint> points, const FitOptions& options = {});

}  // namespace chaoscorr
