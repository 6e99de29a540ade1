#include "chaoscorr/fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "chaoscorr/errors.hpp"
#include "chaoscorr/spin_ops.hpp"

namespace chaoscorr {

namespace {

double finite_or_inf(double v) { return std::isfinite(v) ? v : std::numeric_limits<double>::infinity(); }

NelderMeadResult simplex_pass(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x0,
                              const NelderMeadOptions& o, int budget) {
  const Index n = x0.size();
  std::vector<Eigen::VectorXd> v(static_cast<std::size_t>(n + 1), x0);
  std::vector<double> fv(static_cast<std::size_t>(n + 1));
  for (Index i = 0; i < n; ++i) v[static_cast<std::size_t>(i + 1)](i) += o.initial_step * std::max(std::abs(x0(i)), 1.0);
  for (std::size_t i = 0; i < v.size(); ++i) fv[i] = finite_or_inf(f(v[i]));

  std::vector<std::size_t> order(v.size());
  NelderMeadResult res;
  int it = 0;
  for (; it < budget; ++it) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second = order[order.size() - 2];

    double diameter = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) diameter = std::max(diameter, (v[i] - v[best]).norm());
    if (diameter < o.diameter_tol) {
      res.converged = true;
      break;
    }

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (std::size_t i = 0; i < v.size(); ++i)
      if (i != worst) centroid += v[i];
    centroid /= static_cast<double>(n);

    const Eigen::VectorXd xr = centroid + (centroid - v[worst]);
    const double fr = finite_or_inf(f(xr));
    if (fr < fv[best]) {
      const Eigen::VectorXd xe = centroid + 2.0 * (centroid - v[worst]);
      const double fe = finite_or_inf(f(xe));
      if (fe < fr) {
        v[worst] = xe;
        fv[worst] = fe;
      } else {
        v[worst] = xr;
        fv[worst] = fr;
      }
      continue;
    }
    if (fr < fv[second]) {
      v[worst] = xr;
      fv[worst] = fr;
      continue;
    }
    const bool outside = fr < fv[worst];
    const Eigen::VectorXd xc = outside ? Eigen::VectorXd(centroid + 0.5 * (xr - centroid))
                                       : Eigen::VectorXd(centroid + 0.5 * (v[worst] - centroid));
    const double fc = finite_or_inf(f(xc));
    if (fc < (outside ? fr : fv[worst])) {
      v[worst] = xc;
      fv[worst] = fc;
      continue;
    }
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i == best) continue;
      v[i] = v[best] + 0.5 * (v[i] - v[best]);
      fv[i] = finite_or_inf(f(v[i]));
    }
  }
  const auto best = static_cast<std::size_t>(std::min_element(fv.begin(), fv.end()) - fv.begin());
  res.x = v[best];
  res.value = fv[best];
  res.iterations = it;
  return res;
}

}  // namespace

NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x0,
                             const NelderMeadOptions& options) {
  require(x0.size() >= 1, "nelder_mead: empty start vector");
  require(options.diameter_tol > 0.0 && options.max_iterations > 0, "nelder_mead: invalid options");
  NelderMeadResult res = simplex_pass(f, x0, options, options.max_iterations);
  // A collapsed simplex can stall off the minimum; one restart from the best vertex confirms it.
  if (res.converged) {
    const int left = std::max(1, options.max_iterations - res.iterations);
    NelderMeadResult again = simplex_pass(f, res.x, options, left);
    again.iterations += res.iterations;
    if (again.value <= res.value) res = again;
  }
  return res;
}

FitResult fit_correspondence(std::span<const FitPoint> points, const FitOptions& options) {
  require(points.size() >= 3, "fit_correspondence: need at least 3 points");
  for (const auto& p : points) {
    require(p.x > 0.0 && std::isfinite(p.x), "fit_correspondence: every x must be positive");
    require(std::isfinite(p.y), "fit_correspondence: non-finite y");
    if (options.weighted) require(p.weight > 0.0 && std::isfinite(p.weight), "fit_correspondence: invalid weight");
  }
  // Sum in a fixed (sorted) order so the result does not depend on input order.
  std::vector<FitPoint> sorted(points.begin(), points.end());
  std::sort(sorted.begin(), sorted.end(), [](const FitPoint& a, const FitPoint& b) {
    return a.x != b.x ? a.x < b.x : (a.y != b.y ? a.y < b.y : a.weight < b.weight);
  });

  const auto rss = [&](double amplitude, double q, double kappa) {
    if (!(q > 0.0) || !(kappa > 0.0)) return std::numeric_limits<double>::infinity();
    double s = 0.0;
    for (const auto& p : sorted) {
      const double r = p.y - correspondence_curve(p.x, amplitude, q, kappa);
      s += (options.weighted ? p.weight : 1.0) * r * r;
    }
    return s;
  };

  FitResult best;
  best.rss = std::numeric_limits<double>::infinity();
  best.n_points = static_cast<Index>(points.size());
  best.weighted = options.weighted;
  best.free_amplitude = options.free_amplitude;
  for (const double q0 : {1.0, 4.0, 8.0}) {
    for (const double k0 : {1.0, 3.0, 5.0}) {
      NelderMeadResult r;
      if (options.free_amplitude) {
        r = nelder_mead([&](const Eigen::VectorXd& x) { return rss(x(2), x(0), x(1)); },
                        Eigen::Vector3d(q0, k0, options.amplitude), options.simplex);
      } else {
        r = nelder_mead([&](const Eigen::VectorXd& x) { return rss(options.amplitude, x(0), x(1)); },
                        Eigen::Vector2d(q0, k0), options.simplex);
      }
      if (r.value < best.rss) {
        best.rss = r.value;
        best.q = r.x(0);
        best.kappa = r.x(1);
        best.amplitude = options.free_amplitude ? r.x(2) : options.amplitude;
        best.converged = r.converged;
      }
    }
  }
  best.converged = best.converged && std::isfinite(best.rss) && best.q > 0.0 && best.kappa > 0.0;
  return best;
}

}  // namespace chaoscorr
