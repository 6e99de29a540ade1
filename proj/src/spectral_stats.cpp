#include "chaoscorr/spectral_stats.hpp"

#include <algorithm>
#include <cmath>

namespace chaoscorr {

RatioSample spacing_ratios(std::span<const double> levels, const RatioOptions& options) {
  const std::size_t n = levels.size();
  require(n >= 3, "spacing_ratios: need at least 3 levels");
  require(std::is_sorted(levels.begin(), levels.end()), "spacing_ratios: levels must be sorted ascending");

  std::vector<double> gaps;
  gaps.reserve(n);
  for (std::size_t k = 0; k + 1 < n; ++k) gaps.push_back(levels[k + 1] - levels[k]);
  double mean_gap = (levels.back() - levels.front()) / static_cast<double>(n - 1);
  if (options.circular) {
    require(options.period > 0.0, "spacing_ratios: period must be positive");
    const double wrap = levels.front() + options.period - levels.back();
    require(wrap >= 0.0, "spacing_ratios: levels span more than one period");
    gaps.push_back(wrap);
    mean_gap = options.period / static_cast<double>(n);
  }
  const double zero_gap = options.zero_gap_fraction * mean_gap;

  RatioSample sample;
  sample.n_levels = static_cast<Index>(n);
  sample.circular = options.circular;
  const std::size_t n_pairs = options.circular ? gaps.size() : gaps.size() - 1;
  sample.ratios.reserve(n_pairs);
  for (std::size_t k = 0; k < n_pairs; ++k) {
    const double d0 = gaps[k];
    const double d1 = gaps[(k + 1) % gaps.size()];
    const bool zero0 = d0 <= zero_gap;
    const bool zero1 = d1 <= zero_gap;
    if (zero0 && zero1) {
      ++sample.n_dropped_zero;
      continue;
    }
    if (zero0 || zero1) {
      sample.ratios.push_back(0.0);
      continue;
    }
    sample.ratios.push_back(std::min(d0, d1) / std::max(d0, d1));
  }
  return sample;
}

double reference_pdf(double r, RatioReference kind) {
  require(r >= 0.0 && r <= 1.0, "reference_pdf: r must lie in [0, 1]");
  switch (kind) {
    case RatioReference::poisson:
      return 2.0 / ((1.0 + r) * (1.0 + r));
    case RatioReference::wigner_dyson: {
      const double s = 1.0 + r + r * r;
      return 27.0 / 4.0 * (r + r * r) / std::pow(s, 2.5);
    }
  }
  return 0.0;
}

namespace {

double simpson_step(const std::function<double(double)>& f, double a, double b, double fa, double fm, double fb,
                    double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

double integrate_adaptive(const std::function<double(double)>& f, double a, double b, double abs_tol) {
  require(b > a, "integrate_adaptive: empty interval");
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_step(f, a, b, fa, fm, fb, whole, abs_tol, 50);
}

const ReferenceMeans& reference_means() {
  static const ReferenceMeans means = [] {
    constexpr double tol = 1e-10;
    ReferenceMeans m;
    m.poisson = integrate_adaptive([](double r) { return r * reference_pdf(r, RatioReference::poisson); }, 0.0,
                                   1.0, tol);
    m.wigner_dyson = integrate_adaptive(
        [](double r) { return r * reference_pdf(r, RatioReference::wigner_dyson); }, 0.0, 1.0, tol);
    return m;
  }();
  return means;
}

RescaledRatio rescaled_average(const RatioSample& sample) {
  require(!sample.ratios.empty(), "rescaled_average: no ratios left after dropping zero gaps");
  const ReferenceMeans& refs = reference_means();
  RescaledRatio out;
  double sum = 0.0;
  for (const double r : sample.ratios) sum += r;
  out.mean_r = sum / static_cast<double>(sample.ratios.size());
  out.ref_poisson = refs.poisson;
  out.ref_wd = refs.wigner_dyson;
  out.r_tilde = std::abs(out.mean_r - refs.poisson) / (refs.wigner_dyson - refs.poisson);
  return out;
}

DensityTable histogram(std::span<const double> values, int bins, double lo, double hi) {
  require(!values.empty(), "histogram: no values");
  require(bins >= 1, "histogram: bins must be >= 1");
  require(hi > lo, "histogram: hi must exceed lo");
  DensityTable table;
  table.lo = lo;
  table.hi = hi;
  table.densities.assign(static_cast<std::size_t>(bins), 0.0);
  const double width = (hi - lo) / bins;
  for (const double v : values) {
    require(v >= lo && v <= hi, "histogram: value outside range");
    auto bin = static_cast<int>((v - lo) / width);
    bin = std::clamp(bin, 0, bins - 1);
    table.densities[static_cast<std::size_t>(bin)] += 1.0;
  }
  const double norm = 1.0 / (static_cast<double>(values.size()) * width);
  table.mids.resize(table.densities.size());
  for (int b = 0; b < bins; ++b) {
    table.densities[static_cast<std::size_t>(b)] *= norm;
    table.mids[static_cast<std::size_t>(b)] = lo + (b + 0.5) * width;
  }
  return table;
}

}  // namespace chaoscorr
