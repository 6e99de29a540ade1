#pragma once

#include <functional>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "chaoscorr/spin_ops.hpp"

namespace chaoscorr {

/// Sorted real levels with a free-form provenance note.
struct SpectrumSample {
  std::vector<double> levels;
  std::string provenance;
};

struct RatioSample {
  std::vector<double> ratios;  // each in [0, 1]
  Index n_levels = 0;
  bool circular = false;
  Index n_dropped_zero = 0;
};

struct RatioOptions {
  bool circular = false;
  double period = 2.0 * std::numbers::pi;  // wrap length in circular mode
  /// Gaps at or below this fraction of the mean spacing count as exact zeros.
  double zero_gap_fraction = 1e-9;
};

/// r_k = min(d_{k+1}/d_k, d_k/d_{k+1}) over consecutive gaps. Two zero gaps in
/// a row are dropped (and counted); a single zero gap gives r = 0.
RatioSample spacing_ratios(std::span<const double> levels, const RatioOptions& options = {});

enum class RatioReference { poisson, wigner_dyson };

/// P_P(r) = 2/(1+r)^2 and P_WD(r) = 27/4 (r+r^2)/(1+r+r^2)^(5/2), r in [0,1].
double reference_pdf(double r, RatioReference kind);

struct ReferenceMeans {
  double poisson = 0.0;
  double wigner_dyson = 0.0;
};

/// Mean ratio of each reference density, integrated once and cached.
const ReferenceMeans& reference_means();

struct RescaledRatio {
  double mean_r = 0.0;
  double r_tilde = 0.0;
  double ref_poisson = 0.0;
  double ref_wd = 0.0;
};

/// |<r> - <r>_P| / (<r>_WD - <r>_P).
RescaledRatio rescaled_average(const RatioSample& sample);

struct DensityTable {
  double lo = 0.0;
  double hi = 1.0;
  std::vector<double> mids;
  std::vector<double> densities;

  double width() const { return (hi - lo) / static_cast<double>(densities.size()); }
};

/// Equal-width histogram normalized to unit area. Values must lie in [lo, hi];
/// hi itself falls in the last bin.
DensityTable histogram(std::span<const double> values, int bins, double lo, double hi);

/// Adaptive Simpson quadrature to an absolute tolerance.
double integrate_adaptive(const std::function<double(double)>& f, double a, double b, double abs_tol);

}  // namespace chaoscorr
