#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "chaoscorr/ensemble.hpp"
#include "chaoscorr/spectral_stats.hpp"

namespace chaoscorr {

/// Axis-aligned rectangle [u_lo, u_hi] x [v_lo, v_hi] with coordinate names.
struct Rect {
  std::string u_name = "u";
  std::string v_name = "v";
  double u_lo = 0.0;
  double u_hi = 1.0;
  double v_lo = 0.0;
  double v_hi = 1.0;

  double width_u() const { return u_hi - u_lo; }
  double width_v() const { return v_hi - v_lo; }
  double area() const { return width_u() * width_v(); }
  bool contains(double u, double v) const { return u >= u_lo && u <= u_hi && v >= v_lo && v <= v_hi; }
  Rect transposed() const { return {v_name, u_name, v_lo, v_hi, u_lo, u_hi}; }

  /// (phi, cos theta) in [-pi, pi] x [-1, 1].
  static Rect kicked_top();
  /// (Q, P) in [-pi, pi] x [-1, 1].
  static Rect dicke_section();
};

/// Predicate on cell centers marking the admissible part of the domain.
using AccessPredicate = std::function<bool(double u, double v)>;

struct CellGrid {
  Rect domain;
  Index n_u = 1;
  Index n_v = 1;
  std::vector<char> mask;  // row-major (v-major) over n_u * n_v cells; empty when unmasked
  Index m_cells = 1;       // admissible cells
  Index target = 1;        // requested cell count

  bool masked() const { return !mask.empty(); }
  Index total_cells() const { return n_u * n_v; }
  bool admissible(Index cell) const { return !masked() || mask[static_cast<std::size_t>(cell)] != 0; }
  /// Cell index of a point inside the domain; points on the upper edges go to the last cell.
  Index cell_of(double u, double v) const;
  double cell_center_u(Index iu) const { return domain.u_lo + (static_cast<double>(iu) + 0.5) * domain.width_u() / n_u; }
  double cell_center_v(Index iv) const { return domain.v_lo + (static_cast<double>(iv) + 0.5) * domain.width_v() / n_v; }
};

/// p = 1 - (1 - 1/M)^N, evaluated in log space.
double occupancy_probability(Index m_cells, Index n_points);

/// N, or round(N / ln 2) when `exact` (the entropy maximizer).
Index optimal_cell_count(Index n_points, bool exact = false);

/// -p ln p - (1-p) ln(1-p) with p = occupancy_probability(m_cells, n_points).
double cell_entropy(Index m_cells, Index n_points);

/// Near-square cells for a target of optimal_cell_count(n_points). With a
/// predicate, the total is rescaled until the admissible count is within 2%
/// of the target.
CellGrid build_grid(const Rect& domain, Index n_points, const AccessPredicate& accessible = {},
                    bool exact = false);

/// Points of one trajectory on a 2-D section.
struct SectionPointCloud {
  std::vector<double> u;
  std::vector<double> v;

  Index size() const { return static_cast<Index>(u.size()); }
  void push_back(double uu, double vv) {
    u.push_back(uu);
    v.push_back(vv);
  }
};

struct ChaosMeasureSample {
  double r_c = 0.0;
  Index n_points = 0;
  Index m_cells = 0;
  Index m_occupied = 0;
  double p_occ = 0.0;
  Index n_masked_hits = 0;  // points that fell in non-admissible cells
};

/// R_c = m_occupied / (p * m_cells) over admissible cells.
ChaosMeasureSample chaos_measure(const SectionPointCloud& points, const CellGrid& grid);

/// Unit-area histogram of r_c over [0, max(1.05, max r_c)].
DensityTable measure_distribution(std::span<const ChaosMeasureSample> samples, int bins = 50);

/// Arithmetic mean of r_c.
double ensemble_average(std::span<const ChaosMeasureSample> samples);

/// Mean, standard error and spread of r_c.
EnsembleEstimate ensemble_statistics(std::span<const ChaosMeasureSample> samples);

/// Local maxima of a density whose height exceeds `min_prominence` times the
/// global maximum above the deeper of the two flanking minima.
std::vector<Index> prominent_peaks(const DensityTable& table, double min_prominence = 0.1);

}  // namespace chaoscorr
