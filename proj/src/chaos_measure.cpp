#include "chaoscorr/chaos_measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace chaoscorr {

Rect Rect::kicked_top() { return {"phi", "cos_theta", -std::numbers::pi, std::numbers::pi, -1.0, 1.0}; }

Rect Rect::dicke_section() { return {"Q", "P", -std::numbers::pi, std::numbers::pi, -1.0, 1.0}; }

Index CellGrid::cell_of(double u, double v) const {
  const auto axis = [](double x, double lo, double width, Index n) {
    const auto i = static_cast<Index>(std::floor((x - lo) / width * static_cast<double>(n)));
    return std::clamp<Index>(i, 0, n - 1);
  };
  return axis(v, domain.v_lo, domain.width_v(), n_v) * n_u + axis(u, domain.u_lo, domain.width_u(), n_u);
}

double occupancy_probability(Index m_cells, Index n_points) {
  require(m_cells >= 1 && n_points >= 1, "occupancy_probability: need m_cells >= 1 and n_points >= 1");
  if (m_cells == 1) return 1.0;
  return -std::expm1(static_cast<double>(n_points) * std::log1p(-1.0 / static_cast<double>(m_cells)));
}

Index optimal_cell_count(Index n_points, bool exact) {
  require(n_points >= 1, "optimal_cell_count: n_points must be positive");
  if (!exact) return n_points;
  return std::max<Index>(1, std::llround(static_cast<double>(n_points) / std::numbers::ln2));
}

double cell_entropy(Index m_cells, Index n_points) {
  const double p = occupancy_probability(m_cells, n_points);
  double s = 0.0;
  if (p > 0.0) s -= p * std::log(p);
  if (p < 1.0) s -= (1.0 - p) * std::log1p(-p);
  return s;
}

namespace {

CellGrid factor_grid(const Rect& domain, double total) {
  CellGrid g;
  g.domain = domain;
  const double aspect = domain.width_u() / domain.width_v();
  g.n_v = std::max<Index>(1, std::llround(std::sqrt(total / aspect)));
  g.n_u = std::max<Index>(1, std::llround(total / static_cast<double>(g.n_v)));
  g.m_cells = g.total_cells();
  return g;
}

void apply_mask(CellGrid& g, const AccessPredicate& accessible) {
  g.mask.assign(static_cast<std::size_t>(g.total_cells()), 0);
  g.m_cells = 0;
  for (Index iv = 0; iv < g.n_v; ++iv)
    for (Index iu = 0; iu < g.n_u; ++iu)
      if (accessible(g.cell_center_u(iu), g.cell_center_v(iv))) {
        g.mask[static_cast<std::size_t>(iv * g.n_u + iu)] = 1;
        ++g.m_cells;
      }
}

}  // namespace

CellGrid build_grid(const Rect& domain, Index n_points, const AccessPredicate& accessible, bool exact) {
  require(domain.width_u() > 0.0 && domain.width_v() > 0.0, "build_grid: domain area must be positive");
  const Index target = optimal_cell_count(n_points, exact);
  const auto target_d = static_cast<double>(target);
  if (!accessible) {
    CellGrid g = factor_grid(domain, target_d);
    g.target = target;
    return g;
  }

  double total = target_d;
  CellGrid best;
  best.m_cells = 0;
  double best_miss = std::numeric_limits<double>::infinity();
  const auto consider = [&](CellGrid& g) {
    apply_mask(g, accessible);
    if (g.m_cells == 0) return false;
    const double miss = std::abs(static_cast<double>(g.m_cells) - target_d) / target_d;
    if (miss < best_miss) {
      best_miss = miss;
      best = g;
    }
    return miss <= 0.02;
  };
  bool done = false;
  for (int it = 0; it < 30 && !done; ++it) {
    CellGrid g = factor_grid(domain, total);
    if (consider(g)) {
      done = true;
    } else if (g.m_cells == 0) {
      if (g.total_cells() > 64 * target + 4096) break;
      total *= 4.0;
    } else {
      // Damped rescaling; the admissible count moves in integer steps.
      const double ratio = target_d / static_cast<double>(g.m_cells);
      total *= it < 10 ? ratio : 1.0 + 0.5 * (ratio - 1.0);
    }
  }
  if (!done && best.m_cells > 0) {
    // Coarse grids jump by whole rows; scan nearby (n_u, n_v) pairs with cells
    // no more than 1.5x off square.
    const double aspect = domain.width_u() / domain.width_v();
    const double full = static_cast<double>(best.total_cells()) * target_d / static_cast<double>(best.m_cells);
    const auto nv_lo = std::max<Index>(1, static_cast<Index>(std::floor(0.7 * std::sqrt(full / aspect))));
    const auto nv_hi = static_cast<Index>(std::ceil(1.4 * std::sqrt(full / aspect))) + 1;
    for (Index nv = nv_lo; nv <= nv_hi && !done; ++nv) {
      const auto nu_lo = std::max<Index>(1, static_cast<Index>(std::floor(aspect * nv / 1.5)));
      const auto nu_hi = static_cast<Index>(std::ceil(aspect * nv * 1.5));
      for (Index nu = nu_lo; nu <= nu_hi && !done; ++nu) {
        const double guess = static_cast<double>(nu * nv) * static_cast<double>(best.m_cells) /
                             static_cast<double>(best.total_cells());
        if (std::abs(guess - target_d) > 0.25 * target_d) continue;
        CellGrid g;
        g.domain = domain;
        g.n_u = nu;
        g.n_v = nv;
        done = consider(g);
      }
    }
  }
  if (best.m_cells == 0) throw InvalidArgument("build_grid: no admissible cells");
  best.target = target;
  return best;
}

ChaosMeasureSample chaos_measure(const SectionPointCloud& points, const CellGrid& grid) {
  require(points.u.size() == points.v.size(), "chaos_measure: coordinate arrays differ in length");
  require(points.size() >= 1, "chaos_measure: empty point cloud");
  require(grid.m_cells >= 1, "chaos_measure: grid has no admissible cells");
  std::vector<char> hit(static_cast<std::size_t>(grid.total_cells()), 0);
  ChaosMeasureSample s;
  s.n_points = points.size();
  s.m_cells = grid.m_cells;
  for (Index i = 0; i < points.size(); ++i) {
    const double u = points.u[static_cast<std::size_t>(i)];
    const double v = points.v[static_cast<std::size_t>(i)];
    if (!grid.domain.contains(u, v)) {
      std::ostringstream msg;
      msg << "chaos_measure: point " << i << " (" << u << ", " << v << ") outside domain";
      throw InvalidArgument(msg.str());
    }
    const Index cell = grid.cell_of(u, v);
    if (!grid.admissible(cell)) {
      ++s.n_masked_hits;
      continue;
    }
    char& flag = hit[static_cast<std::size_t>(cell)];
    if (!flag) {
      flag = 1;
      ++s.m_occupied;
    }
  }
  s.p_occ = occupancy_probability(s.m_cells, s.n_points);
  s.r_c = static_cast<double>(s.m_occupied) / (s.p_occ * static_cast<double>(s.m_cells));
  return s;
}

DensityTable measure_distribution(std::span<const ChaosMeasureSample> samples, int bins) {
  require(!samples.empty(), "measure_distribution: no samples");
  std::vector<double> r(samples.size());
  double hi = 1.05;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    r[i] = samples[i].r_c;
    hi = std::max(hi, r[i]);
  }
  return histogram(r, bins, 0.0, hi);
}

double ensemble_average(std::span<const ChaosMeasureSample> samples) {
  require(!samples.empty(), "ensemble_average: no samples");
  return ensemble_statistics(samples).mean;
}

EnsembleEstimate ensemble_statistics(std::span<const ChaosMeasureSample> samples) {
  std::vector<double> r;
  r.reserve(samples.size());
  for (const auto& s : samples) r.push_back(s.r_c);
  return mean_and_error(r);
}

std::vector<Index> prominent_peaks(const DensityTable& table, double min_prominence) {
  const std::vector<double>& d = table.densities;
  const auto n = static_cast<Index>(d.size());
  std::vector<Index> peaks;
  if (n == 0) return peaks;
  const double top = *std::max_element(d.begin(), d.end());
  if (top <= 0.0) return peaks;
  for (Index i = 0; i < n; ++i) {
    const double h = d[static_cast<std::size_t>(i)];
    // Plateau-aware: the left neighbour must be strictly lower, the right not higher.
    const bool left_ok = i == 0 || d[static_cast<std::size_t>(i - 1)] < h;
    const bool right_ok = i == n - 1 || d[static_cast<std::size_t>(i + 1)] <= h;
    if (!left_ok || !right_ok) continue;
    double left_min = h;
    for (Index k = i - 1; k >= 0 && d[static_cast<std::size_t>(k)] <= h; --k)
      left_min = std::min(left_min, d[static_cast<std::size_t>(k)]);
    double right_min = h;
    for (Index k = i + 1; k < n && d[static_cast<std::size_t>(k)] <= h; ++k)
      right_min = std::min(right_min, d[static_cast<std::size_t>(k)]);
    const double left_base = (i == 0) ? 0.0 : left_min;
    const double right_base = (i == n - 1) ? 0.0 : right_min;
    if (h - std::max(left_base, right_base) >= min_prominence * top) peaks.push_back(i);
  }
  return peaks;
}

}  // namespace chaoscorr
