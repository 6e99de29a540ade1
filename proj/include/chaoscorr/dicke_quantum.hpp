#pragma once

#include <vector>

#include "chaoscorr/spectral_stats.hpp"
#include "chaoscorr/spin_ops.hpp"

namespace chaoscorr {

struct DickeParams {
  int n_atoms = 30;      // N, even; j = N/2
  double omega = 1.0;    // boson frequency
  double omega0 = 1.0;   // atomic splitting
  double xi = 1.0;       // coupling
  int n_tr = 160;        // boson truncation
  Index max_dim = 20000; // guard on the even-sector dimension

  double j() const { return 0.5 * n_atoms; }
  void validate() const;
};

/// H = w a^dag a + w0 Jz + (2 xi / sqrt(N)) (a + a^dag) Jx on the even-parity
/// subspace (-1)^(j+m+n) = +1 of the boson (x) spin product basis.
RealOperator build_dicke_hamiltonian(const DickeParams& params);

/// Same Hamiltonian on the full product basis (no parity projection).
RealOperator build_dicke_hamiltonian_full(const DickeParams& params);

/// Eigenvalues of a Hermitian H divided by j, ascending.
SpectrumSample scaled_spectrum(const RealOperator& hamiltonian, double j);

struct EnergyShell {
  double e_center = 1.2;
  double lo = 1.05;
  double hi = 1.22;
  std::vector<double> levels;  // sorted, all inside [lo, hi]
  Index first_rank = 0;        // rank of levels.front() in the full spectrum

  Index count() const { return static_cast<Index>(levels.size()); }
};

/// Contiguous slice of `spectrum` inside [e_center - lo_offset, e_center + hi_offset].
EnergyShell select_shell(const SpectrumSample& spectrum, double e_center, double lo_offset = 0.15,
                         double hi_offset = 0.02);

struct ConvergenceReport {
  int n_tr = 0;
  int n_tr_refined = 0;
  Index shell_size = 0;
  Index shell_size_refined = 0;
  double max_shift = 0.0;  // max |E_k - E_k'| over rank-matched shell levels
  bool matched = false;    // false when the shells differ in size or rank offset

  bool converged(double tolerance) const { return matched && max_shift < tolerance; }
};

/// Rebuilds at n_tr' = ceil(factor * n_tr) and compares the shells by rank.
ConvergenceReport truncation_convergence(const DickeParams& params, double e_center, double lo_offset = 0.15,
                                         double hi_offset = 0.02, double factor = 1.25);

}  // namespace chaoscorr
