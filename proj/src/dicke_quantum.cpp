#include "chaoscorr/dicke_quantum.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace chaoscorr {

void DickeParams::validate() const {
  require(n_atoms >= 2 && n_atoms % 2 == 0, "DickeParams: N must be a positive even integer");
  require(omega > 0.0 && omega0 > 0.0, "DickeParams: frequencies must be positive");
  require(xi >= 0.0, "DickeParams: coupling must be non-negative");
  require(n_tr >= 1, "DickeParams: n_tr must be >= 1");
  require(max_dim >= 1, "DickeParams: max_dim must be positive");
}

namespace {

struct DickeFactors {
  SpinBasis spin;
  RealOperator jz;
  RealOperator jx;
  Eigen::MatrixXd number;  // a^dag a
  Eigen::MatrixXd field;   // a + a^dag
  double coupling;

  explicit DickeFactors(const DickeParams& p)
      : spin(p.n_atoms), jz(build_jz<double>(spin)), jx(build_jx<double>(spin)) {
    const BosonOps<double> b = build_boson_ops<double>(p.n_tr);
    number = b.a_dag.entries * b.a.entries;
    field = b.a.entries + b.a_dag.entries;
    coupling = 2.0 * p.xi / std::sqrt(static_cast<double>(p.n_atoms));
  }
};

}  // namespace

RealOperator build_dicke_hamiltonian(const DickeParams& params) {
  params.validate();
  const BasisTag tag = BasisTag::boson_spin(params.n_atoms, params.n_tr);
  const ParitySector sector = parity_sector(tag, Parity::even);
  if (sector.size() > params.max_dim) {
    std::ostringstream msg;
    msg << "build_dicke_hamiltonian: sector dimension " << sector.size() << " exceeds cap " << params.max_dim;
    throw InvalidArgument(msg.str());
  }
  const DickeFactors f(params);
  const Index spin_dim = f.spin.dim();
  const Index boson_dim = params.n_tr + 1;

  std::vector<Index> position(static_cast<std::size_t>(tag.full_dim()), -1);
  for (Index s = 0; s < sector.size(); ++s) position[static_cast<std::size_t>(sector.indices[s])] = s;

  RealOperator h;
  h.entries = Eigen::MatrixXd::Zero(sector.size(), sector.size());
  h.hermitian = true;
  h.basis = tag;
  h.basis.sector = Parity::even;
  // Only the tridiagonal factor entries are non-zero; the sector is closed under H.
  for (Index s = 0; s < sector.size(); ++s) {
    const Index full = sector.indices[s];
    const Index n = full / spin_dim;
    const Index k = full % spin_dim;
    h.entries(s, s) = params.omega * f.number(n, n) + params.omega0 * f.jz.entries(k, k);
    for (const Index n2 : {n - 1, n + 1}) {
      if (n2 < 0 || n2 >= boson_dim) continue;
      for (const Index k2 : {k - 1, k + 1}) {
        if (k2 < 0 || k2 >= spin_dim) continue;
        const Index col = position[static_cast<std::size_t>(n2 * spin_dim + k2)];
        h.entries(s, col) += f.coupling * f.field(n, n2) * f.jx.entries(k, k2);
      }
    }
  }
  return h;
}

RealOperator build_dicke_hamiltonian_full(const DickeParams& params) {
  params.validate();
  const BasisTag tag = BasisTag::boson_spin(params.n_atoms, params.n_tr);
  require(tag.full_dim() <= params.max_dim, "build_dicke_hamiltonian_full: dimension exceeds cap");
  const DickeFactors f(params);
  const Eigen::MatrixXd id_spin = Eigen::MatrixXd::Identity(f.spin.dim(), f.spin.dim());
  const Eigen::MatrixXd id_boson = Eigen::MatrixXd::Identity(params.n_tr + 1, params.n_tr + 1);
  RealOperator h;
  h.entries = params.omega * kron(f.number, id_spin) + params.omega0 * kron(id_boson, f.jz.entries) +
              f.coupling * kron(f.field, f.jx.entries);
  h.hermitian = true;
  h.basis = tag;
  return h;
}

SpectrumSample scaled_spectrum(const RealOperator& hamiltonian, double j) {
  require(j > 0.0, "scaled_spectrum: j must be positive");
  require(hamiltonian.hermitian, "scaled_spectrum: operator is not flagged Hermitian");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(hamiltonian.entries, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericalError("scaled_spectrum: eigensolver failed");
  SpectrumSample out;
  out.levels.resize(static_cast<std::size_t>(solver.eigenvalues().size()));
  for (Index k = 0; k < solver.eigenvalues().size(); ++k)
    out.levels[static_cast<std::size_t>(k)] = solver.eigenvalues()(k) / j;
  std::sort(out.levels.begin(), out.levels.end());
  std::ostringstream note;
  note << "dicke dim=" << hamiltonian.dim() << " j=" << j;
  out.provenance = note.str();
  return out;
}

EnergyShell select_shell(const SpectrumSample& spectrum, double e_center, double lo_offset, double hi_offset) {
  require(lo_offset >= 0.0 && hi_offset >= 0.0, "select_shell: window offsets must be non-negative");
  require(std::is_sorted(spectrum.levels.begin(), spectrum.levels.end()), "select_shell: spectrum not sorted");
  EnergyShell shell;
  shell.e_center = e_center;
  shell.lo = e_center - lo_offset;
  shell.hi = e_center + hi_offset;
  const auto first = std::lower_bound(spectrum.levels.begin(), spectrum.levels.end(), shell.lo);
  const auto last = std::upper_bound(first, spectrum.levels.end(), shell.hi);
  if (first == last) {
    std::ostringstream msg;
    msg << "select_shell: no levels in [" << shell.lo << ", " << shell.hi << "] (spectrum spans ["
        << (spectrum.levels.empty() ? 0.0 : spectrum.levels.front()) << ", "
        << (spectrum.levels.empty() ? 0.0 : spectrum.levels.back())
        << "]); increase N or N_tr, or widen the window";
    throw InvalidArgument(msg.str());
  }
  shell.levels.assign(first, last);
  shell.first_rank = static_cast<Index>(first - spectrum.levels.begin());
  return shell;
}

ConvergenceReport truncation_convergence(const DickeParams& params, double e_center, double lo_offset,
                                         double hi_offset, double factor) {
  require(factor > 1.0, "truncation_convergence: factor must exceed 1");
  DickeParams refined = params;
  refined.n_tr = static_cast<int>(std::ceil(factor * params.n_tr));

  const EnergyShell base =
      select_shell(scaled_spectrum(build_dicke_hamiltonian(params), params.j()), e_center, lo_offset, hi_offset);
  const EnergyShell fine =
      select_shell(scaled_spectrum(build_dicke_hamiltonian(refined), refined.j()), e_center, lo_offset, hi_offset);

  ConvergenceReport report;
  report.n_tr = params.n_tr;
  report.n_tr_refined = refined.n_tr;
  report.shell_size = base.count();
  report.shell_size_refined = fine.count();
  report.matched = base.count() == fine.count() && base.first_rank == fine.first_rank;
  const Index n = std::min(base.count(), fine.count());
  for (Index k = 0; k < n; ++k)
    report.max_shift = std::max(report.max_shift, std::abs(base.levels[static_cast<std::size_t>(k)] -
                                                           fine.levels[static_cast<std::size_t>(k)]));
  return report;
}

}  // namespace chaoscorr
