#include "chaoscorr/spin_ops.hpp"

namespace chaoscorr {

Index BasisTag::full_dim() const {
  switch (kind) {
    case Kind::spin:
      return two_j + 1;
    case Kind::boson:
      return n_tr + 1;
    case Kind::boson_spin:
      return static_cast<Index>(two_j + 1) * (n_tr + 1);
  }
  return 0;
}

ParitySector parity_sector(const BasisTag& basis, Parity parity) {
  require(basis.kind != BasisTag::Kind::boson, "parity_sector: pure boson basis has no parity rule");
  ParitySector sector;
  sector.parity = parity;
  sector.full_dim = basis.full_dim();
  const Index spin_dim = basis.two_j + 1;
  const Index want = parity == Parity::even ? 0 : 1;
  // (-1)^(j+m) with j+m = k for spin state k; bosons add n.
  for (Index i = 0; i < sector.full_dim; ++i) {
    const Index k = i % spin_dim;
    const Index n = basis.kind == BasisTag::Kind::boson_spin ? i / spin_dim : 0;
    if ((k + n) % 2 == want) sector.indices.push_back(i);
  }
  return sector;
}

std::pair<Index, Index> kt_sector_dims(int j) {
  require(j >= 0 && j % 2 == 0, "kt_sector_dims: sector sizes j+1 and j assume even j");
  return {j + 1, j};
}

Index dicke_even_sector_dim(int n_atoms, int n_tr) {
  require(n_atoms >= 2 && n_atoms % 2 == 0, "dicke_even_sector_dim: N must be even");
  require(n_tr >= 0 && n_tr % 2 == 0, "dicke_even_sector_dim: closed form needs even N_tr");
  return static_cast<Index>(n_atoms / 2 + 1) * (n_tr + 1) - n_tr / 2;
}

}  // namespace chaoscorr
