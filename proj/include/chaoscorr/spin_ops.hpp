#pragma once

#include <complex>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "chaoscorr/errors.hpp"

namespace chaoscorr {

using Index = Eigen::Index;
using Complex = std::complex<double>;

template <typename Scalar>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Angular-momentum multiplet |j,m>, m = -j, -j+1, ..., j. Stored as 2j so
/// half-integer spins are exact.
class SpinBasis {
 public:
  explicit SpinBasis(int two_j) : two_j_(two_j) {
    require(two_j >= 0, "SpinBasis: 2j must be non-negative");
  }

  static SpinBasis from_j(double j) {
    const double twice = 2.0 * j;
    require(twice >= 0.0 && twice == static_cast<double>(static_cast<int>(twice)),
            "SpinBasis: j must be a non-negative half-integer");
    return SpinBasis(static_cast<int>(twice));
  }

  int two_j() const { return two_j_; }
  double j() const { return 0.5 * two_j_; }
  Index dim() const { return two_j_ + 1; }
  /// m of state k; note j + m = k.
  double m(Index k) const { return -j() + static_cast<double>(k); }

  Eigen::VectorXd m_values() const {
    return Eigen::VectorXd::LinSpaced(dim(), -j(), j());
  }

 private:
  int two_j_;
};

enum class Parity { even, odd };

/// Which Hilbert space a matrix lives on. Product states are ordered
/// boson-major: index = n * (2j+1) + (j+m).
struct BasisTag {
  enum class Kind { spin, boson, boson_spin };
  Kind kind = Kind::spin;
  int two_j = 0;
  int n_tr = 0;
  std::optional<Parity> sector;

  static BasisTag spin(int two_j) { return {Kind::spin, two_j, 0, std::nullopt}; }
  static BasisTag boson(int n_tr) { return {Kind::boson, 0, n_tr, std::nullopt}; }
  static BasisTag boson_spin(int two_j, int n_tr) {
    return {Kind::boson_spin, two_j, n_tr, std::nullopt};
  }

  Index full_dim() const;
};

struct ParitySector {
  Parity parity = Parity::even;
  std::vector<Index> indices;  // increasing full-basis indices
  Index full_dim = 0;

  Index size() const { return static_cast<Index>(indices.size()); }
};

template <typename Scalar>
struct OperatorMatrix {
  DenseMatrix<Scalar> entries;
  bool hermitian = false;
  BasisTag basis;

  Index dim() const { return entries.rows(); }

  /// max |A - A^dagger| entrywise.
  double hermiticity_residual() const {
    if (entries.size() == 0) return 0.0;
    return (entries - entries.adjoint()).cwiseAbs().maxCoeff();
  }
};

using RealOperator = OperatorMatrix<double>;
using ComplexOperator = OperatorMatrix<Complex>;

template <typename Scalar = double>
OperatorMatrix<Scalar> build_jz(const SpinBasis& basis) {
  OperatorMatrix<Scalar> op;
  op.entries = basis.m_values().cast<Scalar>().asDiagonal();
  op.hermitian = true;
  op.basis = BasisTag::spin(basis.two_j());
  return op;
}

namespace detail {
// <m+1| J_+ |m> = sqrt(j(j+1) - m(m+1))
inline double raising_element(const SpinBasis& basis, Index k) {
  const double j = basis.j();
  const double m = basis.m(k);
  return std::sqrt(std::max(0.0, j * (j + 1.0) - m * (m + 1.0)));
}
}  // namespace detail

/// J_+ = J_x + i J_y as a real matrix (raises m by one).
inline DenseMatrix<double> build_jplus(const SpinBasis& basis) {
  DenseMatrix<double> jp = DenseMatrix<double>::Zero(basis.dim(), basis.dim());
  for (Index k = 0; k + 1 < basis.dim(); ++k) jp(k + 1, k) = detail::raising_element(basis, k);
  return jp;
}

template <typename Scalar = double>
OperatorMatrix<Scalar> build_jx(const SpinBasis& basis) {
  const DenseMatrix<double> jp = build_jplus(basis);
  OperatorMatrix<Scalar> op;
  op.entries = (0.5 * (jp + jp.transpose())).cast<Scalar>();
  op.hermitian = true;
  op.basis = BasisTag::spin(basis.two_j());
  return op;
}

/// J_y is purely imaginary in the J_z eigenbasis, so it is always complex.
inline ComplexOperator build_jy(const SpinBasis& basis) {
  const DenseMatrix<double> jp = build_jplus(basis);
  ComplexOperator op;
  op.entries = (jp - jp.transpose()).cast<Complex>() * Complex(0.0, -0.5);
  op.hermitian = true;
  op.basis = BasisTag::spin(basis.two_j());
  return op;
}

template <typename Scalar = double>
struct BosonOps {
  OperatorMatrix<Scalar> a;
  OperatorMatrix<Scalar> a_dag;
};

/// Annihilation and creation on the Fock space {|0>, ..., |n_tr>}.
/// [a, a^dagger] = I except for the top entry, which is -n_tr.
template <typename Scalar = double>
BosonOps<Scalar> build_boson_ops(int n_tr) {
  require(n_tr >= 1, "build_boson_ops: n_tr must be >= 1");
  const Index dim = n_tr + 1;
  BosonOps<Scalar> ops;
  ops.a.entries = DenseMatrix<Scalar>::Zero(dim, dim);
  for (Index n = 1; n < dim; ++n) ops.a.entries(n - 1, n) = Scalar(std::sqrt(static_cast<double>(n)));
  ops.a.hermitian = false;
  ops.a.basis = BasisTag::boson(n_tr);
  ops.a_dag.entries = ops.a.entries.adjoint();
  ops.a_dag.hermitian = false;
  ops.a_dag.basis = ops.a.basis;
  return ops;
}

/// Kronecker product A (x) B; the left factor is the slow index.
template <typename DerivedA, typename DerivedB>
DenseMatrix<typename DerivedA::Scalar> kron(const Eigen::MatrixBase<DerivedA>& a,
                                             const Eigen::MatrixBase<DerivedB>& b) {
  DenseMatrix<typename DerivedA::Scalar> out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index r = 0; r < a.rows(); ++r)
    for (Index c = 0; c < a.cols(); ++c)
      out.block(r * b.rows(), c * b.cols(), b.rows(), b.cols()) = a(r, c) * b;
  return out;
}

/// Parity sector of a spin basis, Pi = (-1)^(j+m), or of a boson (x) spin
/// basis, Pi = (-1)^(j+m+n).
ParitySector parity_sector(const BasisTag& basis, Parity parity);

/// Even/odd sector dimensions of the kicked top; j must be even.
std::pair<Index, Index> kt_sector_dims(int j);

/// Closed form (N/2+1)(N_tr+1) - N_tr/2 for the even Dicke sector (N, N_tr even).
Index dicke_even_sector_dim(int n_atoms, int n_tr);

template <typename Scalar>
OperatorMatrix<Scalar> project(const OperatorMatrix<Scalar>& op, const ParitySector& sector) {
  require(op.dim() == sector.full_dim, "project: operator dimension does not match basis");
  for (const Index i : sector.indices)
    require(i >= 0 && i < op.dim(), "project: sector index out of bounds");
  OperatorMatrix<Scalar> out;
  out.entries = op.entries(sector.indices, sector.indices);
  out.hermitian = op.hermitian;
  out.basis = op.basis;
  out.basis.sector = sector.parity;
  return out;
}

}  // namespace chaoscorr
