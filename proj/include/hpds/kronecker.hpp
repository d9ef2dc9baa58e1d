#pragma once

#include <Eigen/Dense>

#include "hpds/errors.hpp"

namespace hpds {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// Kronecker product: block (i, j) of the result is a(i, j) * b.
template <typename DerivedA, typename DerivedB>
MatrixX<typename DerivedA::Scalar> kron(const Eigen::MatrixBase<DerivedA>& a,
                                        const Eigen::MatrixBase<DerivedB>& b) {
  using Scalar = typename DerivedA::Scalar;
  const Eigen::Index br = b.rows();
  const Eigen::Index bc = b.cols();
  MatrixX<Scalar> out(a.rows() * br, a.cols() * bc);
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      out.block(i * br, j * bc, br, bc) = a(i, j) * b;
  return out;
}

// Column-wise Kronecker product; column j is a_j (x) b_j.
template <typename DerivedA, typename DerivedB>
MatrixX<typename DerivedA::Scalar> khatri_rao(
    const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  using Scalar = typename DerivedA::Scalar;
  if (a.cols() != b.cols())
    throw ShapeError("khatri_rao: column counts differ (" +
                     std::to_string(a.cols()) + " vs " +
                     std::to_string(b.cols()) + ")");
  const Eigen::Index br = b.rows();
  MatrixX<Scalar> out(a.rows() * br, a.cols());
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      out.col(j).segment(i * br, br) = a(i, j) * b.col(j);
  return out;
}

// X (.) X (.) ... (.) X with `power` factors. power == 1 returns X.
template <typename Derived>
MatrixX<typename Derived::Scalar> khatri_rao_power(
    const Eigen::MatrixBase<Derived>& x, int power) {
  if (power < 1)
    throw ArgumentError("khatri_rao_power: power must be >= 1, got " +
                        std::to_string(power));
  MatrixX<typename Derived::Scalar> out = x;
  for (int p = 1; p < power; ++p) out = khatri_rao(x, out);
  return out;
}

// Kronecker power x^[m]; x^[0] is the scalar 1.
template <typename Derived>
VectorX<typename Derived::Scalar> kron_power(const Eigen::MatrixBase<Derived>& x,
                                             int power) {
  using Scalar = typename Derived::Scalar;
  if (power < 0) throw ArgumentError("kron_power: negative power");
  VectorX<Scalar> out = VectorX<Scalar>::Ones(1);
  for (int p = 0; p < power; ++p) out = kron(out, x.col(0));
  return out;
}

// I_n^[m] (x) ... convenience: identity of size n^m.
template <typename Scalar>
MatrixX<Scalar> identity_power(Eigen::Index n, int power) {
  Eigen::Index size = 1;
  for (int p = 0; p < power; ++p) size *= n;
  return MatrixX<Scalar>::Identity(size, size);
}

}  // namespace hpds
