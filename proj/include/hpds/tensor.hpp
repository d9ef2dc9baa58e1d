#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "hpds/errors.hpp"
#include "hpds/kronecker.hpp"

namespace hpds {

using Index = Eigen::Index;
using Dims = std::vector<Index>;
// 1-based multi-index j_1..j_k.
using MultiIndex = std::vector<Index>;
// 1-based, strictly increasing mode list.
using ModeSet = std::vector<int>;

namespace detail {

inline Index product(std::span<const Index> dims) {
  Index p = 1;
  for (Index d : dims) p *= d;
  return p;
}

// Advances a 0-based odometer (first index fastest). Returns false on wrap.
inline bool advance(std::vector<Index>& idx, std::span<const Index> dims) {
  for (std::size_t p = 0; p < idx.size(); ++p) {
    if (++idx[p] < dims[p]) return true;
    idx[p] = 0;
  }
  return false;
}

inline void check_dims(std::span<const Index> dims) {
  if (dims.empty()) throw ShapeError("tensor order must be >= 1");
  for (Index d : dims)
    if (d < 1) throw ShapeError("tensor dimensions must be positive");
}

}  // namespace detail

// Order-k array with values stored in psi-order (first index fastest).
template <typename Scalar>
class DenseTensor {
 public:
  using Vector = VectorX<Scalar>;

  DenseTensor() = default;

  explicit DenseTensor(Dims dims) : dims_(std::move(dims)) {
    detail::check_dims(dims_);
    values_ = Vector::Zero(detail::product(dims_));
  }

  DenseTensor(Dims dims, Vector values)
      : dims_(std::move(dims)), values_(std::move(values)) {
    detail::check_dims(dims_);
    if (values_.size() != detail::product(dims_))
      throw ShapeError("tensor value count " + std::to_string(values_.size()) +
                       " does not match product of dims " +
                       std::to_string(detail::product(dims_)));
  }

  static DenseTensor cubical(Index n, int order) {
    return DenseTensor(Dims(static_cast<std::size_t>(order), n));
  }

  const Dims& dims() const { return dims_; }
  int order() const { return static_cast<int>(dims_.size()); }
  Index size() const { return values_.size(); }
  const Vector& values() const { return values_; }
  Vector& values() { return values_; }

  bool is_cubical() const {
    return !dims_.empty() &&
           std::all_of(dims_.begin(), dims_.end(),
                       [&](Index d) { return d == dims_.front(); });
  }

  // Element access by 0-based multi-index.
  Scalar& at0(std::span<const Index> idx) { return values_(offset0(idx)); }
  Scalar at0(std::span<const Index> idx) const { return values_(offset0(idx)); }

  // Element access by 1-based multi-index.
  Scalar operator()(const MultiIndex& idx) const;
  Scalar& operator()(const MultiIndex& idx);

  Index offset0(std::span<const Index> idx) const {
    Index flat = 0, stride = 1;
    for (std::size_t p = 0; p < dims_.size(); ++p) {
      flat += idx[p] * stride;
      stride *= dims_[p];
    }
    return flat;
  }

  Scalar frobenius_norm() const { return values_.norm(); }

 private:
  Dims dims_;
  Vector values_;
};

using Tensor = DenseTensor<double>;

// psi({j_1..j_k},{n_1..n_k}) = j_1 + sum_{i>=2} (j_i - 1) prod_{l<i} n_l, 1-based.
inline Index psi_index(const MultiIndex& indices, std::span<const Index> dims) {
  if (indices.size() != dims.size())
    throw IndexError("psi_index: multi-index has " +
                     std::to_string(indices.size()) + " entries, expected " +
                     std::to_string(dims.size()));
  Index flat = 1, stride = 1;
  for (std::size_t p = 0; p < dims.size(); ++p) {
    if (indices[p] < 1 || indices[p] > dims[p])
      throw IndexError("psi_index: index " + std::to_string(indices[p]) +
                       " out of range [1, " + std::to_string(dims[p]) +
                       "] at mode " + std::to_string(p + 1));
    flat += (indices[p] - 1) * stride;
    stride *= dims[p];
  }
  return flat;
}

template <typename Scalar>
Scalar DenseTensor<Scalar>::operator()(const MultiIndex& idx) const {
  return values_(psi_index(idx, dims_) - 1);
}

template <typename Scalar>
Scalar& DenseTensor<Scalar>::operator()(const MultiIndex& idx) {
  return values_(psi_index(idx, dims_) - 1);
}

namespace detail {

inline ModeSet complement(const ModeSet& modes, int order) {
  ModeSet out;
  for (int m = 1; m <= order; ++m)
    if (!std::binary_search(modes.begin(), modes.end(), m)) out.push_back(m);
  return out;
}

inline void check_modes(const ModeSet& modes, int order) {
  if (modes.empty()) throw ArgumentError("mode set must be nonempty");
  for (std::size_t i = 0; i < modes.size(); ++i) {
    if (modes[i] < 1 || modes[i] > order)
      throw ArgumentError("mode " + std::to_string(modes[i]) +
                          " outside 1.." + std::to_string(order));
    if (i > 0 && modes[i] <= modes[i - 1])
      throw ArgumentError("mode set must be strictly increasing");
  }
}

// Per-mode strides of the row (or column) psi-index for an unfolding.
struct UnfoldLayout {
  std::vector<Index> row_stride;  // zero for column modes
  std::vector<Index> col_stride;  // zero for row modes
  Index rows = 1;
  Index cols = 1;
};

inline UnfoldLayout unfold_layout(const ModeSet& row_modes,
                                  std::span<const Index> dims) {
  const int order = static_cast<int>(dims.size());
  check_modes(row_modes, order);
  UnfoldLayout layout;
  layout.row_stride.assign(dims.size(), 0);
  layout.col_stride.assign(dims.size(), 0);
  for (int m : row_modes) {
    layout.row_stride[m - 1] = layout.rows;
    layout.rows *= dims[m - 1];
  }
  for (int m : complement(row_modes, order)) {
    layout.col_stride[m - 1] = layout.cols;
    layout.cols *= dims[m - 1];
  }
  return layout;
}

// Calls f(flat, row, col) for every entry, in psi-order.
template <typename F>
void for_each_unfolded(const UnfoldLayout& layout, std::span<const Index> dims,
                       F&& f) {
  std::vector<Index> idx(dims.size(), 0);
  const Index total = product(dims);
  Index flat = 0;
  Index row = 0, col = 0;
  do {
    f(flat, row, col);
    ++flat;
    // Incremental update of row/col offsets while advancing the odometer.
    for (std::size_t p = 0; p < idx.size(); ++p) {
      if (++idx[p] < dims[p]) {
        row += layout.row_stride[p];
        col += layout.col_stride[p];
        break;
      }
      row -= layout.row_stride[p] * (dims[p] - 1);
      col -= layout.col_stride[p] * (dims[p] - 1);
      idx[p] = 0;
    }
  } while (flat < total);
}

}  // namespace detail

// R-unfolding: entry (r, c) = T_{j_1..j_k} with r = psi over row_modes and
// c = psi over the complement, both in increasing mode order.
template <typename Scalar>
MatrixX<Scalar> unfold(const DenseTensor<Scalar>& t, const ModeSet& row_modes) {
  const auto layout = detail::unfold_layout(row_modes, t.dims());
  MatrixX<Scalar> out(layout.rows, layout.cols);
  const auto& v = t.values();
  detail::for_each_unfolded(layout, t.dims(), [&](Index flat, Index r, Index c) {
    out(r, c) = v(flat);
  });
  return out;
}

// p-mode matricization A_(p).
template <typename Scalar>
MatrixX<Scalar> matricize(const DenseTensor<Scalar>& t, int mode) {
  return unfold(t, ModeSet{mode});
}

// Inverse of unfold.
template <typename Derived>
DenseTensor<typename Derived::Scalar> fold(const Eigen::MatrixBase<Derived>& m,
                                           const ModeSet& row_modes,
                                           const Dims& dims) {
  using Scalar = typename Derived::Scalar;
  detail::check_dims(dims);
  const auto layout = detail::unfold_layout(row_modes, dims);
  if (m.rows() != layout.rows || m.cols() != layout.cols)
    throw ShapeError("fold: matrix is " + std::to_string(m.rows()) + "x" +
                     std::to_string(m.cols()) + ", dims require " +
                     std::to_string(layout.rows) + "x" +
                     std::to_string(layout.cols));
  DenseTensor<Scalar> out(dims);
  auto& v = out.values();
  detail::for_each_unfolded(layout, dims, [&](Index flat, Index r, Index c) {
    v(flat) = m(r, c);
  });
  return out;
}

// T x_p v: contracts mode p (1-based) with v; result has order k-1.
// For an order-1 tensor the result is an order-1 tensor of size 1.
template <typename Scalar, typename Derived>
DenseTensor<Scalar> mode_vec_product(const DenseTensor<Scalar>& t,
                                     const Eigen::MatrixBase<Derived>& v,
                                     int mode) {
  const int k = t.order();
  if (mode < 1 || mode > k)
    throw ArgumentError("mode_vec_product: mode out of range");
  if (v.size() != t.dims()[mode - 1])
    throw ShapeError("mode_vec_product: vector length " +
                     std::to_string(v.size()) + " does not match mode size " +
                     std::to_string(t.dims()[mode - 1]));
  Index before = 1, after = 1;
  for (int p = 0; p < mode - 1; ++p) before *= t.dims()[p];
  for (int p = mode; p < k; ++p) after *= t.dims()[p];
  const Index np = t.dims()[mode - 1];
  Dims out_dims;
  for (int p = 0; p < k; ++p)
    if (p != mode - 1) out_dims.push_back(t.dims()[p]);
  if (out_dims.empty()) out_dims.push_back(1);
  VectorX<Scalar> out = VectorX<Scalar>::Zero(before * after);
  const auto& src = t.values();
  for (Index a = 0; a < after; ++a)
    for (Index j = 0; j < np; ++j) {
      const Scalar w = v(j);
      out.segment(a * before, before) +=
          w * src.segment((a * np + j) * before, before);
    }
  return DenseTensor<Scalar>(std::move(out_dims), std::move(out));
}

// Contracts modes 1..k-1 of t with args[0..k-2] (each n_p x c_p, at most one
// with c_p > 1). Returns the n_k x prod(c_p) matrix
// T x_1 args[0] x_2 args[1] ... x_{k-1} args[k-2].
// Dense equivalent: A_(k) (args[k-2] (x) ... (x) args[0]).
template <typename Scalar>
MatrixX<Scalar> contract_leading_modes(const DenseTensor<Scalar>& t,
                                       std::span<const MatrixX<Scalar>> args) {
  const int k = t.order();
  if (static_cast<int>(args.size()) != k - 1)
    throw ArgumentError("contract_leading_modes: expected " +
                        std::to_string(k - 1) + " arguments, got " +
                        std::to_string(args.size()));
  int wide = 0;
  for (int p = 0; p < k - 1; ++p) {
    if (args[p].rows() != t.dims()[p])
      throw ShapeError("contract_leading_modes: argument " +
                       std::to_string(p + 1) + " has " +
                       std::to_string(args[p].rows()) + " rows, mode size is " +
                       std::to_string(t.dims()[p]));
    if (args[p].cols() > 1) ++wide;
  }
  if (wide > 1)
    throw UnsupportedError(
        "contract_leading_modes: at most one matrix argument is supported");
  // state: rest x c, rest = product of remaining mode sizes (psi-order).
  MatrixX<Scalar> state = t.values();
  Index rest = t.size();
  for (int p = 0; p < k - 1; ++p) {
    const Index np = t.dims()[p];
    rest /= np;
    const auto& z = args[p];
    if (z.cols() == 1) {
      MatrixX<Scalar> next(rest, state.cols());
      for (Index c = 0; c < state.cols(); ++c) {
        Eigen::Map<const MatrixX<Scalar>> slab(state.col(c).data(), np, rest);
        next.col(c).noalias() = slab.transpose() * z.col(0);
      }
      state = std::move(next);
    } else {
      Eigen::Map<const MatrixX<Scalar>> slab(state.col(0).data(), np, rest);
      MatrixX<Scalar> next = slab.transpose() * z;
      state = std::move(next);
    }
  }
  return state;
}

// A x^{k-1} = A_(k) x^[k-1] for a cubical order-k tensor.
template <typename Scalar, typename Derived>
VectorX<Scalar> hpds_eval_full(const DenseTensor<Scalar>& a,
                               const Eigen::MatrixBase<Derived>& x) {
  if (!a.is_cubical())
    throw ShapeError("hpds_eval_full: dynamics tensor must be cubical");
  const Index n = a.dims().front();
  if (x.size() != n)
    throw ShapeError("hpds_eval_full: state length " + std::to_string(x.size()) +
                     " does not match n = " + std::to_string(n));
  VectorX<Scalar> state = a.values();
  Index rest = a.size();
  for (int p = 0; p < a.order() - 1; ++p) {
    rest /= n;
    Eigen::Map<const MatrixX<Scalar>> slab(state.data(), n, rest);
    VectorX<Scalar> next = slab.transpose() * x;
    state = std::move(next);
  }
  return state;
}

namespace detail {

// Psi offset (0-based) of the multi-index with its first `sorted` entries
// sorted ascending; identifies the permutation class.
inline Index canonical_offset(std::vector<Index> idx, std::size_t sorted,
                              std::span<const Index> dims) {
  std::sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(sorted));
  Index flat = 0, stride = 1;
  for (std::size_t p = 0; p < idx.size(); ++p) {
    flat += idx[p] * stride;
    stride *= dims[p];
  }
  return flat;
}

template <typename Scalar>
Scalar class_spread(const DenseTensor<Scalar>& t, std::size_t sorted) {
  const auto n = static_cast<std::size_t>(t.size());
  std::vector<Scalar> lo(n, std::numeric_limits<Scalar>::infinity());
  std::vector<Scalar> hi(n, -std::numeric_limits<Scalar>::infinity());
  std::vector<Index> idx(t.dims().size(), 0);
  Index flat = 0;
  do {
    const auto c = static_cast<std::size_t>(canonical_offset(idx, sorted, t.dims()));
    lo[c] = std::min(lo[c], t.values()(flat));
    hi[c] = std::max(hi[c], t.values()(flat));
    ++flat;
  } while (detail::advance(idx, t.dims()));
  Scalar spread = 0;
  for (std::size_t c = 0; c < n; ++c)
    if (hi[c] >= lo[c]) spread = std::max(spread, hi[c] - lo[c]);
  return spread;
}

}  // namespace detail

// True iff entries are invariant (to tol) under permutations of the first
// k-1 indices.
template <typename Scalar>
bool is_almost_symmetric(const DenseTensor<Scalar>& t, Scalar tol) {
  if (!t.is_cubical()) return false;
  if (t.order() <= 2) return true;
  return detail::class_spread(t, static_cast<std::size_t>(t.order() - 1)) <= tol;
}

// True iff entries are invariant (to tol) under all index permutations.
template <typename Scalar>
bool is_symmetric(const DenseTensor<Scalar>& t, Scalar tol) {
  if (!t.is_cubical()) return false;
  return detail::class_spread(t, static_cast<std::size_t>(t.order())) <= tol;
}

inline constexpr int kMaxSymmetrizeOrder = 8;

// Averages over all (k-1)! permutations of the first k-1 indices.
template <typename Scalar>
DenseTensor<Scalar> almost_symmetrize(const DenseTensor<Scalar>& t) {
  if (!t.is_cubical())
    throw ShapeError("almost_symmetrize: tensor must be cubical");
  const int k = t.order();
  if (k > kMaxSymmetrizeOrder)
    throw ScaleError("almost_symmetrize: order " + std::to_string(k) +
                     " exceeds the supported maximum of " +
                     std::to_string(kMaxSymmetrizeOrder));
  if (k <= 2) return t;
  std::vector<int> perm(static_cast<std::size_t>(k - 1));
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<std::vector<int>> perms;
  do {
    perms.push_back(perm);
  } while (std::next_permutation(perm.begin(), perm.end()));

  DenseTensor<Scalar> out(t.dims());
  std::vector<Index> idx(t.dims().size(), 0), permuted(t.dims().size());
  Index flat = 0;
  const Scalar weight = Scalar(1) / static_cast<Scalar>(perms.size());
  do {
    Scalar acc = 0;
    permuted.back() = idx.back();
    for (const auto& pi : perms) {
      for (int p = 0; p < k - 1; ++p) permuted[p] = idx[pi[p]];
      acc += t.at0(permuted);
    }
    out.values()(flat++) = acc * weight;
  } while (detail::advance(idx, t.dims()));
  return out;
}

}  // namespace hpds
