#include "hpds/tensor_train.hpp"

#include <string>

namespace hpds {

TensorTrain::TensorTrain(std::vector<Tensor> cores) : cores_(std::move(cores)) {
  if (cores_.empty()) throw ShapeError("TensorTrain: no cores");
  for (std::size_t p = 0; p < cores_.size(); ++p) {
    if (cores_[p].order() != 3)
      throw ShapeError("TensorTrain: core " + std::to_string(p + 1) +
                       " is not order 3");
    if (p > 0 && cores_[p].dims()[0] != cores_[p - 1].dims()[2])
      throw ShapeError("TensorTrain: rank mismatch between cores " +
                       std::to_string(p) + " and " + std::to_string(p + 1));
  }
  if (cores_.front().dims()[0] != 1 || cores_.back().dims()[2] != 1)
    throw ShapeError("TensorTrain: boundary ranks must be 1");
}

Dims TensorTrain::dims() const {
  Dims d;
  for (const auto& c : cores_) d.push_back(c.dims()[1]);
  return d;
}

std::vector<Index> TensorTrain::ranks() const {
  std::vector<Index> r{1};
  for (const auto& c : cores_) r.push_back(c.dims()[2]);
  return r;
}

Matrix TensorTrain::slice(int p, Index j) const {
  const Tensor& c = core(p);
  const Index r0 = c.dims()[0], n = c.dims()[1], r1 = c.dims()[2];
  Matrix s(r0, r1);
  for (Index b = 0; b < r1; ++b)
    s.col(b) = c.values().segment(r0 * (j + n * b), r0);
  return s;
}

Matrix TensorTrain::contract_core(int p, const Eigen::Ref<const Vector>& z) const {
  const Tensor& c = core(p);
  const Index r0 = c.dims()[0], n = c.dims()[1], r1 = c.dims()[2];
  // View as (r0 * n) x r1: row a + r0 * j, column b.
  Eigen::Map<const Matrix> mat(c.values().data(), r0 * n, r1);
  Matrix out = Matrix::Zero(r0, r1);
  for (Index j = 0; j < n; ++j) out += z(j) * mat.middleRows(r0 * j, r0);
  return out;
}

namespace {

Tensor core_from_basis(const Matrix& u, Index left_rank, Index n, Index right_rank) {
  // u is (right_rank * n) x left_rank with row a + right_rank * j;
  // core(b, j, a) = u(a + right_rank * j, b).
  Tensor core(Dims{left_rank, n, right_rank});
  for (Index a = 0; a < right_rank; ++a)
    for (Index j = 0; j < n; ++j)
      for (Index b = 0; b < left_rank; ++b)
        core.values()(b + left_rank * (j + n * a)) = u(a + right_rank * j, b);
  return core;
}

}  // namespace

TensorTrain tt_decompose(const Matrix& m, const Dims& dims, const RankTolerance& tol) {
  detail::check_dims(dims);
  const int k = static_cast<int>(dims.size());
  Index lead = 1;
  for (int p = 0; p < k - 1; ++p) lead *= dims[p];
  if (m.rows() != dims.back() || m.cols() != lead)
    throw ShapeError("tt_decompose: expected a " + std::to_string(dims.back()) +
                     "x" + std::to_string(lead) + " k-mode unfolding, got " +
                     std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  if (k == 1) {
    Tensor core(Dims{1, dims[0], 1}, m.transpose().reshaped());
    return TensorTrain({core});
  }

  std::vector<Tensor> cores(static_cast<std::size_t>(k));
  // work: rows (a, j_p) with a fastest, columns psi(j_1..j_{p-1}).
  Matrix work = m;
  Index right_rank = 1;
  for (int p = k; p >= 2; --p) {
    const Index np = dims[p - 1];
    CompactSvd svd = compact_svd(work, tol);
    Index left_rank = svd.rank();
    if (left_rank == 0) {
      // Zero tensor: keep rank 1 with a zero core so shapes still chain.
      left_rank = 1;
      svd.U = Matrix::Zero(work.rows(), 1);
      svd.S = Vector::Zero(1);
      svd.V = Matrix::Zero(work.cols(), 1);
    }
    cores[p - 1] = core_from_basis(svd.U, left_rank, np, right_rank);
    const Matrix rest = svd.S.asDiagonal() * svd.V.transpose();
    // rest: left_rank x psi(j_1..j_{p-1}); peel j_{p-1} into the row index.
    const Index prev = dims[p - 2];
    const Index inner = rest.cols() / prev;  // prod_{l < p-1} n_l
    work.resize(left_rank * prev, inner);
    for (Index jp = 0; jp < prev; ++jp)
      for (Index c = 0; c < inner; ++c)
        work.block(left_rank * jp, c, left_rank, 1) = rest.col(c + inner * jp);
    right_rank = left_rank;
  }
  // work is (r_1 * n_1) x 1 with row a + r_1 * j_1; core 1 is 1 x n_1 x r_1.
  cores[0] = core_from_basis(work, 1, dims[0], right_rank);
  return TensorTrain(std::move(cores));
}

TensorTrain tt_decompose(const Tensor& t, const RankTolerance& tol) {
  return tt_decompose(matricize(t, t.order()), t.dims(), tol);
}

Tensor tt_reconstruct(const TensorTrain& tt) {
  // Left-to-right: acc is prod_{l<=p} n_l x r_p with psi row order.
  const int k = tt.order();
  Matrix acc = Matrix::Ones(1, 1);
  for (int p = 0; p < k; ++p) {
    const Tensor& c = tt.core(p);
    const Index r0 = c.dims()[0], n = c.dims()[1], r1 = c.dims()[2];
    Matrix next(acc.rows() * n, r1);
    for (Index j = 0; j < n; ++j)
      next.middleRows(acc.rows() * j, acc.rows()) = acc * tt.slice(p, j);
    acc = std::move(next);
    (void)r0;
  }
  return Tensor(tt.dims(), acc.col(0));
}

Vector tt_eval_hpds(const TensorTrain& tt, const Vector& x) {
  const int k = tt.order();
  const Dims dims = tt.dims();
  for (int p = 0; p < k; ++p)
    if (dims[p] != dims[0])
      throw ShapeError("tt_eval_hpds: train is not cubical");
  if (x.size() != dims[0])
    throw ShapeError("tt_eval_hpds: state length " + std::to_string(x.size()) +
                     " does not match n = " + std::to_string(dims[0]));
  std::vector<Matrix> args(static_cast<std::size_t>(k - 1), x);
  return tt_contract(tt, args).col(0);
}

Matrix tt_contract(const TensorTrain& tt, std::span<const Matrix> args) {
  const int k = tt.order();
  if (static_cast<int>(args.size()) != k - 1)
    throw ArgumentError("tt_contract: expected " + std::to_string(k - 1) +
                        " arguments, got " + std::to_string(args.size()));
  int wide = 0;
  for (int p = 0; p < k - 1; ++p) {
    if (args[p].rows() != tt.core(p).dims()[1])
      throw ShapeError("tt_contract: argument " + std::to_string(p + 1) +
                       " has " + std::to_string(args[p].rows()) +
                       " rows, mode size is " +
                       std::to_string(tt.core(p).dims()[1]));
    if (args[p].cols() > 1) ++wide;
  }
  if (wide > 1)
    throw UnsupportedError("tt_contract: at most one matrix argument is supported");

  // state: one row per output column, r_p columns.
  Matrix state = Matrix::Ones(1, 1);
  for (int p = 0; p < k - 1; ++p) {
    const Matrix& z = args[p];
    if (z.cols() == 1) {
      state = state * tt.contract_core(p, z.col(0));
    } else {
      const Index r1 = tt.core(p).dims()[2];
      Matrix next(z.cols(), r1);
      for (Index b = 0; b < z.cols(); ++b)
        next.row(b) = state.row(0) * tt.contract_core(p, z.col(b));
      state = std::move(next);
    }
  }
  // Last core as r_{k-1} x n_k matrix.
  const Tensor& last = tt.core(k - 1);
  Eigen::Map<const Matrix> out_core(last.values().data(), last.dims()[0],
                                    last.dims()[1]);
  return (state * out_core).transpose();
}

Index tt_param_count(const TensorTrain& tt) {
  Index total = 0;
  for (const auto& c : tt.cores()) total += c.dims()[0] * c.dims()[1] * c.dims()[2];
  return total;
}

}  // namespace hpds
