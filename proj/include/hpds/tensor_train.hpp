#pragma once

#include <span>
#include <vector>

#include "hpds/matrix_kernels.hpp"
#include "hpds/tensor.hpp"

namespace hpds {

// Tensor train: core p (1-based) is an r_{p-1} x n_p x r_p tensor and
//   T_{j_1..j_k} = V1(:, j_1, :) V2(:, j_2, :) ... Vk(:, j_k, :).
class TensorTrain {
 public:
  TensorTrain() = default;
  // Validates r_0 = r_k = 1 and chained core shapes.
  explicit TensorTrain(std::vector<Tensor> cores);

  int order() const { return static_cast<int>(cores_.size()); }
  Dims dims() const;
  // r_0..r_k.
  std::vector<Index> ranks() const;
  const std::vector<Tensor>& cores() const { return cores_; }
  const Tensor& core(int p) const { return cores_[static_cast<std::size_t>(p)]; }

  // Slice core(p)(:, j, :) as an r_{p-1} x r_p matrix (0-based p, j).
  Matrix slice(int p, Index j) const;
  // sum_j core(p)(:, j, :) z_j.
  Matrix contract_core(int p, const Eigen::Ref<const Vector>& z) const;

 private:
  std::vector<Tensor> cores_;
};

// Sequential-SVD construction from the k-mode unfolding m (n_k x prod_{p<k} n_p).
// Cores are produced from mode k down to mode 2; core 1 is the remainder.
TensorTrain tt_decompose(const Matrix& m, const Dims& dims,
                         const RankTolerance& tol = {});
TensorTrain tt_decompose(const Tensor& t, const RankTolerance& tol = {});

Tensor tt_reconstruct(const TensorTrain& tt);

// [prod_{p<k} (V_p x_2 x) V_k]^T for a cubical train.
Vector tt_eval_hpds(const TensorTrain& tt, const Vector& x);

// Contracts mode p of the train with args[p-1] for p = 1..k-1; each argument
// is n_p x c_p with at most one c_p > 1. Returns n_k x prod(c_p).
Matrix tt_contract(const TensorTrain& tt, std::span<const Matrix> args);

// sum_p r_{p-1} n_p r_p.
Index tt_param_count(const TensorTrain& tt);

}  // namespace hpds
