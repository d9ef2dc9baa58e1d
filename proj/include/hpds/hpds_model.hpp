#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>

#include "hpds/hier_tucker.hpp"
#include "hpds/matrix_kernels.hpp"
#include "hpds/tensor.hpp"
#include "hpds/tensor_train.hpp"

namespace hpds {

enum class Representation { kFull, kTt, kHt };

std::string to_string(Representation r);
Representation parse_representation(const std::string& s);

using Dynamics = std::variant<Tensor, TensorTrain, HTucker>;

// dx/dt = A x^{k-1} + B u,  y = C x.
class HpdsModel {
 public:
  HpdsModel() = default;
  // A must be cubical of order >= 2; B is n x m, C is l x n.
  explicit HpdsModel(Dynamics a, std::optional<Matrix> b = std::nullopt,
                     std::optional<Matrix> c = std::nullopt);

  int order() const { return k_; }
  Index state_dim() const { return n_; }
  Index input_dim() const { return b_ ? b_->cols() : 0; }
  Index output_dim() const { return c_ ? c_->rows() : 0; }
  Representation representation() const;

  const Dynamics& dynamics() const { return a_; }
  const std::optional<Matrix>& B() const { return b_; }
  const std::optional<Matrix>& C() const { return c_; }

  // A x^{k-1} through the stored representation.
  Vector drift(const Vector& x) const;
  // Dense copy of the dynamics tensor.
  Tensor full_tensor() const;

 private:
  Dynamics a_;
  std::optional<Matrix> b_;
  std::optional<Matrix> c_;
  int k_ = 0;
  Index n_ = 0;
};

// Re-expresses the dynamics in another representation: TT by sequential SVD,
// HT on the canonical balanced tree. B and C are carried over.
HpdsModel with_representation(const HpdsModel& m, Representation r,
                              const RankTolerance& tol = {});

// The same system in coordinates z = S x: A_(k) -> S A_(k) (S^{-1})^[k-1],
// B -> S B, C -> C S^{-1}. Returns a full-representation model.
HpdsModel change_basis(const HpdsModel& m, const Matrix& s);

// tau: sampling interval. Columns are samples. For continuous data X1 holds
// derivatives; for discrete data X1 holds the next states.
struct SampleSet {
  double tau = 1.0;
  double t0 = 0.0;
  Matrix X0;
  Matrix X1;
  std::optional<Matrix> U0;
  std::optional<Matrix> Y0;

  Index samples() const { return X0.cols(); }
  // Throws ShapeError/ArgumentError on inconsistent column counts or tau <= 0.
  void validate() const;
};

Vector eval_derivative(const HpdsModel& m, const Vector& x,
                       const std::optional<Vector>& u = std::nullopt);

enum class Integrator { kRk4, kEuler };

// Fixed-step integration with the input held constant over each step.
// X0(:, i) = x(t0 + i tau), X1(:, i) = exact derivative there, i < steps.
// u, when given, is m x steps.
SampleSet simulate_continuous(const HpdsModel& m, const Vector& x0,
                              const std::optional<Matrix>& u, double tau,
                              Index steps, Integrator method = Integrator::kRk4);

// x[i+1] = x[i] + tau A x[i]^{k-1} + B u[i]. X0 = x[0..steps-1],
// X1 = x[1..steps], Y0 = C X0 when C is present.
SampleSet simulate_discrete(const HpdsModel& m, const Vector& x0,
                            const std::optional<Matrix>& u, double tau,
                            Index steps);

// Adds i.i.d. N(0, sigma^2) noise to X1 and, when present, Y0.
SampleSet add_noise(const SampleSet& s, double sigma, std::uint64_t seed);

}  // namespace hpds
