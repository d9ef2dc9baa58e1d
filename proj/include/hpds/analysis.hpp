#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hpds/hier_tucker.hpp"
#include "hpds/hpds_model.hpp"
#include "hpds/matrix_kernels.hpp"
#include "hpds/tensor.hpp"
#include "hpds/tensor_train.hpp"

namespace hpds {

enum class ControllabilityVerdict {
  kStronglyControllable,
  kNotControllable,
  kAccessible,
  kNotAccessible,
};

std::string to_string(ControllabilityVerdict v);

// Index sets fed to A v_1 ... v_{k-1} at each pass: non-decreasing
// (multisets, enough for almost symmetric A) or all ordered tuples.
enum class Enumeration { kMultiset, kTuple };

struct ControllabilityOptions {
  RankTolerance tol;
  Enumeration enumeration = Enumeration::kMultiset;
  // Run one extra pass after stagnation and throw NumericError if it adds rank.
  bool verify_fixed_point = false;
};

struct ControllabilityResult {
  Matrix basis;  // n x rank, orthonormal
  Index rank = 0;
  ControllabilityVerdict verdict = ControllabilityVerdict::kNotControllable;
  // Growth passes performed after the initial basis of col(B).
  int iterations = 0;
};

// Starting from col(B), each pass appends A v_1 ... v_{k-1} for index sets
// over the current basis and recompresses with a compact SVD. Stops at rank
// n, after n-1 passes, or when a pass adds no rank.
ControllabilityResult controllability_full(const Tensor& a, const Matrix& b,
                                           const ControllabilityOptions& opts = {});
ControllabilityResult controllability_tt(const TensorTrain& a, const Matrix& b,
                                         const ControllabilityOptions& opts = {});
ControllabilityResult controllability_ht(const HTucker& a, const Matrix& b,
                                         const ControllabilityOptions& opts = {});
ControllabilityResult controllability(const HpdsModel& m, const Matrix& b,
                                      const ControllabilityOptions& opts = {});

// sum_{q=1}^{m} x^[q-1] (x) I_n (x) x^[m-q], an n^m x n matrix: the Jacobian
// of x -> x^[m].
Matrix gradient_sum(const Vector& x, int m);

// Entry cap for explicitly formed lift operators.
inline constexpr Index kMaxLiftEntries = 10'000'000;

// F_j = sum_{i=1}^{N_j} I^[i-1] (x) A_(k) (x) I^[N_j - i], N_j = (j-1)(k-2)+1.
// Shape n^{N_j} x n^{N_{j+1}}. Throws ScaleError above kMaxLiftEntries.
Matrix lift_operator(const Matrix& a_k, int j, int k);

struct ObservabilityResult {
  Index matrix_rank = 0;
  Index n = 0;
  bool verdict = false;
  std::vector<Vector> probe_states;
  // Lie-derivative blocks stacked beyond C.
  int depth = 0;
  // Stacked matrix at the last probe evaluated.
  Matrix matrix;
};

// Row blocks C, C A_(k) G(x, k-1), C A_(k) F_2 G(x, N_3), ... up to `depth`
// (default n-1). An explicit depth that needs a lift operator above the cap
// throws ScaleError; the default depth is reduced to fit instead.
ObservabilityResult observability_full(const Tensor& a, const Matrix& c, const Vector& x,
                                       std::optional<int> depth = {},
                                       const RankTolerance& tol = {});

// Recursive evaluation of a Lie-derivative block term: with j = 1 the list
// (k-1 entries) is contracted directly; otherwise each window of k-1
// consecutive entries is contracted into one entry and the shorter lists
// are summed. Z has j(k-2)+1 entries, at most one of them a matrix.
Matrix recursive_j_tt(const TensorTrain& a, int j, std::span<const Matrix> z);
Matrix recursive_j_ht(const HTucker& a, int j, std::span<const Matrix> z);

ObservabilityResult observability_tt(const TensorTrain& a, const Matrix& c, const Vector& x,
                                     std::optional<int> depth = {},
                                     const RankTolerance& tol = {});
ObservabilityResult observability_ht(const HTucker& a, const Matrix& c, const Vector& x,
                                     std::optional<int> depth = {},
                                     const RankTolerance& tol = {});

// Evaluates the model's representation at each probe in turn, stopping at
// the first full-rank one. matrix_rank is the best rank seen.
ObservabilityResult observability(const HpdsModel& m, const Matrix& c,
                                  std::span<const Vector> probes,
                                  std::optional<int> depth = {},
                                  const RankTolerance& tol = {});

// `count` states with i.i.d. uniform(-1, 1) entries.
std::vector<Vector> probe_states(Index n, int count, std::uint64_t seed);

}  // namespace hpds
