#pragma once

#include <optional>
#include <string>

#include "hpds/errors.hpp"
#include "hpds/hier_tucker.hpp"
#include "hpds/hpds_model.hpp"
#include "hpds/matrix_kernels.hpp"

namespace hpds {

struct IdentifiabilityReport {
  Index observed_rank = 0;
  Index required_rank = 0;
  bool satisfied = false;
  // Smallest retained singular value of the data matrix.
  double margin = 0.0;
  // margin < 1e3 * eps * sigma_max.
  bool ill_conditioned = false;
  // Input-output checks only: rank(Y0) and the state dimension it must equal.
  std::optional<Index> output_rank;
  std::optional<Index> state_dim;
};

class IdentifiabilityError : public Error {
 public:
  IdentifiabilityError(const std::string& what, IdentifiabilityReport report)
      : Error(what), report_(std::move(report)) {}
  const IdentifiabilityReport& report() const { return report_; }

 private:
  IdentifiabilityReport report_;
};

// sum_{j=1}^{min(n,k-1)} C(n,j) C(k-2,j-1), the number of distinct monomials
// of degree k-1 in n variables. Throws ArgumentError on 64-bit overflow.
Index required_rank(Index n, int k);

IdentifiabilityReport check_identifiability_autonomous(const SampleSet& s, int k,
                                                       const RankTolerance& tol = {});

// A_(k) = X1 pinv(X0^{(k-1)}), the minimum-norm (almost symmetric) solution.
HpdsModel identify_full(const SampleSet& s, int k, const RankTolerance& tol = {});

// How the sequential-SVD sweep is seeded: X1 V S^+ U^T, or X1 V S^T U^T.
enum class CoreInit { kPseudoInverse, kTranspose };

HpdsModel identify_tt(const SampleSet& s, int k, const RankTolerance& tol = {},
                      CoreInit init = CoreInit::kPseudoInverse);

// Leaf factors U_1 = ... = U_{k-1} from the 1-mode unfolding, U_k from the
// k-mode unfolding, internal nodes from their unfoldings.
HpdsModel identify_ht(const SampleSet& s, int k, const DimensionTree& tree,
                      const RankTolerance& tol = {});

// Uses only Y0 (and U0, if any). State estimates are Sigma V^T from the
// compact SVD of Y0; consecutive columns give X0 and X1. When state_dim is
// unset, n = rank(Y0).
IdentifiabilityReport check_identifiability_io(const SampleSet& s, int k,
                                               const RankTolerance& tol = {},
                                               std::optional<Index> state_dim = {});

// C = U, [A_(k) B] = (X1 - X0) pinv([tau X0^{(k-1)}; U0]).
HpdsModel identify_io(const SampleSet& s, int k, const RankTolerance& tol = {},
                      std::optional<Index> state_dim = {});

// Least-squares fit of the output map and the discretised dynamics on the
// rank-n truncation of Y0, followed by almost-symmetrization of A.
HpdsModel identify_io_noisy(const SampleSet& s, int k, const RankTolerance& tol = {},
                            std::optional<Index> state_dim = {});

}  // namespace hpds
