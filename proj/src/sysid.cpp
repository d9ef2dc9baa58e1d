#include "hpds/sysid.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "hpds/kronecker.hpp"
#include "hpds/tensor_train.hpp"

namespace hpds {

namespace {

Index checked_mul(Index a, Index b) {
  Index out;
  if (__builtin_mul_overflow(a, b, &out))
    throw ArgumentError("required_rank: result exceeds 64-bit range");
  return out;
}

Index checked_add(Index a, Index b) {
  Index out;
  if (__builtin_add_overflow(a, b, &out))
    throw ArgumentError("required_rank: result exceeds 64-bit range");
  return out;
}

// Exact C(n, r); each partial product C(n-r+i, i) is an integer.
Index binomial(Index n, Index r) {
  if (r < 0 || r > n) return 0;
  r = std::min(r, n - r);
  Index c = 1;
  for (Index i = 1; i <= r; ++i) {
    const Index g = std::gcd(c, i);
    c = checked_mul(c / g, (n - r + i) / (i / g));
  }
  return c;
}

bool ill_conditioned(const CompactSvd& svd) {
  if (svd.rank() == 0) return false;
  const double eps = std::numeric_limits<double>::epsilon();
  return svd.S(svd.rank() - 1) < 1e3 * eps * svd.S(0);
}

Dims cube(Index n, int k) { return Dims(static_cast<std::size_t>(k), n); }

void check_order(int k, const char* who) {
  if (k < 2) throw ArgumentError(std::string(who) + ": order k must be >= 2");
}

struct AutonomousFit {
  IdentifiabilityReport report;
  CompactSvd svd;
};

AutonomousFit fit_autonomous(const SampleSet& s, int k, const RankTolerance& tol,
                             const char* who) {
  check_order(k, who);
  s.validate();
  AutonomousFit fit;
  fit.svd = compact_svd(khatri_rao_power(s.X0, k - 1), tol);
  auto& r = fit.report;
  r.observed_rank = fit.svd.rank();
  r.required_rank = required_rank(s.X0.rows(), k);
  r.satisfied = r.observed_rank == r.required_rank;
  r.margin = fit.svd.rank() > 0 ? fit.svd.S(fit.svd.rank() - 1) : 0.0;
  r.ill_conditioned = ill_conditioned(fit.svd);
  return fit;
}

AutonomousFit require_autonomous(const SampleSet& s, int k, const RankTolerance& tol,
                                 const char* who) {
  AutonomousFit fit = fit_autonomous(s, k, tol, who);
  if (!fit.report.satisfied)
    throw IdentifiabilityError(
        std::string(who) + ": rank condition fails (observed " +
            std::to_string(fit.report.observed_rank) + ", required " +
            std::to_string(fit.report.required_rank) + ")",
        fit.report);
  return fit;
}

Matrix unfolded_dynamics(const SampleSet& s, const CompactSvd& svd, CoreInit init) {
  const Vector scale = init == CoreInit::kPseudoInverse ? Vector(svd.S.cwiseInverse())
                                                        : svd.S;
  return s.X1 * svd.V * scale.asDiagonal() * svd.U.transpose();
}

struct IoData {
  IdentifiabilityReport report;
  Matrix c;        // l x n
  Matrix x0, x1;   // n x (T-1)
  Matrix u0;       // m x (T-1)
  Matrix z;        // [tau X0^{(k-1)}; U0]
};

IoData prepare_io(const SampleSet& s, int k, const RankTolerance& tol,
                  std::optional<Index> state_dim, bool truncate, const char* who) {
  check_order(k, who);
  if (!s.Y0) throw ArgumentError(std::string(who) + ": output data Y0 is required");
  if (!(s.tau > 0.0)) throw ArgumentError(std::string(who) + ": tau must be positive");
  const Matrix& y = *s.Y0;
  const Index t = y.cols();
  if (s.U0 && s.U0->cols() != t)
    throw ShapeError(std::string(who) + ": U0 and Y0 have different sample counts");
  if (t < 2) throw ArgumentError(std::string(who) + ": at least two samples are needed");
  if (state_dim && *state_dim < 1)
    throw ArgumentError(std::string(who) + ": state dimension must be positive");

  IoData d;
  const CompactSvd ysvd = compact_svd(y, tol);
  const Index n = state_dim.value_or(ysvd.rank());
  if (y.rows() < n)
    throw AssumptionError(std::string(who) + ": output dimension l = " +
                          std::to_string(y.rows()) + " is smaller than n = " +
                          std::to_string(n));
  d.report.output_rank = ysvd.rank();
  d.report.state_dim = n;

  Matrix states;
  if (truncate) {
    Eigen::BDCSVD<Matrix> full(y, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Index r = std::min<Index>(n, full.singularValues().size());
    d.c = full.matrixU().leftCols(r);
    states = full.singularValues().head(r).asDiagonal() * full.matrixV().leftCols(r).transpose();
  } else {
    d.c = ysvd.U;
    states = ysvd.S.asDiagonal() * ysvd.V.transpose();
  }
  const Index ns = states.rows();
  d.x0 = states.leftCols(t - 1);
  d.x1 = states.rightCols(t - 1);
  const Index m = s.U0 ? s.U0->rows() : 0;
  d.u0 = s.U0 ? Matrix(s.U0->leftCols(t - 1)) : Matrix(0, t - 1);

  const Matrix xhat = ns > 0 ? khatri_rao_power(d.x0, k - 1) : Matrix(0, t - 1);
  d.z.resize(xhat.rows() + m, t - 1);
  d.z << s.tau * xhat, d.u0;

  const CompactSvd zsvd = compact_svd(d.z, tol);
  d.report.observed_rank = zsvd.rank();
  d.report.required_rank = checked_add(required_rank(n, k), m);
  d.report.margin = zsvd.rank() > 0 ? zsvd.S(zsvd.rank() - 1) : 0.0;
  d.report.ill_conditioned = ill_conditioned(zsvd);
  d.report.satisfied = ysvd.rank() == n && ns == n &&
                       d.report.observed_rank == d.report.required_rank;
  return d;
}

HpdsModel assemble_io(const IoData& d, const Matrix& ab, int k, bool symmetrize) {
  const Index n = d.x0.rows();
  const Index cols = d.z.rows() - d.u0.rows();
  Tensor a = fold(Matrix(ab.leftCols(cols)), {k}, cube(n, k));
  if (symmetrize) a = almost_symmetrize(a);
  std::optional<Matrix> b;
  if (d.u0.rows() > 0) b = ab.rightCols(d.u0.rows());
  return HpdsModel(std::move(a), b, d.c);
}

}  // namespace

Index required_rank(Index n, int k) {
  if (n < 1) throw ArgumentError("required_rank: n must be >= 1");
  if (k < 2) throw ArgumentError("required_rank: k must be >= 2");
  Index total = 0;
  const Index top = std::min<Index>(n, k - 1);
  for (Index j = 1; j <= top; ++j)
    total = checked_add(total, checked_mul(binomial(n, j), binomial(k - 2, j - 1)));
  return total;
}

IdentifiabilityReport check_identifiability_autonomous(const SampleSet& s, int k,
                                                       const RankTolerance& tol) {
  return fit_autonomous(s, k, tol, "check_identifiability_autonomous").report;
}

HpdsModel identify_full(const SampleSet& s, int k, const RankTolerance& tol) {
  const AutonomousFit fit = require_autonomous(s, k, tol, "identify_full");
  const Matrix ak = unfolded_dynamics(s, fit.svd, CoreInit::kPseudoInverse);
  return HpdsModel(fold(ak, {k}, cube(s.X0.rows(), k)));
}

HpdsModel identify_tt(const SampleSet& s, int k, const RankTolerance& tol, CoreInit init) {
  const AutonomousFit fit = require_autonomous(s, k, tol, "identify_tt");
  return HpdsModel(tt_decompose(unfolded_dynamics(s, fit.svd, init), cube(s.X0.rows(), k), tol));
}

HpdsModel identify_ht(const SampleSet& s, int k, const DimensionTree& tree,
                      const RankTolerance& tol) {
  const AutonomousFit fit = require_autonomous(s, k, tol, "identify_ht");
  if (tree.order() != k)
    throw ShapeError("identify_ht: tree order " + std::to_string(tree.order()) +
                     " does not match k = " + std::to_string(k));
  const Index n = s.X0.rows();
  const Matrix m = unfolded_dynamics(s, fit.svd, CoreInit::kPseudoInverse);
  const Tensor a = fold(m, {k}, cube(n, k));
  std::vector<Matrix> leaves(static_cast<std::size_t>(k));
  auto basis = [&](const Matrix& unfolding) {
    Matrix u = orthonormal_basis(unfolding, tol);
    if (u.cols() == 0) {
      u = Matrix::Zero(n, 1);
      u(0, 0) = 1.0;
    }
    return u;
  };
  leaves.back() = basis(m);
  const Matrix u1 = basis(matricize(a, 1));
  for (int p = 0; p < k - 1; ++p) leaves[static_cast<std::size_t>(p)] = u1;
  return HpdsModel(htd_decompose(a, tree, tol, leaves));
}

IdentifiabilityReport check_identifiability_io(const SampleSet& s, int k,
                                               const RankTolerance& tol,
                                               std::optional<Index> state_dim) {
  return prepare_io(s, k, tol, state_dim, false, "check_identifiability_io").report;
}

HpdsModel identify_io(const SampleSet& s, int k, const RankTolerance& tol,
                      std::optional<Index> state_dim) {
  const IoData d = prepare_io(s, k, tol, state_dim, false, "identify_io");
  if (!d.report.satisfied)
    throw IdentifiabilityError("identify_io: rank condition fails (observed " +
                                   std::to_string(d.report.observed_rank) + ", required " +
                                   std::to_string(d.report.required_rank) + ")",
                               d.report);
  const Matrix ab = (d.x1 - d.x0) * pinv(d.z, tol);
  return assemble_io(d, ab, k, false);
}

HpdsModel identify_io_noisy(const SampleSet& s, int k, const RankTolerance& tol,
                            std::optional<Index> state_dim) {
  IoData d = prepare_io(s, k, tol, state_dim, true, "identify_io_noisy");
  if (d.report.observed_rank != d.report.required_rank || d.x0.rows() != *d.report.state_dim)
    throw IdentifiabilityError("identify_io_noisy: rank condition fails (observed " +
                                   std::to_string(d.report.observed_rank) + ", required " +
                                   std::to_string(d.report.required_rank) + ")",
                               d.report);
  // Output block: min ||Y0 - C X0||, over all T samples.
  const Index n = d.x0.rows();
  Matrix states(n, d.x0.cols() + 1);
  states << d.x0, d.x1.rightCols(1);
  d.c = least_squares(states.transpose(), s.Y0->transpose(), tol).transpose();
  // Dynamics block: min ||X1 - X0 - [A B] Z||.
  const Matrix ab = least_squares(d.z.transpose(), (d.x1 - d.x0).transpose(), tol).transpose();
  return assemble_io(d, ab, k, true);
}

}  // namespace hpds
