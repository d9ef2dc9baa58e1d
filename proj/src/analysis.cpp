#include "hpds/analysis.hpp"

#include <algorithm>
#include <functional>

#include "hpds/kronecker.hpp"
#include "hpds/random.hpp"

namespace hpds {

std::string to_string(ControllabilityVerdict v) {
  switch (v) {
    case ControllabilityVerdict::kStronglyControllable: return "strongly_controllable";
    case ControllabilityVerdict::kNotControllable: return "not_controllable";
    case ControllabilityVerdict::kAccessible: return "accessible";
    case ControllabilityVerdict::kNotAccessible: return "not_accessible";
  }
  return "not_controllable";
}

namespace {

// Calls f(indices) for each index set of length `len` over 0..s-1.
void enumerate(Index s, int len, Enumeration mode,
               const std::function<void(const std::vector<Index>&)>& f) {
  if (s == 0) return;
  std::vector<Index> idx(static_cast<std::size_t>(len), 0);
  while (true) {
    f(idx);
    int p = len - 1;
    while (p >= 0 && idx[static_cast<std::size_t>(p)] == s - 1) --p;
    if (p < 0) return;
    ++idx[static_cast<std::size_t>(p)];
    const Index reset = mode == Enumeration::kMultiset ? idx[static_cast<std::size_t>(p)] : 0;
    for (int q = p + 1; q < len; ++q) idx[static_cast<std::size_t>(q)] = reset;
  }
}

// Produces the candidate block for the current basis w (n x s).
using CandidateFn = std::function<Matrix(const Matrix& w, Enumeration mode)>;

ControllabilityResult reachability(Index n, int k, const Matrix& b, const CandidateFn& candidates,
                                   const ControllabilityOptions& opts) {
  if (b.rows() != n)
    throw ShapeError("controllability: B has " + std::to_string(b.rows()) +
                     " rows, expected n = " + std::to_string(n));
  ControllabilityResult r;
  r.basis = orthonormal_basis(b, opts.tol);
  r.rank = r.basis.cols();
  auto pass = [&](const Matrix& w) {
    const Matrix extra = candidates(w, opts.enumeration);
    Matrix all(n, w.cols() + extra.cols());
    all << w, extra;
    return orthonormal_basis(all, opts.tol);
  };
  while (r.rank < n && r.iterations < n - 1 && r.rank > 0) {
    Matrix next = pass(r.basis);
    ++r.iterations;
    const bool stalled = next.cols() == r.rank;
    r.basis = std::move(next);
    r.rank = r.basis.cols();
    if (stalled) {
      if (opts.verify_fixed_point && pass(r.basis).cols() != r.rank)
        throw NumericError("controllability: rank grew after a stagnant pass");
      break;
    }
  }
  const bool full = r.rank == n;
  if (k % 2 == 0)
    r.verdict = full ? ControllabilityVerdict::kStronglyControllable
                     : ControllabilityVerdict::kNotControllable;
  else
    r.verdict = full ? ControllabilityVerdict::kAccessible : ControllabilityVerdict::kNotAccessible;
  return r;
}

// Generic column-by-column candidate generation through a contraction.
template <typename Contract>
Matrix contracted_candidates(Index n, int k, const Matrix& w, Enumeration mode,
                             Contract&& contract) {
  std::vector<Matrix> args(static_cast<std::size_t>(k - 1));
  std::vector<Vector> cols;
  enumerate(w.cols(), k - 1, mode, [&](const std::vector<Index>& idx) {
    for (int p = 0; p < k - 1; ++p) args[static_cast<std::size_t>(p)] = w.col(idx[static_cast<std::size_t>(p)]);
    cols.push_back(contract(args).col(0));
  });
  Matrix out(n, static_cast<Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) out.col(static_cast<Index>(c)) = cols[c];
  return out;
}

void check_cubical(const Dims& dims, const char* who) {
  if (dims.size() < 2) throw ShapeError(std::string(who) + ": order must be >= 2");
  for (Index d : dims)
    if (d != dims.front()) throw ShapeError(std::string(who) + ": dynamics tensor must be cubical");
}

// n^e, saturating at kSaturated so size checks never overflow.
constexpr Index kSaturated = Index{1} << 50;

Index int_pow(Index n, Index e) {
  Index out = 1;
  for (Index i = 0; i < e; ++i) {
    if (out > kSaturated / std::max<Index>(n, 1)) return kSaturated;
    out *= n;
  }
  return out;
}

bool fits(Index rows, Index cols) {
  return rows <= kMaxLiftEntries && cols <= kMaxLiftEntries / std::max<Index>(rows, 1);
}

}  // namespace

ControllabilityResult controllability_full(const Tensor& a, const Matrix& b,
                                           const ControllabilityOptions& opts) {
  check_cubical(a.dims(), "controllability_full");
  const int k = a.order();
  const Index n = a.dims().front();
  const Matrix ak = matricize(a, k);
  const Index width = ak.cols();
  const Index batch = std::max<Index>(1, kMaxLiftEntries / std::max<Index>(width, 1));
  // A_(k) times Kronecker-combined columns v_{k-1} (x) ... (x) v_1.
  auto candidates = [&](const Matrix& w, Enumeration mode) {
    std::vector<Vector> kr;
    std::vector<Matrix> blocks;
    Index total = 0;
    auto flush = [&] {
      if (kr.empty()) return;
      Matrix z(width, static_cast<Index>(kr.size()));
      for (std::size_t c = 0; c < kr.size(); ++c) z.col(static_cast<Index>(c)) = kr[c];
      blocks.push_back(ak * z);
      total += z.cols();
      kr.clear();
    };
    enumerate(w.cols(), k - 1, mode, [&](const std::vector<Index>& idx) {
      Vector v = Vector::Ones(1);
      for (int p = 0; p < k - 1; ++p) v = kron(Vector(w.col(idx[static_cast<std::size_t>(p)])), v);
      kr.push_back(std::move(v));
      if (static_cast<Index>(kr.size()) >= batch) flush();
    });
    flush();
    Matrix out(n, total);
    Index at = 0;
    for (const auto& blk : blocks) {
      out.middleCols(at, blk.cols()) = blk;
      at += blk.cols();
    }
    return out;
  };
  return reachability(n, k, b, candidates, opts);
}

ControllabilityResult controllability_tt(const TensorTrain& a, const Matrix& b,
                                         const ControllabilityOptions& opts) {
  check_cubical(a.dims(), "controllability_tt");
  const int k = a.order();
  const Index n = a.dims().front();
  auto candidates = [&](const Matrix& w, Enumeration mode) {
    return contracted_candidates(n, k, w, mode,
                                 [&](std::span<const Matrix> args) { return tt_contract(a, args); });
  };
  return reachability(n, k, b, candidates, opts);
}

ControllabilityResult controllability_ht(const HTucker& a, const Matrix& b,
                                         const ControllabilityOptions& opts) {
  check_cubical(a.dims(), "controllability_ht");
  const int k = a.order();
  const Index n = a.dims().front();
  auto candidates = [&](const Matrix& w, Enumeration mode) {
    return contracted_candidates(n, k, w, mode,
                                 [&](std::span<const Matrix> args) { return htd_contract(a, args); });
  };
  return reachability(n, k, b, candidates, opts);
}

ControllabilityResult controllability(const HpdsModel& m, const Matrix& b,
                                      const ControllabilityOptions& opts) {
  switch (m.representation()) {
    case Representation::kFull: return controllability_full(std::get<Tensor>(m.dynamics()), b, opts);
    case Representation::kTt: return controllability_tt(std::get<TensorTrain>(m.dynamics()), b, opts);
    case Representation::kHt: return controllability_ht(std::get<HTucker>(m.dynamics()), b, opts);
  }
  return {};
}

Matrix gradient_sum(const Vector& x, int m) {
  if (m < 1) throw ArgumentError("gradient_sum: m must be >= 1, got " + std::to_string(m));
  const Index n = x.size();
  if (!fits(int_pow(n, m), n))
    throw ScaleError("gradient_sum: result would exceed " + std::to_string(kMaxLiftEntries) +
                     " entries");
  const Matrix eye = Matrix::Identity(n, n);
  Matrix out = Matrix::Zero(int_pow(n, m), n);
  for (int q = 1; q <= m; ++q) {
    Matrix term = kron(Matrix(kron_power(x, q - 1)), eye);
    out += kron(term, Matrix(kron_power(x, m - q)));
  }
  return out;
}

namespace {

Index lift_width(int j, int k) { return static_cast<Index>(j - 1) * (k - 2) + 1; }

bool lift_fits(Index n, int j, int k) {
  return fits(int_pow(n, lift_width(j, k)), int_pow(n, lift_width(j + 1, k)));
}

// Block j needs G(x, N_{j+1}) and, from j = 2 on, F_j.
bool depth_fits(Index n, int j, int k) {
  if (j == 0) return true;
  return fits(int_pow(n, lift_width(j + 1, k)), n) && (j < 2 || lift_fits(n, j, k));
}

}  // namespace

Matrix lift_operator(const Matrix& a_k, int j, int k) {
  if (j < 2) throw ArgumentError("lift_operator: j must be >= 2, got " + std::to_string(j));
  if (k < 2) throw ArgumentError("lift_operator: k must be >= 2");
  const Index n = a_k.rows();
  const Index nj = lift_width(j, k);
  if (a_k.cols() != int_pow(n, k - 1))
    throw ShapeError("lift_operator: A_(k) must be n x n^(k-1)");
  if (!lift_fits(n, j, k))
    throw ScaleError("lift_operator: F_" + std::to_string(j) + " would exceed " +
                     std::to_string(kMaxLiftEntries) +
                     " entries; use the tensor-train or hierarchical Tucker path");
  const Index rows = int_pow(n, nj);
  const Index cols = int_pow(n, lift_width(j + 1, k));
  Matrix f = Matrix::Zero(rows, cols);
  // I^[i-1] (x) A (x) I^[nj-i]: block-diagonal copies of A (x) I^[nj-i].
  for (Index i = 1; i <= nj; ++i) {
    const Index outer = int_pow(n, i - 1);
    const Index inner = int_pow(n, nj - i);
    const Index br = n * inner, bc = a_k.cols() * inner;
    for (Index o = 0; o < outer; ++o)
      for (Index c = 0; c < a_k.cols(); ++c)
        for (Index r = 0; r < n; ++r) {
          const double v = a_k(r, c);
          if (v == 0.0) continue;
          for (Index t = 0; t < inner; ++t) f(o * br + r * inner + t, o * bc + c * inner + t) += v;
        }
  }
  return f;
}

namespace {

ObservabilityResult finish(Index n, const std::vector<Matrix>& blocks, const Vector& x,
                           int depth, const RankTolerance& tol) {
  Index rows = 0;
  for (const auto& b : blocks) rows += b.rows();
  ObservabilityResult r;
  r.n = n;
  r.depth = depth;
  r.matrix.resize(rows, n);
  Index at = 0;
  for (const auto& b : blocks) {
    r.matrix.middleRows(at, b.rows()) = b;
    at += b.rows();
  }
  r.matrix_rank = numerical_rank(r.matrix, tol);
  r.verdict = r.matrix_rank == n;
  r.probe_states = {x};
  return r;
}

void check_observability_args(Index n, const Matrix& c, const Vector& x,
                              std::optional<int> depth, const char* who) {
  if (c.cols() != n)
    throw ShapeError(std::string(who) + ": C has " + std::to_string(c.cols()) +
                     " columns, expected n = " + std::to_string(n));
  if (x.size() != n)
    throw ShapeError(std::string(who) + ": state length " + std::to_string(x.size()) +
                     " does not match n = " + std::to_string(n));
  if (depth && (*depth < 0 || *depth > n - 1))
    throw ArgumentError(std::string(who) + ": depth must lie in [0, n-1]");
}

// Shared by TT and HT: block j = C sum_q J_j(x, .., I at q, .., x).
template <typename Recursive>
ObservabilityResult recursive_observability(Index n, int k, const Matrix& c, const Vector& x,
                                            std::optional<int> depth, const RankTolerance& tol,
                                            Recursive&& rec, const char* who) {
  check_observability_args(n, c, x, depth, who);
  const int d = depth.value_or(static_cast<int>(n - 1));
  std::vector<Matrix> blocks{c};
  const Matrix eye = Matrix::Identity(n, n);
  for (int j = 1; j <= d; ++j) {
    const Index len = static_cast<Index>(j) * (k - 2) + 1;
    Matrix sum = Matrix::Zero(n, n);
    for (Index q = 0; q < len; ++q) {
      std::vector<Matrix> z(static_cast<std::size_t>(len), x);
      z[static_cast<std::size_t>(q)] = eye;
      sum += rec(j, z);
    }
    blocks.push_back(c * sum);
  }
  return finish(n, blocks, x, d, tol);
}

template <typename Contract>
Matrix recursive_j(int k, int j, std::span<const Matrix> z, Contract&& contract, const char* who) {
  if (j < 1) throw ArgumentError(std::string(who) + ": j must be >= 1");
  const Index len = static_cast<Index>(j) * (k - 2) + 1;
  if (static_cast<Index>(z.size()) != len)
    throw ArgumentError(std::string(who) + ": expected " + std::to_string(len) +
                        " list entries for j = " + std::to_string(j) + ", got " +
                        std::to_string(z.size()));
  if (j == 1) return contract(z);
  const std::size_t window = static_cast<std::size_t>(k - 1);
  Matrix sum;
  std::vector<Matrix> merged;
  for (std::size_t i = 0; i + window <= z.size(); ++i) {
    merged.assign(z.begin(), z.begin() + static_cast<std::ptrdiff_t>(i));
    merged.push_back(contract(z.subspan(i, window)));
    merged.insert(merged.end(), z.begin() + static_cast<std::ptrdiff_t>(i + window), z.end());
    Matrix term = recursive_j(k, j - 1, std::span<const Matrix>(merged), contract, who);
    if (sum.size() == 0) sum = std::move(term);
    else sum += term;
  }
  return sum;
}

}  // namespace

ObservabilityResult observability_full(const Tensor& a, const Matrix& c, const Vector& x,
                                       std::optional<int> depth, const RankTolerance& tol) {
  check_cubical(a.dims(), "observability_full");
  const int k = a.order();
  const Index n = a.dims().front();
  check_observability_args(n, c, x, depth, "observability_full");
  int d = depth.value_or(static_cast<int>(n - 1));
  if (!depth) {
    int fit = 0;
    while (fit < d && depth_fits(n, fit + 1, k)) ++fit;
    d = fit;
  } else if (!depth_fits(n, d, k)) {
    throw ScaleError("observability_full: depth " + std::to_string(d) + " needs operators above " +
                     std::to_string(kMaxLiftEntries) +
                     " entries; use the tensor-train or hierarchical Tucker path");
  }
  const Matrix ak = matricize(a, k);
  std::vector<Matrix> blocks{c};
  Matrix chain = c * ak;  // C A_(k) F_2 ... F_j
  for (int j = 1; j <= d; ++j) {
    if (j >= 2) chain = chain * lift_operator(ak, j, k);
    blocks.push_back(chain * gradient_sum(x, static_cast<int>(lift_width(j + 1, k))));
  }
  return finish(n, blocks, x, d, tol);
}

Matrix recursive_j_tt(const TensorTrain& a, int j, std::span<const Matrix> z) {
  return recursive_j(a.order(), j, z, [&](std::span<const Matrix> args) { return tt_contract(a, args); },
                     "recursive_j_tt");
}

Matrix recursive_j_ht(const HTucker& a, int j, std::span<const Matrix> z) {
  return recursive_j(a.order(), j, z, [&](std::span<const Matrix> args) { return htd_contract(a, args); },
                     "recursive_j_ht");
}

ObservabilityResult observability_tt(const TensorTrain& a, const Matrix& c, const Vector& x,
                                     std::optional<int> depth, const RankTolerance& tol) {
  check_cubical(a.dims(), "observability_tt");
  return recursive_observability(
      a.dims().front(), a.order(), c, x, depth, tol,
      [&](int j, const std::vector<Matrix>& z) { return recursive_j_tt(a, j, z); }, "observability_tt");
}

ObservabilityResult observability_ht(const HTucker& a, const Matrix& c, const Vector& x,
                                     std::optional<int> depth, const RankTolerance& tol) {
  check_cubical(a.dims(), "observability_ht");
  return recursive_observability(
      a.dims().front(), a.order(), c, x, depth, tol,
      [&](int j, const std::vector<Matrix>& z) { return recursive_j_ht(a, j, z); }, "observability_ht");
}

ObservabilityResult observability(const HpdsModel& m, const Matrix& c,
                                  std::span<const Vector> probes, std::optional<int> depth,
                                  const RankTolerance& tol) {
  if (probes.empty()) throw ArgumentError("observability: at least one probe state is required");
  ObservabilityResult best;
  std::vector<Vector> tested;
  for (const Vector& x : probes) {
    ObservabilityResult r;
    switch (m.representation()) {
      case Representation::kFull:
        r = observability_full(std::get<Tensor>(m.dynamics()), c, x, depth, tol);
        break;
      case Representation::kTt:
        r = observability_tt(std::get<TensorTrain>(m.dynamics()), c, x, depth, tol);
        break;
      case Representation::kHt:
        r = observability_ht(std::get<HTucker>(m.dynamics()), c, x, depth, tol);
        break;
    }
    tested.push_back(x);
    const Index best_rank = tested.size() == 1 ? -1 : best.matrix_rank;
    if (r.matrix_rank > best_rank) best = std::move(r);
    if (best.verdict) break;
  }
  best.probe_states = std::move(tested);
  return best;
}

std::vector<Vector> probe_states(Index n, int count, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Vector> out;
  for (int i = 0; i < count; ++i) out.push_back(rng.uniform_matrix(n, 1));
  return out;
}

}  // namespace hpds
