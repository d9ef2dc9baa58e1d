#include "hpds/hpds_model.hpp"

#include "hpds/kronecker.hpp"
#include "hpds/random.hpp"

namespace hpds {

std::string to_string(Representation r) {
  switch (r) {
    case Representation::kFull: return "full";
    case Representation::kTt: return "tt";
    case Representation::kHt: return "ht";
  }
  return "full";
}

Representation parse_representation(const std::string& s) {
  if (s == "full") return Representation::kFull;
  if (s == "tt") return Representation::kTt;
  if (s == "ht") return Representation::kHt;
  throw ArgumentError("unknown representation '" + s + "' (expected full, tt or ht)");
}

namespace {

Dims dims_of(const Dynamics& a) {
  return std::visit([](const auto& d) { return Dims(d.dims()); }, a);
}

}  // namespace

HpdsModel::HpdsModel(Dynamics a, std::optional<Matrix> b, std::optional<Matrix> c)
    : a_(std::move(a)), b_(std::move(b)), c_(std::move(c)) {
  const Dims dims = dims_of(a_);
  if (dims.size() < 2) throw ShapeError("HpdsModel: dynamics order must be >= 2");
  for (Index d : dims)
    if (d != dims.front()) throw ShapeError("HpdsModel: dynamics tensor must be cubical");
  k_ = static_cast<int>(dims.size());
  n_ = dims.front();
  if (b_ && b_->rows() != n_)
    throw ShapeError("HpdsModel: B has " + std::to_string(b_->rows()) +
                     " rows, expected n = " + std::to_string(n_));
  if (c_ && c_->cols() != n_)
    throw ShapeError("HpdsModel: C has " + std::to_string(c_->cols()) +
                     " columns, expected n = " + std::to_string(n_));
}

Representation HpdsModel::representation() const {
  return static_cast<Representation>(a_.index());
}

Vector HpdsModel::drift(const Vector& x) const {
  switch (representation()) {
    case Representation::kFull: return hpds_eval_full(std::get<Tensor>(a_), x);
    case Representation::kTt: return tt_eval_hpds(std::get<TensorTrain>(a_), x);
    case Representation::kHt: return htd_eval_hpds(std::get<HTucker>(a_), x);
  }
  return {};
}

Tensor HpdsModel::full_tensor() const {
  switch (representation()) {
    case Representation::kFull: return std::get<Tensor>(a_);
    case Representation::kTt: return tt_reconstruct(std::get<TensorTrain>(a_));
    case Representation::kHt: return htd_reconstruct(std::get<HTucker>(a_));
  }
  return {};
}

HpdsModel with_representation(const HpdsModel& m, Representation r,
                              const RankTolerance& tol) {
  if (r == m.representation()) return m;
  const Tensor full = m.full_tensor();
  switch (r) {
    case Representation::kFull: return HpdsModel(full, m.B(), m.C());
    case Representation::kTt: return HpdsModel(tt_decompose(full, tol), m.B(), m.C());
    case Representation::kHt:
      return HpdsModel(htd_decompose(full, build_tree(m.order()), tol), m.B(), m.C());
  }
  return m;
}

HpdsModel change_basis(const HpdsModel& m, const Matrix& s) {
  const Index n = m.state_dim();
  if (s.rows() != n || s.cols() != n)
    throw ShapeError("change_basis: S must be n x n");
  Eigen::FullPivLU<Matrix> lu(s);
  if (!lu.isInvertible()) throw NumericError("change_basis: S is singular");
  const Matrix s_inv = lu.inverse();
  const int k = m.order();
  Matrix lift = Matrix::Ones(1, 1);
  for (int p = 0; p < k - 1; ++p) lift = kron(lift, s_inv);
  const Matrix ak = s * matricize(m.full_tensor(), k) * lift;
  std::optional<Matrix> b, c;
  if (m.B()) b = s * *m.B();
  if (m.C()) c = *m.C() * s_inv;
  return HpdsModel(fold(ak, {k}, Dims(static_cast<std::size_t>(k), n)), b, c);
}

void SampleSet::validate() const {
  if (!(tau > 0.0)) throw ArgumentError("SampleSet: tau must be positive");
  const Index t = X0.cols();
  if (X1.cols() != t || X1.rows() != X0.rows())
    throw ShapeError("SampleSet: X1 must match X0 in shape");
  if (U0 && U0->cols() != t) throw ShapeError("SampleSet: U0 column count differs from X0");
  if (Y0 && Y0->cols() != t) throw ShapeError("SampleSet: Y0 column count differs from X0");
}

Vector eval_derivative(const HpdsModel& m, const Vector& x, const std::optional<Vector>& u) {
  if (x.size() != m.state_dim())
    throw ShapeError("eval_derivative: state length " + std::to_string(x.size()) +
                     " does not match n = " + std::to_string(m.state_dim()));
  Vector dx = m.drift(x);
  if (u) {
    if (!m.B()) throw ArgumentError("eval_derivative: input given but the model has no B");
    if (u->size() != m.input_dim())
      throw ShapeError("eval_derivative: input length " + std::to_string(u->size()) +
                       " does not match m = " + std::to_string(m.input_dim()));
    dx += *m.B() * *u;
  }
  return dx;
}

namespace {

void check_sim_args(const HpdsModel& m, const Vector& x0, const std::optional<Matrix>& u,
                    double tau, Index steps, const char* who) {
  if (!(tau > 0.0)) throw ArgumentError(std::string(who) + ": tau must be positive");
  if (steps < 1) throw ArgumentError(std::string(who) + ": steps must be >= 1");
  if (x0.size() != m.state_dim())
    throw ShapeError(std::string(who) + ": x0 has length " + std::to_string(x0.size()) +
                     ", expected " + std::to_string(m.state_dim()));
  if (u) {
    if (!m.B() && !u->isZero(0.0))
      throw ArgumentError(std::string(who) + ": nonzero input requires B");
    if (m.B() && u->rows() != m.input_dim())
      throw ShapeError(std::string(who) + ": input has " + std::to_string(u->rows()) +
                       " rows, expected m = " + std::to_string(m.input_dim()));
    if (u->cols() < steps)
      throw ShapeError(std::string(who) + ": input has " + std::to_string(u->cols()) +
                       " samples, need " + std::to_string(steps));
  }
}

std::optional<Vector> input_at(const HpdsModel& m, const std::optional<Matrix>& u, Index i) {
  if (!u || !m.B()) return std::nullopt;
  return Vector(u->col(i));
}

}  // namespace

SampleSet simulate_continuous(const HpdsModel& m, const Vector& x0,
                              const std::optional<Matrix>& u, double tau, Index steps,
                              Integrator method) {
  check_sim_args(m, x0, u, tau, steps, "simulate_continuous");
  const Index n = m.state_dim();
  SampleSet s;
  s.tau = tau;
  s.X0.resize(n, steps);
  s.X1.resize(n, steps);
  if (u && m.B()) s.U0 = u->leftCols(steps);
  Vector x = x0;
  for (Index i = 0; i < steps; ++i) {
    const auto ui = input_at(m, u, i);
    s.X0.col(i) = x;
    s.X1.col(i) = eval_derivative(m, x, ui);
    if (!s.X1.col(i).allFinite()) throw DivergenceError("simulate_continuous: state blew up", i);
    if (i + 1 == steps) break;
    if (method == Integrator::kEuler) {
      x += tau * s.X1.col(i);
    } else {
      const Vector k1 = s.X1.col(i);
      const Vector k2 = eval_derivative(m, x + 0.5 * tau * k1, ui);
      const Vector k3 = eval_derivative(m, x + 0.5 * tau * k2, ui);
      const Vector k4 = eval_derivative(m, x + tau * k3, ui);
      x += (tau / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    if (!x.allFinite()) throw DivergenceError("simulate_continuous: state blew up", i + 1);
  }
  if (m.C()) s.Y0 = *m.C() * s.X0;
  return s;
}

SampleSet simulate_discrete(const HpdsModel& m, const Vector& x0,
                            const std::optional<Matrix>& u, double tau, Index steps) {
  check_sim_args(m, x0, u, tau, steps, "simulate_discrete");
  const Index n = m.state_dim();
  SampleSet s;
  s.tau = tau;
  s.X0.resize(n, steps);
  s.X1.resize(n, steps);
  if (u && m.B()) s.U0 = u->leftCols(steps);
  Vector x = x0;
  for (Index i = 0; i < steps; ++i) {
    s.X0.col(i) = x;
    x += tau * m.drift(x);
    if (const auto ui = input_at(m, u, i)) x += *m.B() * *ui;
    if (!x.allFinite()) throw DivergenceError("simulate_discrete: state blew up", i + 1);
    s.X1.col(i) = x;
  }
  if (m.C()) s.Y0 = *m.C() * s.X0;
  return s;
}

SampleSet add_noise(const SampleSet& s, double sigma, std::uint64_t seed) {
  if (sigma < 0.0) throw ArgumentError("add_noise: sigma must be non-negative");
  SampleSet out = s;
  if (sigma == 0.0) return out;
  Rng rng(seed);
  out.X1 += sigma * rng.normal_matrix(s.X1.rows(), s.X1.cols());
  if (out.Y0) *out.Y0 += sigma * rng.normal_matrix(s.Y0->rows(), s.Y0->cols());
  return out;
}

}  // namespace hpds
