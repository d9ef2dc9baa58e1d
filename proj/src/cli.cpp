#include "hpds/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "hpds/analysis.hpp"
#include "hpds/benchmarks.hpp"
#include "hpds/io.hpp"
#include "hpds/sysid.hpp"

namespace hpds::cli {

namespace {

using io::Json;
using Clock = std::chrono::steady_clock;

// --tol wins, then HPDS_TOL, then the library default.
RankTolerance tolerance(const std::optional<double>& flag) {
  if (flag) return RankTolerance::relative(*flag);
  if (const char* env = std::getenv("HPDS_TOL"); env && *env) {
    char* end = nullptr;
    const double v = std::strtod(env, &end);
    if (*end != '\0' || !(v > 0.0)) throw ArgumentError(std::string("HPDS_TOL is not a positive number: ") + env);
    return RankTolerance::relative(v);
  }
  return {};
}

Vector read_vector_csv(const std::string& path) {
  const Matrix m = io::parse_numeric_csv(io::read_file(path));
  return m.transpose().reshaped();
}

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

void write_json(const std::string& path, const Json& j) { io::write_file_atomic(path, io::dump(j)); }

struct SimulateArgs {
  std::string model, x0, input, method = "rk4", out;
  double tau = 0.0, noise_std = 0.0;
  Index steps = 0;
  std::uint64_t seed = 0;
};

int simulate(const SimulateArgs& a) {
  const HpdsModel m = io::model_from_json(io::parse(io::read_file(a.model)));
  const Vector x0 = read_vector_csv(a.x0);
  std::optional<Matrix> u;
  if (!a.input.empty()) {
    // One row per step.
    u = Matrix(io::parse_numeric_csv(io::read_file(a.input)).transpose());
    if (u->cols() < a.steps)
      throw ShapeError("input has " + std::to_string(u->cols()) + " rows, need " + std::to_string(a.steps));
    u = Matrix(u->leftCols(a.steps));
  }
  SampleSet s;
  const bool discrete = a.method == "discrete";
  if (discrete)
    s = simulate_discrete(m, x0, u, a.tau, a.steps);
  else
    s = simulate_continuous(m, x0, u, a.tau, a.steps, a.method == "euler" ? Integrator::kEuler : Integrator::kRk4);
  if (a.noise_std > 0.0) s = add_noise(s, a.noise_std, a.seed);
  io::write_file_atomic(a.out, io::trajectory_csv(s, discrete));
  return kOk;
}

struct IdentifyArgs {
  std::string data, repr = "full", out;
  int order = 0;
  bool io_mode = false, noisy = false;
  std::optional<Index> state_dim;
  std::optional<double> tol;
};

Json failure_report(const IdentifiabilityReport& r, int k) {
  Json j;
  j["status"] = "identifiability_failed";
  j["k"] = k;
  j["report"] = io::to_json(r);
  return j;
}

int identify(const IdentifyArgs& a) {
  const RankTolerance tol = tolerance(a.tol);
  const Representation repr = parse_representation(a.repr);
  const io::Trajectory traj = io::parse_trajectory_csv(io::read_file(a.data));
  SampleSet s;
  s.t0 = traj.t.size() ? traj.t(0) : 0.0;
  s.tau = traj.t.size() >= 2 ? traj.t(1) - traj.t(0) : 1.0;
  s.X0 = traj.x;
  s.X1 = traj.dx ? *traj.dx : traj.x;
  s.U0 = traj.u;
  s.Y0 = traj.y;
  const int k = a.order;
  if (k < 2) throw ArgumentError("--order must be >= 2");

  std::optional<HpdsModel> model;
  try {
    if (a.io_mode) {
      if (!s.Y0) throw ArgumentError("--io needs y columns in the trajectory");
      if (!a.noisy) {
        const IdentifiabilityReport r = check_identifiability_io(s, k, tol, a.state_dim);
        if (!r.satisfied) {
          write_json(a.out, failure_report(r, k));
          return kIdentifiabilityFailed;
        }
        model = identify_io(s, k, tol, a.state_dim);
      } else {
        model = identify_io_noisy(s, k, tol, a.state_dim);
      }
      if (repr != Representation::kFull) model = with_representation(*model, repr, tol);
    } else {
      if (!traj.dx) throw ArgumentError("autonomous identification needs dx columns in the trajectory");
      const IdentifiabilityReport r = check_identifiability_autonomous(s, k, tol);
      if (!r.satisfied) {
        write_json(a.out, failure_report(r, k));
        return kIdentifiabilityFailed;
      }
      switch (repr) {
        case Representation::kFull: model = identify_full(s, k, tol); break;
        case Representation::kTt: model = identify_tt(s, k, tol); break;
        case Representation::kHt: model = identify_ht(s, k, build_tree(k), tol); break;
      }
    }
  } catch (const IdentifiabilityError& e) {
    write_json(a.out, failure_report(e.report(), k));
    return kIdentifiabilityFailed;
  }
  write_json(a.out, io::to_json(*model));
  return kOk;
}

struct ControllabilityArgs {
  std::string model, b, enumeration = "multiset", out;
  std::optional<double> tol;
  bool timing = false, verify = false;
};

int analyze_controllability(const ControllabilityArgs& a) {
  const HpdsModel m = io::model_from_json(io::parse(io::read_file(a.model)));
  Matrix b;
  if (!a.b.empty())
    b = io::matrix_from_json(io::parse(io::read_file(a.b)));
  else if (m.B())
    b = *m.B();
  else
    throw ArgumentError("no input matrix: pass --B or store B in the model");
  ControllabilityOptions opts;
  opts.tol = tolerance(a.tol);
  if (a.enumeration == "tuple")
    opts.enumeration = Enumeration::kTuple;
  else if (a.enumeration != "multiset")
    throw ArgumentError("--enumeration must be multiset or tuple");
  opts.verify_fixed_point = a.verify;
  const auto start = Clock::now();
  const ControllabilityResult r = controllability(m, b, opts);
  const double ms = ms_since(start);
  Json j;
  j["rank"] = r.rank;
  j["n"] = m.state_dim();
  j["verdict"] = to_string(r.verdict);
  j["iterations"] = r.iterations;
  j["representation"] = to_string(m.representation());
  j["elapsed_ms"] = a.timing ? Json(ms) : Json(nullptr);
  j["basis"] = io::to_json(r.basis);
  write_json(a.out, j);
  return kOk;
}

struct ObservabilityArgs {
  std::string model, c, x, out;
  int probes = 5;
  std::uint64_t seed = 0;
  std::optional<int> depth;
  std::optional<double> tol;
  bool timing = false;
};

int analyze_observability(const ObservabilityArgs& a) {
  const HpdsModel m = io::model_from_json(io::parse(io::read_file(a.model)));
  Matrix c;
  if (!a.c.empty())
    c = io::matrix_from_json(io::parse(io::read_file(a.c)));
  else if (m.C())
    c = *m.C();
  else
    throw ArgumentError("no output matrix: pass --C or store C in the model");
  std::vector<Vector> probes;
  if (!a.x.empty())
    probes.push_back(read_vector_csv(a.x));
  else {
    if (a.probes < 1) throw ArgumentError("--probes must be >= 1");
    probes = probe_states(m.state_dim(), a.probes, a.seed);
  }
  const auto start = Clock::now();
  const ObservabilityResult r = observability(m, c, probes, a.depth, tolerance(a.tol));
  const double ms = ms_since(start);
  Json j;
  j["rank"] = r.matrix_rank;
  j["n"] = r.n;
  j["verdict"] = r.verdict ? "locally_weakly_observable" : "not_observed_at_probes";
  j["observable"] = r.verdict;
  j["depth"] = r.depth;
  j["representation"] = to_string(m.representation());
  Json states = Json::array();
  for (const auto& x : r.probe_states) {
    Json v = Json::array();
    for (Index i = 0; i < x.size(); ++i) v.push_back(x(i));
    states.push_back(std::move(v));
  }
  j["probe_states"] = std::move(states);
  j["elapsed_ms"] = a.timing ? Json(ms) : Json(nullptr);
  write_json(a.out, j);
  return kOk;
}

struct DecomposeArgs {
  std::string tensor, method, out;
  std::optional<double> tol;
};

int decompose(const DecomposeArgs& a) {
  const Tensor t = io::tensor_from_json(io::parse(io::read_file(a.tensor)));
  const RankTolerance tol = tolerance(a.tol);
  if (a.method == "tt")
    write_json(a.out, io::to_json(tt_decompose(t, tol)));
  else
    write_json(a.out, io::to_json(htd_decompose(t, build_tree(t.order()), tol)));
  return kOk;
}

struct BenchArgs {
  std::vector<Index> n;
  std::vector<int> k_list;
  int k_min = 2, k_max = 0;
  std::vector<std::string> schemes{"sym", "lowtt", "lowht"};
  Index rank_cap = 2, m = 5;
  int repeats = 3;
  std::uint64_t seed = 0;
  std::string out;
};

int bench(const BenchArgs& a, bool timing) {
  std::vector<int> ks = a.k_list;
  if (ks.empty()) {
    if (a.k_max < a.k_min) throw ArgumentError("pass --k-list or --k-max >= --k-min");
    for (int k = a.k_min; k <= a.k_max; ++k) ks.push_back(k);
  }
  for (int k : ks)
    if (k < 2) throw ArgumentError("orders must be >= 2");
  std::vector<Scheme> schemes;
  for (const auto& s : a.schemes) schemes.push_back(parse_scheme(s));
  std::vector<BenchRecord> recs;
  if (timing) {
    recs = timing_report(a.n, ks, schemes, a.m, a.rank_cap, a.seed, a.repeats);
  } else {
    for (Index n : a.n) {
      auto part = memory_report(n, ks, schemes, a.rank_cap, a.seed);
      recs.insert(recs.end(), part.begin(), part.end());
    }
  }
  io::write_file_atomic(a.out, bench_csv(recs));
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Homogeneous polynomial dynamical systems: simulation, identification, analysis"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "Simulate a model and write a trajectory CSV");
  s->add_option("--model", sim.model, "Model JSON")->required();
  s->add_option("--x0", sim.x0, "Initial state CSV")->required();
  s->add_option("--input", sim.input, "Input CSV, one row per step");
  s->add_option("--tau", sim.tau, "Step size")->required()->check(CLI::PositiveNumber);
  s->add_option("--steps", sim.steps, "Number of samples")->required()->check(CLI::PositiveNumber);
  s->add_option("--method", sim.method)->check(CLI::IsMember({"rk4", "euler", "discrete"}));
  s->add_option("--noise-std", sim.noise_std)->check(CLI::NonNegativeNumber);
  s->add_option("--seed", sim.seed);
  s->add_option("--out", sim.out)->required();

  IdentifyArgs idf;
  auto* i = app.add_subcommand("identify", "Identify a model from a trajectory CSV");
  i->add_option("--data", idf.data)->required();
  i->add_option("--order", idf.order, "Tensor order k")->required();
  i->add_option("--repr", idf.repr)->check(CLI::IsMember({"full", "tt", "ht"}));
  i->add_flag("--io", idf.io_mode, "Use input/output columns");
  i->add_flag("--noisy", idf.noisy, "Least-squares input/output fit");
  i->add_option("--state-dim", idf.state_dim);
  i->add_option("--tol", idf.tol)->check(CLI::PositiveNumber);
  i->add_option("--out", idf.out)->required();

  auto* an = app.add_subcommand("analyze", "Controllability or observability report");
  an->require_subcommand(1);
  ControllabilityArgs ctl;
  auto* c = an->add_subcommand("controllability");
  c->add_option("--model", ctl.model)->required();
  c->add_option("--B", ctl.b, "Input matrix JSON (defaults to the model's B)");
  c->add_option("--enumeration", ctl.enumeration)->check(CLI::IsMember({"multiset", "tuple"}));
  c->add_flag("--verify-fixed-point", ctl.verify);
  c->add_option("--tol", ctl.tol)->check(CLI::PositiveNumber);
  c->add_flag("--timing", ctl.timing, "Record elapsed_ms");
  c->add_option("--out", ctl.out)->required();
  ObservabilityArgs obs;
  auto* o = an->add_subcommand("observability");
  o->add_option("--model", obs.model)->required();
  o->add_option("--C", obs.c, "Output matrix JSON (defaults to the model's C)");
  auto* ox = o->add_option("--x", obs.x, "Probe state CSV");
  o->add_option("--probes", obs.probes)->excludes(ox);
  o->add_option("--seed", obs.seed);
  o->add_option("--depth", obs.depth);
  o->add_option("--tol", obs.tol)->check(CLI::PositiveNumber);
  o->add_flag("--timing", obs.timing, "Record elapsed_ms");
  o->add_option("--out", obs.out)->required();

  DecomposeArgs dec;
  auto* d = app.add_subcommand("decompose", "Tensor-train or hierarchical Tucker decomposition");
  d->add_option("--tensor", dec.tensor)->required();
  d->add_option("--method", dec.method)->required()->check(CLI::IsMember({"tt", "ht"}));
  d->add_option("--tol", dec.tol)->check(CLI::PositiveNumber);
  d->add_option("--out", dec.out)->required();

  BenchArgs bm;
  auto* b = app.add_subcommand("bench", "Parameter-count and timing benchmarks");
  b->require_subcommand(1);
  auto* bmem = b->add_subcommand("memory");
  auto* btime = b->add_subcommand("time");
  for (auto* sub : {bmem, btime}) {
    sub->add_option("--n", bm.n)->required()->delimiter(',');
    sub->add_option("--k-min", bm.k_min);
    sub->add_option("--k-max", bm.k_max);
    sub->add_option("--k-list", bm.k_list)->delimiter(',');
    sub->add_option("--scheme", bm.schemes)->delimiter(',');
    sub->add_option("--rank-cap", bm.rank_cap)->check(CLI::PositiveNumber);
    sub->add_option("--seed", bm.seed);
    sub->add_option("--out", bm.out)->required();
  }
  btime->add_option("--m", bm.m)->check(CLI::PositiveNumber);
  btime->add_option("--repeats", bm.repeats)->check(CLI::PositiveNumber);

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*s) return simulate(sim);
    if (*i) return identify(idf);
    if (*c) return analyze_controllability(ctl);
    if (*o) return analyze_observability(obs);
    if (*d) return decompose(dec);
    if (*bmem) return bench(bm, false);
    if (*btime) return bench(bm, true);
  } catch (const ScaleError& e) {
    err << "error: " << e.what() << "\n";
    return kScaleGuard;
  } catch (const NumericError& e) {
    err << "error: " << e.what() << "\n";
    return kNumericFailure;
  } catch (const AssumptionError& e) {
    err << "error: " << e.what() << "\n";
    return kNumericFailure;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kNumericFailure;
  }
  return kUsage;
}

}  // namespace hpds::cli
