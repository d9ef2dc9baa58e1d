#include "hpds/benchmarks.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <map>

#include "hpds/analysis.hpp"
#include "hpds/random.hpp"

namespace hpds {

std::string to_string(Scheme s) {
  switch (s) {
    case Scheme::kSymmetric: return "symmetric";
    case Scheme::kLowTt: return "low_tt";
    case Scheme::kLowHt: return "low_ht";
  }
  return "symmetric";
}

Scheme parse_scheme(const std::string& s) {
  if (s == "symmetric" || s == "sym") return Scheme::kSymmetric;
  if (s == "low_tt" || s == "lowtt") return Scheme::kLowTt;
  if (s == "low_ht" || s == "lowht") return Scheme::kLowHt;
  throw ArgumentError("unknown scheme '" + s + "' (expected sym, lowtt or lowht)");
}

namespace {

Index saturating_pow(Index n, int e) {
  Index out = 1;
  for (int i = 0; i < e; ++i) {
    if (out > kMaxDenseEntries) return kMaxDenseEntries + 1;
    out *= n;
  }
  return out;
}

Index capped_rank(Index cap, Index n, int left_modes, int right_modes) {
  return std::min({cap, saturating_pow(n, left_modes), saturating_pow(n, right_modes)});
}

TensorTrain random_tt(Index n, int k, Index cap, Rng& rng) {
  std::vector<Tensor> cores;
  Index prev = 1;
  for (int p = 1; p <= k; ++p) {
    const Index next = p == k ? 1 : capped_rank(cap, n, p, k - p);
    Tensor core({prev, n, next});
    for (Index i = 0; i < core.size(); ++i) core.values()(i) = rng.uniform(-1.0, 1.0);
    cores.push_back(std::move(core));
    prev = next;
  }
  return TensorTrain(std::move(cores));
}

HTucker random_ht(Index n, int k, Index cap, Rng& rng) {
  DimensionTree tree = build_tree(k);
  std::vector<Index> rank(static_cast<std::size_t>(tree.size()), 0);
  std::vector<Matrix> frames(static_cast<std::size_t>(tree.size()));
  for (int i : tree.postorder()) {
    const auto& node = tree.node(i);
    const int s = static_cast<int>(node.modes.size());
    Index r = i == 0 ? 1 : capped_rank(cap, n, s, k - s);
    if (node.is_leaf()) {
      frames[static_cast<std::size_t>(i)] = rng.uniform_matrix(n, r);
    } else {
      const Index rl = rank[static_cast<std::size_t>(node.left)];
      const Index rr = rank[static_cast<std::size_t>(node.right)];
      r = std::min(r, rl * rr);
      frames[static_cast<std::size_t>(i)] = rng.uniform_matrix(rl * rr, r);
    }
    rank[static_cast<std::size_t>(i)] = r;
  }
  return HTucker(std::move(tree), std::move(frames));
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

Tensor symmetrize(const Tensor& t) {
  if (!t.is_cubical()) throw ShapeError("symmetrize: tensor must be cubical");
  std::map<std::vector<Index>, std::pair<double, int>> classes;
  std::vector<Index> idx(t.dims().size(), 0), key;
  Index flat = 0;
  do {
    key = idx;
    std::sort(key.begin(), key.end());
    auto& [sum, count] = classes[key];
    sum += t.values()(flat++);
    ++count;
  } while (detail::advance(idx, t.dims()));
  Tensor out(t.dims());
  std::fill(idx.begin(), idx.end(), 0);
  flat = 0;
  do {
    key = idx;
    std::sort(key.begin(), key.end());
    const auto& [sum, count] = classes[key];
    out.values()(flat++) = sum / count;
  } while (detail::advance(idx, t.dims()));
  return out;
}

Instance gen_instance(Scheme scheme, Index n, int k, Index rank_cap, std::uint64_t seed) {
  if (rank_cap < 1) throw ArgumentError("gen_instance: rank_cap must be >= 1");
  if (n < 1 || k < 2) throw ArgumentError("gen_instance: need n >= 1 and k >= 2");
  if (saturating_pow(n, k) > kMaxDenseEntries)
    throw ScaleError("gen_instance: n^k = " + std::to_string(n) + "^" + std::to_string(k) +
                     " exceeds " + std::to_string(kMaxDenseEntries) + " entries");
  Rng rng(seed);
  Instance inst;
  inst.scheme = scheme;
  inst.seed = seed;
  const DimensionTree tree = build_tree(k);
  switch (scheme) {
    case Scheme::kSymmetric: {
      Tensor t = Tensor::cubical(n, k);
      for (Index i = 0; i < t.size(); ++i) t.values()(i) = rng.uniform(-1.0, 1.0);
      inst.full = symmetrize(t);
      inst.tt = tt_decompose(inst.full);
      inst.ht = htd_decompose(inst.full, tree);
      break;
    }
    case Scheme::kLowTt:
      inst.tt = random_tt(n, k, rank_cap, rng);
      inst.full = tt_reconstruct(inst.tt);
      inst.ht = htd_decompose(inst.full, tree);
      break;
    case Scheme::kLowHt:
      inst.ht = random_ht(n, k, rank_cap, rng);
      inst.full = htd_reconstruct(inst.ht);
      inst.tt = tt_decompose(inst.full);
      break;
  }
  return inst;
}

Index param_count(const Instance& inst, Representation r) {
  switch (r) {
    case Representation::kFull: return inst.full.size();
    case Representation::kTt: return tt_param_count(inst.tt);
    case Representation::kHt: return htd_param_count(inst.ht);
  }
  return 0;
}

namespace {

constexpr Representation kAllReprs[] = {Representation::kFull, Representation::kTt,
                                        Representation::kHt};

}  // namespace

std::vector<BenchRecord> memory_report(Index n, const std::vector<int>& k_list,
                                       const std::vector<Scheme>& schemes, Index rank_cap,
                                       std::uint64_t seed) {
  std::vector<BenchRecord> out;
  for (Scheme s : schemes)
    for (int k : k_list) {
      const Instance inst = gen_instance(s, n, k, rank_cap, seed);
      for (Representation r : kAllReprs) {
        BenchRecord rec;
        rec.scheme = s;
        rec.n = n;
        rec.k = k;
        rec.repr = r;
        rec.params = param_count(inst, r);
        rec.seed = seed;
        out.push_back(rec);
      }
    }
  return out;
}

std::vector<BenchRecord> timing_report(const std::vector<Index>& n_list,
                                       const std::vector<int>& k_list,
                                       const std::vector<Scheme>& schemes, Index m,
                                       Index rank_cap, std::uint64_t seed, int repeats) {
  if (repeats < 1) throw ArgumentError("timing_report: repeats must be >= 1");
  if (m < 1) throw ArgumentError("timing_report: m must be >= 1");
  using Clock = std::chrono::steady_clock;
  std::vector<BenchRecord> out;
  for (Scheme s : schemes)
    for (Index n : n_list)
      for (int k : k_list) {
        Instance inst;
        try {
          inst = gen_instance(s, n, k, rank_cap, seed);
        } catch (const ScaleError&) {
          continue;
        }
        Rng rng(seed ^ 0xB0B0B0B0ULL);
        const Matrix b = rng.uniform_matrix(n, m);
        std::vector<BenchRecord> recs;
        for (Representation r : kAllReprs) {
          std::vector<double> times;
          Index rank = 0;
          for (int rep = 0; rep < repeats; ++rep) {
            const auto start = Clock::now();
            ControllabilityResult res;
            switch (r) {
              case Representation::kFull: res = controllability_full(inst.full, b); break;
              case Representation::kTt: res = controllability_tt(inst.tt, b); break;
              case Representation::kHt: res = controllability_ht(inst.ht, b); break;
            }
            times.push_back(std::chrono::duration<double, std::milli>(Clock::now() - start).count());
            rank = res.rank;
          }
          BenchRecord rec;
          rec.scheme = s;
          rec.n = n;
          rec.k = k;
          rec.repr = r;
          rec.params = param_count(inst, r);
          rec.elapsed_ms = median(times);
          rec.rank = rank;
          rec.seed = seed;
          recs.push_back(rec);
        }
        for (const auto& rec : recs)
          if (rec.rank != recs.front().rank)
            throw NumericError("timing_report: representations disagree on the rank for " +
                               to_string(s) + " n=" + std::to_string(n) + " k=" + std::to_string(k));
        out.insert(out.end(), recs.begin(), recs.end());
      }
  return out;
}

std::string bench_csv(const std::vector<BenchRecord>& records) {
  std::string out = "scheme,n,k,repr,params,elapsed_ms,rank,seed\n";
  for (const auto& r : records) {
    out += to_string(r.scheme) + "," + std::to_string(r.n) + "," + std::to_string(r.k) + "," +
           to_string(r.repr) + "," + std::to_string(r.params) + ",";
    if (r.elapsed_ms) out += format_double(*r.elapsed_ms);
    out += ",";
    if (r.rank) out += std::to_string(*r.rank);
    out += "," + std::to_string(r.seed) + "\n";
  }
  return out;
}

}  // namespace hpds
