#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hpds/hier_tucker.hpp"
#include "hpds/hpds_model.hpp"
#include "hpds/tensor.hpp"
#include "hpds/tensor_train.hpp"

namespace hpds {

enum class Scheme { kSymmetric, kLowTt, kLowHt };

std::string to_string(Scheme s);
// Accepts symmetric|sym, low_tt|lowtt, low_ht|lowht.
Scheme parse_scheme(const std::string& s);

// Largest dense instance the generators will build.
inline constexpr Index kMaxDenseEntries = 10'000'000;

struct Instance {
  Scheme scheme = Scheme::kSymmetric;
  std::uint64_t seed = 0;
  Tensor full;
  TensorTrain tt;
  HTucker ht;
};

// Fully symmetric tensor: average over each index multiset.
Tensor symmetrize(const Tensor& t);

// symmetric: uniform entries, symmetrized, then decomposed both ways.
// low_tt: random cores with ranks <= rank_cap, contracted, decomposed to HT.
// low_ht: random frames on the canonical tree with ranks <= rank_cap,
// reconstructed, decomposed to TT.
Instance gen_instance(Scheme scheme, Index n, int k, Index rank_cap, std::uint64_t seed);

struct BenchRecord {
  Scheme scheme = Scheme::kSymmetric;
  Index n = 0;
  int k = 0;
  Representation repr = Representation::kFull;
  Index params = 0;
  std::optional<double> elapsed_ms;
  std::optional<Index> rank;
  std::uint64_t seed = 0;
};

Index param_count(const Instance& inst, Representation r);

std::vector<BenchRecord> memory_report(Index n, const std::vector<int>& k_list,
                                       const std::vector<Scheme>& schemes, Index rank_cap,
                                       std::uint64_t seed);

// Median wall time of `repeats` controllability runs per representation.
// Instances too large to generate are skipped. Throws NumericError when the
// three representations disagree on the rank.
std::vector<BenchRecord> timing_report(const std::vector<Index>& n_list,
                                       const std::vector<int>& k_list,
                                       const std::vector<Scheme>& schemes, Index m,
                                       Index rank_cap, std::uint64_t seed, int repeats);

// Header scheme,n,k,repr,params,elapsed_ms,rank,seed; absent values are empty.
std::string bench_csv(const std::vector<BenchRecord>& records);

}  // namespace hpds
