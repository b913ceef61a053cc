#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace moran {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log(exp(a) + exp(b)) without overflow; -inf is the additive identity.
inline double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = a > b ? a : b;
  const double lo = a > b ? b : a;
  return hi + std::log1p(std::exp(lo - hi));
}

// Streaming pairwise summation in the log domain. Values are combined along a
// fixed binary tree determined only by insertion order, so the result is
// reproducible for a given sequence.
class PairwiseLogSum {
 public:
  void add(double log_value);
  void merge_ordered(const PairwiseLogSum& later);
  double result() const;
  std::int64_t count() const { return count_; }

 private:
  std::vector<double> partial_;
  std::vector<char> occupied_;
  std::int64_t count_ = 0;
};

// Pairwise log-sum over an already materialized sequence.
double pairwise_log_sum(std::span<const double> log_values);

// Thread count actually used by the OpenMP kernels.
int thread_count();
// n <= 0 restores the default (MORAN_DIM_THREADS, else hardware concurrency).
void set_thread_count(int n);

// SplitMix64 finalizer; the building block for all counter-based seeding.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline double to_unit_double(std::uint64_t x) {
  return static_cast<double>(x >> 11) * 0x1.0p-53;
}

// Small counter-based generator: a pure function of its seed.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
  double uniform() { return to_unit_double(next()); }
  // Uniform integer in [0, n).
  std::uint32_t below(std::uint32_t n) {
    return static_cast<std::uint32_t>((static_cast<unsigned __int128>(next()) * n) >> 64);
  }

 private:
  std::uint64_t state_;
};

}  // namespace moran
