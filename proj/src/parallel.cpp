#include "moran/parallel.hpp"

#include <omp.h>

#include <cstdlib>
#include <string>
#include <thread>

namespace moran {

void PairwiseLogSum::add(double log_value) {
  ++count_;
  double carry = log_value;
  for (std::size_t level = 0;; ++level) {
    if (level == partial_.size()) {
      partial_.push_back(carry);
      occupied_.push_back(1);
      return;
    }
    if (!occupied_[level]) {
      partial_[level] = carry;
      occupied_[level] = 1;
      return;
    }
    carry = log_add(partial_[level], carry);
    occupied_[level] = 0;
  }
}

void PairwiseLogSum::merge_ordered(const PairwiseLogSum& later) {
  if (later.count_ == 0) return;
  add(later.result());
  count_ += later.count_ - 1;
}

double PairwiseLogSum::result() const {
  double acc = kNegInf;
  for (std::size_t level = 0; level < partial_.size(); ++level) {
    if (occupied_[level]) acc = log_add(partial_[level], acc);
  }
  return acc;
}

double pairwise_log_sum(std::span<const double> log_values) {
  if (log_values.empty()) return kNegInf;
  if (log_values.size() == 1) return log_values[0];
  const std::size_t half = log_values.size() / 2;
  return log_add(pairwise_log_sum(log_values.first(half)),
                 pairwise_log_sum(log_values.subspan(half)));
}

namespace {

int default_threads() {
  if (const char* env = std::getenv("MORAN_DIM_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return n;
    } catch (...) {
    }
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

int g_threads = 0;

}  // namespace

int thread_count() {
  if (g_threads <= 0) g_threads = default_threads();
  return g_threads;
}

void set_thread_count(int n) {
  g_threads = n > 0 ? n : default_threads();
  omp_set_num_threads(g_threads);
}

}  // namespace moran
