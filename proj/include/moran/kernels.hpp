#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "moran/tree.hpp"

namespace moran {

struct CutSetResult {
  double log_sum = -std::numeric_limits<double>::infinity();
  std::int64_t entry_count = 0;
  std::int64_t nodes_expanded = 0;
  bool truncated = false;
  std::vector<CutEntry> entries;  // only when collected
};

// Tree kernels over the grouped level tree of a TreeModel. They work for any
// mode (chain and diagonal models are treated as plain group trees).
//
// cutset: depth-first from the root, emitting the first words with
// alpha_m(T_u) <= exp(log_eps); at most `node_budget` internal nodes are
// expanded, counted in depth-first preorder.
//
// net_measure: log of the net-measure value for covers with depths in [k, K].
//
// level_sums: log sum over Sigma^j of phi^s(T_u) for j = 0..K.
namespace omp_kernels {
CutSetResult cutset(const TreeModel& model, double s, double log_eps, std::int64_t node_budget, bool collect);
double net_measure(const TreeModel& model, double s, std::int64_t k, std::int64_t K);
std::vector<double> level_sums(const TreeModel& model, double s, std::int64_t K);
}  // namespace omp_kernels

// Serial implementations used as the reference in tests and benchmarks.
namespace reference {
CutSetResult cutset(const TreeModel& model, double s, double log_eps, std::int64_t node_budget, bool collect);
double net_measure(const TreeModel& model, double s, std::int64_t k, std::int64_t K);
std::vector<double> level_sums(const TreeModel& model, double s, std::int64_t K);
}  // namespace reference

// Exact aggregated kernels for diagonal-mode models: nodes are count vectors
// of the distinct diagonal maps, merged across words with equal products.
namespace lattice {
CutSetResult cutset(const TreeModel& model, double s, double log_eps, std::int64_t node_budget);
// Number of lattice nodes above depth K, saturating at cap + 1.
std::int64_t internal_nodes(const TreeModel& model, std::int64_t K, std::int64_t cap);
double net_measure(const TreeModel& model, double s, std::int64_t k, std::int64_t K);
std::vector<double> level_sums(const TreeModel& model, double s, std::int64_t K);
// Largest K <= depth_cap with at most node_budget lattice nodes above depth K.
std::int64_t max_horizon(const TreeModel& model, std::int64_t node_budget, std::int64_t depth_cap);
}  // namespace lattice

// Branch index used for the stopping rule: ceil(s), capped at the dimension.
int cut_index(double s, int dim);

}  // namespace moran
