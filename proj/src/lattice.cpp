#include <algorithm>
#include <map>

#include "moran/kernels.hpp"
#include "moran/parallel.hpp"
#include "moran/svf.hpp"

namespace moran::lattice {

namespace {

using StateMap = std::map<CountVector, double>;  // counts -> log multiplicity

struct Eval {
  double log_alpha_m;
  double log_phi;
};

Eval evaluate(const TreeModel& model, const CountVector& c, int m, double s) {
  double log_sv[kMaxDim];
  const auto d = static_cast<std::size_t>(model.dim());
  diagonal_log_sv(model, c, {log_sv, d});
  return {log_sv[m - 1], log_phi_from_log_sv({log_sv, d}, s)};
}

double state_log_phi(const TreeModel& model, const CountVector& c, double s) {
  double log_sv[kMaxDim];
  const auto d = static_cast<std::size_t>(model.dim());
  diagonal_log_sv(model, c, {log_sv, d});
  return log_phi_from_log_sv({log_sv, d}, s);
}

CountVector bump(CountVector c, int id) {
  ++c[id];
  return c;
}

// States reachable at each depth 0..K, or empty when more than cap nodes
// lie above depth K.
std::vector<std::vector<CountVector>> reachable(const TreeModel& model, std::int64_t K, std::int64_t cap) {
  const std::size_t ids = model.diagonal_log_entries().size();
  std::vector<std::vector<CountVector>> levels{{CountVector(ids, 0)}};
  std::int64_t total = 0;
  for (std::int64_t j = 0; j < K; ++j) {
    total += static_cast<std::int64_t>(levels.back().size());
    if (total > cap) return {};
    std::vector<CountVector> next;
    for (const CountVector& c : levels.back())
      for (const MapGroup& g : model.groups(j + 1)) next.push_back(bump(c, g.diagonal_id));
    std::sort(next.begin(), next.end());
    next.erase(std::unique(next.begin(), next.end()), next.end());
    levels.push_back(std::move(next));
  }
  return levels;
}

}  // namespace

CutSetResult cutset(const TreeModel& model, double s, double log_eps, std::int64_t node_budget) {
  const int m = cut_index(s, model.dim());
  const std::size_t ids = model.diagonal_log_entries().size();
  CutSetResult r;
  PairwiseLogSum sum;
  StateMap frontier{{CountVector(ids, 0), 0.0}};
  std::int64_t depth = 0;
  while (!frontier.empty()) {
    StateMap next;
    for (const auto& [c, log_mult] : frontier) {
      if (depth > 0) {
        const Eval ev = evaluate(model, c, m, s);
        if (at_or_below(ev.log_alpha_m, log_eps)) {
          sum.add(log_mult + ev.log_phi);
          ++r.entry_count;
          continue;
        }
      }
      if (r.nodes_expanded >= node_budget) {
        r.truncated = true;
        r.log_sum = sum.result();
        return r;
      }
      ++r.nodes_expanded;
      for (const MapGroup& g : model.groups(depth + 1)) {
        auto [it, inserted] = next.try_emplace(bump(c, g.diagonal_id), log_mult + g.log_multiplicity);
        if (!inserted) it->second = log_add(it->second, log_mult + g.log_multiplicity);
      }
    }
    frontier = std::move(next);
    ++depth;
  }
  r.log_sum = sum.result();
  return r;
}

std::int64_t internal_nodes(const TreeModel& model, std::int64_t K, std::int64_t cap) {
  const auto levels = reachable(model, K, cap);
  if (levels.empty()) return cap + 1;
  std::int64_t total = 0;
  for (std::int64_t j = 0; j < K; ++j) total += static_cast<std::int64_t>(levels[j].size());
  return total;
}

std::int64_t max_horizon(const TreeModel& model, std::int64_t node_budget, std::int64_t depth_cap) {
  std::vector<CountVector> level{CountVector(model.diagonal_log_entries().size(), 0)};
  std::int64_t total = 0;
  for (std::int64_t j = 0; j < depth_cap; ++j) {
    total += static_cast<std::int64_t>(level.size());
    if (total > node_budget) return j;
    std::vector<CountVector> next;
    for (const CountVector& c : level)
      for (const MapGroup& g : model.groups(j + 1)) next.push_back(bump(c, g.diagonal_id));
    std::sort(next.begin(), next.end());
    next.erase(std::unique(next.begin(), next.end()), next.end());
    level = std::move(next);
  }
  return depth_cap;
}

double net_measure(const TreeModel& model, double s, std::int64_t k, std::int64_t K) {
  const auto levels = reachable(model, K, std::numeric_limits<std::int64_t>::max() / 2);
  std::map<CountVector, double> below;
  for (const CountVector& c : levels[K]) below.emplace(c, state_log_phi(model, c, s));
  for (std::int64_t j = K - 1; j >= 0; --j) {
    std::map<CountVector, double> here;
    for (const CountVector& c : levels[j]) {
      double acc = kNegInf;
      for (const MapGroup& g : model.groups(j + 1)) {
        acc = log_add(acc, g.log_multiplicity + below.at(bump(c, g.diagonal_id)));
      }
      if (j >= k) acc = std::min(state_log_phi(model, c, s), acc);
      here.emplace(c, acc);
    }
    below = std::move(here);
  }
  return below.begin()->second;
}

std::vector<double> level_sums(const TreeModel& model, double s, std::int64_t K) {
  const std::size_t ids = model.diagonal_log_entries().size();
  std::vector<double> out(K + 1);
  StateMap frontier{{CountVector(ids, 0), 0.0}};
  out[0] = 0.0;
  for (std::int64_t j = 1; j <= K; ++j) {
    StateMap next;
    for (const auto& [c, log_mult] : frontier) {
      for (const MapGroup& g : model.groups(j)) {
        auto [it, inserted] = next.try_emplace(bump(c, g.diagonal_id), log_mult + g.log_multiplicity);
        if (!inserted) it->second = log_add(it->second, log_mult + g.log_multiplicity);
      }
    }
    PairwiseLogSum sum;
    for (const auto& [c, log_mult] : next) sum.add(log_mult + state_log_phi(model, c, s));
    out[j] = sum.result();
    frontier = std::move(next);
  }
  return out;
}

}  // namespace moran::lattice
