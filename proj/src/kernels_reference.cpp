#include <algorithm>

#include "kernel_nodes.hpp"
#include "moran/kernels.hpp"
#include "moran/parallel.hpp"

namespace moran {

using detail::Frame;

int cut_index(double s, int dim) { return std::clamp(branch_index(s), 1, dim); }

namespace reference {

CutSetResult cutset(const TreeModel& model, double s, double log_eps, std::int64_t node_budget, bool collect) {
  const int m = cut_index(s, model.dim());
  CutSetResult r;
  PairwiseLogSum sum;
  std::vector<Frame> stack;
  std::vector<std::uint32_t> word;

  // 0: emitted as a cut-set entry, 1: expand, -1: budget exhausted.
  auto enter = [&](const Frame& f, std::int64_t depth) {
    if (depth > 0) {
      const auto ev = detail::evaluate(f.product, m, s);
      if (at_or_below(ev.log_alpha_m, log_eps)) {
        sum.add(f.log_mult + ev.log_phi);
        ++r.entry_count;
        if (collect) r.entries.push_back({Word{word}, depth, ev.log_phi, f.log_mult});
        return 0;
      }
    }
    if (r.nodes_expanded >= node_budget) {
      r.truncated = true;
      return -1;
    }
    ++r.nodes_expanded;
    return 1;
  };

  stack.push_back(detail::root_frame(model.dim()));
  if (enter(stack.back(), 0) < 0) stack.clear();
  while (!stack.empty()) {
    const auto depth = static_cast<std::int64_t>(stack.size()) - 1;
    const auto& groups = model.groups(depth + 1);
    Frame& top = stack.back();
    if (top.next == groups.size()) {
      stack.pop_back();
      if (!word.empty()) word.pop_back();
      continue;
    }
    Frame child;
    detail::child_of(top, groups[top.next++], child);
    word.push_back(child.digit);
    const int status = enter(child, depth + 1);
    if (status < 0) break;
    if (status == 0) {
      word.pop_back();
      continue;
    }
    stack.push_back(std::move(child));
  }
  r.log_sum = sum.result();
  return r;
}

double net_measure(const TreeModel& model, double s, std::int64_t k, std::int64_t K) {
  std::vector<Frame> stack;
  stack.push_back(detail::root_frame(model.dim()));
  if (K == 0) return detail::node_log_phi(stack.back().product, s);
  double result = kNegInf;
  while (!stack.empty()) {
    const auto depth = static_cast<std::int64_t>(stack.size()) - 1;
    const auto& groups = model.groups(depth + 1);
    Frame& top = stack.back();
    if (top.next == groups.size()) {
      double v = top.acc;
      if (depth >= k) v = std::min(detail::node_log_phi(top.product, s), v);
      const double weight = top.group_log_mult;
      stack.pop_back();
      if (stack.empty()) result = v;
      else stack.back().acc = log_add(stack.back().acc, weight + v);
      continue;
    }
    const MapGroup& g = groups[top.next++];
    Frame child;
    detail::child_of(top, g, child);
    if (depth + 1 == K) {
      top.acc = log_add(top.acc, g.log_multiplicity + detail::node_log_phi(child.product, s));
      continue;
    }
    stack.push_back(std::move(child));
  }
  return result;
}

std::vector<double> level_sums(const TreeModel& model, double s, std::int64_t K) {
  std::vector<PairwiseLogSum> sums(K + 1);
  std::vector<Frame> stack;
  stack.push_back(detail::root_frame(model.dim()));
  sums[0].add(0.0);
  while (!stack.empty()) {
    const auto depth = static_cast<std::int64_t>(stack.size()) - 1;
    Frame& top = stack.back();
    if (depth == K || top.next == model.groups(depth + 1).size()) {
      stack.pop_back();
      continue;
    }
    Frame child;
    detail::child_of(top, model.groups(depth + 1)[top.next++], child);
    sums[depth + 1].add(child.log_mult + detail::node_log_phi(child.product, s));
    stack.push_back(std::move(child));
  }
  std::vector<double> out(K + 1);
  for (std::int64_t j = 0; j <= K; ++j) out[j] = sums[j].result();
  return out;
}

}  // namespace reference
}  // namespace moran
