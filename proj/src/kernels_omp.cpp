#include <omp.h>

#include <algorithm>

#include "kernel_nodes.hpp"
#include "moran/kernels.hpp"
#include "moran/parallel.hpp"

namespace moran::omp_kernels {

using detail::Frame;

namespace {

// Work is split into subtree tasks along a frontier chosen from the tree shape
// only, so results never depend on the number of threads.
constexpr std::size_t kMinTasks = 256;
constexpr int kMaxFrontierRounds = 64;

struct Task {
  Frame frame;
  std::vector<std::uint32_t> word;
  bool stopped = false;
  double log_phi = 0.0;
  std::int64_t preceding = 0;  // ancestor expansions between the previous task and this one
};

struct TaskResult {
  PairwiseLogSum sum;
  std::int64_t entries = 0;
  std::int64_t expanded = 0;
  bool truncated = false;
  std::vector<CutEntry> collected;
};

std::size_t common_prefix_length(const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b) {
  std::size_t n = 0;
  while (n < a.size() && n < b.size() && a[n] == b[n]) ++n;
  return n;
}

// Depth-first cut-set walk below one task node with its own budget.
TaskResult run_task(const TreeModel& model, const Task& task, int m, double s, double log_eps, std::int64_t budget,
                    bool collect) {
  TaskResult r;
  const auto base = static_cast<std::int64_t>(task.word.size());
  if (task.stopped) {
    r.sum.add(task.frame.log_mult + task.log_phi);
    r.entries = 1;
    if (collect) r.collected.push_back({Word{task.word}, base, task.log_phi, task.frame.log_mult});
    return r;
  }
  if (budget <= 0) {
    r.truncated = true;
    return r;
  }
  r.expanded = 1;
  std::vector<Frame> stack{task.frame};
  stack.back().next = 0;
  std::vector<std::uint32_t> word = task.word;
  while (!stack.empty()) {
    const auto depth = base + static_cast<std::int64_t>(stack.size()) - 1;
    const auto& groups = model.groups(depth + 1);
    Frame& top = stack.back();
    if (top.next == groups.size()) {
      stack.pop_back();
      word.pop_back();
      continue;
    }
    Frame child;
    detail::child_of(top, groups[top.next++], child);
    word.push_back(child.digit);
    const auto ev = detail::evaluate(child.product, m, s);
    if (at_or_below(ev.log_alpha_m, log_eps)) {
      r.sum.add(child.log_mult + ev.log_phi);
      ++r.entries;
      if (collect) r.collected.push_back({Word{word}, depth + 1, ev.log_phi, child.log_mult});
      word.pop_back();
      continue;
    }
    if (r.expanded >= budget) {
      r.truncated = true;
      break;
    }
    ++r.expanded;
    stack.push_back(std::move(child));
  }
  return r;
}

std::vector<Task> cutset_frontier(const TreeModel& model, int m, double s, double log_eps) {
  std::vector<Task> items(1);
  items[0].frame = detail::root_frame(model.dim());
  for (int round = 0; round < kMaxFrontierRounds; ++round) {
    const auto open = std::count_if(items.begin(), items.end(), [](const Task& t) { return !t.stopped; });
    if (open == 0 || static_cast<std::size_t>(open) >= kMinTasks) break;
    std::vector<Task> next;
    for (Task& item : items) {
      if (item.stopped) {
        next.push_back(std::move(item));
        continue;
      }
      for (const MapGroup& g : model.groups(static_cast<std::int64_t>(item.word.size()) + 1)) {
        Task child;
        detail::child_of(item.frame, g, child.frame);
        child.word = item.word;
        child.word.push_back(g.first_digit);
        const auto ev = detail::evaluate(child.frame.product, m, s);
        child.stopped = at_or_below(ev.log_alpha_m, log_eps);
        child.log_phi = ev.log_phi;
        next.push_back(std::move(child));
      }
    }
    items = std::move(next);
  }
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto depth = static_cast<std::int64_t>(items[i].word.size());
    items[i].preceding =
        i == 0 ? depth : depth - static_cast<std::int64_t>(common_prefix_length(items[i - 1].word, items[i].word)) - 1;
  }
  return items;
}

// Subtree value of the net-measure program for a node at depth `base`.
double subtree_net_measure(const TreeModel& model, const Frame& start, std::int64_t base, double s, std::int64_t k,
                           std::int64_t K) {
  if (base == K) return detail::node_log_phi(start.product, s);
  std::vector<Frame> stack{start};
  stack.back().next = 0;
  stack.back().acc = kNegInf;
  double result = kNegInf;
  while (!stack.empty()) {
    const auto depth = base + static_cast<std::int64_t>(stack.size()) - 1;
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

// Smallest depth <= K whose level holds at least kMinTasks grouped nodes.
std::int64_t frontier_depth(const TreeModel& model, std::int64_t K) {
  std::size_t width = 1;
  for (std::int64_t j = 0; j < K; ++j) {
    if (width >= kMinTasks) return j;
    width *= model.group_count(j + 1);
  }
  return K;
}

void collect_frontier(const TreeModel& model, const Frame& f, std::int64_t depth, std::int64_t target,
                      std::vector<Frame>& out) {
  if (depth == target) {
    out.push_back(f);
    return;
  }
  for (const MapGroup& g : model.groups(depth + 1)) {
    Frame child;
    detail::child_of(f, g, child);
    collect_frontier(model, child, depth + 1, target, out);
  }
}

double recombine(const TreeModel& model, const Frame& f, std::int64_t depth, std::int64_t target, double s,
                 std::int64_t k, const std::vector<double>& values, std::size_t& next) {
  if (depth == target) return values[next++];
  double acc = kNegInf;
  for (const MapGroup& g : model.groups(depth + 1)) {
    Frame child;
    detail::child_of(f, g, child);
    acc = log_add(acc, g.log_multiplicity + recombine(model, child, depth + 1, target, s, k, values, next));
  }
  if (depth >= k) acc = std::min(detail::node_log_phi(f.product, s), acc);
  return acc;
}

void level_sums_below(const TreeModel& model, const Frame& start, std::int64_t base, double s, std::int64_t K,
                      std::vector<PairwiseLogSum>& sums) {
  std::vector<Frame> stack{start};
  stack.back().next = 0;
  while (!stack.empty()) {
    const auto depth = base + static_cast<std::int64_t>(stack.size()) - 1;
    Frame& top = stack.back();
    if (depth == K || top.next == model.groups(depth + 1).size()) {
      stack.pop_back();
      continue;
    }
    Frame child;
    detail::child_of(top, model.groups(depth + 1)[top.next++], child);
    sums[depth + 1 - base].add(child.log_mult + detail::node_log_phi(child.product, s));
    stack.push_back(std::move(child));
  }
}

}  // namespace

CutSetResult cutset(const TreeModel& model, double s, double log_eps, std::int64_t node_budget, bool collect) {
  const int m = cut_index(s, model.dim());
  const std::vector<Task> tasks = cutset_frontier(model, m, s, log_eps);
  const int threads = thread_count();
  const auto n = static_cast<std::int64_t>(tasks.size());

  CutSetResult r;
  std::vector<double> partial_sums;
  std::int64_t used = 0;
  bool done = false;
  // Tasks run in waves of `threads`, each capped by the budget left at the
  // start of the wave; the ordered scan below then replays the serial
  // preorder budget rule exactly.
  for (std::int64_t wave = 0; wave < n && !done; wave += threads) {
    const std::int64_t end = std::min(n, wave + threads);
    const std::int64_t cap = node_budget - used;
    std::vector<TaskResult> results(end - wave);
#pragma omp parallel for num_threads(threads) schedule(dynamic, 1)
    for (std::int64_t i = wave; i < end; ++i) {
      results[i - wave] = run_task(model, tasks[i], m, s, log_eps, cap, collect);
    }
    for (std::int64_t i = wave; i < end; ++i) {
      const Task& task = tasks[i];
      if (used + task.preceding > node_budget) {
        r.truncated = true;
        used = node_budget;
        done = true;
        break;
      }
      used += task.preceding;
      TaskResult res = std::move(results[i - wave]);
      if (res.truncated || used + res.expanded > node_budget) {
        res = run_task(model, task, m, s, log_eps, node_budget - used, collect);
        if (res.truncated) done = true;
      }
      used += res.expanded;
      r.entry_count += res.entries;
      partial_sums.push_back(res.sum.result());
      if (collect) {
        r.entries.insert(r.entries.end(), std::make_move_iterator(res.collected.begin()),
                         std::make_move_iterator(res.collected.end()));
      }
      if (done) {
        r.truncated = true;
        break;
      }
    }
  }
  r.nodes_expanded = used;
  r.log_sum = pairwise_log_sum(partial_sums);
  return r;
}

double net_measure(const TreeModel& model, double s, std::int64_t k, std::int64_t K) {
  const std::int64_t target = frontier_depth(model, K);
  std::vector<Frame> frontier;
  const Frame root = detail::root_frame(model.dim());
  collect_frontier(model, root, 0, target, frontier);
  std::vector<double> values(frontier.size());
  const auto n = static_cast<std::int64_t>(frontier.size());
#pragma omp parallel for num_threads(thread_count()) schedule(dynamic, 1)
  for (std::int64_t i = 0; i < n; ++i) {
    values[i] = subtree_net_measure(model, frontier[i], target, s, k, K);
  }
  std::size_t next = 0;
  return recombine(model, root, 0, target, s, k, values, next);
}

std::vector<double> level_sums(const TreeModel& model, double s, std::int64_t K) {
  const std::int64_t target = frontier_depth(model, K);
  std::vector<PairwiseLogSum> top(target + 1);
  std::vector<Frame> frontier;
  // Top levels in preorder, then the frontier nodes themselves.
  {
    std::vector<Frame> stack{detail::root_frame(model.dim())};
    top[0].add(0.0);
    while (!stack.empty()) {
      const auto depth = static_cast<std::int64_t>(stack.size()) - 1;
      Frame& f = stack.back();
      if (depth == target || f.next == model.groups(depth + 1).size()) {
        stack.pop_back();
        continue;
      }
      Frame child;
      detail::child_of(f, model.groups(depth + 1)[f.next++], child);
      top[depth + 1].add(child.log_mult + detail::node_log_phi(child.product, s));
      if (depth + 1 == target) frontier.push_back(child);
      else stack.push_back(std::move(child));
    }
  }
  if (target == 0) frontier.push_back(detail::root_frame(model.dim()));
  const auto n = static_cast<std::int64_t>(frontier.size());
  std::vector<std::vector<PairwiseLogSum>> below(n, std::vector<PairwiseLogSum>(K - target + 1));
#pragma omp parallel for num_threads(thread_count()) schedule(dynamic, 1)
  for (std::int64_t i = 0; i < n; ++i) level_sums_below(model, frontier[i], target, s, K, below[i]);

  std::vector<double> out(K + 1);
  for (std::int64_t j = 0; j <= target; ++j) out[j] = top[j].result();
  std::vector<double> parts(n);
  for (std::int64_t j = target + 1; j <= K; ++j) {
    for (std::int64_t i = 0; i < n; ++i) parts[i] = below[i][j - target].result();
    out[j] = pairwise_log_sum(parts);
  }
  return out;
}

}  // namespace moran::omp_kernels
