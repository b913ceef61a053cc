#include "moran/tree.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "moran/error.hpp"
#include "moran/svf.hpp"

namespace moran {

TreeModel::TreeModel(const SystemSpec& spec, bool aggregate) : spec_(&spec), aggregate_(aggregate) {
  std::vector<Matrix> distinct_diag;
  const bool all_diagonal = spec.is_diagonal();
  bool single_group = true;
  for (const LevelSpec& level : spec.schedule.levels) {
    std::vector<MapGroup> groups;
    for (std::size_t j = 0; j < level.maps.size(); ++j) {
      const Matrix& t = level.maps[j];
      auto same = std::find_if(groups.begin(), groups.end(), [&](const MapGroup& g) { return g.map == t; });
      if (aggregate && same != groups.end()) {
        ++same->count;
        continue;
      }
      MapGroup g;
      g.map = t;
      g.log_abs_det = std::log(std::abs(determinant(t)));
      g.first_digit = static_cast<std::uint32_t>(j + 1);
      groups.push_back(g);
    }
    for (MapGroup& g : groups) {
      g.log_multiplicity = std::log(static_cast<double>(g.count));
      if (all_diagonal) {
        auto it = std::find(distinct_diag.begin(), distinct_diag.end(), g.map);
        g.diagonal_id = static_cast<int>(it - distinct_diag.begin());
        if (it == distinct_diag.end()) distinct_diag.push_back(g.map);
      }
    }
    single_group = single_group && groups.size() == 1;
    groups_.push_back(std::move(groups));
  }
  if (!aggregate) {
    mode_ = TreeMode::enumerate;
  } else if (single_group) {
    mode_ = TreeMode::chain;
  } else if (all_diagonal) {
    mode_ = TreeMode::diagonal;
  } else {
    mode_ = TreeMode::enumerate;
  }
  for (const Matrix& m : distinct_diag) {
    std::vector<double> entries;
    for (int i = 0; i < m.dim(); ++i) entries.push_back(std::log(std::abs(m(i, i))));
    diagonal_log_entries_.push_back(std::move(entries));
  }
}

std::int64_t TreeModel::internal_nodes(std::int64_t K, std::int64_t cap) const {
  std::int64_t total = 0;
  std::int64_t width = 1;
  for (std::int64_t j = 0; j < K; ++j) {
    total += width;
    if (total > cap) return cap + 1;
    const auto g = static_cast<std::int64_t>(group_count(j + 1));
    if (width > (cap + 1) / g + 1) width = cap + 1;
    else width *= g;
  }
  return total;
}

ChainProfile::ChainProfile(const TreeModel& model, std::int64_t max_depth)
    : max_depth_(max_depth), dim_(model.dim()) {
  if (model.mode() != TreeMode::chain) throw Error(ErrorCode::NotApplicable, "chain profile needs one map per level");
  log_count_.resize(max_depth + 1);
  log_sv_.resize((max_depth + 1) * dim_);
  ScaledMatrix product = ScaledMatrix::identity(dim_);
  log_count_[0] = 0.0;
  std::fill_n(log_sv_.begin(), dim_, 0.0);
  double log_count = 0.0;
  for (std::int64_t k = 1; k <= max_depth; ++k) {
    const MapGroup& g = model.groups(k).front();
    log_count += g.log_multiplicity;
    product.right_multiply(g.map, g.log_abs_det);
    log_count_[k] = log_count;
    product.log_singular_values({log_sv_.data() + k * dim_, static_cast<std::size_t>(dim_)});
  }
}

double ChainProfile::log_phi(std::int64_t k, double s) const {
  return log_phi_from_log_sv({log_sv_.data() + k * dim_, static_cast<std::size_t>(dim_)}, s);
}

std::int64_t ChainProfile::cut_depth(int m, double log_eps) const {
  // alpha_m of the common product is strictly decreasing in depth.
  if (!at_or_below(log_sv(max_depth_, m - 1), log_eps)) return -1;
  std::int64_t lo = 0, hi = max_depth_;
  while (hi - lo > 1) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    if (at_or_below(log_sv(mid, m - 1), log_eps)) hi = mid;
    else lo = mid;
  }
  return hi;
}

void diagonal_log_sv(const TreeModel& model, const CountVector& counts, std::span<double> out) {
  const auto& entries = model.diagonal_log_entries();
  const int d = model.dim();
  std::fill(out.begin(), out.begin() + d, 0.0);
  for (std::size_t g = 0; g < counts.size(); ++g) {
    if (counts[g] == 0) continue;
    for (int i = 0; i < d; ++i) out[i] += counts[g] * entries[g][i];
  }
  std::sort(out.begin(), out.begin() + d, std::greater<>());
}

}  // namespace moran
