#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "moran/linalg.hpp"
#include "moran/system.hpp"

namespace moran {

// A finite word u = u_1 ... u_k with 1-based digits.
struct Word {
  std::vector<std::uint32_t> digits;

  std::size_t size() const { return digits.size(); }
  bool empty() const { return digits.empty(); }
  friend bool operator==(const Word&, const Word&) = default;
  friend auto operator<=>(const Word&, const Word&) = default;
};

// A set of children of one level sharing an identical map. The children are
// represented by the first digit of the group; log_multiplicity = log(count).
struct MapGroup {
  Matrix map;
  double log_abs_det = 0.0;
  double log_multiplicity = 0.0;
  std::uint32_t first_digit = 1;
  std::uint32_t count = 1;
  int diagonal_id = -1;  // index into TreeModel::diagonal_maps in diagonal mode
};

enum class TreeMode {
  chain,      // one distinct map per level: every word of a depth has the same product
  diagonal,   // commuting diagonal maps: products depend only on how often each map occurs
  enumerate,  // general depth-first enumeration over map groups
};

// Stopping test alpha <= eps in the log domain. Values equal up to rounding
// accumulated along a product count as a tie, and ties stop.
inline bool at_or_below(double log_alpha, double log_eps) {
  const double slack = 1e-11 * (1.0 + (log_eps < 0 ? -log_eps : log_eps));
  return log_alpha <= log_eps + slack;
}

// One emitted element of a cut-set. With aggregation the word is the
// representative of log_multiplicity words sharing the same product.
struct CutEntry {
  Word word;
  std::int64_t depth = 0;
  double log_phi = 0.0;
  double log_multiplicity = 0.0;
};

// Level structure of a system prepared for tree traversal.
class TreeModel {
 public:
  // With aggregate = false every child is its own group and mode() is enumerate.
  explicit TreeModel(const SystemSpec& spec, bool aggregate = true);
  // The model keeps a pointer to the spec, so temporaries are refused.
  explicit TreeModel(SystemSpec&&, bool = true) = delete;

  const SystemSpec& spec() const { return *spec_; }
  TreeMode mode() const { return mode_; }
  bool aggregated() const { return aggregate_; }
  int dim() const { return spec_->dim; }

  const std::vector<MapGroup>& groups(std::int64_t k) const { return groups_[spec_->schedule.level_index(k)]; }
  // Number of groups (not children) at level k.
  std::size_t group_count(std::int64_t k) const { return groups(k).size(); }

  // Distinct diagonal maps across all levels (diagonal mode only), stored as
  // logs of the absolute diagonal entries.
  const std::vector<std::vector<double>>& diagonal_log_entries() const { return diagonal_log_entries_; }

  // Number of internal nodes of the grouped tree above depth K, saturating at
  // `cap` + 1.
  std::int64_t internal_nodes(std::int64_t K, std::int64_t cap) const;

 private:
  const SystemSpec* spec_;
  bool aggregate_;
  TreeMode mode_ = TreeMode::enumerate;
  std::vector<std::vector<MapGroup>> groups_;
  std::vector<std::vector<double>> diagonal_log_entries_;
};

// Per-depth data for chain mode: log #words and log singular values of the
// common product at every depth 0..max_depth.
class ChainProfile {
 public:
  ChainProfile(const TreeModel& model, std::int64_t max_depth);

  std::int64_t max_depth() const { return max_depth_; }
  int dim() const { return dim_; }
  double log_count(std::int64_t k) const { return log_count_[k]; }
  double log_sv(std::int64_t k, int i) const { return log_sv_[k * dim_ + i]; }
  double log_phi(std::int64_t k, double s) const;
  // log sum over Sigma^k of phi^s(T_u).
  double log_level_sum(std::int64_t k, double s) const { return log_count(k) + log_phi(k, s); }
  // First depth with log alpha_m <= log_eps, or -1 if none up to max_depth.
  std::int64_t cut_depth(int m, double log_eps) const;

 private:
  std::int64_t max_depth_;
  int dim_;
  std::vector<double> log_count_;
  std::vector<double> log_sv_;
};

// Node of a diagonal-mode lattice: how often each distinct diagonal map occurs.
using CountVector = std::vector<std::uint32_t>;

// Log singular values (descending) of the diagonal product described by counts.
void diagonal_log_sv(const TreeModel& model, const CountVector& counts, std::span<double> out);

}  // namespace moran
