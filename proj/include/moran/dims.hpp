#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "moran/symbolic.hpp"
#include "moran/system.hpp"
#include "moran/trend.hpp"

namespace moran {

struct NetMeasureTable {
  double s = 0.0;
  std::int64_t k = 1;
  std::int64_t K = 1;            // horizon actually used
  std::int64_t requested_K = 1;  // horizon asked for; larger than K when the budget cut it
  double log_value = 0.0;
  double value = 0.0;
  bool truncated = false;
};

struct TraceEntry {
  double x = 0.0;
  double value = 0.0;
  double slope = 0.0;
  std::string label;
};

struct DimensionReport {
  std::string quantity;  // s_star, s_A, falconer, moran_lower, moran_upper, boxdim_slope
  std::optional<double> estimate;
  double lo = 0.0;
  double hi = 0.0;
  double tolerance = 0.0;
  std::string schedule_kind;
  std::vector<std::vector<double>> schedule;
  std::vector<std::string> flags;
  std::string trace_x = "s";
  std::string trace_value = "log_tail_max";
  std::vector<TraceEntry> trace;
  std::optional<double> dimension_bound;  // estimate clamped to the ambient dimension
  std::vector<Finding> findings;

  bool has_flag(std::string_view flag) const;
  bool indeterminate() const { return has_flag("IndeterminateTrend"); }
};

struct SstarOptions {
  double tol = 0.01;
  std::vector<double> log_eps_schedule;  // strictly decreasing log(eps); empty selects the default
  std::int64_t node_budget = kDefaultNodeBudget;
};

struct SAOptions {
  double tol = 0.01;
  std::vector<std::pair<std::int64_t, std::int64_t>> depth_schedule;  // (k, K); empty selects the default
  std::int64_t node_budget = kDefaultNodeBudget;
};

// Default refinement schedules; see README for the rationale.
std::vector<double> default_sstar_schedule(const SystemSpec& spec);
std::vector<std::pair<std::int64_t, std::int64_t>> default_sa_schedule(const SystemSpec& spec,
                                                                       std::int64_t node_budget);

DimensionReport estimate_sstar(const SystemSpec& spec, const SstarOptions& options = {});
NetMeasureTable net_measure(const SystemSpec& spec, double s, std::int64_t k, std::int64_t K,
                            std::int64_t node_budget = kDefaultNodeBudget);
DimensionReport estimate_sA(const SystemSpec& spec, const SAOptions& options = {});

// Root of the pressure p(s) = lim (sum over Sigma^k of phi^s)^{1/k} for one
// level used at every depth. max_depth = 0 chooses a depth from the budget.
DimensionReport pressure_root(const LevelSpec& level, double tol = 1e-9, std::int64_t max_depth = 0,
                              std::int64_t node_budget = kDefaultNodeBudget);

// d_k for scalar systems: the root of prod_{i<=k} sum_j c_{ij}^d = 1.
double moran_dk(const SystemSpec& spec, std::int64_t k);
// (d_*, d^*) as min and max of d_k over the window [k_max/2, k_max].
std::pair<DimensionReport, DimensionReport> moran_dims(const SystemSpec& spec, std::int64_t k_max = 4096);

}  // namespace moran
