#include "moran/dims.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "moran/error.hpp"
#include "moran/kernels.hpp"
#include "moran/parallel.hpp"
#include "moran/svf.hpp"
#include "moran/tree.hpp"

namespace moran {

namespace {

constexpr std::int64_t kChainDepth = std::int64_t{1} << 20;
constexpr std::int64_t kEnumerateDepthCap = std::int64_t{1} << 16;
constexpr std::int64_t kLatticeDepthCap = 4096;
constexpr double kMaxBisectionBound = 64.0;

// Depths 1, 2, ..., then growing by a factor 2^{1/4}: K_j = max(j, round(2^{j/4})).
std::vector<std::int64_t> geometric_depths(std::int64_t limit) {
  std::vector<std::int64_t> out;
  for (int j = 1;; ++j) {
    const auto k = std::max<std::int64_t>(j, std::llround(std::exp2(j / 4.0)));
    if (k > limit) break;
    if (out.empty() || out.back() != k) out.push_back(k);
  }
  return out;
}

std::vector<Finding> require_assumptions(const SystemSpec& spec) {
  std::vector<Finding> findings = validate(spec);
  for (const Finding& f : findings) {
    if (f.code == "ContractionViolated") throw Error(ErrorCode::ContractionViolated, f.message);
    if (f.code == "NonsingularityViolated") throw Error(ErrorCode::NonsingularityViolated, f.message);
  }
  return findings;
}

void add_flag(DimensionReport& r, const std::string& flag) {
  if (!r.has_flag(flag)) r.flags.push_back(flag);
}

// Dispatches tree quantities to the cheapest exact engine for the model.
class Engine {
 public:
  Engine(const SystemSpec& spec, std::int64_t node_budget, std::int64_t chain_depth = kChainDepth)
      : model_(spec), budget_(node_budget) {
    if (model_.mode() == TreeMode::chain) profile_.emplace(model_, chain_depth);
  }

  TreeMode mode() const { return model_.mode(); }

  struct CutValue {
    double log_sum;
    bool truncated;
  };

  CutValue cut_sum(double s, double log_eps) const {
    switch (model_.mode()) {
      case TreeMode::chain: {
        const std::int64_t k = profile_->cut_depth(cut_index(s, model_.dim()), log_eps);
        if (k < 0) return {std::nan(""), true};
        return {profile_->log_level_sum(k, s), false};
      }
      case TreeMode::diagonal: {
        const CutSetResult r = lattice::cutset(model_, s, log_eps, budget_);
        return {r.log_sum, r.truncated};
      }
      case TreeMode::enumerate: {
        const CutSetResult r = omp_kernels::cutset(model_, s, log_eps, budget_, false);
        return {r.log_sum, r.truncated};
      }
    }
    return {std::nan(""), true};
  }

  // Largest horizon K whose tree fits the node budget.
  std::int64_t max_horizon() const {
    if (horizon_ >= 0) return horizon_;
    switch (model_.mode()) {
      case TreeMode::chain:
        horizon_ = profile_->max_depth();
        break;
      case TreeMode::diagonal:
        horizon_ = lattice::max_horizon(model_, budget_, kLatticeDepthCap);
        break;
      case TreeMode::enumerate: {
        std::int64_t K = 0;
        while (K < kEnumerateDepthCap && model_.internal_nodes(K + 1, budget_) <= budget_) ++K;
        horizon_ = K;
        break;
      }
    }
    return horizon_;
  }

  double net(double s, std::int64_t k, std::int64_t K) const {
    switch (model_.mode()) {
      case TreeMode::chain: {
        double best = profile_->log_level_sum(k, s);
        for (std::int64_t j = k + 1; j <= K; ++j) best = std::min(best, profile_->log_level_sum(j, s));
        return best;
      }
      case TreeMode::diagonal:
        return lattice::net_measure(model_, s, k, K);
      case TreeMode::enumerate:
        return omp_kernels::net_measure(model_, s, k, K);
    }
    return std::nan("");
  }

  // log sum over Sigma^j of phi^s for j = 0..K.
  std::vector<double> level_sums(double s, std::int64_t K) const {
    switch (model_.mode()) {
      case TreeMode::chain: {
        std::vector<double> out(K + 1);
        for (std::int64_t j = 0; j <= K; ++j) out[j] = profile_->log_level_sum(j, s);
        return out;
      }
      case TreeMode::diagonal:
        return lattice::level_sums(model_, s, K);
      case TreeMode::enumerate:
        return omp_kernels::level_sums(model_, s, K);
    }
    return {};
  }

  // Only the two depths used by the pressure estimator.
  std::pair<double, double> level_sum_pair(double s, std::int64_t half, std::int64_t K) const {
    if (model_.mode() == TreeMode::chain) return {profile_->log_level_sum(half, s), profile_->log_level_sum(K, s)};
    const auto sums = level_sums(s, K);
    return {sums[half], sums[K]};
  }

 private:
  TreeModel model_;
  std::int64_t budget_;
  std::optional<ChainProfile> profile_;
  mutable std::int64_t horizon_ = -1;
};

std::string trace_label(const TrendResult& r) {
  std::string label(to_string(r.trend));
  if (r.fallback) label += "_by_slope";
  return label;
}

// Bisection over s with a trend classifier; s = 0 counts as below.
template <class Classify>
void bisect(DimensionReport& report, int dim, double tol, Classify&& classify) {
  double lo = 0.0;
  double hi = dim + 1.0;
  TrendResult r = classify(hi);
  while (r.trend == Trend::below && hi < kMaxBisectionBound) {
    lo = hi;
    hi *= 2.0;
    r = classify(hi);
  }
  auto indeterminate = [&] {
    report.lo = lo;
    report.hi = hi;
    add_flag(report, "IndeterminateTrend");
  };
  if (r.trend != Trend::above) return indeterminate();
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    r = classify(mid);
    if (r.trend == Trend::above) hi = mid;
    else if (r.trend == Trend::below) lo = mid;
    else return indeterminate();
  }
  report.lo = lo;
  report.hi = hi;
  report.estimate = 0.5 * (lo + hi);
  report.dimension_bound = std::min(*report.estimate, static_cast<double>(dim));
}

void check_tol(double tol) {
  if (!(tol > 0.0) || !std::isfinite(tol)) throw Error(ErrorCode::InvalidArgument, "tolerance must be > 0");
}

void check_budget(std::int64_t budget) {
  if (budget < 1) throw Error(ErrorCode::InvalidArgument, "node budget must be >= 1");
}

void require_scalar(const SystemSpec& spec) {
  for (std::size_t li = 0; li < spec.schedule.levels.size(); ++li) {
    const auto& maps = spec.schedule.levels[li].maps;
    for (std::size_t j = 0; j < maps.size(); ++j) {
      if (!maps[j].is_scalar()) {
        throw Error(ErrorCode::NotApplicable, "Moran formulas need scalar maps; level spec " + std::to_string(li + 1) +
                                                  " map " + std::to_string(j + 1) + " is not a multiple of the identity");
      }
    }
  }
}

// Solves sum_L count_L * log sum_j c_{Lj}^d = 0 for d.
double solve_moran(const SystemSpec& spec, const std::vector<std::int64_t>& counts) {
  std::vector<std::vector<double>> log_ratios;
  for (const LevelSpec& level : spec.schedule.levels) {
    std::vector<double> lr;
    for (const Matrix& m : level.maps) lr.push_back(std::log(std::abs(m(0, 0))));
    log_ratios.push_back(std::move(lr));
  }
  auto f = [&](double d) {
    double total = 0.0;
    for (std::size_t L = 0; L < counts.size(); ++L) {
      if (counts[L] == 0) continue;
      double acc = kNegInf;
      for (double lr : log_ratios[L]) acc = log_add(acc, d * lr);
      total += static_cast<double>(counts[L]) * acc;
    }
    return total;
  };
  double lo = 0.0;
  double hi = spec.dim + 1.0;
  while (f(hi) > 0.0 && hi < 1e6) {
    lo = hi;
    hi *= 2.0;
  }
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) > 0.0) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

bool DimensionReport::has_flag(std::string_view flag) const {
  return std::find(flags.begin(), flags.end(), flag) != flags.end();
}

std::vector<double> default_sstar_schedule(const SystemSpec& spec) {
  const AlphaBounds b = alpha_bounds(spec);
  const double rho = std::min(b.alpha_plus, 0.5);
  std::vector<double> out;
  for (std::int64_t K : geometric_depths(kChainDepth)) out.push_back(static_cast<double>(K) * std::log(rho));
  return out;
}

std::vector<std::pair<std::int64_t, std::int64_t>> default_sa_schedule(const SystemSpec& spec,
                                                                       std::int64_t node_budget) {
  const Engine engine(spec, node_budget);
  const std::int64_t horizon = engine.max_horizon();
  std::vector<std::pair<std::int64_t, std::int64_t>> pairs;
  for (std::int64_t k : geometric_depths(horizon / 4)) pairs.emplace_back(k, 4 * k);
  if (pairs.size() >= 4) return pairs;
  pairs.clear();
  const std::int64_t delta = (horizon + 1) / 2;
  for (std::int64_t k = 1; k + delta <= horizon; ++k) pairs.emplace_back(k, k + delta);
  return pairs;
}

DimensionReport estimate_sstar(const SystemSpec& spec, const SstarOptions& options) {
  check_tol(options.tol);
  check_budget(options.node_budget);
  DimensionReport report;
  report.quantity = "s_star";
  report.tolerance = options.tol;
  report.findings = require_assumptions(spec);
  const std::vector<double> schedule =
      options.log_eps_schedule.empty() ? default_sstar_schedule(spec) : options.log_eps_schedule;
  for (std::size_t j = 0; j < schedule.size(); ++j) {
    if (!(schedule[j] < 0.0) || (j > 0 && !(schedule[j] < schedule[j - 1]))) {
      throw Error(ErrorCode::InvalidArgument, "epsilon schedule must be strictly decreasing in (0, 1)");
    }
  }
  report.schedule_kind = "log_epsilon";
  for (double le : schedule) report.schedule.push_back({le});

  const Engine engine(spec, options.node_budget);
  std::map<int, std::size_t> usable;  // per branch index: schedule points before the first truncation
  auto classify = [&](double s) {
    const int m = cut_index(s, spec.dim);
    const std::size_t limit = usable.contains(m) ? usable[m] : schedule.size();
    std::vector<double> xs, ys;
    for (std::size_t j = 0; j < limit; ++j) {
      const auto v = engine.cut_sum(s, schedule[j]);
      if (v.truncated) {
        usable[m] = j;
        add_flag(report, "schedule_truncated");
        break;
      }
      xs.push_back(-schedule[j]);
      ys.push_back(v.log_sum);
    }
    const TrendResult r = classify_trend(xs, ys);
    if (r.fallback) add_flag(report, "trend_fallback");
    report.trace.push_back({s, r.tail_max, r.slope, trace_label(r)});
    return r;
  };
  bisect(report, spec.dim, options.tol, classify);
  return report;
}

NetMeasureTable net_measure(const SystemSpec& spec, double s, std::int64_t k, std::int64_t K,
                            std::int64_t node_budget) {
  if (!(s >= 0.0)) throw Error(ErrorCode::InvalidArgument, "s must be >= 0");
  if (k < 1 || K < k) throw Error(ErrorCode::InvalidArgument, "need 1 <= k <= K");
  check_budget(node_budget);
  require_assumptions(spec);
  const TreeModel probe(spec);
  if (probe.mode() == TreeMode::chain && K > std::int64_t{1} << 26) {
    throw Error(ErrorCode::BudgetExceeded, "horizon too deep");
  }
  const Engine engine(spec, node_budget, probe.mode() == TreeMode::chain ? K : kChainDepth);
  NetMeasureTable t;
  t.s = s;
  t.k = k;
  t.requested_K = K;
  t.K = K;
  const std::int64_t horizon = engine.max_horizon();
  if (K > horizon) {
    if (k > horizon) {
      throw Error(ErrorCode::BudgetExceeded, "depth " + std::to_string(k) + " exceeds the node budget");
    }
    t.K = horizon;
    t.truncated = true;
  }
  t.log_value = engine.net(s, k, t.K);
  t.value = std::exp(t.log_value);
  return t;
}

DimensionReport estimate_sA(const SystemSpec& spec, const SAOptions& options) {
  check_tol(options.tol);
  check_budget(options.node_budget);
  DimensionReport report;
  report.quantity = "s_A";
  report.tolerance = options.tol;
  report.trace_value = "log_tail_max";
  report.findings = require_assumptions(spec);
  const Engine engine(spec, options.node_budget);
  auto schedule = options.depth_schedule.empty() ? default_sa_schedule(spec, options.node_budget)
                                                 : options.depth_schedule;
  const std::int64_t horizon = engine.max_horizon();
  std::vector<std::pair<std::int64_t, std::int64_t>> used;
  for (auto [k, K] : schedule) {
    if (k < 1 || K < k) throw Error(ErrorCode::InvalidArgument, "depth pairs need 1 <= k <= K");
    if (K > horizon) {
      add_flag(report, "schedule_truncated");
      continue;
    }
    used.emplace_back(k, K);
  }
  report.schedule_kind = "depth_pairs";
  for (auto [k, K] : used) report.schedule.push_back({static_cast<double>(k), static_cast<double>(K)});

  auto classify = [&](double s) {
    std::vector<double> xs, ys;
    for (auto [k, K] : used) {
      xs.push_back(static_cast<double>(k));
      ys.push_back(engine.net(s, k, K));
    }
    const TrendResult r = classify_trend(xs, ys);
    if (r.fallback) add_flag(report, "trend_fallback");
    report.trace.push_back({s, r.tail_max, r.slope, trace_label(r)});
    return r;
  };
  bisect(report, spec.dim, options.tol, classify);
  return report;
}

DimensionReport pressure_root(const LevelSpec& level, double tol, std::int64_t max_depth, std::int64_t node_budget) {
  check_tol(tol);
  check_budget(node_budget);
  if (level.maps.size() < 2) throw Error(ErrorCode::InvalidArgument, "pressure needs at least two maps");
  SystemSpec spec;
  spec.name = "stationary";
  spec.dim = level.maps.front().dim();
  spec.schedule.kind = ScheduleKind::constant;
  spec.schedule.levels = {level};
  spec.seed_region = Box{Vector(spec.dim, 0.0), Vector(spec.dim, 1.0)};
  for (const Matrix& m : level.maps) {
    if (m.dim() != spec.dim) throw Error(ErrorCode::DimensionMismatch, "maps of one level differ in dimension");
    if (!(std::abs(determinant(m)) > kSingularDet)) throw Error(ErrorCode::NonsingularityViolated, "singular map");
  }

  DimensionReport report;
  report.quantity = "falconer";
  report.tolerance = tol;
  report.trace_value = "log_pressure";

  const TreeModel probe(spec);
  std::int64_t K = max_depth;
  if (K <= 0) {
    switch (probe.mode()) {
      case TreeMode::chain:
        K = kChainDepth;
        break;
      case TreeMode::diagonal:
        K = std::min<std::int64_t>(1024, lattice::max_horizon(probe, std::min<std::int64_t>(node_budget, 1 << 21),
                                                              kLatticeDepthCap));
        break;
      case TreeMode::enumerate:
        K = 1;
        while (probe.internal_nodes(K + 2, node_budget) <= std::min<std::int64_t>(node_budget, 1 << 21)) ++K;
        break;
    }
  }
  K = std::max<std::int64_t>(K, 2);
  const std::int64_t half = K / 2;
  const Engine engine(spec, node_budget, probe.mode() == TreeMode::chain ? K : kChainDepth);
  report.schedule_kind = "depths";
  report.schedule = {{static_cast<double>(half), static_cast<double>(K)}};

  // log p(s) from the growth between depths K/2 and K, which cancels the
  // constant factor of the level sums.
  auto log_pressure = [&](double s) {
    const auto [a, b] = engine.level_sum_pair(s, half, K);
    const double v = (b - a) / static_cast<double>(K - half);
    report.trace.push_back({s, v, 0.0, v > 0.0 ? "below" : "above"});
    return v;
  };

  double lo = 0.0, hi = spec.dim + 1.0;
  double flo = log_pressure(lo), fhi = log_pressure(hi);
  while (fhi > 0.0 && hi < kMaxBisectionBound) {
    lo = hi;
    flo = fhi;
    hi *= 2.0;
    fhi = log_pressure(hi);
  }
  if (!(flo > 0.0 && fhi <= 0.0)) {
    report.lo = lo;
    report.hi = hi;
    add_flag(report, "IndeterminateTrend");
    return report;
  }
  // Illinois variant of regula falsi: bracketing and superlinear.
  int side = 0;
  for (int iter = 0; iter < 200 && hi - lo > tol; ++iter) {
    double mid = (lo * fhi - hi * flo) / (fhi - flo);
    if (!(mid > lo && mid < hi)) mid = 0.5 * (lo + hi);
    const double fm = log_pressure(mid);
    if (fm == 0.0) {
      lo = hi = mid;
      break;
    }
    if (fm > 0.0) {
      lo = mid;
      flo = fm;
      if (side == 1) fhi *= 0.5;
      side = 1;
    } else {
      hi = mid;
      fhi = fm;
      if (side == -1) flo *= 0.5;
      side = -1;
    }
    // Regula falsi can stall with one endpoint fixed; force a bisection step
    // when the bracket stops shrinking quickly.
    if (iter % 8 == 7) {
      const double m2 = 0.5 * (lo + hi);
      const double f2 = log_pressure(m2);
      if (f2 > 0.0) {
        lo = m2;
        flo = f2;
      } else {
        hi = m2;
        fhi = f2;
      }
      side = 0;
    }
  }
  report.lo = lo;
  report.hi = hi;
  report.estimate = 0.5 * (lo + hi);
  report.dimension_bound = std::min(*report.estimate, static_cast<double>(spec.dim));
  return report;
}

double moran_dk(const SystemSpec& spec, std::int64_t k) {
  if (k < 1) throw Error(ErrorCode::InvalidArgument, "k must be >= 1");
  require_scalar(spec);
  std::vector<std::int64_t> counts(spec.schedule.levels.size(), 0);
  for (std::int64_t i = 1; i <= k; ++i) ++counts[spec.schedule.level_index(i)];
  return solve_moran(spec, counts);
}

std::pair<DimensionReport, DimensionReport> moran_dims(const SystemSpec& spec, std::int64_t k_max) {
  if (k_max < 1) throw Error(ErrorCode::InvalidArgument, "k_max must be >= 1");
  require_scalar(spec);
  const std::vector<Finding> findings = validate(spec);
  std::vector<std::int64_t> counts(spec.schedule.levels.size(), 0);
  std::vector<TraceEntry> trace;
  const std::int64_t window_start = std::max<std::int64_t>(1, k_max / 2);
  double lower = std::numeric_limits<double>::infinity();
  double upper = -std::numeric_limits<double>::infinity();
  for (std::int64_t k = 1; k <= k_max; ++k) {
    ++counts[spec.schedule.level_index(k)];
    const double dk = solve_moran(spec, counts);
    trace.push_back({static_cast<double>(k), dk, 0.0, ""});
    if (k >= window_start) {
      lower = std::min(lower, dk);
      upper = std::max(upper, dk);
    }
  }
  auto make = [&](const char* quantity, double v) {
    DimensionReport r;
    r.quantity = quantity;
    r.estimate = v;
    r.lo = r.hi = v;
    r.tolerance = 1e-12;
    r.schedule_kind = "depth_window";
    r.schedule = {{static_cast<double>(window_start), static_cast<double>(k_max)}};
    r.trace_x = "k";
    r.trace_value = "d_k";
    r.trace = trace;
    r.dimension_bound = std::min(v, static_cast<double>(spec.dim));
    r.findings = findings;
    return r;
  };
  return {make("moran_lower", lower), make("moran_upper", upper)};
}

}  // namespace moran
