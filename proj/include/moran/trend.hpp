#pragma once

#include <span>
#include <string_view>

namespace moran {

enum class Trend { above, below, indeterminate };

struct TrendThresholds {
  double low = 1e-3;
  double high = 1e3;
};

struct TrendResult {
  Trend trend = Trend::indeterminate;
  bool fallback = false;   // decided by the slope sign alone
  double tail_max = 0.0;   // log of the largest tail value
  double slope = 0.0;      // least-squares slope of log values over the tail
  int tail_size = 0;
};

// Classifies a sequence of log values along an increasing refinement axis x
// (for example -log eps or a depth). The tail is the last ceil(n/2) points.
//   above: tail maximum below `low` with a decreasing fit
//   below: tail maximum above `high`, or the tail strictly increasing
//   otherwise the sign of the fitted slope decides, flagged as a fallback.
TrendResult classify_trend(std::span<const double> x, std::span<const double> log_values,
                           const TrendThresholds& thresholds = {});

std::string_view to_string(Trend trend);

}  // namespace moran
