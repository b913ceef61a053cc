#include "moran/trend.hpp"

#include <algorithm>
#include <cmath>

#include "moran/error.hpp"

namespace moran {

namespace {

double ls_slope(std::span<const double> x, std::span<const double> y) {
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxx > 0.0 ? sxy / sxx : std::nan("");
}

}  // namespace

TrendResult classify_trend(std::span<const double> x, std::span<const double> log_values,
                           const TrendThresholds& thresholds) {
  if (x.size() != log_values.size()) throw Error(ErrorCode::InvalidArgument, "trend axis and values differ in length");
  TrendResult r;
  const std::size_t n = x.size();
  if (n == 0) return r;
  const std::size_t tail = (n + 1) / 2;
  const auto tx = x.subspan(n - tail);
  const auto ty = log_values.subspan(n - tail);
  r.tail_size = static_cast<int>(tail);
  r.tail_max = *std::max_element(ty.begin(), ty.end());
  if (std::isnan(r.tail_max)) return r;
  const double log_low = std::log(thresholds.low);
  const double log_high = std::log(thresholds.high);

  if (r.tail_max > log_high) {
    r.trend = Trend::below;
    r.slope = tail >= 2 ? ls_slope(tx, ty) : 0.0;
    return r;
  }
  if (tail < 2) {
    // A single point can only be judged against the thresholds.
    if (r.tail_max < log_low) r.trend = Trend::above;
    return r;
  }
  r.slope = ls_slope(tx, ty);
  if (r.tail_max < log_low && r.slope < 0.0) {
    r.trend = Trend::above;
    return r;
  }
  bool increasing = true;
  for (std::size_t i = 1; i < tail; ++i) increasing = increasing && ty[i] > ty[i - 1];
  if (increasing) {
    r.trend = Trend::below;
    return r;
  }
  if (std::isnan(r.slope) || r.slope == 0.0) return r;
  r.fallback = true;
  r.trend = r.slope < 0.0 ? Trend::above : Trend::below;
  return r;
}

std::string_view to_string(Trend trend) {
  switch (trend) {
    case Trend::above: return "above";
    case Trend::below: return "below";
    case Trend::indeterminate: return "indeterminate";
  }
  return "";
}

}  // namespace moran
