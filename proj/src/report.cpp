#include "moran/report.hpp"

#include <cmath>

namespace moran {

using nlohmann::json;

namespace {

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

json to_json(const Finding& f) {
  json j = {{"code", f.code}, {"severity", std::string(to_string(f.severity))}, {"message", f.message}};
  if (f.level > 0) j["level"] = f.level;
  if (f.map_index > 0) j["map"] = f.map_index;
  return j;
}

json to_json(const std::vector<Finding>& findings) {
  json out = json::array();
  for (const Finding& f : findings) out.push_back(to_json(f));
  return out;
}

json to_json(const DimensionReport& r) {
  json schedule = json::array();
  for (const auto& row : r.schedule) {
    if (row.size() == 1) schedule.push_back(number(row[0]));
    else {
      json cells = json::array();
      for (double v : row) cells.push_back(number(v));
      schedule.push_back(cells);
    }
  }
  json trace = json::array();
  for (const TraceEntry& t : r.trace) {
    json e = {{r.trace_x, number(t.x)}, {r.trace_value, number(t.value)}};
    if (!t.label.empty()) {
      e["classification"] = t.label;
      e["slope"] = number(t.slope);
    }
    trace.push_back(e);
  }
  json j = {{"quantity", r.quantity},
            {"estimate", r.estimate ? number(*r.estimate) : json(nullptr)},
            {"bracket", {number(r.lo), number(r.hi)}},
            {"tolerance", number(r.tolerance)},
            {"schedule", {{"kind", r.schedule_kind}, {"values", schedule}}},
            {"flags", r.flags},
            {"trace", trace},
            {"findings", to_json(r.findings)}};
  j["dimension_bound"] = r.dimension_bound ? number(*r.dimension_bound) : json(nullptr);
  return j;
}

json to_json(const BoxCountCurve& c) {
  json scales = json::array();
  for (std::size_t i = 0; i < c.scales.size(); ++i) scales.push_back({{"epsilon", c.scales[i]}, {"count", c.counts[i]}});
  json dropped = json::array();
  for (std::size_t i = 0; i < c.dropped_scales.size(); ++i) {
    dropped.push_back({{"epsilon", c.dropped_scales[i]}, {"count", c.dropped_counts[i]}});
  }
  return {{"scales", scales},
          {"saturated", dropped},
          {"slope", number(c.fit.slope)},
          {"intercept", number(c.fit.intercept)},
          {"r2", number(c.fit.r2)}};
}

}  // namespace moran
