#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "moran/attractor.hpp"
#include "moran/dims.hpp"
#include "moran/system.hpp"

namespace moran {

nlohmann::json to_json(const Finding& finding);
nlohmann::json to_json(const std::vector<Finding>& findings);
// {quantity, estimate, bracket, schedule, flags, trace, ...}
nlohmann::json to_json(const DimensionReport& report);
nlohmann::json to_json(const BoxCountCurve& curve);

}  // namespace moran
