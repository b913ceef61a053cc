#include "moran/fixtures.hpp"

#include <cmath>
#include <functional>
#include <map>

#include "json.hpp"
#include "moran/error.hpp"

namespace moran {

using nlohmann::json;

namespace {

json unit_box(int dim) {
  return {{"lo", json(std::vector<double>(dim, 0.0))}, {"hi", json(std::vector<double>(dim, 1.0))}};
}

json level(const std::vector<std::vector<double>>& maps, const std::vector<std::vector<double>>& digits) {
  json l = {{"branch_count", maps.size()}, {"maps", maps}};
  if (!digits.empty()) l["digits"] = digits;
  return l;
}

std::vector<double> diag2(double a, double b) { return {a, 0.0, 0.0, b}; }

json constant_system(std::string name, int dim, json lvl) {
  return {{"name", std::move(name)},
          {"dim", dim},
          {"seed_region", unit_box(dim)},
          {"schedule", {{"kind", "constant"}, {"levels", json::array({std::move(lvl)})}}},
          {"translations", {{"kind", "digit_grid"}}}};
}

json middle_thirds() {
  return constant_system("middle_thirds", 1, level({{1.0 / 3.0}, {1.0 / 3.0}}, {{0.0}, {2.0 / 3.0}}));
}

json example_5_1() {
  // Explicit prefix of 40 levels; beyond that the y-ratio equals 1 to within
  // 5e-13 and the last level is repeated.
  json levels = json::array();
  constexpr int kPrefix = 40;
  for (int k = 1; k <= kPrefix; ++k) {
    const double p = std::ldexp(1.0, k + 1);
    const double r = (p + 1.0) / (p + 2.0);
    levels.push_back(level({diag2(0.5, r), diag2(0.5, r)}, {{0.0, 0.0}, {0.5, 0.0}}));
  }
  return {{"name", "example_5_1"},
          {"dim", 2},
          {"seed_region", unit_box(2)},
          {"schedule", {{"kind", "explicit_prefix_then_periodic"}, {"levels", levels}, {"period", 1}}},
          {"translations", {{"kind", "digit_grid"}}}};
}

json example_5_2() {
  return constant_system("example_5_2", 2, level({diag2(0.5, 0.5), {0.0, 0.0, 0.0, 0.5}}, {{0.0, 0.0}, {1.0, 0.0}}));
}

json example_5_3() {
  json first = level({diag2(1.0 / 3, 1.0 / 3), diag2(1.0 / 3, 1.0 / 3), diag2(1.0 / 3, 1.0 / 3)},
                     {{0.0, 0.0}, {1.0 / 3, 2.0 / 3}, {2.0 / 3, 0.0}});
  json shear = level({{0.5, 0.5, 0.0, 0.5}, {0.5, 0.0, 0.5, 0.5}}, {{0.0, 0.0}, {0.0, 0.0}});
  return {{"name", "example_5_3"},
          {"dim", 2},
          {"seed_region", unit_box(2)},
          {"schedule", {{"kind", "explicit_prefix_then_periodic"}, {"levels", {first, shear}}, {"period", 1}}},
          {"translations", {{"kind", "digit_grid"}}}};
}

json example_5_4() {
  // Psi(x) = T(x + b) with T = diag(1/9, 1/3), so the digit is T b.
  auto digits = [](const std::vector<std::pair<int, int>>& b) {
    std::vector<std::vector<double>> out;
    for (auto [x, y] : b) out.push_back({x / 9.0, y / 3.0});
    return out;
  };
  const auto t = diag2(1.0 / 9, 1.0 / 3);
  json a = level(std::vector<std::vector<double>>(3, t), digits({{0, 0}, {4, 2}, {8, 0}}));
  json b = level(std::vector<std::vector<double>>(9, t),
                 digits({{0, 0}, {2, 0}, {4, 0}, {6, 0}, {8, 0}, {1, 2}, {3, 2}, {5, 2}, {7, 2}}));
  return {{"name", "example_5_4"},
          {"dim", 2},
          {"seed_region", unit_box(2)},
          {"schedule", {{"kind", "geometric_blocks"}, {"levels", {a, b}}, {"block_base", 3}, {"block_ratio", 2}}},
          {"translations", {{"kind", "digit_grid"}}}};
}

json grid_system(std::string name, int n, const std::vector<std::pair<int, int>>& cells) {
  std::vector<std::vector<double>> maps, digits;
  for (auto [i, j] : cells) {
    maps.push_back(diag2(1.0 / n, 1.0 / n));
    digits.push_back({static_cast<double>(i) / n, static_cast<double>(j) / n});
  }
  return constant_system(std::move(name), 2, level(maps, digits));
}

json sierpinski_carpet() {
  std::vector<std::pair<int, int>> cells;
  for (int j = 0; j < 3; ++j)
    for (int i = 0; i < 3; ++i)
      if (i != 1 || j != 1) cells.emplace_back(i, j);
  return grid_system("sierpinski_carpet", 3, cells);
}

json cantor_dust() { return grid_system("cantor_dust", 3, {{0, 0}, {2, 0}, {0, 2}, {2, 2}}); }

json similarity_pair() {
  return constant_system("similarity_pair", 2,
                         level({diag2(1.0 / 3, 1.0 / 3), diag2(1.0 / 3, 1.0 / 3)}, {{0.0, 0.0}, {2.0 / 3, 2.0 / 3}}));
}

json diag_triple() {
  const auto t = diag2(0.5, 0.25);
  return constant_system("diag_triple", 2, level({t, t, t}, {{0.0, 0.0}, {0.5, 0.0}, {0.0, 0.75}}));
}

json random_pair() {
  // Drawn once from a seeded generator and frozen; both norms are below 1/2.
  return constant_system("random_pair", 2,
                         level({{0.42, 0.11, -0.07, 0.29}, {0.25, -0.18, 0.14, 0.38}}, {{0.0, 0.0}, {0.5, 0.5}}));
}

// Three pieces so that overlaps stay moderate; with four the box-count slope
// creeps up to its limit only far below reachable scales.
json random_translation() {
  json sys = constant_system("random_translation", 2, level(std::vector<std::vector<double>>(3, diag2(0.4, 0.4)), {}));
  sys["translations"] = {{"kind", "random_iid"},
                         {"region", {{"lo", {0.0, 0.0}}, {"hi", {0.6, 0.6}}}},
                         {"seed", 12345},
                         {"density", "uniform"}};
  return sys;
}

json moran_two_phase() {
  json a = level({{0.25}, {0.25}}, {{0.0}, {0.75}});
  json b = level({{1.0 / 3}, {1.0 / 3}, {1.0 / 3}}, {{0.0}, {1.0 / 3}, {2.0 / 3}});
  return {{"name", "moran_two_phase"},
          {"dim", 1},
          {"seed_region", unit_box(1)},
          {"schedule", {{"kind", "geometric_blocks"}, {"levels", {a, b}}, {"block_base", 3}, {"block_ratio", 2}}},
          {"translations", {{"kind", "digit_grid"}}}};
}

const std::map<std::string, std::function<json()>, std::less<>>& registry() {
  static const std::map<std::string, std::function<json()>, std::less<>> r = {
      {"middle_thirds", middle_thirds},
      {"example_5_1", example_5_1},
      {"example_5_2", example_5_2},
      {"example_5_3", example_5_3},
      {"example_5_4", example_5_4},
      {"sierpinski_carpet", sierpinski_carpet},
      {"cantor_dust", cantor_dust},
      {"similarity_pair", similarity_pair},
      {"diag_triple", diag_triple},
      {"random_pair", random_pair},
      {"random_translation", random_translation},
      {"moran_two_phase", moran_two_phase},
  };
  return r;
}

}  // namespace

std::vector<std::string> fixture_names() {
  std::vector<std::string> names;
  for (const auto& [name, make] : registry()) names.push_back(name);
  return names;
}

std::string fixture_document(std::string_view name) {
  const auto it = registry().find(name);
  if (it == registry().end()) throw Error(ErrorCode::InvalidArgument, "unknown fixture '" + std::string(name) + "'");
  return it->second().dump(2);
}

SystemSpec fixture(std::string_view name) {
  return parse_spec(fixture_document(name), ParseOptions{.check_assumptions = false});
}

}  // namespace moran
