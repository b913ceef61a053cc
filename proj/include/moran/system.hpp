#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "moran/linalg.hpp"

namespace moran {

using Vector = std::vector<double>;

// Axis-aligned box [lo, hi] in R^d.
struct Box {
  Vector lo;
  Vector hi;

  int dim() const { return static_cast<int>(lo.size()); }
  Vector center() const;
  double diameter() const;
  bool contains(std::span<const double> x, double slack = 0.0) const;
};

// One level of the construction: n_k maps and optional per-child translations.
struct LevelSpec {
  int branch_count = 0;
  std::vector<Matrix> maps;
  std::vector<Vector> digits;  // empty or branch_count entries

  bool has_digits() const { return !digits.empty(); }
};

enum class ScheduleKind { constant, periodic, explicit_prefix_then_periodic, geometric_blocks };

// Finite rule producing the level of every depth k >= 1.
//  constant:        levels[0] everywhere
//  periodic:        levels[(k-1) mod L]
//  prefix+periodic: the first L-period levels once, then the last `period` cyclically
//  geometric_blocks: depth k lies in block m, the smallest integer with
//                   k <= block_base * block_ratio^m; the block holding k = 1 uses
//                   levels[0] and consecutive blocks cycle through the list.
struct Schedule {
  ScheduleKind kind = ScheduleKind::constant;
  std::vector<LevelSpec> levels;
  int period = 0;
  std::int64_t block_base = 0;
  std::int64_t block_ratio = 0;

  std::size_t level_index(std::int64_t k) const;
};

enum class TranslationKind { digit_grid, finite_alphabet, random_iid, explicit_table };

struct TranslationEntry {
  std::vector<std::uint32_t> word;  // 1-based digits
  Vector w;
};

struct TranslationScheme {
  TranslationKind kind = TranslationKind::digit_grid;
  std::vector<Vector> alphabet;
  std::uint64_t seed = 0;
  std::optional<Box> region;
  std::vector<TranslationEntry> table;
};

struct SystemSpec {
  std::string name;
  int dim = 0;
  Schedule schedule;
  TranslationScheme translations;
  Box seed_region;

  const LevelSpec& level(std::int64_t k) const { return schedule.levels[schedule.level_index(k)]; }
  bool is_stationary() const { return schedule.kind == ScheduleKind::constant; }
  bool is_scalar() const;
  bool is_diagonal() const;
};

struct ParseOptions {
  // When false the standing assumptions (contraction, nonsingularity) are left
  // to validate() instead of raising.
  bool check_assumptions = true;
};

SystemSpec parse_spec(std::string_view document, const ParseOptions& options = {});

const LevelSpec& level(const SystemSpec& spec, std::int64_t k);

enum class Severity { error, warning };

struct Finding {
  std::string code;
  Severity severity = Severity::error;
  std::int64_t level = 0;  // 0 when not tied to a level
  int map_index = -1;      // 1-based, -1 when not tied to a map
  std::string message;
};

std::vector<Finding> validate(const SystemSpec& spec);
bool has_errors(const std::vector<Finding>& findings);

struct AlphaBounds {
  double alpha_plus = 0.0;
  double alpha_minus = 0.0;
};

AlphaBounds alpha_bounds(const SystemSpec& spec);

std::string_view to_string(ScheduleKind kind);
std::string_view to_string(TranslationKind kind);
std::string_view to_string(Severity severity);

}  // namespace moran
