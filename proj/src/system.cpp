#include "moran/system.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "json.hpp"
#include "moran/error.hpp"

namespace moran {

using nlohmann::json;

namespace {

[[noreturn]] void schema_error(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::SchemaViolation, path + ": " + what);
}

void expect_fields(const json& j, const std::string& path, std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) schema_error(path, "expected an object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      schema_error(path + "." + key, "unknown field");
    }
  }
}

const json& require(const json& j, const std::string& path, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) schema_error(path + "." + key, "missing required field");
  return *it;
}

double read_number(const json& j, const std::string& path) {
  if (!j.is_number()) schema_error(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) schema_error(path, "number is not finite");
  return v;
}

std::int64_t read_integer(const json& j, const std::string& path) {
  if (!j.is_number_integer()) schema_error(path, "expected an integer");
  return j.get<std::int64_t>();
}

Vector read_vector(const json& j, const std::string& path, int dim) {
  if (!j.is_array()) schema_error(path, "expected an array");
  if (dim > 0 && static_cast<int>(j.size()) != dim) {
    schema_error(path, "expected " + std::to_string(dim) + " components, got " + std::to_string(j.size()));
  }
  Vector v;
  for (std::size_t i = 0; i < j.size(); ++i) v.push_back(read_number(j[i], path + "[" + std::to_string(i) + "]"));
  return v;
}

Box read_box(const json& j, const std::string& path, int dim) {
  expect_fields(j, path, {"lo", "hi"});
  Box b{read_vector(require(j, path, "lo"), path + ".lo", dim), read_vector(require(j, path, "hi"), path + ".hi", dim)};
  for (int i = 0; i < dim; ++i) {
    if (!(b.lo[i] < b.hi[i])) schema_error(path, "box must have nonempty interior (lo < hi)");
  }
  return b;
}

LevelSpec read_level(const json& j, const std::string& path, int dim) {
  expect_fields(j, path, {"branch_count", "maps", "digits"});
  LevelSpec level;
  const std::int64_t n = read_integer(require(j, path, "branch_count"), path + ".branch_count");
  if (n < 2) schema_error(path + ".branch_count", "branch_count must be >= 2");
  if (n > 1'000'000) schema_error(path + ".branch_count", "branch_count too large");
  level.branch_count = static_cast<int>(n);
  const json& maps = require(j, path, "maps");
  if (!maps.is_array()) schema_error(path + ".maps", "expected an array");
  if (static_cast<std::int64_t>(maps.size()) != n) {
    schema_error(path + ".maps", "expected " + std::to_string(n) + " maps, got " + std::to_string(maps.size()));
  }
  for (std::size_t i = 0; i < maps.size(); ++i) {
    const std::string mp = path + ".maps[" + std::to_string(i) + "]";
    const Vector entries = read_vector(maps[i], mp, dim * dim);
    level.maps.push_back(Matrix::from_row_major(dim, entries));
  }
  if (const auto it = j.find("digits"); it != j.end()) {
    if (!it->is_array()) schema_error(path + ".digits", "expected an array");
    if (static_cast<std::int64_t>(it->size()) != n) {
      schema_error(path + ".digits", "expected " + std::to_string(n) + " digits, got " + std::to_string(it->size()));
    }
    for (std::size_t i = 0; i < it->size(); ++i) {
      level.digits.push_back(read_vector((*it)[i], path + ".digits[" + std::to_string(i) + "]", dim));
    }
  }
  return level;
}

Schedule read_schedule(const json& j, const std::string& path, int dim) {
  expect_fields(j, path, {"kind", "levels", "block_base", "block_ratio", "period"});
  Schedule s;
  const json& kind = require(j, path, "kind");
  if (!kind.is_string()) schema_error(path + ".kind", "expected a string");
  const std::string k = kind.get<std::string>();
  if (k == "constant") s.kind = ScheduleKind::constant;
  else if (k == "periodic") s.kind = ScheduleKind::periodic;
  else if (k == "explicit_prefix_then_periodic") s.kind = ScheduleKind::explicit_prefix_then_periodic;
  else if (k == "geometric_blocks") s.kind = ScheduleKind::geometric_blocks;
  else schema_error(path + ".kind", "unknown schedule kind '" + k + "'");

  const json& levels = require(j, path, "levels");
  if (!levels.is_array() || levels.empty()) schema_error(path + ".levels", "expected a nonempty array");
  for (std::size_t i = 0; i < levels.size(); ++i) {
    s.levels.push_back(read_level(levels[i], path + ".levels[" + std::to_string(i) + "]", dim));
  }
  const auto L = static_cast<std::int64_t>(s.levels.size());
  if (j.contains("period")) s.period = static_cast<int>(read_integer(j["period"], path + ".period"));
  if (j.contains("block_base")) s.block_base = read_integer(j["block_base"], path + ".block_base");
  if (j.contains("block_ratio")) s.block_ratio = read_integer(j["block_ratio"], path + ".block_ratio");

  switch (s.kind) {
    case ScheduleKind::constant:
      if (L != 1) schema_error(path + ".levels", "constant schedule takes exactly one level");
      break;
    case ScheduleKind::periodic:
      if (s.period == 0) s.period = static_cast<int>(L);
      if (s.period != L) schema_error(path + ".period", "periodic schedule period must equal the number of levels");
      break;
    case ScheduleKind::explicit_prefix_then_periodic:
      if (s.period < 1 || s.period > L) schema_error(path + ".period", "period must be in [1, number of levels]");
      break;
    case ScheduleKind::geometric_blocks:
      if (s.block_base < 1) schema_error(path + ".block_base", "block_base must be >= 1");
      if (s.block_ratio < 2) schema_error(path + ".block_ratio", "block_ratio must be >= 2");
      break;
  }
  return s;
}

TranslationScheme read_translations(const json& j, const std::string& path, int dim) {
  expect_fields(j, path, {"kind", "alphabet", "region", "seed", "density", "table"});
  TranslationScheme t;
  const json& kind = require(j, path, "kind");
  if (!kind.is_string()) schema_error(path + ".kind", "expected a string");
  const std::string k = kind.get<std::string>();
  if (k == "digit_grid") t.kind = TranslationKind::digit_grid;
  else if (k == "finite_alphabet") t.kind = TranslationKind::finite_alphabet;
  else if (k == "random_iid") t.kind = TranslationKind::random_iid;
  else if (k == "explicit") t.kind = TranslationKind::explicit_table;
  else schema_error(path + ".kind", "unknown translation kind '" + k + "'");

  if (j.contains("seed")) {
    const json& seed = j["seed"];
    if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<std::int64_t>() >= 0)) {
      schema_error(path + ".seed", "expected a non-negative integer");
    }
    t.seed = seed.get<std::uint64_t>();
  }
  if (j.contains("region")) t.region = read_box(j["region"], path + ".region", dim);
  if (j.contains("density")) {
    if (!j["density"].is_string() || j["density"].get<std::string>() != "uniform") {
      schema_error(path + ".density", "only 'uniform' is supported");
    }
  }
  if (j.contains("alphabet")) {
    const json& a = j["alphabet"];
    if (!a.is_array() || a.empty()) schema_error(path + ".alphabet", "expected a nonempty array");
    for (std::size_t i = 0; i < a.size(); ++i) {
      t.alphabet.push_back(read_vector(a[i], path + ".alphabet[" + std::to_string(i) + "]", dim));
    }
  }
  if (j.contains("table")) {
    const json& tab = j["table"];
    if (!tab.is_array()) schema_error(path + ".table", "expected an array");
    for (std::size_t i = 0; i < tab.size(); ++i) {
      const std::string ep = path + ".table[" + std::to_string(i) + "]";
      expect_fields(tab[i], ep, {"word", "w"});
      TranslationEntry e;
      const json& word = require(tab[i], ep, "word");
      if (!word.is_array() || word.empty()) schema_error(ep + ".word", "expected a nonempty array");
      for (std::size_t q = 0; q < word.size(); ++q) {
        const std::int64_t digit = read_integer(word[q], ep + ".word[" + std::to_string(q) + "]");
        if (digit < 1) schema_error(ep + ".word", "digits are 1-based");
        e.word.push_back(static_cast<std::uint32_t>(digit));
      }
      e.w = read_vector(require(tab[i], ep, "w"), ep + ".w", dim);
      t.table.push_back(std::move(e));
    }
  }

  switch (t.kind) {
    case TranslationKind::finite_alphabet:
      if (t.alphabet.empty()) schema_error(path + ".alphabet", "finite_alphabet requires an alphabet");
      break;
    case TranslationKind::random_iid:
      if (!t.region) schema_error(path + ".region", "random_iid requires a region");
      break;
    case TranslationKind::explicit_table:
      if (t.table.empty()) schema_error(path + ".table", "explicit translations require a table");
      break;
    case TranslationKind::digit_grid:
      break;
  }
  return t;
}

void check_assumptions(const SystemSpec& spec) {
  for (std::size_t li = 0; li < spec.schedule.levels.size(); ++li) {
    const LevelSpec& level = spec.schedule.levels[li];
    for (std::size_t i = 0; i < level.maps.size(); ++i) {
      const std::string where = "schedule.levels[" + std::to_string(li) + "].maps[" + std::to_string(i) + "]";
      const double det = std::abs(determinant(level.maps[i]));
      if (!(det > kSingularDet)) {
        throw Error(ErrorCode::NonsingularityViolated, where + " has |det| = " + std::to_string(det));
      }
      const double norm = op_norm(level.maps[i]);
      if (!(norm < 1.0)) {
        throw Error(ErrorCode::ContractionViolated, where + " has operator norm " + std::to_string(norm));
      }
    }
  }
}

// Smallest m with k <= base * ratio^m (m may be negative).
std::int64_t block_of(std::int64_t k, std::int64_t base, std::int64_t ratio) {
  using u128 = unsigned __int128;
  std::int64_t m = 0;
  if (k <= base) {
    for (u128 lhs = static_cast<u128>(k) * ratio; lhs <= static_cast<u128>(base); lhs *= ratio) --m;
    return m;
  }
  for (u128 bound = static_cast<u128>(base); static_cast<u128>(k) > bound; bound *= ratio) ++m;
  return m;
}

}  // namespace

Vector Box::center() const {
  Vector c(lo.size());
  for (std::size_t i = 0; i < lo.size(); ++i) c[i] = 0.5 * (lo[i] + hi[i]);
  return c;
}

double Box::diameter() const {
  double acc = 0.0;
  for (std::size_t i = 0; i < lo.size(); ++i) acc += (hi[i] - lo[i]) * (hi[i] - lo[i]);
  return std::sqrt(acc);
}

bool Box::contains(std::span<const double> x, double slack) const {
  for (std::size_t i = 0; i < lo.size(); ++i) {
    if (x[i] < lo[i] - slack || x[i] > hi[i] + slack) return false;
  }
  return true;
}

std::size_t Schedule::level_index(std::int64_t k) const {
  const auto L = static_cast<std::int64_t>(levels.size());
  switch (kind) {
    case ScheduleKind::constant:
      return 0;
    case ScheduleKind::periodic:
      return static_cast<std::size_t>((k - 1) % L);
    case ScheduleKind::explicit_prefix_then_periodic: {
      const std::int64_t prefix = L - period;
      if (k <= prefix) return static_cast<std::size_t>(k - 1);
      return static_cast<std::size_t>(prefix + (k - 1 - prefix) % period);
    }
    case ScheduleKind::geometric_blocks: {
      const std::int64_t first = block_of(1, block_base, block_ratio);
      const std::int64_t m = block_of(k, block_base, block_ratio);
      return static_cast<std::size_t>((m - first) % L);
    }
  }
  return 0;
}

bool SystemSpec::is_scalar() const {
  for (const auto& l : schedule.levels)
    for (const auto& m : l.maps)
      if (!m.is_scalar()) return false;
  return true;
}

bool SystemSpec::is_diagonal() const {
  for (const auto& l : schedule.levels)
    for (const auto& m : l.maps)
      if (!m.is_diagonal()) return false;
  return true;
}

const LevelSpec& level(const SystemSpec& spec, std::int64_t k) {
  if (k < 1) throw Error(ErrorCode::InvalidArgument, "levels are numbered from 1");
  return spec.level(k);
}

SystemSpec parse_spec(std::string_view document, const ParseOptions& options) {
  json root;
  try {
    root = json::parse(document);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::SchemaViolation, std::string("$: not valid JSON: ") + e.what());
  }
  expect_fields(root, "$", {"name", "dim", "seed_region", "schedule", "translations"});
  SystemSpec spec;
  if (root.contains("name")) {
    if (!root["name"].is_string()) schema_error("$.name", "expected a string");
    spec.name = root["name"].get<std::string>();
  }
  const std::int64_t dim = read_integer(require(root, "$", "dim"), "$.dim");
  if (dim < 1 || dim > kMaxDim) schema_error("$.dim", "dim must be in [1, 8]");
  spec.dim = static_cast<int>(dim);
  spec.seed_region = read_box(require(root, "$", "seed_region"), "$.seed_region", spec.dim);
  spec.schedule = read_schedule(require(root, "$", "schedule"), "$.schedule", spec.dim);
  if (root.contains("translations")) {
    spec.translations = read_translations(root["translations"], "$.translations", spec.dim);
  }
  if (spec.translations.kind == TranslationKind::digit_grid) {
    for (std::size_t i = 0; i < spec.schedule.levels.size(); ++i) {
      if (!spec.schedule.levels[i].has_digits()) {
        schema_error("$.schedule.levels[" + std::to_string(i) + "].digits", "digit_grid translations need digits at every level");
      }
    }
  }
  if (options.check_assumptions) check_assumptions(spec);
  return spec;
}

std::vector<Finding> validate(const SystemSpec& spec) {
  std::vector<Finding> findings;
  const auto& levels = spec.schedule.levels;
  std::vector<double> level_max_norm(levels.size(), 0.0);
  double sup_norm = 0.0;
  for (std::size_t li = 0; li < levels.size(); ++li) {
    for (std::size_t i = 0; i < levels[li].maps.size(); ++i) {
      const Matrix& t = levels[li].maps[i];
      const double norm = op_norm(t);
      level_max_norm[li] = std::max(level_max_norm[li], norm);
      sup_norm = std::max(sup_norm, norm);
      const auto where = "level spec " + std::to_string(li + 1) + ", map " + std::to_string(i + 1);
      if (!(std::abs(determinant(t)) > kSingularDet)) {
        findings.push_back({"NonsingularityViolated", Severity::error, static_cast<std::int64_t>(li + 1),
                            static_cast<int>(i + 1), where + " is singular"});
      }
      if (!(norm < 1.0)) {
        findings.push_back({"ContractionViolated", Severity::error, static_cast<std::int64_t>(li + 1),
                            static_cast<int>(i + 1), where + " has operator norm " + std::to_string(norm)});
      }
    }
  }

  // Heuristic: |J_u| <= |J| * prod_k max_i alpha_1(T_{k,i}).
  double running = 1.0;
  bool vanished = false;
  for (std::int64_t k = 1; k <= 10'000; ++k) {
    running *= level_max_norm[spec.schedule.level_index(k)];
    if (running < 1e-3) {
      vanished = true;
      break;
    }
  }
  if (!vanished) {
    findings.push_back({"DiameterNotVanishing", Severity::error, 0, -1,
                        "product of level-wise max alpha_1 stays at " + std::to_string(running) +
                            " after 10000 levels; basic-set diameters do not tend to 0"});
  }
  if (sup_norm >= 0.5) {
    findings.push_back({"HalfNormExceeded", Severity::warning, 0, -1,
                        "sup ||T_{k,j}|| = " + std::to_string(sup_norm) +
                            " >= 1/2; the almost-sure Hausdorff dimension result for finite alphabets does not apply"});
  }
  return findings;
}

bool has_errors(const std::vector<Finding>& findings) {
  return std::any_of(findings.begin(), findings.end(), [](const Finding& f) { return f.severity == Severity::error; });
}

AlphaBounds alpha_bounds(const SystemSpec& spec) {
  AlphaBounds b{0.0, 1.0};
  for (const auto& l : spec.schedule.levels) {
    for (const auto& m : l.maps) {
      const SingularValues sv = singular_values_unchecked(m);
      b.alpha_plus = std::max(b.alpha_plus, sv.values.front());
      b.alpha_minus = std::min(b.alpha_minus, sv.values.back());
    }
  }
  return b;
}

std::string_view to_string(ScheduleKind kind) {
  switch (kind) {
    case ScheduleKind::constant: return "constant";
    case ScheduleKind::periodic: return "periodic";
    case ScheduleKind::explicit_prefix_then_periodic: return "explicit_prefix_then_periodic";
    case ScheduleKind::geometric_blocks: return "geometric_blocks";
  }
  return "";
}

std::string_view to_string(TranslationKind kind) {
  switch (kind) {
    case TranslationKind::digit_grid: return "digit_grid";
    case TranslationKind::finite_alphabet: return "finite_alphabet";
    case TranslationKind::random_iid: return "random_iid";
    case TranslationKind::explicit_table: return "explicit";
  }
  return "";
}

std::string_view to_string(Severity severity) { return severity == Severity::error ? "error" : "warning"; }

}  // namespace moran
