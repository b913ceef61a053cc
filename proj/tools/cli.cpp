#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "moran/attractor.hpp"
#include "moran/dims.hpp"
#include "moran/error.hpp"
#include "moran/fixtures.hpp"
#include "moran/parallel.hpp"
#include "moran/report.hpp"
#include "moran/symbolic.hpp"

namespace moran::cli {

using nlohmann::json;

namespace {

struct Options {
  // shared
  std::string fixture;
  std::string config;
  int threads = 0;
  bool pretty = false;
  std::string out;
  // dims
  std::string which = "sstar,sa";
  double tol = 0.01;
  std::int64_t node_budget = kDefaultNodeBudget;
  std::vector<double> eps;
  std::string pairs;
  std::int64_t kmax = 4096;
  // sampling
  std::int64_t depth = 0;
  std::int64_t count = 200000;
  std::uint64_t seed = 0;
  std::vector<double> scales;
  std::string mode = "auto";
  int resolution = 512;
  // cutset
  double s = 0.0;
  double epsilon = 0.0;
  bool aggregate = false;
};

struct Loaded {
  SystemSpec spec;
  std::string source;
};

int exit_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::ContractionViolated:
    case ErrorCode::NonsingularityViolated:
    case ErrorCode::NotApplicable:
      return inapplicable;
    case ErrorCode::BudgetExceeded:
    case ErrorCode::DegenerateScales:
      return budget;
    default:
      return config_error;
  }
}

Loaded load(const Options& o) {
  const std::string name = !o.fixture.empty() ? o.fixture : o.config;
  if (name.empty()) throw Error(ErrorCode::InvalidArgument, "no configuration: pass --fixture NAME or a config path");
  const auto names = fixture_names();
  if (std::find(names.begin(), names.end(), name) != names.end()) return {fixture(name), name};
  std::ifstream in(name, std::ios::binary);
  if (!in) throw Error(ErrorCode::InvalidArgument, "cannot read configuration '" + name + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return {parse_spec(buf.str(), ParseOptions{.check_assumptions = false}), name};
}

// Raises the first assumption violation among the findings.
void require(const std::vector<Finding>& findings, bool nonsingular) {
  for (const Finding& f : findings) {
    if (f.code == "ContractionViolated") throw Error(ErrorCode::ContractionViolated, f.message);
    if (nonsingular && f.code == "NonsingularityViolated") throw Error(ErrorCode::NonsingularityViolated, f.message);
  }
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (c != ' ') {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::vector<std::pair<std::int64_t, std::int64_t>> parse_pairs(const std::string& text) {
  std::vector<std::pair<std::int64_t, std::int64_t>> out;
  for (const std::string& item : split(text, ',')) {
    const auto parts = split(item, ':');
    if (parts.size() != 2) throw Error(ErrorCode::InvalidArgument, "depth pairs are written k:K, got '" + item + "'");
    try {
      out.emplace_back(std::stoll(parts[0]), std::stoll(parts[1]));
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidArgument, "bad depth pair '" + item + "'");
    }
  }
  return out;
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

void print_report(std::ostream& out, const json& j, bool pretty) {
  if (!pretty) {
    out << j.dump() << '\n';
    return;
  }
  const auto& est = j["estimate"];
  out << std::left << std::setw(14) << j.value("quantity", std::string("?")) << "  estimate "
      << (est.is_number() ? format_number(est.get<double>()) : std::string("n/a"));
  if (j.contains("bracket") && j["bracket"][0].is_number()) {
    out << "  bracket [" << format_number(j["bracket"][0].get<double>()) << ", "
        << format_number(j["bracket"][1].get<double>()) << "]";
  }
  if (j.contains("r2")) out << "  r2 " << format_number(j["r2"].get<double>());
  if (j.contains("flags") && !j["flags"].empty()) {
    out << "  flags";
    for (const auto& f : j["flags"]) out << ' ' << f.get<std::string>();
  }
  out << '\n';
}

std::int64_t words_at_depth(const SystemSpec& spec, std::int64_t depth, std::int64_t cap) {
  std::int64_t total = 1;
  for (std::int64_t k = 1; k <= depth; ++k) {
    total *= spec.level(k).branch_count;
    if (total > cap) return cap + 1;
  }
  return total;
}

SampleMode choose_mode(const Options& o, const SystemSpec& spec, std::int64_t depth) {
  if (o.mode == "full") return SampleMode::full_enumeration;
  if (o.mode == "random") return SampleMode::random_codes;
  if (o.mode != "auto") throw Error(ErrorCode::InvalidArgument, "mode must be auto, full or random");
  return words_at_depth(spec, depth, o.count) <= o.count ? SampleMode::full_enumeration : SampleMode::random_codes;
}

void write_manifest(const std::string& command, const Options& o, const std::string& source, json parameters,
                    const std::vector<std::string>& outputs, double seconds) {
  json m = {{"tool", "moran_dim"},
            {"version", kVersion},
            {"command", command},
            {"source", source},
            {"parameters", std::move(parameters)},
            {"seed", o.seed},
            {"threads", thread_count()},
            {"outputs", outputs},
            {"wall_time_seconds", seconds}};
  write_file(o.out + ".manifest.json", m.dump(2) + "\n");
}

int cmd_validate(const Options& o, std::ostream& out) {
  const Loaded l = load(o);
  const auto findings = validate(l.spec);
  const bool errors = has_errors(findings);
  json j = {{"command", "validate"}, {"source", l.source}, {"ok", !errors}, {"findings", to_json(findings)}};
  if (o.pretty) {
    out << l.source << ": " << (errors ? "invalid" : "ok") << '\n';
    for (const Finding& f : findings) out << "  " << f.code << " (" << to_string(f.severity) << "): " << f.message << '\n';
  } else {
    out << j.dump() << '\n';
  }
  return errors ? inapplicable : ok;
}

int cmd_dims(const Options& o, std::ostream& out, std::ostream& err) {
  const Loaded l = load(o);
  const auto findings = validate(l.spec);
  require(findings, true);
  const auto which = split(o.which, ',');
  for (const std::string& w : which) {
    if (w != "sstar" && w != "sa" && w != "falconer" && w != "moran") {
      throw Error(ErrorCode::InvalidArgument, "unknown estimator '" + w + "' (choose from sstar, sa, falconer, moran)");
    }
  }
  int status = ok;
  auto emit = [&](const DimensionReport& r) {
    print_report(out, to_json(r), o.pretty);
    if (r.indeterminate() && status == ok) status = budget;
  };
  auto inapplicable_estimator = [&](const std::string& w, const std::string& why) {
    json j = {{"quantity", w}, {"error", "NotApplicable"}, {"message", why}};
    if (o.pretty) err << w << ": not applicable: " << why << '\n';
    else out << j.dump() << '\n';
    status = inapplicable;
  };
  for (const std::string& w : which) {
    if (w == "sstar") {
      SstarOptions so;
      so.tol = o.tol;
      so.node_budget = o.node_budget;
      for (double e : o.eps) {
        if (!(e > 0.0 && e < 1.0)) throw Error(ErrorCode::InvalidArgument, "epsilon values must lie in (0, 1)");
        so.log_eps_schedule.push_back(std::log(e));
      }
      emit(estimate_sstar(l.spec, so));
    } else if (w == "sa") {
      SAOptions sa;
      sa.tol = o.tol;
      sa.node_budget = o.node_budget;
      sa.depth_schedule = parse_pairs(o.pairs);
      emit(estimate_sA(l.spec, sa));
    } else if (w == "falconer") {
      if (!l.spec.is_stationary()) {
        inapplicable_estimator(w, "the affine dimension needs a stationary (constant) schedule");
        continue;
      }
      DimensionReport r = pressure_root(l.spec.schedule.levels.front(), std::min(o.tol, 1e-6), 0, o.node_budget);
      r.findings = findings;
      emit(r);
    } else {
      try {
        const auto [lower, upper] = moran_dims(l.spec, o.kmax);
        emit(lower);
        emit(upper);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::NotApplicable) throw;
        inapplicable_estimator(w, e.message());
      }
    }
  }
  return status;
}

int cmd_boxdim(const Options& o, std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  const Loaded l = load(o);
  const auto findings = validate(l.spec);
  require(findings, false);
  const std::int64_t depth = o.depth > 0 ? o.depth : 12;
  const SampleMode mode = choose_mode(o, l.spec, depth);
  const PointCloud cloud = sample_cloud(l.spec, depth, mode, o.count, o.seed);
  const std::vector<double> scales = o.scales.empty() ? default_scales(l.spec, depth) : o.scales;
  const BoxCountCurve curve = boxdim_fit(cloud, scales);
  const std::string csv = curve_csv(curve);

  const std::size_t n = curve.scales.size();
  const double se = (n > 2 && curve.fit.r2 > 0.0)
                        ? std::abs(curve.fit.slope) * std::sqrt(std::max(0.0, 1.0 / curve.fit.r2 - 1.0) / (n - 2))
                        : 0.0;
  json flags = json::array();
  if (!curve.dropped_scales.empty()) flags.push_back("saturated_scales_dropped");
  if (curve.fit.r2 < 0.98) flags.push_back("low_r2");
  json trace = json::array();
  for (std::size_t i = 0; i < n; ++i) {
    trace.push_back({{"epsilon", curve.scales[i]}, {"count", curve.counts[i]}});
  }
  json j = {{"quantity", "boxdim_slope"},
            {"estimate", curve.fit.slope},
            {"bracket", {curve.fit.slope - 2 * se, curve.fit.slope + 2 * se}},
            {"r2", curve.fit.r2},
            {"intercept", curve.fit.intercept},
            {"schedule", {{"kind", "scales"}, {"values", curve.scales}}},
            {"flags", flags},
            {"trace", trace},
            {"cloud",
             {{"depth", depth},
              {"mode", std::string(to_string(mode))},
              {"points", cloud.size()},
              {"seed", o.seed},
              {"truncation_error", cloud.truncation_error}}},
            {"findings", to_json(findings)}};
  if (!o.out.empty()) {
    write_file(o.out, csv);
    j["outputs"] = {o.out};
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_manifest("boxdim", o, l.source,
                   {{"depth", depth}, {"count", o.count}, {"mode", std::string(to_string(mode))}, {"scales", scales}},
                   {o.out}, secs);
  }
  print_report(out, j, o.pretty);
  return ok;
}

int cmd_render(const Options& o, std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  const Loaded l = load(o);
  const auto findings = validate(l.spec);
  require(findings, false);
  if (l.spec.dim != 2) {
    throw Error(ErrorCode::NotApplicable, "rendering needs d = 2; '" + l.source + "' has d = " + std::to_string(l.spec.dim));
  }
  const std::int64_t depth = o.depth > 0 ? o.depth : 8;
  const SampleMode mode = choose_mode(o, l.spec, depth);
  const PointCloud cloud = sample_cloud(l.spec, depth, mode, o.count, o.seed);
  const Raster raster = render(cloud, l.spec.seed_region, o.resolution);
  const std::string path = o.out.empty() ? "render.pgm" : o.out;
  write_file(path, pgm_bytes(raster));
  Options with_out = o;
  with_out.out = path;
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_manifest("render", with_out, l.source,
                 {{"depth", depth}, {"count", o.count}, {"mode", std::string(to_string(mode))}, {"resolution", o.resolution}},
                 {path}, secs);
  json j = {{"command", "render"},
            {"output", path},
            {"resolution", o.resolution},
            {"occupied", raster.occupied()},
            {"points", cloud.size()},
            {"depth", depth},
            {"mode", std::string(to_string(mode))}};
  if (o.pretty) out << path << ": " << raster.occupied() << " occupied pixels of " << o.resolution << "x" << o.resolution << '\n';
  else out << j.dump() << '\n';
  return ok;
}

int cmd_cutset(const Options& o, std::ostream& out) {
  const Loaded l = load(o);
  require(validate(l.spec), true);
  const CutSet c = cutset(l.spec, o.s, o.epsilon, o.node_budget, o.aggregate);
  std::string csv = c.aggregated ? "word,depth,log_phi,log_multiplicity\n" : "word,depth,log_phi\n";
  char buf[96];
  for (const CutEntry& e : c.entries) {
    for (std::size_t i = 0; i < e.word.digits.size(); ++i) {
      if (i) csv += '.';
      csv += std::to_string(e.word.digits[i]);
    }
    std::snprintf(buf, sizeof buf, ",%lld,%.17g", static_cast<long long>(e.depth), e.log_phi);
    csv += buf;
    if (c.aggregated) {
      std::snprintf(buf, sizeof buf, ",%.17g", e.log_multiplicity);
      csv += buf;
    }
    csv += '\n';
  }
  if (o.out.empty()) {
    out << csv;
  } else {
    write_file(o.out, csv);
    json j = {{"command", "cutset"},
              {"output", o.out},
              {"s", c.s},
              {"m", c.m},
              {"epsilon", c.epsilon},
              {"entries", c.entries.size()},
              {"truncated", c.truncated},
              {"node_budget_used", c.node_budget_used},
              {"log_sum", cutset_log_sum(c)}};
    out << j.dump() << '\n';
  }
  return c.truncated ? budget : ok;
}

int cmd_fixtures(const Options& o, std::ostream& out) {
  if (!o.fixture.empty()) {
    out << json::parse(fixture_document(o.fixture)).dump() << '\n';
    return ok;
  }
  if (o.pretty) {
    for (const auto& n : fixture_names()) out << n << '\n';
  } else {
    out << json{{"fixtures", fixture_names()}}.dump() << '\n';
  }
  return ok;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Dimension estimates for self-affine Moran systems", "moran_dim"};
  app.set_version_flag("--version", std::string("moran_dim ") + kVersion);
  app.require_subcommand(1);
  Options o;

  auto shared = [&](CLI::App* sub) {
    sub->add_option("--fixture", o.fixture, "bundled fixture name or config path");
    sub->add_option("config", o.config, "config path");
    sub->add_option("--threads", o.threads, "worker threads (default MORAN_DIM_THREADS or all cores)")->check(CLI::NonNegativeNumber);
    sub->add_flag("--pretty", o.pretty, "human-readable output");
  };

  auto* validate_cmd = app.add_subcommand("validate", "check the standing assumptions");
  shared(validate_cmd);

  auto* dims = app.add_subcommand("dims", "critical values and dimension formulas");
  shared(dims);
  dims->add_option("--which", o.which, "comma list from sstar,sa,falconer,moran")->capture_default_str();
  dims->add_option("--tol", o.tol, "bisection tolerance")->capture_default_str();
  dims->add_option("--node-budget", o.node_budget, "expanded-node budget per tree computation")->capture_default_str();
  dims->add_option("--eps", o.eps, "explicit epsilon schedule for s*")->delimiter(',');
  dims->add_option("--pairs", o.pairs, "explicit depth pairs k:K,... for s_A");
  dims->add_option("--kmax", o.kmax, "depth range for the Moran formulas")->capture_default_str();

  auto* box = app.add_subcommand("boxdim", "box-counting slope of a sampled attractor");
  shared(box);
  box->add_option("--depth", o.depth, "word length of sampled points (default 12)");
  box->add_option("--count", o.count, "number of random codes")->capture_default_str();
  box->add_option("--seed", o.seed, "sampling seed")->capture_default_str();
  box->add_option("--scales", o.scales, "comma list of box sizes")->delimiter(',');
  box->add_option("--mode", o.mode, "auto, full or random")->capture_default_str();
  box->add_option("--out", o.out, "CSV output path (a manifest is written beside it)");

  auto* rend = app.add_subcommand("render", "binary raster of a planar attractor");
  shared(rend);
  rend->add_option("--depth", o.depth, "word length of sampled points (default 8)");
  rend->add_option("--count", o.count, "number of random codes")->capture_default_str();
  rend->add_option("--seed", o.seed, "sampling seed")->capture_default_str();
  rend->add_option("--mode", o.mode, "auto, full or random")->capture_default_str();
  rend->add_option("--resolution", o.resolution, "pixels per side")->capture_default_str();
  rend->add_option("--out", o.out, "PGM output path (default render.pgm)");

  auto* cut = app.add_subcommand("cutset", "dump a cut-set as CSV");
  shared(cut);
  cut->add_option("--s", o.s, "exponent s > 0")->required();
  cut->add_option("--epsilon", o.epsilon, "scale in (0, 1)")->required();
  cut->add_option("--node-budget", o.node_budget, "expanded-node budget")->capture_default_str();
  cut->add_flag("--aggregate", o.aggregate, "fold children with identical maps");
  cut->add_option("--out", o.out, "CSV output path (stdout when absent)");

  auto* fix = app.add_subcommand("fixtures", "list bundled fixtures or print one");
  fix->add_option("--fixture", o.fixture, "fixture to print");
  fix->add_flag("--pretty", o.pretty, "one name per line");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? ok : config_error;
  }

  set_thread_count(o.threads);
  try {
    if (*validate_cmd) return cmd_validate(o, out);
    if (*dims) return cmd_dims(o, out, err);
    if (*box) return cmd_boxdim(o, out);
    if (*rend) return cmd_render(o, out);
    if (*cut) return cmd_cutset(o, out);
    if (*fix) return cmd_fixtures(o, out);
  } catch (const Error& e) {
    err << json{{"error", std::string(to_string(e.code()))}, {"message", e.message()}}.dump() << '\n';
    return exit_for(e.code());
  } catch (const std::exception& e) {
    err << json{{"error", "Failure"}, {"message", e.what()}}.dump() << '\n';
    return config_error;
  }
  return config_error;
}

}  // namespace moran::cli
