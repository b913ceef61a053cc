// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero when any criterion fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <unistd.h>

#include "cli.hpp"
#include "json.hpp"
#include "moran/attractor.hpp"
#include "moran/dims.hpp"
#include "moran/fixtures.hpp"
#include "moran/kernels.hpp"
#include "moran/symbolic.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace moran;
using nlohmann::json;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct CliRun {
  int code;
  std::string out;
  double seconds;
};

CliRun cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const auto t0 = std::chrono::steady_clock::now();
  const int code = cli::run(args, out, err);
  return {code, out.str(), seconds_since(t0)};
}

std::vector<json> json_lines(const std::string& text) {
  std::vector<json> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);)
    if (!line.empty()) out.push_back(json::parse(line));
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

const fs::path& scratch() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("moran_acceptance_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

// s* and s_A per fixture at default settings, computed once.
struct Critical {
  double sstar = NAN, sa = NAN;
};
const Critical& critical(const std::string& name) {
  static std::map<std::string, Critical> cache;
  auto it = cache.find(name);
  if (it != cache.end()) return it->second;
  const SystemSpec spec = fixture(name);
  const auto ss = estimate_sstar(spec);
  const auto sa = estimate_sA(spec);
  Critical c;
  if (ss.estimate) c.sstar = *ss.estimate;
  if (sa.estimate) c.sa = *sa.estimate;
  return cache.emplace(name, c).first->second;
}

LevelSpec identical_maps(int n, const Matrix& m) {
  LevelSpec l;
  l.branch_count = n;
  l.maps.assign(n, m);
  return l;
}

Matrix diag2(double a, double b) {
  const double e[] = {a, b};
  return Matrix::diagonal(e);
}

const std::vector<std::string> kRegular = {"middle_thirds", "example_5_3", "example_5_4",   "sierpinski_carpet",
                                           "cantor_dust",   "similarity_pair", "diag_triple", "random_pair",
                                           "random_translation", "moran_two_phase"};

Outcome criterion1() {
  const auto r = cli({"dims", "--fixture", "example_5_4"});
  if (r.code != 0) return {false, fmt("exit %d", r.code)};
  const auto rep = json_lines(r.out);
  if (rep.size() != 2 || rep[0]["estimate"].is_null() || rep[1]["estimate"].is_null()) return {false, "missing estimates"};
  const double ss = rep[0]["estimate"], sa = rep[1]["estimate"];
  const bool ok = std::abs(ss - 4.0 / 3) <= 0.05 && std::abs(sa - 7.0 / 6) <= 0.05 && r.seconds <= 60;
  return {ok, fmt("s*=%.4f (4/3) s_A=%.4f (7/6) in %.1fs", ss, sa, r.seconds)};
}

Outcome criterion2() {
  const auto r = cli({"boxdim", "--fixture", "example_5_4"});
  if (r.code != 0) return {false, fmt("exit %d", r.code)};
  const json j = json::parse(r.out);
  const double slope = j["estimate"], r2 = j["r2"];
  const double target = (5 * std::log(3.0) + 3 * std::log(2.0)) / (6 * std::log(3.0));
  const bool ok = std::abs(slope - target) <= 0.08 && r2 >= 0.98 && r.seconds <= 120;
  return {ok, fmt("slope=%.4f target=%.4f r2=%.4f in %.1fs", slope, target, r2, r.seconds)};
}

Outcome criterion3() {
  const double tol = 0.01;
  std::string worst;
  bool ok = true;
  for (const auto& name : kRegular) {
    const Critical& c = critical(name);
    if (!(c.sa <= c.sstar + 2 * tol)) {
      ok = false;
      worst += fmt(" %s(s_A=%.4f s*=%.4f)", name.c_str(), c.sa, c.sstar);
    }
  }
  const Critical& e = critical("example_5_4");
  const double gap = e.sstar - e.sa;
  ok = ok && gap >= 0.10;
  return {ok, fmt("%zu fixtures ordered, example_5_4 gap %.4f", kRegular.size(), gap) + worst};
}

Outcome criterion4() {
  bool ok = true;
  std::string detail;
  for (const char* name : {"similarity_pair", "diag_triple", "random_pair"}) {
    const SystemSpec spec = fixture(name);
    const double p = *pressure_root(spec.schedule.levels.front()).estimate;
    const Critical& c = critical(name);
    const double d1 = std::abs(c.sstar - p), d2 = std::abs(c.sa - p);
    ok = ok && d1 <= 0.02 && d2 <= 0.02;
    detail += fmt("%s p=%.4f |s*-p|=%.4f |s_A-p|=%.4f; ", name, p, d1, d2);
  }
  return {ok, detail};
}

Outcome criterion5() {
  const double a = *pressure_root(identical_maps(2, Matrix::scalar(2, 1.0 / 3))).estimate;
  const double b = *pressure_root(identical_maps(4, Matrix::scalar(2, 0.5))).estimate;
  const double c = *pressure_root(identical_maps(3, diag2(0.5, 0.25))).estimate;
  const double ea = std::abs(a - std::log(2.0) / std::log(3.0)), eb = std::abs(b - 2.0),
               ec = std::abs(c - (1 + std::log(1.5) / std::log(4.0)));
  return {ea <= 1e-6 && eb <= 1e-6 && ec <= 1e-6, fmt("errors %.2e %.2e %.2e", ea, eb, ec)};
}

Outcome criterion6() {
  int violations = 0, checks = 0;
  double worst = 0.0;
  for (std::uint64_t seed = 100; seed < 150; ++seed) {
    const int levels = 2 + static_cast<int>(seed % 2);
    const SystemSpec spec = oracle::random_spec(seed, levels);
    for (double s : {0.3, 0.9, 1.4, 2.2}) {
      for (int K = 1; K <= levels; ++K) {
        const double dp = net_measure(spec, s, 1, K).value;
        const double brute = oracle::brute_force_net_measure(spec, s, 1, K);
        worst = std::max(worst, std::abs(dp - brute));
        ++checks;
        if (std::abs(dp - brute) > 1e-12) ++violations;
      }
    }
  }
  return {violations == 0, fmt("%d comparisons on 50 specs, max diff %.2e", checks, worst)};
}

Outcome criterion7() {
  SplitMix64 rng(2024);
  int sub = 0, mono = 0, cont = 0;
  for (int i = 0; i < 1000; ++i) {
    const Matrix a = oracle::random_contraction(rng, 2, 0.95);
    const Matrix b = oracle::random_contraction(rng, 2, 0.95);
    const Matrix ab = mat_mul(a, b);
    for (double s : {0.3, 1.0, 1.5, 2.0, 2.7}) {
      if (phi(ab, s) > phi(a, s) * phi(b, s) * (1 + 1e-9)) ++sub;
      if (!(phi(a, s) > phi(a, s + 0.01))) ++mono;
    }
    for (int m = 1; m <= 2; ++m) {
      const double at = phi(a, m);
      if (std::abs(phi(a, m - 1e-9) - at) > 1e-7 * at || std::abs(phi(a, m + 1e-9) - at) > 1e-7 * at) ++cont;
    }
  }
  return {sub + mono + cont == 0, fmt("violations: submultiplicative %d, monotone %d, breakpoint %d", sub, mono, cont)};
}

Outcome criterion8() {
  const SystemSpec spec = fixture("moran_two_phase");
  const double upper = *moran_dims(spec).second.estimate;
  const double ss = critical("moran_two_phase").sstar;
  return {std::abs(ss - upper) <= 0.05, fmt("s*=%.4f d^*=%.4f", ss, upper)};
}

Outcome criterion9() {
  int cover = 0, bound = 0, words_checked = 0;
  for (const auto& name : kRegular) {
    const SystemSpec s = fixture(name);
    const double amin = alpha_bounds(s).alpha_minus;
    for (double sv : {0.5, 1.5}) {
      // smallest eps in 1e-3 * sqrt(10)^i whose cut-set fits the budget
      double eps = 1e-3;
      CutSet c = cutset(s, sv, eps, 2'000'000);
      while (c.truncated) {
        eps *= std::sqrt(10.0);
        c = cutset(s, sv, eps, 2'000'000);
      }
      std::set<std::vector<std::uint32_t>> words;
      std::int64_t max_depth = 0;
      const int m = cut_index(sv, s.dim);
      for (const auto& e : c.entries) {
        words.insert(e.word.digits);
        max_depth = std::max(max_depth, e.depth);
        const double am = singular_values_unchecked(oracle::word_product(s, e.word.digits)).values[m - 1];
        ++words_checked;
        if (!(am <= eps * (1 + 1e-9) && am > amin * eps)) ++bound;
      }
      SplitMix64 rng(mix64(std::hash<std::string>{}(name) ^ static_cast<std::uint64_t>(sv * 10)));
      for (int i = 0; i < 100; ++i) {
        std::vector<std::uint32_t> code;
        for (std::int64_t k = 1; k <= max_depth; ++k) code.push_back(1 + rng.below(s.level(k).branch_count));
        if (oracle::prefixes_hit(words, code) != 1) ++cover;
      }
    }
  }
  return {cover + bound == 0, fmt("%d entries checked; cover violations %d, bound violations %d", words_checked, cover, bound)};
}

Outcome criterion10() {
  auto has = [](const CliRun& r, const char* code) { return r.out.find(code) != std::string::npos; };
  const auto a = cli({"validate", "--fixture", "example_5_1"});
  const auto b = cli({"validate", "--fixture", "example_5_2"});
  const auto c = cli({"validate", "--fixture", "middle_thirds"});
  const bool clean = json::parse(c.out)["findings"].empty();
  const bool ok = a.code == 2 && has(a, "DiameterNotVanishing") && b.code == 2 && has(b, "NonsingularityViolated") &&
                  c.code == 0 && clean;
  return {ok, fmt("exit codes %d/%d/%d", a.code, b.code, c.code)};
}

Outcome criterion11() {
  SystemSpec spec = fixture("random_translation");
  const double sa = critical("random_translation").sa;
  int good = 0;
  std::string slopes;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    spec.translations.seed = seed;
    const std::int64_t depth = 12;
    const PointCloud cloud = sample_cloud(spec, depth, SampleMode::random_codes, 200000, 0);
    const double slope = boxdim_fit(cloud, default_scales(spec, depth)).fit.slope;
    if (slope >= sa - 0.1) ++good;
    slopes += fmt(" %.4f", slope);
  }
  return {good >= 4, fmt("s_A=%.4f, %d/5 slopes >= s_A-0.1:", sa, good) + slopes};
}

Outcome criterion12() {
  const fs::path dir = scratch();
  struct Cmd {
    std::vector<std::string> args;
    std::string file;  // output file compared besides stdout, may be empty
  };
  const std::string csv = (dir / "curve.csv").string(), pgm = (dir / "img.pgm").string(), cut = (dir / "cut.csv").string();
  const std::vector<Cmd> cmds = {
      {{"boxdim", "--fixture", "random_translation", "--seed", "5", "--count", "100000", "--out", csv}, csv},
      {{"boxdim", "--fixture", "example_5_4", "--depth", "10", "--seed", "7", "--out", csv}, csv},
      {{"render", "--fixture", "random_translation", "--depth", "10", "--count", "50000", "--seed", "9", "--out", pgm}, pgm},
      {{"render", "--fixture", "example_5_3", "--depth", "8", "--resolution", "512", "--out", pgm}, pgm},
      {{"dims", "--fixture", "example_5_4"}, ""},
      {{"dims", "--fixture", "diag_triple", "--which", "sstar,sa,falconer"}, ""},
      {{"cutset", "--fixture", "random_pair", "--s", "1.2", "--epsilon", "1e-4", "--out", cut}, cut},
  };
  int mismatches = 0;
  for (const Cmd& c : cmds) {
    std::string first_out, first_file;
    bool first = true;
    for (const char* threads : {"1", "1", "8", "8"}) {
      auto args = c.args;
      args.push_back("--threads");
      args.push_back(threads);
      const auto r = cli(args);
      const std::string file = c.file.empty() ? "" : slurp(c.file);
      if (first) {
        first_out = r.out;
        first_file = file;
        first = false;
      } else if (r.out != first_out || file != first_file) {
        ++mismatches;
      }
    }
  }
  return {mismatches == 0, fmt("%zu commands x threads {1,1,8,8}: %d mismatches", cmds.size(), mismatches)};
}

}  // namespace

int main() {
  const std::vector<std::function<Outcome()>> criteria = {criterion1, criterion2,  criterion3,  criterion4,
                                                          criterion5, criterion6,  criterion7,  criterion8,
                                                          criterion9, criterion10, criterion11, criterion12};
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      o = criteria[i]();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::cout << "criterion " << (i + 1) << ": " << (o.pass ? "PASS" : "FAIL") << " - " << o.detail
              << fmt(" [%.1fs]", seconds_since(t0)) << std::endl;
  }
  fs::remove_all(scratch());
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
