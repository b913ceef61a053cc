#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "moran/dims.hpp"
#include "moran/error.hpp"
#include "moran/fixtures.hpp"
#include "moran/trend.hpp"

using namespace moran;

namespace {

const double kSim = std::log(2.0) / std::log(3.0);

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

// Above-classified values must sit above every below-classified value.
bool monotone_trace(const DimensionReport& r) {
  double max_below = -1e300, min_above = 1e300;
  for (const auto& t : r.trace) {
    if (t.label.starts_with("below")) max_below = std::max(max_below, t.x);
    if (t.label.starts_with("above")) min_above = std::min(min_above, t.x);
  }
  return max_below < min_above;
}

}  // namespace

TEST_CASE("trend classification") {
  const std::vector<double> x = {1, 2, 3, 4, 5, 6};
  CHECK(classify_trend(x, std::vector<double>{0, -2, -4, -8, -10, -12}).trend == Trend::above);
  CHECK(classify_trend(x, std::vector<double>{0, 2, 4, 8, 10, 12}).trend == Trend::below);
  const auto flat = classify_trend(x, std::vector<double>{0, 0.1, 0.05, 0.02, 0.01, 0.005});
  CHECK(flat.fallback);
  CHECK(flat.trend == Trend::above);
  CHECK(classify_trend(std::vector<double>{1}, std::vector<double>{0.0}).trend == Trend::indeterminate);
}

TEST_CASE("net measure examples and monotonicity") {
  const SystemSpec mt = fixture("middle_thirds");
  CHECK(std::abs(net_measure(mt, kSim, 1, 6).value - 1.0) < 1e-12);
  CHECK(net_measure(mt, 1.0, 1, 2).value == doctest::Approx(4.0 / 9));
  const SystemSpec rp = fixture("random_pair");
  for (double s : {0.5, 0.7, 0.9}) {
    double prev = 1e300;
    for (std::int64_t K = 4; K <= 12; ++K) {
      const double v = net_measure(rp, s, 3, K).value;
      CHECK(v <= prev * (1 + 1e-12));
      prev = v;
    }
    for (std::int64_t k = 1; k < 8; ++k) CHECK(net_measure(rp, s, k, 10).value <= net_measure(rp, s, k + 1, 10).value * (1 + 1e-12));
    CHECK(net_measure(rp, s, 3, 10).value > net_measure(rp, s + 0.05, 3, 10).value);
  }
  CHECK_THROWS_AS(net_measure(rp, 1.0, 5, 4), Error);
}

TEST_CASE("closed-form pressure roots") {
  CHECK(std::abs(*pressure_root(identical_maps(2, Matrix::scalar(2, 1.0 / 3))).estimate - kSim) < 1e-6);
  CHECK(std::abs(*pressure_root(identical_maps(4, Matrix::scalar(2, 0.5))).estimate - 2.0) < 1e-6);
  const double triple = 1 + std::log(1.5) / std::log(4.0);
  CHECK(std::abs(*pressure_root(identical_maps(3, diag2(0.5, 0.25))).estimate - triple) < 1e-6);
  CHECK(std::abs(*pressure_root(fixture("random_pair").schedule.levels[0]).estimate - 0.677748) < 1e-4);
}

TEST_CASE("moran formulas") {
  LevelSpec a = identical_maps(2, Matrix::scalar(1, 0.25));
  LevelSpec b = identical_maps(3, Matrix::scalar(1, 1.0 / 3));
  SystemSpec s;
  s.dim = 1;
  s.seed_region = Box{{0.0}, {1.0}};
  s.schedule.kind = ScheduleKind::explicit_prefix_then_periodic;
  s.schedule.levels = {a, b};
  s.schedule.period = 1;
  CHECK(moran_dk(s, 1) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(moran_dk(s, 2) == doctest::Approx(std::log(6.0) / std::log(12.0)).epsilon(1e-12));
  const SystemSpec mt = fixture("middle_thirds");
  CHECK(moran_dk(mt, 1) == doctest::Approx(kSim).epsilon(1e-12));
  auto [lo, hi] = moran_dims(mt, 64);
  CHECK(*lo.estimate == doctest::Approx(kSim).epsilon(1e-12));
  CHECK(*hi.estimate == doctest::Approx(kSim).epsilon(1e-12));
  const SystemSpec two = fixture("moran_two_phase");
  std::tie(lo, hi) = moran_dims(two, 4096);
  CHECK(*lo.estimate < *hi.estimate);
  CHECK(*lo.estimate >= 0.5);
  CHECK(*hi.estimate <= 1.0);
  CHECK(*hi.estimate == doctest::Approx(std::log(18.0) / std::log(36.0)).epsilon(1e-3));
  std::tie(lo, hi) = moran_dims(two, 1);
  CHECK(*lo.estimate == doctest::Approx(*hi.estimate));
  CHECK(*lo.estimate == doctest::Approx(moran_dk(two, 1)));
  try {
    moran_dims(fixture("example_5_4"), 8);
    FAIL("expected NotApplicable");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotApplicable);
    CHECK(std::string(e.what()).find("level spec 1") != std::string::npos);
  }
}

TEST_CASE("critical values of the middle-thirds set") {
  const SystemSpec mt = fixture("middle_thirds");
  const auto ss = estimate_sstar(mt);
  const auto sa = estimate_sA(mt);
  REQUIRE(ss.estimate);
  REQUIRE(sa.estimate);
  CHECK(std::abs(*ss.estimate - kSim) <= 0.01);
  CHECK(std::abs(*sa.estimate - kSim) <= 0.01);
  CHECK(ss.hi - ss.lo <= 0.01);
  CHECK(ss.lo <= *ss.estimate);
  CHECK(*ss.estimate <= ss.hi);
  CHECK(monotone_trace(ss));
  CHECK(monotone_trace(sa));
}

TEST_CASE("example_5_4 critical values") {
  const SystemSpec e = fixture("example_5_4");
  const auto ss = estimate_sstar(e);
  const auto sa = estimate_sA(e);
  REQUIRE(ss.estimate);
  REQUIRE(sa.estimate);
  CHECK(std::abs(*ss.estimate - 4.0 / 3) <= 0.05);
  CHECK(std::abs(*sa.estimate - 7.0 / 6) <= 0.05);
  CHECK(monotone_trace(ss));
  CHECK(monotone_trace(sa));
}

TEST_CASE("short schedules end indeterminate without an estimate") {
  SstarOptions o;
  o.log_eps_schedule = {std::log(1.0 / 3)};
  const auto r = estimate_sstar(fixture("middle_thirds"), o);
  CHECK(r.indeterminate());
  CHECK_FALSE(r.estimate.has_value());
}

TEST_CASE("bad arguments") {
  SstarOptions o;
  o.tol = 0.0;
  CHECK_THROWS_AS(estimate_sstar(fixture("middle_thirds"), o), Error);
  SstarOptions inc;
  inc.log_eps_schedule = {-1.0, -0.5};
  CHECK_THROWS_AS(estimate_sstar(fixture("middle_thirds"), inc), Error);
}

TEST_CASE("assumption violations raise") {
  CHECK_THROWS_AS(estimate_sstar(fixture("example_5_2")), Error);
}
