#include <cmath>
#include <set>

#include "doctest.h"
#include "moran/attractor.hpp"
#include "moran/error.hpp"
#include "moran/fixtures.hpp"
#include "moran/parallel.hpp"

using namespace moran;

namespace {

Word repeat(std::uint32_t first, std::uint32_t rest, int n) {
  Word w;
  w.digits.push_back(first);
  for (int i = 1; i < n; ++i) w.digits.push_back(rest);
  return w;
}

PointCloud manual_cloud(int dim, std::vector<double> coords) {
  PointCloud c;
  c.dim = dim;
  c.coords = std::move(coords);
  c.mode = SampleMode::full_enumeration;
  c.count = static_cast<std::int64_t>(c.size());
  return c;
}

}  // namespace

TEST_CASE("projection") {
  const SystemSpec mt = fixture("middle_thirds");
  const Vector p = project(mt, repeat(2, 2, 20));
  CHECK(std::abs(p[0] - 1.0) <= std::pow(3.0, -20));
  const SystemSpec e52 = fixture("example_5_2");
  const Vector q = project(e52, repeat(2, 1, 30));
  CHECK(std::abs(q[0] - 1.0) <= std::pow(0.5, 29));
  CHECK(std::abs(q[1]) <= std::pow(0.5, 29));
  const SystemSpec rp = fixture("random_pair");
  const Vector x0 = rp.seed_region.center();
  for (std::uint32_t j = 1; j <= 2; ++j) {
    const Vector r = project(rp, Word{{j}});
    const Matrix& t = rp.level(1).maps[j - 1];
    for (int i = 0; i < 2; ++i) {
      const double expect = rp.level(1).digits[j - 1][i] + t(i, 0) * x0[0] + t(i, 1) * x0[1];
      CHECK(r[i] == doctest::Approx(expect).epsilon(1e-15));
    }
  }
}

TEST_CASE("clouds") {
  const SystemSpec mt = fixture("middle_thirds");
  const PointCloud c = sample_cloud(mt, 5, SampleMode::full_enumeration, 0, 0);
  REQUIRE(c.size() == 32);
  for (double x : c.coords) CHECK((x >= 0.0 && x <= 1.0));
  CHECK(box_count(c, std::pow(3.0, -4)) == 16);

  const SystemSpec e54 = fixture("example_5_4");
  const PointCloud a = sample_cloud(e54, 8, SampleMode::random_codes, 100000, 42);
  const PointCloud b = sample_cloud(e54, 8, SampleMode::random_codes, 100000, 42);
  CHECK(a.size() == 100000);
  CHECK(a.coords == b.coords);
  int outside = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!e54.seed_region.contains(a.point(i), a.truncation_error)) ++outside;
  CHECK(outside == 0);
  const PointCloud other = sample_cloud(e54, 8, SampleMode::random_codes, 1000, 43);
  CHECK(other.coords != std::vector<double>(a.coords.begin(), a.coords.begin() + 2000));
  CHECK_THROWS_AS(sample_cloud(e54, 20, SampleMode::full_enumeration, 0, 0), Error);
}

TEST_CASE("random translations stay in their region and are reproducible") {
  const SystemSpec rt = fixture("random_translation");
  const TranslationResolver res(rt);
  auto st = res.root();
  std::vector<double> w(2);
  for (int k = 1; k <= 50; ++k) {
    st = res.step(st, k, 1 + (k % 3), w);
    CHECK((w[0] >= 0.0 && w[0] <= 0.6 && w[1] >= 0.0 && w[1] <= 0.6));
  }
  const PointCloud a = sample_cloud(rt, 10, SampleMode::random_codes, 5000, 1);
  const PointCloud b = sample_cloud(rt, 10, SampleMode::random_codes, 5000, 1);
  CHECK(a.coords == b.coords);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(rt.seed_region.contains(a.point(i), a.truncation_error));
}

TEST_CASE("box counts") {
  CHECK(box_count(manual_cloud(2, {0.1, 0.1, 0.6, 0.1}), 0.5) == 2);
  CHECK(box_count(manual_cloud(2, {0.3, 0.7}), 1e-6) == 1);
  const PointCloud c = sample_cloud(fixture("sierpinski_carpet"), 4, SampleMode::full_enumeration, 0, 0);
  std::int64_t prev = 0;
  for (int j = 1; j <= 12; ++j) {
    const std::int64_t n = box_count(c, std::pow(2.0, -j));
    CHECK(n >= prev);
    prev = n;
  }
}

TEST_CASE("slope fits") {
  SplitMix64 rng(9);
  std::vector<double> seg;
  for (int i = 0; i < 10000; ++i) {
    seg.push_back(rng.uniform());
    seg.push_back(0.3);
  }
  PointCloud line = manual_cloud(2, seg);
  line.mode = SampleMode::random_codes;
  std::vector<double> scales;
  for (int j = 2; j <= 8; ++j) scales.push_back(std::pow(2.0, -j));
  CHECK(std::abs(boxdim_fit(line, scales).fit.slope - 1.0) <= 0.05);

  const SystemSpec mt = fixture("middle_thirds");
  const PointCloud c = sample_cloud(mt, 12, SampleMode::full_enumeration, 0, 0);
  const auto curve = boxdim_fit(c, default_scales(mt, 12));
  CHECK(std::abs(curve.fit.slope - std::log(2.0) / std::log(3.0)) <= 0.03);
  CHECK(curve.fit.r2 >= 0.99);
  for (std::size_t i = 1; i < curve.counts.size(); ++i) CHECK(curve.counts[i] >= curve.counts[i - 1]);
  CHECK_THROWS_AS(boxdim_fit(c, std::vector<double>{0.5}), Error);
  const std::string csv = curve_csv(curve);
  CHECK(csv.rfind("epsilon,count,log_inv_eps,log_count\n", 0) == 0);
}

TEST_CASE("rasters") {
  const Box unit{{0.0, 0.0}, {1.0, 1.0}};
  const Raster empty = render(manual_cloud(2, {}), unit, 16);
  CHECK(empty.occupied() == 0);

  const PointCloud dust = sample_cloud(fixture("cantor_dust"), 4, SampleMode::full_enumeration, 0, 0);
  const Raster r = render(dust, unit, 81);
  CHECK(r.occupied() == 256);
  std::set<std::pair<int, int>> blocks;
  for (int y = 0; y < 81; ++y)
    for (int x = 0; x < 81; ++x)
      if (r.pixels[y * 81 + x]) blocks.insert({y / 9, x / 9});
  CHECK(blocks.size() == 16);

  const PointCloud carpet = sample_cloud(fixture("sierpinski_carpet"), 5, SampleMode::full_enumeration, 0, 0);
  CHECK(render(carpet, unit, 243).occupied() == 32768);

  const PointCloud e52 = sample_cloud(fixture("example_5_2"), 8, SampleMode::full_enumeration, 0, 0);
  const Raster line = render(e52, unit, 64);
  CHECK(line.occupied() > 0);
  for (int y = 0; y < 60; ++y)
    for (int x = 0; x < 64; ++x) CHECK(line.pixels[y * 64 + x] == 0);

  const std::string pgm = pgm_bytes(render(carpet, unit, 9));
  CHECK(pgm.rfind("P5\n9 9\n255\n", 0) == 0);
  CHECK(pgm.size() == std::string("P5\n9 9\n255\n").size() + 81);
  CHECK_THROWS_AS(render(sample_cloud(fixture("middle_thirds"), 3, SampleMode::full_enumeration, 0, 0), Box{{0.0}, {1.0}}, 8), Error);
}
