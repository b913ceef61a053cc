#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "moran/system.hpp"
#include "moran/tree.hpp"

namespace moran {

// Word-indexed translations w_{u|j} for the scheme of a system. Resolution is
// incremental: the state after j digits determines w for the prefix u|j.
class TranslationResolver {
 public:
  explicit TranslationResolver(const SystemSpec& spec);

  struct State {
    std::uint64_t hash = 0;
    std::vector<std::uint32_t> prefix;  // kept only for explicit tables
  };

  State root() const;
  // Advances to the prefix extended by `digit` at depth k and writes w for it.
  State step(const State& parent, std::int64_t k, std::uint32_t digit, std::span<double> w) const;

 private:
  const SystemSpec* spec_;
  std::map<std::vector<std::uint32_t>, Vector> table_;
};

// Finite-depth image of a word: w_{u_1} + T_{u_1} w_{u_1u_2} + ... + T_{u|K} x0
// with x0 the center of the seed region.
Vector project(const SystemSpec& spec, const Word& w);

enum class SampleMode { full_enumeration, random_codes };

struct PointCloud {
  int dim = 0;
  std::vector<double> coords;  // row-major, dim per point
  std::int64_t depth = 0;
  SampleMode mode = SampleMode::random_codes;
  std::uint64_t seed = 0;
  std::int64_t count = 0;
  double truncation_error = 0.0;  // alpha_+^K |J|

  std::size_t size() const { return dim == 0 ? 0 : coords.size() / dim; }
  std::span<const double> point(std::size_t i) const { return {coords.data() + i * dim, static_cast<std::size_t>(dim)}; }
};

inline constexpr std::int64_t kMaxEnumeration = 10'000'000;

// full_enumeration ignores count and seed apart from the translation scheme.
PointCloud sample_cloud(const SystemSpec& spec, std::int64_t depth, SampleMode mode, std::int64_t count,
                        std::uint64_t seed);

std::int64_t box_count(const PointCloud& cloud, double epsilon);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

LineFit fit_line(std::span<const double> x, std::span<const double> y);

struct BoxCountCurve {
  std::vector<double> scales;         // used scales, decreasing
  std::vector<std::int64_t> counts;
  std::vector<double> dropped_scales;  // saturated scales left out of the fit
  std::vector<std::int64_t> dropped_counts;
  LineFit fit;
};

// Least-squares fit of log N_eps against log(1/eps). Scales whose count
// exceeds a quarter of the cloud are dropped as saturated.
BoxCountCurve boxdim_fit(const PointCloud& cloud, std::span<const double> scales);

// Geometric scales b^{-j}, b = 1/alpha_+ when that is an integer and 2
// otherwise, kept above twice the diameter of the depth-K pieces.
std::vector<double> default_scales(const SystemSpec& spec, std::int64_t depth);

std::string curve_csv(const BoxCountCurve& curve);

struct Raster {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // row 0 is the top row

  std::int64_t occupied() const;
};

// Binary raster of a planar cloud over the seed region; the lower-left pixel
// corner sits at the lower-left corner of the region.
Raster render(const PointCloud& cloud, const Box& frame, int resolution);

std::string pgm_bytes(const Raster& raster);
void write_file(const std::string& path, const std::string& bytes);

std::string_view to_string(SampleMode mode);

}  // namespace moran
