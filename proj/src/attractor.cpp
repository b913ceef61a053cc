#include "moran/attractor.hpp"

#include <omp.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>

#include "moran/error.hpp"
#include "moran/parallel.hpp"

namespace moran {

namespace {

std::string word_string(const std::vector<std::uint32_t>& w) {
  std::string out;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i) out += '.';
    out += std::to_string(w[i]);
  }
  return out;
}

// Exceptions must not escape an OpenMP region; the first one is kept and
// rethrown after the loop.
class FirstError {
 public:
  template <class F>
  void guard(F&& f) {
    try {
      f();
    } catch (...) {
#pragma omp critical(moran_first_error)
      if (!error_) error_ = std::current_exception();
    }
  }
  void rethrow() const {
    if (error_) std::rethrow_exception(error_);
  }

 private:
  std::exception_ptr error_;
};

// Affine composition Psi_{u_1} o ... o Psi_{u_j} tracked as x -> A x + b.
struct Affine {
  Matrix a;
  std::array<double, kMaxDim> b{};
};

void compose(Affine& f, const Matrix& t, std::span<const double> w) {
  const int d = t.dim();
  for (int i = 0; i < d; ++i) {
    double acc = 0.0;
    for (int j = 0; j < d; ++j) acc += f.a(i, j) * w[j];
    f.b[i] += acc;
  }
  f.a = f.a * t;
}

void apply(const Affine& f, std::span<const double> x, double* out) {
  const int d = f.a.dim();
  for (int i = 0; i < d; ++i) {
    double acc = f.b[i];
    for (int j = 0; j < d; ++j) acc += f.a(i, j) * x[j];
    out[i] = acc;
  }
}

// Projects a word given by a digit generator; digit(k) returns u_k.
template <class Digit>
void project_into(const SystemSpec& spec, const TranslationResolver& resolver, std::int64_t depth, Digit&& digit,
                  double* out) {
  const int d = spec.dim;
  Affine f{Matrix::identity(d), {}};
  TranslationResolver::State state = resolver.root();
  double w[kMaxDim];
  for (std::int64_t k = 1; k <= depth; ++k) {
    const std::uint32_t u = digit(k);
    state = resolver.step(state, k, u, {w, static_cast<std::size_t>(d)});
    compose(f, spec.level(k).maps[u - 1], {w, static_cast<std::size_t>(d)});
  }
  const Vector x0 = spec.seed_region.center();
  apply(f, x0, out);
}

}  // namespace

TranslationResolver::TranslationResolver(const SystemSpec& spec) : spec_(&spec) {
  for (const TranslationEntry& e : spec.translations.table) table_[e.word] = e.w;
}

TranslationResolver::State TranslationResolver::root() const { return {mix64(spec_->translations.seed), {}}; }

TranslationResolver::State TranslationResolver::step(const State& parent, std::int64_t k, std::uint32_t digit,
                                                     std::span<double> w) const {
  const TranslationScheme& t = spec_->translations;
  const int d = spec_->dim;
  State next;
  next.hash = mix64(parent.hash ^ ((static_cast<std::uint64_t>(digit) << 32) | static_cast<std::uint32_t>(k)));
  switch (t.kind) {
    case TranslationKind::digit_grid: {
      const LevelSpec& level = spec_->level(k);
      if (!level.has_digits()) throw Error(ErrorCode::UnresolvedTranslation, "level without digits");
      std::copy_n(level.digits[digit - 1].begin(), d, w.begin());
      break;
    }
    case TranslationKind::finite_alphabet: {
      const auto n = static_cast<std::uint64_t>(t.alphabet.size());
      const auto index = static_cast<std::size_t>((static_cast<unsigned __int128>(next.hash) * n) >> 64);
      std::copy_n(t.alphabet[index].begin(), d, w.begin());
      break;
    }
    case TranslationKind::random_iid: {
      for (int i = 0; i < d; ++i) {
        const double u = to_unit_double(mix64(next.hash + static_cast<std::uint64_t>(i) + 1));
        w[i] = t.region->lo[i] + (t.region->hi[i] - t.region->lo[i]) * u;
      }
      break;
    }
    case TranslationKind::explicit_table: {
      next.prefix = parent.prefix;
      next.prefix.push_back(digit);
      const auto it = table_.find(next.prefix);
      if (it == table_.end()) {
        throw Error(ErrorCode::UnresolvedTranslation, "no translation for word " + word_string(next.prefix));
      }
      std::copy_n(it->second.begin(), d, w.begin());
      break;
    }
  }
  return next;
}

Vector project(const SystemSpec& spec, const Word& w) {
  if (w.empty()) throw Error(ErrorCode::InvalidArgument, "projection needs a word of length >= 1");
  for (std::size_t k = 1; k <= w.size(); ++k) {
    const auto n = static_cast<std::uint32_t>(spec.level(static_cast<std::int64_t>(k)).branch_count);
    if (w.digits[k - 1] < 1 || w.digits[k - 1] > n) {
      throw Error(ErrorCode::InvalidDigit, "digit " + std::to_string(w.digits[k - 1]) + " at position " +
                                               std::to_string(k) + " outside [1, " + std::to_string(n) + "]");
    }
  }
  const TranslationResolver resolver(spec);
  Vector out(spec.dim);
  project_into(spec, resolver, static_cast<std::int64_t>(w.size()), [&](std::int64_t k) { return w.digits[k - 1]; },
               out.data());
  return out;
}

PointCloud sample_cloud(const SystemSpec& spec, std::int64_t depth, SampleMode mode, std::int64_t count,
                        std::uint64_t seed) {
  if (depth < 1) throw Error(ErrorCode::InvalidArgument, "depth must be >= 1");
  PointCloud cloud;
  cloud.dim = spec.dim;
  cloud.depth = depth;
  cloud.mode = mode;
  cloud.seed = seed;
  cloud.truncation_error = std::pow(alpha_bounds(spec).alpha_plus, static_cast<double>(depth)) *
                           spec.seed_region.diameter();
  const TranslationResolver resolver(spec);
  const int d = spec.dim;

  if (mode == SampleMode::full_enumeration) {
    std::vector<std::uint32_t> radix;
    std::int64_t total = 1;
    for (std::int64_t k = 1; k <= depth; ++k) {
      radix.push_back(static_cast<std::uint32_t>(spec.level(k).branch_count));
      if (total > kMaxEnumeration / radix.back()) {
        throw Error(ErrorCode::BudgetExceeded, "full enumeration at depth " + std::to_string(depth) +
                                                   " exceeds " + std::to_string(kMaxEnumeration) + " points");
      }
      total *= radix.back();
    }
    cloud.count = total;
    cloud.coords.resize(static_cast<std::size_t>(total) * d);
    // Point i is the word whose mixed-radix expansion (most significant digit
    // first) is i, so the cloud is in lexicographic order.
    FirstError failure;
#pragma omp parallel for num_threads(thread_count()) schedule(static)
    for (std::int64_t i = 0; i < total; ++i) {
      std::vector<std::uint32_t> digits(depth);
      std::int64_t rest = i;
      for (std::int64_t k = depth; k >= 1; --k) {
        digits[k - 1] = static_cast<std::uint32_t>(rest % radix[k - 1]) + 1;
        rest /= radix[k - 1];
      }
      failure.guard([&] {
        project_into(spec, resolver, depth, [&](std::int64_t k) { return digits[k - 1]; }, &cloud.coords[i * d]);
      });
    }
    failure.rethrow();
    return cloud;
  }

  if (count < 1) throw Error(ErrorCode::InvalidArgument, "count must be >= 1");
  cloud.count = count;
  cloud.coords.resize(static_cast<std::size_t>(count) * d);
  // Each point has its own stream derived from (seed, index).
  FirstError failure;
#pragma omp parallel for num_threads(thread_count()) schedule(static)
  for (std::int64_t i = 0; i < count; ++i) {
    SplitMix64 rng(mix64(seed) ^ mix64(static_cast<std::uint64_t>(i) + 0x632BE59BD9B4E019ULL));
    failure.guard([&] {
      project_into(
          spec, resolver, depth,
          [&](std::int64_t k) { return rng.below(static_cast<std::uint32_t>(spec.level(k).branch_count)) + 1; },
          &cloud.coords[i * d]);
    });
  }
  failure.rethrow();
  return cloud;
}

namespace {

// Occupied cells among the first n points.
std::int64_t count_cells(const PointCloud& cloud, std::size_t n, double epsilon) {
  const int d = cloud.dim;
  std::vector<std::array<std::int64_t, kMaxDim>> cells(n);
  for (std::size_t i = 0; i < n; ++i) {
    cells[i].fill(0);
    for (int j = 0; j < d; ++j) cells[i][j] = static_cast<std::int64_t>(std::floor(cloud.coords[i * d + j] / epsilon));
  }
  std::sort(cells.begin(), cells.end());
  return static_cast<std::int64_t>(std::unique(cells.begin(), cells.end()) - cells.begin());
}

}  // namespace

std::int64_t box_count(const PointCloud& cloud, double epsilon) {
  if (!(epsilon > 0.0)) throw Error(ErrorCode::InvalidArgument, "epsilon must be > 0");
  return count_cells(cloud, cloud.size(), epsilon);
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LineFit f;
  f.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  f.intercept = my - f.slope * mx;
  f.r2 = (sxx > 0.0 && syy > 0.0) ? (sxy * sxy) / (sxx * syy) : 1.0;
  return f;
}

BoxCountCurve boxdim_fit(const PointCloud& cloud, std::span<const double> scales) {
  std::vector<double> sorted(scales.begin(), scales.end());
  for (double e : sorted)
    if (!(e > 0.0) || !std::isfinite(e)) throw Error(ErrorCode::DegenerateScales, "scales must be positive");
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  BoxCountCurve curve;
  // A scale is unusable once points stop sharing cells. For random codes it is
  // also unusable while the sample has not found most of the occupied cells:
  // the first half of an iid sample must already see 95% of them.
  const auto saturation = static_cast<std::int64_t>(cloud.size() / 4);
  const bool sampled = cloud.mode == SampleMode::random_codes && cloud.size() >= 2;
  for (double e : sorted) {
    const std::int64_t n = box_count(cloud, e);
    const bool unresolved = sampled && static_cast<double>(count_cells(cloud, cloud.size() / 2, e)) < 0.95 * n;
    if (n > saturation || unresolved) {
      curve.dropped_scales.push_back(e);
      curve.dropped_counts.push_back(n);
      continue;
    }
    curve.scales.push_back(e);
    curve.counts.push_back(n);
  }
  if (curve.scales.size() < 2) {
    throw Error(ErrorCode::DegenerateScales, "fewer than two unsaturated scales (" +
                                                 std::to_string(curve.scales.size()) + ") for the fit");
  }
  std::vector<double> x, y;
  for (std::size_t i = 0; i < curve.scales.size(); ++i) {
    x.push_back(-std::log(curve.scales[i]));
    y.push_back(std::log(static_cast<double>(curve.counts[i])));
  }
  curve.fit = fit_line(x, y);
  return curve;
}

std::vector<double> default_scales(const SystemSpec& spec, std::int64_t depth) {
  const double alpha = alpha_bounds(spec).alpha_plus;
  const double inv = 1.0 / alpha;
  const double rounded = std::round(inv);
  const double base = (rounded >= 2.0 && std::abs(inv - rounded) < 1e-9) ? rounded : 2.0;
  const double floor_scale = 2.0 * std::pow(alpha, static_cast<double>(depth)) * spec.seed_region.diameter();
  std::vector<double> out;
  for (int j = 1; j < 64; ++j) {
    const double e = std::pow(base, -j);
    if (e < floor_scale) break;
    out.push_back(e);
  }
  return out;
}

std::string curve_csv(const BoxCountCurve& curve) {
  std::vector<std::pair<double, std::int64_t>> rows;
  for (std::size_t i = 0; i < curve.scales.size(); ++i) rows.emplace_back(curve.scales[i], curve.counts[i]);
  for (std::size_t i = 0; i < curve.dropped_scales.size(); ++i)
    rows.emplace_back(curve.dropped_scales[i], curve.dropped_counts[i]);
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  std::string out = "epsilon,count,log_inv_eps,log_count\n";
  char buf[160];
  for (const auto& [e, n] : rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%lld,%.17g,%.17g\n", e, static_cast<long long>(n), -std::log(e),
                  std::log(static_cast<double>(n)));
    out += buf;
  }
  return out;
}

std::int64_t Raster::occupied() const { return std::count_if(pixels.begin(), pixels.end(), [](auto p) { return p != 0; }); }

Raster render(const PointCloud& cloud, const Box& frame, int resolution) {
  if (cloud.dim != 2) {
    throw Error(ErrorCode::NotApplicable, "rendering needs d = 2, got d = " + std::to_string(cloud.dim));
  }
  if (resolution < 1 || resolution > 16384) throw Error(ErrorCode::InvalidArgument, "resolution outside [1, 16384]");
  Raster r;
  r.width = r.height = resolution;
  r.pixels.assign(static_cast<std::size_t>(resolution) * resolution, 0);
  const double wx = frame.hi[0] - frame.lo[0];
  const double wy = frame.hi[1] - frame.lo[1];
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto p = cloud.point(i);
    const double fx = (p[0] - frame.lo[0]) / wx;
    const double fy = (p[1] - frame.lo[1]) / wy;
    if (fx < 0.0 || fx > 1.0 || fy < 0.0 || fy > 1.0) continue;
    const int cx = std::min(resolution - 1, static_cast<int>(fx * resolution));
    const int cy = std::min(resolution - 1, static_cast<int>(fy * resolution));
    r.pixels[static_cast<std::size_t>(resolution - 1 - cy) * resolution + cx] = 255;
  }
  return r;
}

std::string pgm_bytes(const Raster& raster) {
  std::string out = "P5\n" + std::to_string(raster.width) + " " + std::to_string(raster.height) + "\n255\n";
  out.append(reinterpret_cast<const char*>(raster.pixels.data()), raster.pixels.size());
  return out;
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::InvalidArgument, "cannot open '" + path + "' for writing");
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw Error(ErrorCode::InvalidArgument, "failed writing '" + path + "'");
}

std::string_view to_string(SampleMode mode) {
  return mode == SampleMode::full_enumeration ? "full_enumeration" : "random_codes";
}

}  // namespace moran
