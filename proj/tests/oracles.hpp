// Independent brute-force oracles and random generators shared by the tests.
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "moran/linalg.hpp"
#include "moran/parallel.hpp"
#include "moran/svf.hpp"
#include "moran/system.hpp"
#include "moran/tree.hpp"

namespace oracle {

using moran::Matrix;
using moran::SplitMix64;

// Random nonsingular contraction with operator norm at most max_norm.
inline Matrix random_contraction(SplitMix64& rng, int d, double max_norm) {
  for (;;) {
    Matrix m(d);
    for (int r = 0; r < d; ++r)
      for (int c = 0; c < d; ++c) m(r, c) = 2.0 * rng.uniform() - 1.0;
    const double det = std::abs(moran::determinant(m));
    if (det < 1e-3) continue;
    const double scale = max_norm * (0.3 + 0.7 * rng.uniform()) / moran::op_norm(m);
    for (int r = 0; r < d; ++r)
      for (int c = 0; c < d; ++c) m(r, c) *= scale;
    return m;
  }
}

inline std::vector<double> row_major(const Matrix& m) {
  return {m.row_major().begin(), m.row_major().end()};
}

// A d=2 spec with `levels` explicit levels (then repeating the last) whose
// branch counts are drawn from {2, 3}. Digits are irrelevant to the
// estimators and set to the origin.
inline moran::SystemSpec random_spec(std::uint64_t seed, int levels) {
  SplitMix64 rng(moran::mix64(seed));
  nlohmann::json lv = nlohmann::json::array();
  for (int k = 0; k < levels; ++k) {
    const int n = 2 + static_cast<int>(rng.below(2));
    nlohmann::json maps = nlohmann::json::array(), digits = nlohmann::json::array();
    for (int j = 0; j < n; ++j) {
      maps.push_back(row_major(random_contraction(rng, 2, 0.8)));
      digits.push_back({0.0, 0.0});
    }
    lv.push_back({{"branch_count", n}, {"maps", maps}, {"digits", digits}});
  }
  nlohmann::json doc = {{"dim", 2},
                        {"seed_region", {{"lo", {0.0, 0.0}}, {"hi", {1.0, 1.0}}}},
                        {"schedule", {{"kind", "explicit_prefix_then_periodic"}, {"period", 1}, {"levels", lv}}},
                        {"translations", {{"kind", "digit_grid"}}}};
  return moran::parse_spec(doc.dump());
}

inline Matrix word_product(const moran::SystemSpec& spec, const std::vector<std::uint32_t>& w) {
  Matrix p = Matrix::identity(spec.dim);
  for (std::size_t i = 0; i < w.size(); ++i) p = moran::mat_mul(p, spec.level(static_cast<std::int64_t>(i + 1)).maps[w[i] - 1]);
  return p;
}

// Every antichain cover of the symbolic space by cylinders of depths in
// [k, K], built explicitly as lists of words; returns the cheapest cost of
// sum phi^s(T_u). Exponential in size, meant for K <= 3.
inline double brute_force_net_measure(const moran::SystemSpec& spec, double s, int k, int K) {
  using Cover = std::vector<std::vector<std::uint32_t>>;
  std::function<std::vector<Cover>(const std::vector<std::uint32_t>&)> covers = [&](const std::vector<std::uint32_t>& u) {
    std::vector<Cover> out;
    const int depth = static_cast<int>(u.size());
    if (depth >= k) out.push_back({u});
    if (depth < K) {
      std::vector<Cover> combined{{}};
      const int n = spec.level(depth + 1).branch_count;
      for (int j = 1; j <= n; ++j) {
        auto child = u;
        child.push_back(static_cast<std::uint32_t>(j));
        const auto sub = covers(child);
        std::vector<Cover> next;
        for (const Cover& a : combined)
          for (const Cover& b : sub) {
            Cover c = a;
            c.insert(c.end(), b.begin(), b.end());
            next.push_back(std::move(c));
          }
        combined = std::move(next);
      }
      out.insert(out.end(), combined.begin(), combined.end());
    }
    return out;
  };
  double best = std::numeric_limits<double>::infinity();
  for (const Cover& c : covers({})) {
    double sum = 0.0;
    for (const auto& w : c) sum += moran::phi(word_product(spec, w), s);
    best = std::min(best, sum);
  }
  return best;
}

// Number of entries of `words` that are prefixes of the infinite word whose
// first digits are `code`.
inline int prefixes_hit(const std::set<std::vector<std::uint32_t>>& words, const std::vector<std::uint32_t>& code) {
  int hits = 0;
  std::vector<std::uint32_t> prefix;
  for (std::uint32_t d : code) {
    prefix.push_back(d);
    hits += static_cast<int>(words.count(prefix));
  }
  return hits;
}

}  // namespace oracle
