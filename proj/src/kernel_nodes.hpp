#pragma once

#include <limits>
#include <vector>

#include "moran/svf.hpp"
#include "moran/tree.hpp"

namespace moran::detail {

// One step of a depth-first walk over the grouped tree.
struct Frame {
  ScaledMatrix product;
  double log_mult = 0.0;  // log of the number of words this node stands for
  double group_log_mult = 0.0;  // multiplicity of the group this node represents
  std::uint32_t digit = 0;
  std::size_t next = 0;   // next child group to visit
  double acc = 0.0;       // running child sum (net measure)
};

inline void child_of(const Frame& parent, const MapGroup& g, Frame& child) {
  child.product = parent.product;
  child.product.right_multiply(g.map, g.log_abs_det);
  child.log_mult = parent.log_mult + g.log_multiplicity;
  child.group_log_mult = g.log_multiplicity;
  child.digit = g.first_digit;
  child.next = 0;
  child.acc = -std::numeric_limits<double>::infinity();
}

inline Frame root_frame(int dim) {
  Frame f;
  f.product = ScaledMatrix::identity(dim);
  f.acc = -std::numeric_limits<double>::infinity();
  return f;
}

struct NodeEval {
  double log_alpha_m;
  double log_phi;
};

inline NodeEval evaluate(const ScaledMatrix& p, int m, double s) {
  double log_sv[kMaxDim];
  const auto d = static_cast<std::size_t>(p.dim());
  p.log_singular_values({log_sv, d});
  return {log_sv[m - 1], log_phi_from_log_sv({log_sv, d}, s)};
}

inline double node_log_phi(const ScaledMatrix& p, double s) {
  double log_sv[kMaxDim];
  const auto d = static_cast<std::size_t>(p.dim());
  p.log_singular_values({log_sv, d});
  return log_phi_from_log_sv({log_sv, d}, s);
}

}  // namespace moran::detail
