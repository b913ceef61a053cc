#include "moran/symbolic.hpp"

#include <cmath>
#include <string>

#include "moran/error.hpp"
#include "moran/kernels.hpp"
#include "moran/parallel.hpp"
#include "moran/svf.hpp"

namespace moran {

double ProductNode::log_phi(double s) {
  if (auto it = log_phi_cache.find(s); it != log_phi_cache.end()) return it->second;
  const double v = moran::log_phi(scaled, s).log_value;
  log_phi_cache.emplace(s, v);
  return v;
}

namespace {

void refresh(ProductNode& node) {
  node.sv.values.clear();
  for (double v : node.scaled.log_singular_values()) node.sv.values.push_back(std::exp(v));
}

}  // namespace

ProductNode extend(const SystemSpec& spec, const ProductNode& parent, std::uint32_t digit) {
  const auto k = static_cast<std::int64_t>(parent.word.size()) + 1;
  const LevelSpec& level = spec.level(k);
  if (digit < 1 || digit > static_cast<std::uint32_t>(level.branch_count)) {
    throw Error(ErrorCode::InvalidDigit, "digit " + std::to_string(digit) + " at position " + std::to_string(k) +
                                             " outside [1, " + std::to_string(level.branch_count) + "]");
  }
  const Matrix& t = level.maps[digit - 1];
  ProductNode child;
  child.word = parent.word;
  child.word.digits.push_back(digit);
  child.product = parent.product * t;
  child.scaled = parent.scaled;
  child.scaled.right_multiply(t, std::log(std::abs(determinant(t))));
  refresh(child);
  return child;
}

ProductNode product(const SystemSpec& spec, const Word& w) {
  ProductNode node;
  node.product = Matrix::identity(spec.dim);
  node.scaled = ScaledMatrix::identity(spec.dim);
  refresh(node);
  for (std::uint32_t digit : w.digits) node = extend(spec, node, digit);
  return node;
}

Word common_prefix(const Word& u, const Word& v) {
  Word out;
  for (std::size_t i = 0; i < u.size() && i < v.size() && u.digits[i] == v.digits[i]; ++i) out.digits.push_back(u.digits[i]);
  return out;
}

bool is_prefix(const Word& prefix, const Word& w) {
  if (prefix.size() > w.size()) return false;
  return std::equal(prefix.digits.begin(), prefix.digits.end(), w.digits.begin());
}

CutSet cutset_log(const SystemSpec& spec, double s, double log_epsilon, std::int64_t node_budget, bool aggregate) {
  if (!(s > 0.0) || !std::isfinite(s)) throw Error(ErrorCode::InvalidArgument, "cut-sets need s > 0");
  if (!(log_epsilon < 0.0)) throw Error(ErrorCode::InvalidArgument, "cut-sets need 0 < epsilon < 1");
  if (node_budget < 1) throw Error(ErrorCode::InvalidArgument, "node budget must be >= 1");
  const TreeModel model(spec, aggregate);
  CutSetResult r = omp_kernels::cutset(model, s, log_epsilon, node_budget, true);
  CutSet c;
  c.s = s;
  c.m = cut_index(s, spec.dim);
  c.log_epsilon = log_epsilon;
  c.epsilon = std::exp(log_epsilon);
  c.entries = std::move(r.entries);
  c.truncated = r.truncated;
  c.aggregated = aggregate;
  c.node_budget_used = r.nodes_expanded;
  return c;
}

CutSet cutset(const SystemSpec& spec, double s, double epsilon, std::int64_t node_budget, bool aggregate) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw Error(ErrorCode::InvalidArgument, "cut-sets need 0 < epsilon < 1");
  CutSet c = cutset_log(spec, s, std::log(epsilon), node_budget, aggregate);
  c.epsilon = epsilon;
  return c;
}

double cutset_log_sum(const CutSet& c) {
  PairwiseLogSum sum;
  for (const CutEntry& e : c.entries) sum.add(e.log_multiplicity + e.log_phi);
  return sum.result();
}

double cutset_sum(const CutSet& c) { return std::exp(cutset_log_sum(c)); }

}  // namespace moran
