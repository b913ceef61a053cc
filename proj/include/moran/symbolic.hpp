#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "moran/linalg.hpp"
#include "moran/system.hpp"
#include "moran/tree.hpp"

namespace moran {

inline constexpr std::int64_t kDefaultNodeBudget = 10'000'000;

// T_u for a word u, kept both as a plain matrix and in scaled form so that
// deep words keep finite log singular values.
struct ProductNode {
  Word word;
  Matrix product;
  ScaledMatrix scaled;
  SingularValues sv;
  std::map<double, double> log_phi_cache;

  double log_phi(double s);
};

// Throws InvalidDigit when a digit exceeds its level's branch count.
ProductNode product(const SystemSpec& spec, const Word& w);
// The child u j of a node, one multiplication away from its parent.
ProductNode extend(const SystemSpec& spec, const ProductNode& parent, std::uint32_t digit);

Word common_prefix(const Word& u, const Word& v);
bool is_prefix(const Word& prefix, const Word& w);

struct CutSet {
  double s = 0.0;
  int m = 0;
  double epsilon = 0.0;
  double log_epsilon = 0.0;
  std::vector<CutEntry> entries;
  bool truncated = false;
  bool aggregated = false;
  std::int64_t node_budget_used = 0;
};

// Sigma*(s, eps). With aggregate = true, children with identical maps are
// folded into one entry carrying its log multiplicity.
CutSet cutset(const SystemSpec& spec, double s, double epsilon, std::int64_t node_budget = kDefaultNodeBudget,
              bool aggregate = false);
// Same with the threshold given as log(epsilon), for scales below double range.
CutSet cutset_log(const SystemSpec& spec, double s, double log_epsilon, std::int64_t node_budget = kDefaultNodeBudget,
                  bool aggregate = false);

// Pairwise sums over the entries in emission order.
double cutset_sum(const CutSet& c);
double cutset_log_sum(const CutSet& c);

}  // namespace moran
