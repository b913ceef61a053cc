#pragma once

#include <span>

#include "moran/linalg.hpp"

namespace moran {

// The integer m with m - 1 < s <= m (m = 0 for s = 0).
int branch_index(double s);

struct LogPhi {
  double log_value = 0.0;
  double s = 0.0;
};

// Singular value function phi^s(T): alpha_1 ... alpha_{m-1} alpha_m^{s-m+1}
// for 0 < s <= d, |det T|^{s/d} for s > d, and 1 at s = 0.
double phi(const Matrix& t, double s);
LogPhi log_phi(const Matrix& t, double s);
LogPhi log_phi(const ScaledMatrix& t, double s);

// Core evaluation from descending log singular values; no checks.
double log_phi_from_log_sv(std::span<const double> log_sv, double s);

}  // namespace moran
