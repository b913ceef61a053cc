#include "moran/svf.hpp"

#include <cmath>
#include <string>

#include "moran/error.hpp"

namespace moran {

namespace {

void check_exponent(double s) {
  if (!(s >= 0.0) || !std::isfinite(s)) {
    throw Error(ErrorCode::InvalidArgument, "exponent s must be finite and >= 0, got " + std::to_string(s));
  }
}

}  // namespace

int branch_index(double s) { return static_cast<int>(std::ceil(s)); }

double log_phi_from_log_sv(std::span<const double> log_sv, double s) {
  if (s == 0.0) return 0.0;
  const int d = static_cast<int>(log_sv.size());
  if (s > d) {
    double log_det = 0.0;
    for (double v : log_sv) log_det += v;
    return (s / d) * log_det;
  }
  const int m = branch_index(s);
  double acc = 0.0;
  for (int i = 0; i < m - 1; ++i) acc += log_sv[i];
  return acc + (s - m + 1) * log_sv[m - 1];
}

LogPhi log_phi(const Matrix& t, double s) {
  check_exponent(s);
  const SingularValues sv = singular_values(t);
  double log_sv[kMaxDim];
  for (int i = 0; i < t.dim(); ++i) log_sv[i] = std::log(sv.values[i]);
  return {log_phi_from_log_sv({log_sv, static_cast<std::size_t>(t.dim())}, s), s};
}

LogPhi log_phi(const ScaledMatrix& t, double s) {
  check_exponent(s);
  if (!std::isfinite(t.log_abs_det())) {
    throw Error(ErrorCode::NonsingularityViolated, "product contains a singular factor");
  }
  double log_sv[kMaxDim];
  t.log_singular_values({log_sv, static_cast<std::size_t>(t.dim())});
  return {log_phi_from_log_sv({log_sv, static_cast<std::size_t>(t.dim())}, s), s};
}

double phi(const Matrix& t, double s) {
  check_exponent(s);
  if (s == 0.0) {
    singular_values(t);  // still enforce nonsingularity
    return 1.0;
  }
  const SingularValues sv = singular_values(t);
  const int d = t.dim();
  if (s > d) {
    return std::pow(std::abs(determinant(t)), s / d);
  }
  const int m = branch_index(s);
  double acc = 1.0;
  for (int i = 0; i < m - 1; ++i) acc *= sv.values[i];
  return acc * std::pow(sv.values[m - 1], s - m + 1);
}

}  // namespace moran
