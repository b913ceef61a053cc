#pragma once

#include <array>
#include <span>
#include <vector>

namespace moran {

inline constexpr int kMaxDim = 8;
// Maps with |det| at or below this are treated as singular.
inline constexpr double kSingularDet = 1e-14;

// Small dense d x d real matrix, d in [1, 8], stored row-major with stride d.
class Matrix {
 public:
  Matrix() = default;
  explicit Matrix(int dim);

  static Matrix identity(int dim);
  static Matrix scalar(int dim, double c);
  static Matrix diagonal(std::span<const double> entries);
  static Matrix from_row_major(int dim, std::span<const double> entries);

  int dim() const { return dim_; }
  double operator()(int r, int c) const { return a_[r * dim_ + c]; }
  double& operator()(int r, int c) { return a_[r * dim_ + c]; }
  std::span<const double> row_major() const { return {a_.data(), static_cast<std::size_t>(dim_ * dim_)}; }

  bool is_diagonal() const;
  bool is_scalar() const;
  bool is_finite() const;
  double max_abs() const;

  friend bool operator==(const Matrix& a, const Matrix& b);
  friend Matrix operator*(const Matrix& a, const Matrix& b);

 private:
  int dim_ = 0;
  std::array<double, kMaxDim * kMaxDim> a_{};
};

struct SingularValues {
  std::vector<double> values;  // descending
};

Matrix mat_mul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& t);
double determinant(const Matrix& t);

// Checked: rejects |det| <= kSingularDet with NonsingularityViolated.
SingularValues singular_values(const Matrix& t);
// No nonsingularity check; values may be zero.
SingularValues singular_values_unchecked(const Matrix& t);
double op_norm(const Matrix& t);

// A product T = exp(log_scale) * normalized, tracked with log|det T| so that
// deep products neither underflow nor lose their smallest singular value.
class ScaledMatrix {
 public:
  ScaledMatrix() = default;
  static ScaledMatrix identity(int dim);
  static ScaledMatrix from(const Matrix& t);

  // this <- this * t, where log_abs_det_t = log|det t|.
  void right_multiply(const Matrix& t, double log_abs_det_t);

  int dim() const { return normalized_.dim(); }
  const Matrix& normalized() const { return normalized_; }
  double log_scale() const { return log_scale_; }
  double log_abs_det() const { return log_abs_det_; }

  // Descending natural logs of the singular values.
  void log_singular_values(std::span<double> out) const;
  std::vector<double> log_singular_values() const;
  Matrix to_matrix() const;

 private:
  Matrix normalized_;
  double log_scale_ = 0.0;
  double log_abs_det_ = 0.0;
};

}  // namespace moran
