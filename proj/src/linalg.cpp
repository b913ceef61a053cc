#include "moran/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "moran/error.hpp"

namespace moran {

namespace {

void check_dim(int dim) {
  if (dim < 1 || dim > kMaxDim) {
    throw Error(ErrorCode::DimensionMismatch, "matrix dimension " + std::to_string(dim) + " outside [1, 8]");
  }
}

// Singular values of a 2x2 matrix from the closed-form eigenvalues of T^T T.
// The small one is recovered as |det| / sigma_1 to avoid cancellation.
void singular_values_2x2(const Matrix& t, double* out) {
  const double a = t(0, 0) * t(0, 0) + t(1, 0) * t(1, 0);
  const double c = t(0, 1) * t(0, 1) + t(1, 1) * t(1, 1);
  const double b = t(0, 0) * t(0, 1) + t(1, 0) * t(1, 1);
  const double half_trace = 0.5 * (a + c);
  const double half_gap = 0.5 * (a - c);
  const double lambda_max = half_trace + std::hypot(half_gap, b);
  const double s1 = std::sqrt(std::max(lambda_max, 0.0));
  const double det = std::abs(t(0, 0) * t(1, 1) - t(0, 1) * t(1, 0));
  out[0] = s1;
  out[1] = s1 > 0.0 ? det / s1 : 0.0;
}

// One-sided (Hestenes) cyclic Jacobi: rotations on column pairs of T
// diagonalize T^T T implicitly; singular values are the final column norms.
void singular_values_jacobi(const Matrix& t, double* out) {
  const int d = t.dim();
  Matrix u = t;
  constexpr double kTol = 1e-12;
  for (int sweep = 0; sweep < 60; ++sweep) {
    bool rotated = false;
    for (int p = 0; p < d - 1; ++p) {
      for (int q = p + 1; q < d; ++q) {
        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        for (int i = 0; i < d; ++i) {
          alpha += u(i, p) * u(i, p);
          beta += u(i, q) * u(i, q);
          gamma += u(i, p) * u(i, q);
        }
        if (gamma == 0.0 || std::abs(gamma) <= kTol * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double tan = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double cos = 1.0 / std::sqrt(1.0 + tan * tan);
        const double sin = cos * tan;
        for (int i = 0; i < d; ++i) {
          const double up = u(i, p);
          const double uq = u(i, q);
          u(i, p) = cos * up - sin * uq;
          u(i, q) = sin * up + cos * uq;
        }
      }
    }
    if (!rotated) break;
  }
  for (int j = 0; j < d; ++j) {
    double norm2 = 0.0;
    for (int i = 0; i < d; ++i) norm2 += u(i, j) * u(i, j);
    out[j] = std::sqrt(norm2);
  }
  std::sort(out, out + d, std::greater<>());
}

void raw_singular_values(const Matrix& t, double* out) {
  switch (t.dim()) {
    case 1:
      out[0] = std::abs(t(0, 0));
      return;
    case 2:
      singular_values_2x2(t, out);
      return;
    default:
      singular_values_jacobi(t, out);
  }
}

}  // namespace

Matrix::Matrix(int dim) : dim_(dim) { check_dim(dim); }

Matrix Matrix::identity(int dim) { return scalar(dim, 1.0); }

Matrix Matrix::scalar(int dim, double c) {
  Matrix m(dim);
  for (int i = 0; i < dim; ++i) m(i, i) = c;
  return m;
}

Matrix Matrix::diagonal(std::span<const double> entries) {
  Matrix m(static_cast<int>(entries.size()));
  for (std::size_t i = 0; i < entries.size(); ++i) m(i, i) = entries[i];
  return m;
}

Matrix Matrix::from_row_major(int dim, std::span<const double> entries) {
  Matrix m(dim);
  if (entries.size() != static_cast<std::size_t>(dim * dim)) {
    throw Error(ErrorCode::DimensionMismatch, "expected " + std::to_string(dim * dim) + " entries, got " +
                                                  std::to_string(entries.size()));
  }
  std::copy(entries.begin(), entries.end(), m.a_.begin());
  return m;
}

bool Matrix::is_diagonal() const {
  for (int r = 0; r < dim_; ++r)
    for (int c = 0; c < dim_; ++c)
      if (r != c && (*this)(r, c) != 0.0) return false;
  return true;
}

bool Matrix::is_scalar() const {
  if (!is_diagonal()) return false;
  for (int i = 1; i < dim_; ++i)
    if ((*this)(i, i) != (*this)(0, 0)) return false;
  return true;
}

bool Matrix::is_finite() const {
  for (double v : row_major())
    if (!std::isfinite(v)) return false;
  return true;
}

double Matrix::max_abs() const {
  double m = 0.0;
  for (double v : row_major()) m = std::max(m, std::abs(v));
  return m;
}

bool operator==(const Matrix& a, const Matrix& b) {
  if (a.dim_ != b.dim_) return false;
  return std::equal(a.row_major().begin(), a.row_major().end(), b.row_major().begin());
}

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.dim_ != b.dim_) {
    throw Error(ErrorCode::DimensionMismatch,
                "cannot multiply " + std::to_string(a.dim_) + "x" + std::to_string(a.dim_) + " by " +
                    std::to_string(b.dim_) + "x" + std::to_string(b.dim_));
  }
  const int d = a.dim_;
  Matrix c(d);
  for (int i = 0; i < d; ++i) {
    for (int k = 0; k < d; ++k) {
      const double aik = a(i, k);
      for (int j = 0; j < d; ++j) c(i, j) += aik * b(k, j);
    }
  }
  return c;
}

Matrix mat_mul(const Matrix& a, const Matrix& b) { return a * b; }

Matrix transpose(const Matrix& t) {
  Matrix r(t.dim());
  for (int i = 0; i < t.dim(); ++i)
    for (int j = 0; j < t.dim(); ++j) r(j, i) = t(i, j);
  return r;
}

double determinant(const Matrix& t) {
  const int d = t.dim();
  if (d == 1) return t(0, 0);
  if (d == 2) return t(0, 0) * t(1, 1) - t(0, 1) * t(1, 0);
  Matrix lu = t;
  double det = 1.0;
  for (int col = 0; col < d; ++col) {
    int pivot = col;
    for (int r = col + 1; r < d; ++r)
      if (std::abs(lu(r, col)) > std::abs(lu(pivot, col))) pivot = r;
    if (lu(pivot, col) == 0.0) return 0.0;
    if (pivot != col) {
      for (int c = 0; c < d; ++c) std::swap(lu(pivot, c), lu(col, c));
      det = -det;
    }
    det *= lu(col, col);
    for (int r = col + 1; r < d; ++r) {
      const double f = lu(r, col) / lu(col, col);
      for (int c = col; c < d; ++c) lu(r, c) -= f * lu(col, c);
    }
  }
  return det;
}

SingularValues singular_values_unchecked(const Matrix& t) {
  SingularValues sv;
  sv.values.resize(t.dim());
  raw_singular_values(t, sv.values.data());
  return sv;
}

SingularValues singular_values(const Matrix& t) {
  const double det = std::abs(determinant(t));
  if (!(det > kSingularDet)) {
    throw Error(ErrorCode::NonsingularityViolated, "|det| = " + std::to_string(det) + " <= 1e-14");
  }
  return singular_values_unchecked(t);
}

double op_norm(const Matrix& t) {
  double out[kMaxDim];
  raw_singular_values(t, out);
  return out[0];
}

ScaledMatrix ScaledMatrix::identity(int dim) {
  ScaledMatrix s;
  s.normalized_ = Matrix::identity(dim);
  return s;
}

ScaledMatrix ScaledMatrix::from(const Matrix& t) {
  ScaledMatrix s = identity(t.dim());
  s.right_multiply(t, std::log(std::abs(determinant(t))));
  return s;
}

void ScaledMatrix::right_multiply(const Matrix& t, double log_abs_det_t) {
  normalized_ = normalized_ * t;
  const double m = normalized_.max_abs();
  if (m > 0.0) {
    const double inv = 1.0 / m;
    for (int i = 0; i < normalized_.dim(); ++i)
      for (int j = 0; j < normalized_.dim(); ++j) normalized_(i, j) *= inv;
    log_scale_ += std::log(m);
  }
  log_abs_det_ += log_abs_det_t;
}

void ScaledMatrix::log_singular_values(std::span<double> out) const {
  const int d = dim();
  double sv[kMaxDim];
  raw_singular_values(normalized_, sv);
  double partial = 0.0;
  for (int i = 0; i < d - 1; ++i) {
    out[i] = std::log(sv[i]) + log_scale_;
    partial += out[i];
  }
  // The smallest value is fixed by the exactly tracked determinant.
  out[d - 1] = d == 1 ? log_abs_det_ : log_abs_det_ - partial;
  if (d > 1 && out[d - 1] > out[d - 2]) out[d - 1] = out[d - 2];
}

std::vector<double> ScaledMatrix::log_singular_values() const {
  std::vector<double> out(dim());
  log_singular_values(out);
  return out;
}

Matrix ScaledMatrix::to_matrix() const {
  Matrix m = normalized_;
  const double f = std::exp(log_scale_);
  for (int i = 0; i < m.dim(); ++i)
    for (int j = 0; j < m.dim(); ++j) m(i, j) *= f;
  return m;
}

}  // namespace moran
