#include <cmath>
#include <numbers>

#include "doctest.h"
#include "moran/error.hpp"
#include "moran/linalg.hpp"
#include "oracles.hpp"

using namespace moran;

namespace {

Matrix m2(double a, double b, double c, double d) {
  const double e[] = {a, b, c, d};
  return Matrix::from_row_major(2, e);
}

Matrix diag2(double a, double b) {
  const double e[] = {a, b};
  return Matrix::diagonal(e);
}

void check_close(const Matrix& a, const Matrix& b, double tol = 1e-15) {
  REQUIRE(a.dim() == b.dim());
  for (int r = 0; r < a.dim(); ++r)
    for (int c = 0; c < a.dim(); ++c) CHECK(a(r, c) == doctest::Approx(b(r, c)).epsilon(tol));
}

}  // namespace

TEST_CASE("products") {
  check_close(mat_mul(diag2(1.0 / 9, 1.0 / 3), diag2(1.0 / 9, 1.0 / 3)), diag2(1.0 / 81, 1.0 / 9));
  const Matrix m = m2(0.3, -0.2, 0.7, 0.1);
  CHECK(mat_mul(Matrix::identity(2), m) == m);
  check_close(mat_mul(m2(0.5, 0.5, 0, 0.5), m2(0.5, 0, 0.5, 0.5)), m2(0.5, 0.25, 0.25, 0.25));
  CHECK_THROWS_AS(mat_mul(Matrix::identity(2), Matrix::identity(3)), Error);
}

TEST_CASE("singular values on known matrices") {
  auto sv = singular_values(diag2(1.0 / 9, 1.0 / 3)).values;
  CHECK(sv[0] == doctest::Approx(1.0 / 3));
  CHECK(sv[1] == doctest::Approx(1.0 / 9));
  sv = singular_values(Matrix::scalar(2, 0.5)).values;
  CHECK(sv[0] == doctest::Approx(0.5));
  CHECK(sv[1] == doctest::Approx(0.5));
  sv = singular_values(m2(0.5, 0.5, 0, 0.5)).values;
  CHECK(std::abs(sv[0] - 0.809017) < 1e-6);
  CHECK(std::abs(sv[1] - 0.309017) < 1e-6);
  CHECK(op_norm(diag2(1.0 / 9, 1.0 / 3)) == doctest::Approx(1.0 / 3));
  CHECK(op_norm(Matrix::scalar(2, 0.5)) == doctest::Approx(0.5));
  CHECK(std::abs(op_norm(m2(0.5, 0.5, 0, 0.5)) - 0.809017) < 1e-6);
}

TEST_CASE("singular matrices are rejected") {
  try {
    singular_values(m2(0, 0, 0, 0.5));
    FAIL("expected NonsingularityViolated");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonsingularityViolated);
  }
}

TEST_CASE("random contractions: det, submultiplicative norm, rotation invariance") {
  SplitMix64 rng(7);
  int bad_det = 0, bad_norm = 0, bad_rot = 0;
  for (int i = 0; i < 1000; ++i) {
    const int d = 2 + static_cast<int>(rng.below(3));
    const Matrix a = oracle::random_contraction(rng, d, 0.95);
    const Matrix b = oracle::random_contraction(rng, d, 0.95);
    const auto sv = singular_values(a).values;
    double prod = 1.0;
    for (double v : sv) prod *= v;
    for (std::size_t j = 1; j < sv.size(); ++j)
      if (sv[j] > sv[j - 1]) ++bad_det;
    if (std::abs(prod - std::abs(determinant(a))) > 1e-9 * std::abs(determinant(a))) ++bad_det;
    if (op_norm(mat_mul(a, b)) > op_norm(a) * op_norm(b) * (1 + 1e-12)) ++bad_norm;
    const Matrix a2 = oracle::random_contraction(rng, 2, 0.95);
    const double th = 2 * std::numbers::pi * rng.uniform();
    const Matrix q = m2(std::cos(th), -std::sin(th), std::sin(th), std::cos(th));
    const auto rotated = singular_values(mat_mul(mat_mul(transpose(q), a2), q)).values;
    const auto plain = singular_values(a2).values;
    for (int j = 0; j < 2; ++j)
      if (std::abs(rotated[j] - plain[j]) > 1e-9) ++bad_rot;
  }
  CHECK(bad_det == 0);
  CHECK(bad_norm == 0);
  CHECK(bad_rot == 0);
}

TEST_CASE("jacobi path for d >= 3") {
  const double e[] = {0.5, 0.25, 0.125};
  const auto sv = singular_values(Matrix::diagonal(e)).values;
  CHECK(sv[0] == doctest::Approx(0.5));
  CHECK(sv[2] == doctest::Approx(0.125));
}

TEST_CASE("scaled products keep deep words finite") {
  ScaledMatrix p = ScaledMatrix::identity(2);
  const Matrix t = diag2(1.0 / 9, 1.0 / 3);
  for (int i = 0; i < 1000; ++i) p.right_multiply(t, std::log(1.0 / 27));
  const auto ls = p.log_singular_values();
  CHECK(ls[0] == doctest::Approx(1000 * std::log(1.0 / 3)));
  CHECK(ls[1] == doctest::Approx(1000 * std::log(1.0 / 9)));
}
