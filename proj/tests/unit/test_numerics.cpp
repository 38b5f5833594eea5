#include <doctest.h>

#include "fixtures.hpp"

#include <relmodel/errors.hpp>
#include <relmodel/loglinear.hpp>
#include <relmodel/numerics.hpp>
#include <relmodel/rng.hpp>

#include <cmath>
#include <numbers>

using namespace relmodel;

namespace {

// Closed-form chi-square tails used as independent oracles.
double chisq_sf_even(double x, int df) {
  double term = 1.0, sum = 1.0;
  for (int i = 1; i < df / 2; ++i) {
    term *= (x / 2.0) / i;
    sum += term;
  }
  return std::exp(-x / 2.0) * sum;
}

double chisq_sf_one(double x) { return std::erfc(std::sqrt(x / 2.0)); }

double chisq_sf_three(double x) {
  return std::erfc(std::sqrt(x / 2.0)) +
         std::sqrt(2.0 * x / std::numbers::pi) * std::exp(-x / 2.0);
}

Matrix adjugate_inverse3(const Matrix& a) {
  Matrix adj(3, 3);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const int r0 = (j + 1) % 3, r1 = (j + 2) % 3;
      const int c0 = (i + 1) % 3, c1 = (i + 2) % 3;
      adj(i, j) = a(r0, c0) * a(r1, c1) - a(r0, c1) * a(r1, c0);
    }
  }
  const double det = a.row(0).dot(adj.col(0));
  return adj / det;
}

}  // namespace

TEST_CASE("null_space_basis of a line is its orthogonal complement") {
  Matrix m(2, 1);
  m << 1, 1;
  const Matrix b = null_space_basis(m);
  REQUIRE(b.rows() == 1);
  REQUIRE(b.cols() == 2);
  const double s = b(0, 0) > 0 ? 1.0 : -1.0;
  CHECK(s * b(0, 0) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));
  CHECK(s * b(0, 1) == doctest::Approx(-1.0 / std::sqrt(2.0)).epsilon(1e-14));
}

TEST_CASE("null_space_basis annihilates the example designs") {
  for (const Matrix& x : {fixtures::example1_x(), fixtures::basket_x()}) {
    const Matrix b = null_space_basis(x);
    CHECK(b.rows() == x.rows() - x.cols());
    CHECK(max_abs(b * x) <= 1e-12);
    CHECK(max_abs(b * b.transpose() -
                  Matrix::Identity(b.rows(), b.rows())) <= 1e-10);
  }
}

TEST_CASE("null_space_basis property over random full-rank matrices") {
  RngStream rng(11, 0);
  for (int trial = 0; trial < 100; ++trial) {
    const Index r = 3 + static_cast<Index>(rng.uniform() * 8);
    const Index k = 1 + static_cast<Index>(rng.uniform() * (r - 1));
    Matrix m(r, k);
    for (Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform() - 0.5;
    const Matrix b = null_space_basis(m);
    CHECK(b.rows() == r - k);
    CHECK(max_abs(b * m) <= 1e-10 * std::max(1.0, max_abs(m)));
    CHECK(max_abs(b * b.transpose() - Matrix::Identity(r - k, r - k)) <= 1e-10);
  }
}

TEST_CASE("null_space_basis rejects rank deficiency") {
  Matrix m(4, 2);
  m << 1, 2, 1, 2, 0, 0, 1, 2;
  try {
    null_space_basis(m);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::validation);
  }
}

TEST_CASE("solve_spd") {
  SUBCASE("identity") {
    const Vector x = solve_spd(Matrix::Identity(3, 3), Vector{{1, 2, 3}});
    CHECK((x - Vector{{1, 2, 3}}).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("diagonal") {
    Matrix a = Matrix::Zero(2, 2);
    a(0, 0) = 2;
    a(1, 1) = 4;
    const Vector x = solve_spd(a, Vector{{2, 4}});
    CHECK(x(0) == doctest::Approx(1.0));
    CHECK(x(1) == doctest::Approx(1.0));
  }
  SUBCASE("information matrix at uniform pi matches the adjugate inverse") {
    const auto design = fixtures::example1();
    const Vector pi = Vector::Constant(4, 0.25);
    const Matrix f = fisher_info_tau(pi, design).matrix();
    const Vector b{{0.3, -1.2, 2.5}};
    const Vector expected = adjugate_inverse3(f) * b;
    const Vector x = solve_spd(f, b);
    CHECK((x - expected).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((f * x - b).cwiseAbs().maxCoeff() <= 1e-10 * b.cwiseAbs().maxCoeff());
  }
  SUBCASE("indefinite matrix is reported, not solved") {
    Matrix a(2, 2);
    a << 1, 2, 2, 1;
    try {
      solve_spd(a, Vector{{1, 1}});
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::boundary);
    }
  }
}

TEST_CASE("chisq_sf against closed forms") {
  CHECK(chisq_sf(0.0, 1) == 1.0);
  CHECK(chisq_sf(0.0, 7) == 1.0);
  for (double x : {0.01, 0.5, 1.0, 2.7, 3.841459, 9.14, 20.0, 60.0}) {
    CHECK(std::abs(chisq_sf(x, 1) - chisq_sf_one(x)) <= 1e-10);
    CHECK(std::abs(chisq_sf(x, 3) - chisq_sf_three(x)) <= 1e-10);
    for (int df : {2, 4, 6, 10}) {
      CHECK(std::abs(chisq_sf(x, df) - chisq_sf_even(x, df)) <= 1e-10);
    }
  }
  // Table value: deviance 9.14 on 4 df.
  CHECK(chisq_sf(9.14, 4) == doctest::Approx(0.057666).epsilon(1e-4));
  CHECK(std::abs(chisq_sf(3.841459, 1) - 0.05) <= 1e-5);
}

TEST_CASE("chisq_sf is strictly decreasing in x") {
  for (int df : {1, 2, 3, 4, 9}) {
    double prev = chisq_sf(0.0, df);
    for (double x = 0.05; x < 40.0; x += 0.05) {
      const double v = chisq_sf(x, df);
      CHECK(v < prev);
      prev = v;
    }
  }
}

TEST_CASE("chisq_sf rejects zero degrees of freedom") {
  CHECK_THROWS_AS(chisq_sf(1.0, 0), Error);
}

TEST_CASE("chisq_isf inverts chisq_sf") {
  for (double tail : {0.5, 0.1, 0.05, 0.01, 1e-4}) {
    for (int df : {1, 3, 4}) {
      CHECK(std::abs(chisq_sf(chisq_isf(tail, df), df) - tail) <= 1e-9);
    }
  }
}

TEST_CASE("simplex_feasible") {
  const Matrix x = fixtures::example1_x();
  SUBCASE("uniform witness") {
    CHECK(simplex_feasible(x, x.transpose() * Vector::Constant(4, 0.25)));
  }
  SUBCASE("zero target is infeasible when every row has a one") {
    CHECK_FALSE(simplex_feasible(x, Vector::Zero(3)));
  }
  SUBCASE("wrong length is simply infeasible") {
    CHECK_FALSE(simplex_feasible(x, Vector::Zero(2)));
  }
  SUBCASE("basket: hull is the cube minus the corner below x1+x2+x3 = 1") {
    const Matrix b = fixtures::basket_x();
    CHECK(simplex_feasible(b, Vector{{0.5, 0.5, 0.5}}));
    CHECK(simplex_feasible(b, Vector{{1.0, 1.0, 1.0}}));
    CHECK_FALSE(simplex_feasible(b, Vector{{0.3, 0.3, 0.3}}));
    CHECK_FALSE(simplex_feasible(b, Vector{{1.01, 0.5, 0.5}}));
    CHECK_FALSE(simplex_feasible(b, Vector{{0.5, -0.01, 0.7}}));
  }
}

TEST_CASE("simplex_feasible accepts X'p for random interior p") {
  RngStream rng(5, 0);
  for (const Matrix& x : {fixtures::example1_x(), fixtures::basket_x()}) {
    for (int trial = 0; trial < 200; ++trial) {
      Vector p(x.rows());
      for (Index j = 0; j < p.size(); ++j) p(j) = rng.uniform();
      p /= p.sum();
      CHECK(simplex_feasible(x, x.transpose() * p));
    }
  }
}

TEST_CASE("RngStream reproducibility and independence") {
  RngStream a(42, 7), b(42, 7), c(42, 8);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const double va = a.uniform();
    CHECK(va == b.uniform());
    CHECK(va > 0.0);
    CHECK(va < 1.0);
    differs |= va != c.uniform();
  }
  CHECK(differs);
}

TEST_CASE("multinomial_draw") {
  RngStream rng(1, 0);
  const Vector pi{{0.2, 0.3, 0.5}};
  SUBCASE("n = 0 gives the zero vector") {
    const auto y = multinomial_draw(0, pi, rng);
    CHECK(y == std::vector<std::int64_t>{0, 0, 0});
  }
  SUBCASE("boundary and unnormalized probabilities are rejected") {
    CHECK_THROWS_AS(multinomial_draw(10, Vector{{1.0, 0.0}}, rng), Error);
    CHECK_THROWS_AS(multinomial_draw(10, Vector{{0.5, 0.6}}, rng), Error);
  }
  SUBCASE("counts sum to n and are bit-reproducible") {
    RngStream r1(99, 3), r2(99, 3);
    for (int i = 0; i < 20; ++i) {
      const auto y1 = multinomial_draw(137, pi, r1);
      const auto y2 = multinomial_draw(137, pi, r2);
      CHECK(y1 == y2);
      std::int64_t total = 0;
      for (auto v : y1) {
        CHECK(v >= 0);
        total += v;
      }
      CHECK(total == 137);
    }
  }
  SUBCASE("large-n proportions stay inside the CLT band") {
    const auto design = fixtures::basket();
    const auto counts = fixtures::basket_counts();
    Vector target(7);
    for (int j = 0; j < 7; ++j) target(j) = counts[static_cast<std::size_t>(j)];
    target /= target.sum();
    const std::int64_t n = 1000000;
    const auto y = multinomial_draw(n, target, rng);
    for (int j = 0; j < 7; ++j) {
      const double p = target(j);
      const double phat = static_cast<double>(y[static_cast<std::size_t>(j)]) / n;
      CHECK(std::abs(phat - p) <= 4.0 * std::sqrt(p * (1 - p) / n));
    }
  }
}

TEST_CASE("parallel_for covers every index exactly once") {
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
  for (int h : hits) CHECK(h == 1);
}
