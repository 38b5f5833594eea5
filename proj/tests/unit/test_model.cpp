#include <doctest.h>

#include "fixtures.hpp"

#include <relmodel/curved.hpp>
#include <relmodel/errors.hpp>
#include <relmodel/model.hpp>

#include <algorithm>
#include <numeric>
#include <set>

using namespace relmodel;
using Kind = DesignViolation::Kind;

namespace {

bool has_kind(const std::vector<DesignViolation>& v, Kind kind) {
  return std::any_of(v.begin(), v.end(),
                     [&](const DesignViolation& d) { return d.kind == kind; });
}

// Hand-derived validity for 0/1 designs with one or two columns.
struct Expected {
  bool zero_row = false;
  bool rank_deficient = false;
  bool ones_in_span = false;
};

Expected oracle(const Matrix& x) {
  Expected e;
  std::set<std::pair<int, int>> patterns;
  for (Index i = 0; i < x.rows(); ++i) {
    const int a = static_cast<int>(x(i, 0));
    const int b = x.cols() > 1 ? static_cast<int>(x(i, 1)) : 0;
    patterns.insert({a, b});
    if (a == 0 && b == 0) e.zero_row = true;
  }
  if (x.cols() == 1) {
    e.rank_deficient = !x.col(0).any();
    e.ones_in_span = !e.zero_row;
  } else {
    const bool c0 = x.col(0).any(), c1 = x.col(1).any();
    e.rank_deficient = !c0 || !c1 || x.col(0) == x.col(1);
    // 10 forces a = 1, 01 forces b = 1, 11 forces a + b = 1.
    const bool all_three = patterns.count({1, 0}) && patterns.count({0, 1}) &&
                           patterns.count({1, 1});
    e.ones_in_span = !e.zero_row && !all_three;
  }
  return e;
}

bool in_column_span_of_design(const Matrix& x, const Vector& v) {
  Matrix a(x.rows(), x.cols() + 1);
  a << x, Vector::Ones(x.rows());
  const Vector coef = a.colPivHouseholderQr().solve(v);
  return (a * coef - v).norm() <= 1e-9 * std::max(1.0, v.norm());
}

Vector random_pi(Index r, RngStream& rng) {
  Vector p(r);
  for (Index j = 0; j < r; ++j) p(j) = 0.05 + rng.uniform();
  return p / p.sum();
}

}  // namespace

TEST_CASE("bundled designs are valid") {
  CHECK(design_violations(fixtures::example1_x()).empty());
  CHECK(design_violations(fixtures::basket_x()).empty());
  const auto d = fixtures::basket();
  CHECK(d.cells() == 7);
  CHECK(d.params() == 3);
}

TEST_CASE("a column of ones is rejected as overall effect") {
  Matrix x(3, 2);
  x << 1, 1, 1, 0, 1, 1;
  const auto v = design_violations(x);
  CHECK(has_kind(v, Kind::ones_in_column_span));
  try {
    validate_design(x);
    FAIL("expected DesignError");
  } catch (const DesignError& e) {
    CHECK(e.kind() == ErrorKind::validation);
    CHECK(has_kind(e.violations(), Kind::ones_in_column_span));
  }
}

TEST_CASE("a zero row is rejected with a pointer to the removed cell") {
  Matrix x = fixtures::example1_x();
  x.row(2).setZero();
  const auto v = design_violations(x);
  REQUIRE(has_kind(v, Kind::zero_row));
  const auto it = std::find_if(v.begin(), v.end(), [](const auto& d) {
    return d.kind == Kind::zero_row;
  });
  CHECK(it->detail.find("row 3") != std::string::npos);
  CHECK(it->detail.find("all-zero cell") != std::string::npos);
}

TEST_CASE("non-binary and empty designs") {
  Matrix x = fixtures::example1_x();
  x(0, 0) = 0.5;
  CHECK(has_kind(design_violations(x), Kind::non_binary));
  CHECK(has_kind(design_violations(Matrix(0, 0)), Kind::empty));
}

TEST_CASE("exhaustive small designs agree with the hand oracle") {
  int checked = 0;
  for (Index r = 1; r <= 4; ++r) {
    for (Index k = 1; k <= 2; ++k) {
      const int bits = static_cast<int>(r * k);
      for (int mask = 0; mask < (1 << bits); ++mask) {
        Matrix x(r, k);
        for (int b = 0; b < bits; ++b) {
          x(b / k, b % k) = (mask >> b) & 1;
        }
        const auto v = design_violations(x);
        const Expected e = oracle(x);
        CAPTURE(x);
        CHECK(has_kind(v, Kind::zero_row) == e.zero_row);
        CHECK(has_kind(v, Kind::rank_deficient) == e.rank_deficient);
        CHECK(has_kind(v, Kind::ones_in_column_span) == e.ones_in_span);
        const bool valid = !e.zero_row && !e.rank_deficient && !e.ones_in_span;
        CHECK(v.empty() == valid);
        ++checked;
      }
    }
  }
  CHECK(checked == 2 + 4 + 4 + 16 + 8 + 64 + 16 + 256);
}

TEST_CASE("canonical constraints") {
  for (const Matrix& x : {fixtures::example1_x(), fixtures::basket_x()}) {
    const auto design = validate_design(x);
    const auto cs = constraint_canonical(design);
    const Index r = x.rows(), k = x.cols();
    CHECK(cs.c.size() == r);
    CHECK(cs.h.rows() == r - k - 1);
    CHECK(cs.c.sum() == doctest::Approx(-1.0).epsilon(1e-12));
    if (cs.h.rows() > 0) CHECK(cs.h.rowwise().sum().cwiseAbs().maxCoeff() <= 1e-12);
    const Matrix c = cs.full();
    CHECK(max_abs(c * x) <= 1e-12);
    CHECK(c.fullPivLu().rank() == r - k);
  }
}

TEST_CASE("four-cell design constraint is pi3 = pi1 pi4") {
  const auto cs = constraint_canonical(fixtures::example1());
  CHECK(cs.h.rows() == 0);
  const Vector expected{{-1, 0, 1, -1}};
  CHECK((cs.c - expected).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("model membership is exactly C log pi = 0") {
  RngStream rng(3, 0);
  for (const Matrix& x : {fixtures::example1_x(), fixtures::basket_x()}) {
    const auto design = validate_design(x);
    const auto cs = constraint_canonical(design);
    for (int trial = 0; trial < 100; ++trial) {
      const Vector in = fixtures::random_model_pi(x, rng);
      CHECK(constraint_residual(cs, in) <= 1e-10);
      const Vector out = random_pi(x.rows(), rng);
      const Vector logp = out.array().log().matrix();
      // Independent membership test: log pi in span(X) with no intercept
      // means least squares on X alone is exact.
      const Vector coef = x.colPivHouseholderQr().solve(logp);
      const bool member = (x * coef - logp).norm() <= 1e-9;
      CHECK((constraint_residual(cs, out) <= 1e-9) == member);
    }
  }
}

TEST_CASE("constraints are permutation equivariant") {
  RngStream rng(4, 0);
  const Matrix x = fixtures::basket_x();
  const auto cs = constraint_canonical(validate_design(x));
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<int> order(7);
    std::iota(order.begin(), order.end(), 0);
    for (int i = 6; i > 0; --i) {
      std::swap(order[static_cast<std::size_t>(i)],
                order[static_cast<std::size_t>(rng.uniform() * (i + 1))]);
    }
    Matrix px(7, 3);
    for (int i = 0; i < 7; ++i) px.row(i) = x.row(order[static_cast<std::size_t>(i)]);
    const auto pcs = constraint_canonical(validate_design(px));
    const Vector in = fixtures::random_model_pi(x, rng);
    const Vector out = random_pi(7, rng);
    Vector pin(7), pout(7);
    for (int i = 0; i < 7; ++i) {
      pin(i) = in(order[static_cast<std::size_t>(i)]);
      pout(i) = out(order[static_cast<std::size_t>(i)]);
    }
    CHECK(constraint_residual(pcs, pin) <= 1e-10);
    CHECK((constraint_residual(pcs, pout) > 1e-9) ==
          (constraint_residual(cs, out) > 1e-9));
  }
}

TEST_CASE("canonical parameters") {
  RngStream rng(8, 0);
  SUBCASE("identity-dropped basis") {
    const auto basis = CanonicalBasis::identity_dropped(5);
    CHECK(max_abs(basis.d * basis.g - Matrix::Identity(4, 4)) <= 1e-12);
    CHECK((basis.d * Vector::Ones(5)).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(canonical_params(Vector::Constant(5, 0.2), basis).cwiseAbs().maxCoeff() <= 1e-12);
    const Vector p = random_pi(5, rng);
    const Vector a = canonical_params(p, basis);
    const Vector b = canonical_params(7.5 * p, basis);
    CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-12);
    // Recover pi up to scale from lambda.
    Vector back = (basis.g * a).array().exp().matrix();
    back /= back.sum();
    CHECK((back - p).cwiseAbs().maxCoeff() <= 1e-12);
  }
  SUBCASE("partitioned basis separates the log-linear model") {
    const auto design = fixtures::basket();
    const auto basis = CanonicalBasis::partitioned(design);
    CHECK(basis.leading == 3);
    CHECK(max_abs(basis.g.leftCols(3) - design.matrix()) == 0.0);
    CHECK(max_abs(basis.d * basis.g - Matrix::Identity(6, 6)) <= 1e-10);
    const auto y = fixtures::basket_counts();
    const auto fit = fit_curved_newton(design, y);
    const Vector lambda = canonical_params(fit.pi, basis);
    CHECK(lambda.tail(3).cwiseAbs().maxCoeff() <= 1e-8);
    CHECK((lambda.head(3) - fit.theta).cwiseAbs().maxCoeff() <= 1e-8);
    for (int trial = 0; trial < 20; ++trial) {
      const Vector p = random_pi(7, rng);
      const Vector l = canonical_params(p, basis);
      const bool member = in_column_span_of_design(design.matrix(),
                                                   p.array().log().matrix());
      CHECK((l.tail(3).cwiseAbs().maxCoeff() <= 1e-9) == member);
    }
  }
}
