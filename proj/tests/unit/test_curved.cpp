#include <doctest.h>

#include "fixtures.hpp"
#include "oracles.hpp"

#include <relmodel/curved.hpp>
#include <relmodel/errors.hpp>
#include <relmodel/model.hpp>

#include <cmath>

using namespace relmodel;

namespace {

Vector counts_vector(const std::vector<double>& y) {
  return Eigen::Map<const Vector>(y.data(), static_cast<Index>(y.size()));
}

}  // namespace

TEST_CASE("f(gamma) is increasing with the predicted derivative") {
  const auto design = fixtures::basket();
  const auto y = fixtures::basket_counts();
  const Vector t = sufficient_statistic(design, y);
  // gamma t must stay in the hull, the reciprocal of the range for t / gamma.
  const auto range = feasible_range(design, t);
  const double lo = 1.0 / range.upper, hi = 1.0 / range.lower;
  double prev = -1e300;
  for (double g = lo + 0.005; g < hi - 0.005; g += 0.005) {
    const auto v = f_gamma(g, design, t);
    CHECK(v.value > prev);
    prev = v.value;
  }
  for (double g : {lo + 0.01, 0.95, 1.0, 1.05, hi - 0.01}) {
    const double h = 1e-5;
    const double numeric =
        (f_gamma(g + h, design, t).value - f_gamma(g - h, design, t).value) / (2 * h);
    const auto at = f_gamma(g, design, t);
    const double analytic =
        f_gamma_derivative(g, fisher_info_tau(at.fit.pi, design), t);
    CHECK(analytic > 0.0);
    CHECK(analytic == doctest::Approx(numeric).epsilon(1e-4));
  }
}

TEST_CASE("f(1) is the log-normalizer of the log-linear fit") {
  const auto design = fixtures::basket();
  const auto y = fixtures::basket_counts();
  const Vector t = sufficient_statistic(design, y);
  const auto v = f_gamma(1.0, design, t);
  CHECK(v.value == doctest::Approx(fit_loglinear(design, t).log_normalizer));
  // Positive here, so the root lies below one.
  CHECK(v.value > 0.0);
}

TEST_CASE("basket data adjustment factor") {
  const auto design = fixtures::basket();
  const auto y = fixtures::basket_counts();
  const auto fit = fit_curved_newton(design, y);
  CHECK(std::abs(fit.gamma - 0.9994) <= 0.0002);
  CHECK(fit.alpha == doctest::Approx(1.0 / fit.gamma - 1.0).epsilon(1e-12));
  CHECK(fit.total == 5976.0);

  const Vector t = sufficient_statistic(design, y);
  CHECK((fit.gamma * t - design.margins(fit.pi)).cwiseAbs().maxCoeff() <= 1e-8);
  CHECK(std::abs(fit.pi.sum() - 1.0) <= 1e-12);
  const auto cs = constraint_canonical(design);
  CHECK(constraint_residual(cs, fit.pi) <= 1e-8);
  CHECK((design.matrix() * fit.theta - fit.pi.array().log().matrix())
            .cwiseAbs().maxCoeff() <= 1e-10);
  CHECK(fit.loglik == doctest::Approx(counts_vector(y).dot(
                                          fit.pi.array().log().matrix())));
}

TEST_CASE("data already in the model give gamma = 1") {
  RngStream rng(31, 0);
  for (const Matrix& x : {fixtures::example1_x(), fixtures::basket_x()}) {
    const auto design = validate_design(x);
    const Vector pi = fixtures::random_model_pi(x, rng);
    std::vector<double> y(static_cast<std::size_t>(pi.size()));
    for (Index j = 0; j < pi.size(); ++j) y[static_cast<std::size_t>(j)] = 1000 * pi(j);
    const auto fit = fit_curved_newton(design, y);
    CHECK(std::abs(fit.gamma - 1.0) <= 1e-9);
    CHECK((fit.pi - pi).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("Newton fit matches a direct surface search") {
  const Matrix x = fixtures::example1_x();
  const auto design = validate_design(x);
  for (const std::vector<double>& y :
       {std::vector<double>{30, 12, 41, 17}, std::vector<double>{5, 50, 9, 22},
        std::vector<double>{100, 100, 100, 100}}) {
    oracles::SurfaceSearch oracle{x, fixtures::example1_u(), x.transpose() * counts_vector(y)};
    const Vector theta = oracle.maximize();
    const auto fit = fit_curved_newton(design, y);
    CAPTURE(y[0]);
    CHECK((fit.theta - theta).cwiseAbs().maxCoeff() <= 1e-4);
    CHECK((fit.pi - (x * theta).array().exp().matrix()).cwiseAbs().maxCoeff() <= 1e-6);
  }
}

TEST_CASE("bisection and Newton agree") {
  RngStream rng(32, 0);
  for (const Matrix& x : {fixtures::example1_x(), fixtures::basket_x()}) {
    const auto design = validate_design(x);
    for (int trial = 0; trial < 25; ++trial) {
      const auto y = fixtures::random_counts(x.rows(), rng);
      const auto a = fit_curved_newton(design, y);
      const auto b = fit_curved_bisection(design, y);
      CHECK(std::abs(a.gamma - b.gamma) <= 1e-6);
      CHECK((a.pi - b.pi).cwiseAbs().maxCoeff() <= 1e-6);
    }
  }
  const auto b = fit_curved_bisection(fixtures::basket(), fixtures::basket_counts());
  CHECK(std::abs(b.gamma - 0.9994) <= 0.0002);
}

TEST_CASE("fit invariants hold on random data") {
  RngStream rng(33, 0);
  for (const Matrix& x : {fixtures::example1_x(), fixtures::basket_x()}) {
    const auto design = validate_design(x);
    const auto cs = constraint_canonical(design);
    for (int trial = 0; trial < 100; ++trial) {
      const auto y = fixtures::random_counts(x.rows(), rng, 1, 500);
      const auto fit = fit_curved_newton(design, y);
      const Vector t = sufficient_statistic(design, y);
      CHECK((fit.gamma * t - design.margins(fit.pi)).cwiseAbs().maxCoeff() <= 1e-8);
      CHECK(std::abs(fit.pi.sum() - 1.0) <= 1e-12);
      CHECK(constraint_residual(cs, fit.pi) <= 1e-8);
      CHECK(fit.gamma > 0.0);
    }
  }
}

TEST_CASE("feasible range of the basket design") {
  // Hull of the rows: the unit cube cut by x1 + x2 + x3 >= 1, so s / gamma
  // stays inside exactly for max(s) <= gamma <= sum(s).
  const auto design = fixtures::basket();
  const auto fit = fit_curved_newton(design, fixtures::basket_counts());
  const Vector s = design.margins(fit.pi);
  const auto range = feasible_range(design, s);
  CHECK(range.lower == doctest::Approx(s.maxCoeff()).epsilon(1e-7));
  CHECK(range.upper == doctest::Approx(s.sum()).epsilon(1e-7));
  CHECK(std::abs(range.lower - 0.765) <= 0.005);
  CHECK(std::abs(range.upper - 1.162) <= 0.005);

  RngStream rng(34, 0);
  for (int trial = 0; trial < 50; ++trial) {
    Vector p(7);
    for (Index j = 0; j < 7; ++j) p(j) = 0.02 + rng.uniform();
    p /= p.sum();
    const Vector sp = design.margins(p);
    const auto r = feasible_range(design, sp);
    CHECK(r.lower == doctest::Approx(sp.maxCoeff()).epsilon(1e-7));
    CHECK(r.upper == doctest::Approx(sp.sum()).epsilon(1e-7));
  }
}

TEST_CASE("feasible range at a vertex collapses") {
  const auto design = fixtures::example1();
  const Vector s = design.matrix().row(0).transpose();
  try {
    feasible_range(design, s);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::boundary);
  }
}

TEST_CASE("log-likelihood along the ray") {
  const auto design = fixtures::basket();
  const auto y = fixtures::basket_counts();
  const auto fit = fit_curved_newton(design, y);
  const Vector s = design.margins(fit.pi);
  const auto range = feasible_range(design, s);
  std::vector<double> grid;
  for (int i = 1; i < 40; ++i) {
    grid.push_back(range.lower + (range.upper - range.lower) * i / 40.0);
  }
  const auto values = loglik_along_ray(design, s, fit.total, grid);
  for (std::size_t i = 1; i < values.size(); ++i) CHECK(values[i] > values[i - 1]);
  const std::vector<double> at{fit.gamma};
  CHECK(loglik_along_ray(design, s, fit.total, at)[0] ==
        doctest::Approx(fit.loglik).epsilon(1e-9));
  const std::vector<double> outside{range.upper * 1.01};
  CHECK_THROWS_AS(loglik_along_ray(design, s, fit.total, outside), Error);
}

TEST_CASE("count validation") {
  const auto design = fixtures::example1();
  auto kind_of = [&](std::vector<double> y) {
    try {
      fit_curved_newton(design, y);
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::internal;
  };
  CHECK(kind_of({0, 0, 0, 0}) == ErrorKind::domain);
  CHECK(kind_of({0, 0, 5, 0}) == ErrorKind::domain);
  CHECK(kind_of({1, -1, 5, 3}) == ErrorKind::domain);
  CHECK(kind_of({1, 2, 3}) == ErrorKind::domain);
}
