#include <benchmark/benchmark.h>

#include <relmodel/curved.hpp>
#include <relmodel/geometry.hpp>
#include <relmodel/loglinear.hpp>
#include <relmodel/numerics.hpp>

namespace {

using relmodel::Matrix;
using relmodel::Vector;

Matrix basket_x() {
  Matrix x(7, 3);
  x << 0, 0, 1, 0, 1, 0, 0, 1, 1, 1, 0, 0, 1, 0, 1, 1, 1, 0, 1, 1, 1;
  return x;
}

const std::vector<double> kCounts{374, 3684, 233, 991, 41, 607, 46};

// All nonempty subsets of k items as rows (2^k - 1 cells).
Matrix subsets(int k) {
  Matrix x((1 << k) - 1, k);
  for (int m = 1; m < (1 << k); ++m) {
    for (int j = 0; j < k; ++j) x(m - 1, j) = (m >> j) & 1;
  }
  return x;
}

void BM_CurvedNewton(benchmark::State& state) {
  const auto design = relmodel::validate_design(basket_x());
  for (auto _ : state) {
    benchmark::DoNotOptimize(relmodel::fit_curved_newton(design, kCounts));
  }
}
BENCHMARK(BM_CurvedNewton);

void BM_CurvedBisection(benchmark::State& state) {
  const auto design = relmodel::validate_design(basket_x());
  for (auto _ : state) {
    benchmark::DoNotOptimize(relmodel::fit_curved_bisection(design, kCounts));
  }
}
BENCHMARK(BM_CurvedBisection);

void BM_LogLinear(benchmark::State& state) {
  const auto design = relmodel::validate_design(subsets(static_cast<int>(state.range(0))));
  const Vector tau = design.margins(Vector::Constant(design.cells(), 1.0 / design.cells()));
  for (auto _ : state) {
    benchmark::DoNotOptimize(relmodel::fit_loglinear(design, tau));
  }
}
BENCHMARK(BM_LogLinear)->DenseRange(3, 8);

void BM_SimplexFeasible(benchmark::State& state) {
  const Matrix x = subsets(static_cast<int>(state.range(0)));
  const Vector t = x.transpose() * Vector::Constant(x.rows(), 1.0 / x.rows());
  for (auto _ : state) {
    benchmark::DoNotOptimize(relmodel::simplex_feasible(x, t));
  }
}
BENCHMARK(BM_SimplexFeasible)->DenseRange(3, 8);

void BM_ConeEdges(benchmark::State& state) {
  const Matrix x = subsets(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(relmodel::cone_edges(x));
  }
}
BENCHMARK(BM_ConeEdges)->DenseRange(2, 8);

}  // namespace
BENCHMARK_MAIN();
