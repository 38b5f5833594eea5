#pragma once

#include <relmodel/model.hpp>
#include <relmodel/numerics.hpp>
#include <relmodel/rng.hpp>

#include <string>
#include <vector>

namespace fixtures {

using relmodel::Matrix;
using relmodel::Vector;

inline std::string data_path(const std::string& name) {
  return std::string(RELMODEL_DATA_DIR) + "/" + name;
}

// Four cells, three parameters.
inline Matrix example1_x() {
  Matrix x(4, 3);
  x << 1, 0, 0,
       1, 1, 0,
       1, 1, 1,
       0, 1, 1;
  return x;
}

// Reference edges of {theta : X theta <= 0} for example1_x, one per column.
inline Matrix example1_u() {
  Matrix u(3, 3);
  u << 0, 0, -1,
       0, -1, 1,
       -1, 1, -1;
  return u;
}

// Baskets over (biscuits, milk, tomato sauce) without the empty basket.
inline Matrix basket_x() {
  Matrix x(7, 3);
  x << 0, 0, 1,
       0, 1, 0,
       0, 1, 1,
       1, 0, 0,
       1, 0, 1,
       1, 1, 0,
       1, 1, 1;
  return x;
}

inline std::vector<double> basket_counts() {
  return {374, 3684, 233, 991, 41, 607, 46};
}

inline relmodel::DesignMatrix example1() {
  return relmodel::validate_design(example1_x());
}

inline relmodel::DesignMatrix basket() {
  return relmodel::validate_design(basket_x());
}

// pi in the multiplicative model: a point on the constraint surface along a
// random interior cone direction, found with an independent bisection.
inline Vector random_model_pi(const Matrix& x, relmodel::RngStream& rng) {
  const auto k = x.cols();
  Vector u(k);
  Vector eta;
  do {
    for (Eigen::Index i = 0; i < k; ++i) u(i) = 4.0 * rng.uniform() - 2.0;
    eta = x * u;
  } while (eta.maxCoeff() >= -0.05);
  auto excess = [&](double c) { return (c * eta).array().exp().sum() - 1.0; };
  double lo = 0.0, hi = 1.0;
  while (excess(hi) > 0.0) hi *= 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (excess(mid) > 0.0 ? lo : hi) = mid;
  }
  Vector pi = (0.5 * (lo + hi) * eta).array().exp().matrix();
  return pi / pi.sum();
}

inline std::vector<double> random_counts(Eigen::Index r,
                                         relmodel::RngStream& rng,
                                         double lo = 5.0, double hi = 200.0) {
  std::vector<double> y(static_cast<std::size_t>(r));
  for (auto& v : y) v = std::floor(lo + (hi - lo) * rng.uniform());
  return y;
}

}  // namespace fixtures
