#pragma once

#include "relmodel/curved.hpp"
#include "relmodel/loglinear.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace relmodel {

struct Interval {
  double low = 0.0;
  double high = 0.0;

  bool contains(double v) const noexcept { return low <= v && v <= high; }
};

/// 2 y'[log pi_tilde - log pi_hat]; round-off below zero is clipped to 0.
double deviance_curved(std::span<const double> y, const Vector& pi_tilde,
                       const Vector& pi_hat, bool* clipped = nullptr);

struct AsymptoticVariances {
  double alpha = 0.0;  // [n pi' X F^{-1} X' pi]^{-1}
  double gamma = 0.0;  // alpha / gamma_hat^4 (delta method)
};

AsymptoticVariances asymptotic_variances(const Vector& pi_hat,
                                         const DesignMatrix& design, double n,
                                         double gamma_hat);

struct ScoreStatistics {
  double lagrange = 0.0;    // L = alpha^2 / var_alpha
  double adjustment = 0.0;  // G = (gamma - 1)^2 / var_gamma
};

ScoreStatistics score_and_gamma_statistics(double gamma_hat, double alpha_hat,
                                           const AsymptoticVariances& var);

/// 1 -/+ z sd(gamma) with z the two-sided normal quantile at `level`.
Interval gamma_acceptance_interval(double var_gamma, double level);

/// Two-sided standard normal quantile for confidence `level` in (0,1).
double normal_two_sided_quantile(double level);

struct TestStatistic {
  double value = 0.0;
  int df = 1;
  double p_value = 1.0;
};

struct TestReport {
  Index cells = 0;
  Index params = 0;
  double total = 0.0;
  double level = 0.95;

  TestStatistic loglinear_deviance;  // D_L, df = r - k - 1
  TestStatistic curved_deviance;     // D_M
  TestStatistic lagrange;            // L
  TestStatistic adjustment;          // G
  bool curved_deviance_clipped = false;

  double gamma_hat = 1.0;
  double alpha_hat = 0.0;
  AsymptoticVariances variances;
  Interval gamma_interval;

  std::vector<std::string> warnings;
};

/// Fits both models and runs all tests. D_L is reported first; when it
/// rejects at 1 - level a warning is attached.
TestReport run_tests(const DesignMatrix& design, std::span<const double> y,
                     double level = 0.95, const CurvedOptions& options = {});

/// Same, reusing an existing curved fit.
TestReport make_test_report(const DesignMatrix& design,
                            std::span<const double> y, const CurvedFit& fit,
                            double level);

struct ProfilePoint {
  double gamma = 0.0;
  bool ok = false;
  double curved_deviance = 0.0;  // D_M(gamma)
  double scaling = 0.0;          // g(gamma)
  double scaling_slope = 0.0;    // g'(gamma) = -s'F^{-1}s / gamma^3
  std::string error;
};

struct ProfileCurve {
  std::vector<ProfilePoint> points;
  double level = 0.95;
  /// {gamma : D_M(gamma) <= chi-square(1) quantile}; edges refined by
  /// bisection between grid points.
  std::optional<Interval> likelihood_interval;
  bool interval_truncated = false;  // set touches the grid edge
};

/// D_M(gamma) = 2n[s'(theta(gamma) - theta_hat)/gamma - g(gamma)] and
/// g(gamma) = log 1'exp(X theta(gamma)), where theta(gamma) fits the target
/// s/gamma. Per-point failures are recorded, not thrown.
ProfileCurve dm_profile(const DesignMatrix& design, const Vector& s, double n,
                        std::span<const double> gamma_grid,
                        double level = 0.95);

/// Default grid: `points` equally spaced values spanning the central
/// `coverage` fraction of the feasible range.
std::vector<double> default_profile_grid(const FeasibleRange& range,
                                         int points = 101,
                                         double coverage = 0.9);

}  // namespace relmodel
