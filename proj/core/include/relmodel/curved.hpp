#pragma once

#include "relmodel/loglinear.hpp"
#include "relmodel/model.hpp"

#include <span>
#include <vector>

namespace relmodel {

struct CurvedOptions {
  double gamma_start = 1.0;
  double tolerance = 1e-10;   // |f(gamma)| at convergence
  int max_outer = 100;
  int max_halvings = 30;
  bool damp_first_step = true;
  LogLinearOptions inner{};
};

/// Maximum likelihood fit of the multiplicative model log pi = X theta.
struct CurvedFit {
  Vector theta;
  Vector pi;
  double gamma = 1.0;   // adjustment factor: gamma X'p = X'pi
  double alpha = 0.0;   // Lagrange multiplier, gamma = 1 / (1 + alpha)
  double loglik = 0.0;  // y' log pi
  int inner_fits = 0;
  int outer_steps = 0;

  double total = 0.0;   // n
  Vector t;             // X'p
  LogLinearFit loglinear;  // unconstrained log-linear fit (gamma = 1)
};

struct GammaValue {
  double value = 0.0;  // f(gamma) = c' log pi(gamma) = log 1'exp(X theta)
  LogLinearFit fit;
};

/// Fits the log-linear model with target gamma * t and returns f(gamma).
/// `warm` (may be empty) seeds the inner Newton iterations.
GammaValue f_gamma(double gamma, const DesignMatrix& design, const Vector& t,
                   const Vector& warm = Vector(),
                   const LogLinearOptions& options = {});

/// df/dgamma = gamma t' F^{-1} t. Strictly positive.
double f_gamma_derivative(double gamma, const InfoMatrix& info,
                          const Vector& t);

/// Outer Newton iterations on the adjustment factor starting from gamma = 1.
CurvedFit fit_curved_newton(const DesignMatrix& design,
                            std::span<const double> y,
                            const CurvedOptions& options = {});

/// Primal variant: for fixed gamma solve X'mu = gamma X'p with log mu = X theta
/// (no normalization), then bisect on 1'mu(gamma) - 1.
CurvedFit fit_curved_bisection(const DesignMatrix& design,
                               std::span<const double> y,
                               const CurvedOptions& options = {});

/// Unnormalized (Poisson-scale) mixed-parametrization fit used by the
/// bisection fitter: X' exp(X theta) = target.
struct PoissonFit {
  Vector theta;
  Vector mu;
  int iterations = 0;
  double residual = 0.0;
};

PoissonFit fit_poisson_mixed(const DesignMatrix& design, const Vector& target,
                             const Vector& theta0 = Vector(),
                             const LogLinearOptions& options = {});

/// Set of gamma for which s / gamma = X'p for some probability vector p.
struct FeasibleRange {
  double lower = 0.0;
  double upper = 0.0;
  Vector s;
};

FeasibleRange feasible_range(const DesignMatrix& design, const Vector& s,
                             double precision = 1e-8);

/// n s' theta_hat / gamma for each grid point, where theta_hat is the curved
/// MLE determined by s. Increasing in gamma.
std::vector<double> loglik_along_ray(const DesignMatrix& design,
                                     const Vector& s, double n,
                                     std::span<const double> gamma_grid);

/// Checks counts: right length, finite, nonnegative, positive total, and at
/// least two nonzero cells. Raises ErrorKind::domain otherwise.
void check_counts(const DesignMatrix& design, std::span<const double> y);

}  // namespace relmodel
