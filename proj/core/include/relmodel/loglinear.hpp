#pragma once

#include "relmodel/model.hpp"
#include "relmodel/numerics.hpp"

#include <span>

namespace relmodel {

/// F = X'[diag(pi) - pi pi']X with its Cholesky factor. Positive definite
/// for every pi in the open simplex.
class InfoMatrix {
 public:
  InfoMatrix(const Vector& pi, const DesignMatrix& design);

  const Matrix& matrix() const noexcept { return f_; }
  Vector solve(const Vector& v) const;
  /// v' F^{-1} v
  double quadratic_inverse(const Vector& v) const;

 private:
  Matrix f_;
  Eigen::LLT<Matrix> llt_;
};

InfoMatrix fisher_info_tau(const Vector& pi, const DesignMatrix& design);

struct LogLinearOptions {
  double tolerance = 1e-10;  // infinity norm of the mean-parameter residual
  int max_iterations = 200;
  int max_halvings = 30;
};

/// Solution of the log-linear model pi = exp(X theta) / 1'exp(X theta) with
/// X'pi matching a target mean parameter.
struct LogLinearFit {
  Vector theta;
  Vector pi;
  Vector tau;
  /// log(1'exp(X theta)); zero exactly when pi is in the multiplicative model.
  double log_normalizer = 0.0;
  int iterations = 0;
  double residual = 0.0;
};

/// Probabilities and log-normalizer at theta, computed stably.
LogLinearFit evaluate_loglinear(const DesignMatrix& design,
                                const Vector& theta);

/// Newton iterations theta += F^{-1}(tau_target - X'pi) with step-halving on
/// the residual norm. An empty theta0 starts from the uniform distribution.
/// Infeasible targets raise ErrorKind::feasibility.
LogLinearFit fit_loglinear(const DesignMatrix& design, const Vector& tau_target,
                           const Vector& theta0 = Vector(),
                           const LogLinearOptions& options = {});

/// Same as fit_loglinear but skips the feasibility pre-check; callers that
/// already established feasibility use this.
LogLinearFit fit_loglinear_unchecked(const DesignMatrix& design,
                                     const Vector& tau_target,
                                     const Vector& theta0,
                                     const LogLinearOptions& options);

/// 2 sum_j y_j [log(y_j / n) - log pi_j], with 0 log 0 = 0.
double deviance_loglinear(std::span<const double> y, const Vector& pi);

/// X'p for the sample proportions of counts y.
Vector sufficient_statistic(const DesignMatrix& design,
                            std::span<const double> y);

}  // namespace relmodel
