#include "relmodel/loglinear.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

namespace relmodel {
namespace {

constexpr double kBoundaryProb = 1e-300;

Vector to_vector(std::span<const double> y) {
  Vector v(static_cast<Index>(y.size()));
  for (std::size_t j = 0; j < y.size(); ++j) v(static_cast<Index>(j)) = y[j];
  return v;
}

}  // namespace

InfoMatrix::InfoMatrix(const Vector& pi, const DesignMatrix& design) {
  const Matrix& x = design.matrix();
  if (pi.size() != x.rows()) {
    throw Error(ErrorKind::domain, "information matrix: dimension mismatch");
  }
  if (!pi.allFinite() || pi.minCoeff() <= kBoundaryProb) {
    throw Error(ErrorKind::boundary,
                "information matrix requested on the boundary of the simplex");
  }
  const Vector tau = x.transpose() * pi;
  f_ = x.transpose() * pi.asDiagonal() * x - tau * tau.transpose();
  f_ = 0.5 * (f_ + f_.transpose());
  llt_.compute(f_);
  if (llt_.info() != Eigen::Success ||
      llt_.matrixLLT().diagonal().minCoeff() <= 0.0) {
    throw Error(ErrorKind::boundary,
                "information matrix is not positive definite");
  }
}

Vector InfoMatrix::solve(const Vector& v) const {
  Vector out = llt_.solve(v);
  if (!out.allFinite()) {
    throw Error(ErrorKind::boundary, "information solve is not finite");
  }
  return out;
}

double InfoMatrix::quadratic_inverse(const Vector& v) const {
  return v.dot(solve(v));
}

InfoMatrix fisher_info_tau(const Vector& pi, const DesignMatrix& design) {
  return InfoMatrix(pi, design);
}

LogLinearFit evaluate_loglinear(const DesignMatrix& design,
                                const Vector& theta) {
  const Vector eta = design.matrix() * theta;
  const double top = eta.maxCoeff();
  Vector e = (eta.array() - top).exp().matrix();
  const double z = e.sum();
  LogLinearFit out;
  out.theta = theta;
  out.pi = e / z;
  out.log_normalizer = top + std::log(z);
  out.tau = design.margins(out.pi);
  return out;
}

LogLinearFit fit_loglinear(const DesignMatrix& design, const Vector& tau_target,
                           const Vector& theta0,
                           const LogLinearOptions& options) {
  if (tau_target.size() != design.params()) {
    throw Error(ErrorKind::domain, "log-linear target has the wrong length");
  }
  if (!simplex_feasible(design.matrix(), tau_target)) {
    throw Error(ErrorKind::feasibility,
                "log-linear target is outside the convex hull of the design "
                "rows");
  }
  return fit_loglinear_unchecked(design, tau_target, theta0, options);
}

LogLinearFit fit_loglinear_unchecked(const DesignMatrix& design,
                                     const Vector& tau_target,
                                     const Vector& theta0,
                                     const LogLinearOptions& options) {
  const Index k = design.params();
  Vector theta = theta0.size() == k ? theta0 : Vector::Zero(k);
  LogLinearFit fit = evaluate_loglinear(design, theta);
  Vector residual = tau_target - fit.tau;
  double res_inf = residual.cwiseAbs().maxCoeff();
  double res_norm = residual.norm();

  // One extra Newton step once the tolerance is met: the outer adjustment
  // factor loop differentiates through log 1'exp(X theta), which needs theta
  // to near machine precision, not just to the residual tolerance.
  auto polish = [&](int iterations) {
    try {
      const InfoMatrix info(fit.pi, design);
      LogLinearFit trial =
          evaluate_loglinear(design, theta + info.solve(residual));
      const Vector trial_res = tau_target - trial.tau;
      if (trial.pi.allFinite() && trial_res.norm() <= res_norm) {
        fit = std::move(trial);
        res_inf = trial_res.cwiseAbs().maxCoeff();
      }
    } catch (const Error&) {
      // keep the converged iterate
    }
    fit.iterations = iterations;
    fit.residual = res_inf;
    return fit;
  };

  for (int it = 0; it < options.max_iterations; ++it) {
    if (res_inf <= options.tolerance) return polish(it);
    const InfoMatrix info(fit.pi, design);
    const Vector step = info.solve(residual);

    // The Newton direction always decreases ||residual||_2 for a small enough
    // step, so halving terminates unless we are numerically on the boundary.
    double scale = 1.0;
    bool accepted = false;
    for (int h = 0; h <= options.max_halvings; ++h, scale *= 0.5) {
      LogLinearFit trial = evaluate_loglinear(design, theta + scale * step);
      Vector trial_res = tau_target - trial.tau;
      const double trial_norm = trial_res.norm();
      if (trial.pi.allFinite() && trial_norm < res_norm) {
        theta = trial.theta;
        fit = std::move(trial);
        residual = std::move(trial_res);
        res_norm = trial_norm;
        res_inf = residual.cwiseAbs().maxCoeff();
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      std::ostringstream msg;
      msg << "log-linear Newton step could not reduce the residual "
          << res_inf << " after " << options.max_halvings << " halvings";
      throw ConvergenceError(msg.str(), res_inf);
    }
  }
  if (res_inf <= options.tolerance) return polish(options.max_iterations);
  std::ostringstream msg;
  msg << "log-linear fit did not converge in " << options.max_iterations
      << " iterations (residual " << res_inf << ")";
  throw ConvergenceError(msg.str(), res_inf);
}

double deviance_loglinear(std::span<const double> y, const Vector& pi) {
  if (static_cast<Index>(y.size()) != pi.size()) {
    throw Error(ErrorKind::domain, "deviance: dimension mismatch");
  }
  const double n = std::accumulate(y.begin(), y.end(), 0.0);
  if (!(n > 0.0)) throw Error(ErrorKind::domain, "deviance: zero total count");
  double dev = 0.0;
  for (std::size_t j = 0; j < y.size(); ++j) {
    if (y[j] < 0.0) throw Error(ErrorKind::domain, "deviance: negative count");
    if (y[j] == 0.0) continue;
    dev += y[j] * (std::log(y[j] / n) - std::log(pi(static_cast<Index>(j))));
  }
  return 2.0 * dev;
}

Vector sufficient_statistic(const DesignMatrix& design,
                            std::span<const double> y) {
  if (static_cast<Index>(y.size()) != design.cells()) {
    throw Error(ErrorKind::domain,
                "count vector length does not match the design rows");
  }
  const Vector v = to_vector(y);
  const double n = v.sum();
  if (!(n > 0.0)) throw Error(ErrorKind::domain, "zero total count");
  return design.margins(v / n);
}

}  // namespace relmodel
