#include "relmodel/curved.hpp"

#include <cmath>
#include <numeric>
#include <optional>
#include <sstream>

namespace relmodel {
namespace {

double loglik_of(std::span<const double> y, const Vector& pi) {
  double out = 0.0;
  for (std::size_t j = 0; j < y.size(); ++j) {
    if (y[j] > 0.0) out += y[j] * std::log(pi(static_cast<Index>(j)));
  }
  return out;
}

void finish(CurvedFit& fit, std::span<const double> y) {
  fit.alpha = 1.0 / fit.gamma - 1.0;
  fit.loglik = loglik_of(y, fit.pi);
}

}  // namespace

void check_counts(const DesignMatrix& design, std::span<const double> y) {
  if (static_cast<Index>(y.size()) != design.cells()) {
    std::ostringstream msg;
    msg << "count vector has " << y.size() << " cells but the design has "
        << design.cells() << " rows";
    throw Error(ErrorKind::domain, msg.str());
  }
  double total = 0.0;
  int nonzero = 0;
  for (double v : y) {
    if (!std::isfinite(v) || v < 0.0) {
      throw Error(ErrorKind::domain, "counts must be finite and nonnegative");
    }
    total += v;
    nonzero += v > 0.0;
  }
  if (!(total > 0.0)) {
    throw Error(ErrorKind::domain, "counts sum to zero; no MLE exists");
  }
  if (nonzero < 2) {
    throw Error(ErrorKind::domain,
                "all observations fall in a single cell; the MLE is not in "
                "the open simplex");
  }
}

GammaValue f_gamma(double gamma, const DesignMatrix& design, const Vector& t,
                   const Vector& warm, const LogLinearOptions& options) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw Error(ErrorKind::feasibility, "adjustment factor must be positive");
  }
  const Vector target = gamma * t;
  if (!simplex_feasible(design.matrix(), target)) {
    std::ostringstream msg;
    msg << "gamma = " << gamma << " is not feasible for these data";
    throw Error(ErrorKind::feasibility, msg.str());
  }
  GammaValue out;
  out.fit = fit_loglinear_unchecked(design, target, warm, options);
  out.value = out.fit.log_normalizer;
  return out;
}

double f_gamma_derivative(double gamma, const InfoMatrix& info,
                          const Vector& t) {
  if (!(gamma > 0.0)) {
    throw Error(ErrorKind::domain, "f'(gamma) needs gamma > 0");
  }
  return gamma * info.quadratic_inverse(t);
}

CurvedFit fit_curved_newton(const DesignMatrix& design,
                            std::span<const double> y,
                            const CurvedOptions& options) {
  check_counts(design, y);
  CurvedFit fit;
  fit.total = std::accumulate(y.begin(), y.end(), 0.0);
  fit.t = sufficient_statistic(design, y);
  const Vector& t = fit.t;

  fit.loglinear = fit_loglinear(design, t, Vector(), options.inner);
  ++fit.inner_fits;

  double gamma = options.gamma_start;
  GammaValue current;
  if (gamma == 1.0) {
    current.fit = fit.loglinear;
    current.value = fit.loglinear.log_normalizer;
  } else {
    current = f_gamma(gamma, design, t, fit.loglinear.theta, options.inner);
    ++fit.inner_fits;
  }

  for (int outer = 0;; ++outer) {
    if (std::abs(current.value) <= options.tolerance) {
      fit.outer_steps = outer;
      break;
    }
    if (outer >= options.max_outer) {
      std::ostringstream msg;
      msg << "adjustment-factor Newton did not converge in "
          << options.max_outer << " steps (f = " << current.value << ")";
      throw ConvergenceError(msg.str(), std::abs(current.value));
    }
    const InfoMatrix info(current.fit.pi, design);
    double step = -current.value / f_gamma_derivative(gamma, info, t);
    if (outer == 0 && options.damp_first_step) step *= 0.5;

    std::optional<GammaValue> next;
    double proposal = gamma;
    for (int h = 0; h <= options.max_halvings; ++h, step *= 0.5) {
      proposal = gamma + step;
      if (!(proposal > 0.0)) continue;
      try {
        next = f_gamma(proposal, design, t, current.fit.theta, options.inner);
        ++fit.inner_fits;
        break;
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::feasibility &&
            e.kind() != ErrorKind::boundary &&
            e.kind() != ErrorKind::convergence) {
          throw;
        }
      }
    }
    if (!next) {
      std::ostringstream msg;
      msg << "could not find a feasible adjustment factor near " << gamma
          << " after " << options.max_halvings << " step halvings";
      throw Error(ErrorKind::boundary, msg.str());
    }
    gamma = proposal;
    current = std::move(*next);
  }

  fit.gamma = gamma;
  fit.theta = current.fit.theta;
  fit.pi = current.fit.pi;
  finish(fit, y);
  return fit;
}

PoissonFit fit_poisson_mixed(const DesignMatrix& design, const Vector& target,
                             const Vector& theta0,
                             const LogLinearOptions& options) {
  const Matrix& x = design.matrix();
  const Index k = design.params();
  if (target.size() != k) {
    throw Error(ErrorKind::domain, "Poisson target has the wrong length");
  }
  PoissonFit fit;
  fit.theta = theta0.size() == k ? theta0 : Vector::Zero(k);
  fit.mu = (x * fit.theta).array().exp().matrix();
  Vector residual = target - x.transpose() * fit.mu;
  double res_norm = residual.norm();

  for (int it = 0; it <= options.max_iterations; ++it) {
    fit.residual = residual.cwiseAbs().maxCoeff();
    if (fit.residual <= options.tolerance) {
      fit.iterations = it;
      return fit;
    }
    if (it == options.max_iterations) break;
    if (!fit.mu.allFinite() || fit.mu.minCoeff() <= 1e-300) {
      throw Error(ErrorKind::boundary, "Poisson fit reached the boundary");
    }
    const Matrix jac = x.transpose() * fit.mu.asDiagonal() * x;
    const Vector step = solve_spd(jac, residual);
    double scale = 1.0;
    bool accepted = false;
    for (int h = 0; h <= options.max_halvings; ++h, scale *= 0.5) {
      Vector theta = fit.theta + scale * step;
      Vector mu = (x * theta).array().exp().matrix();
      if (!mu.allFinite()) continue;
      Vector trial = target - x.transpose() * mu;
      const double norm = trial.norm();
      if (norm < res_norm) {
        fit.theta = std::move(theta);
        fit.mu = std::move(mu);
        residual = std::move(trial);
        res_norm = norm;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  std::ostringstream msg;
  msg << "Poisson mixed-parametrization fit did not converge (residual "
      << fit.residual << ")";
  throw ConvergenceError(msg.str(), fit.residual);
}

CurvedFit fit_curved_bisection(const DesignMatrix& design,
                               std::span<const double> y,
                               const CurvedOptions& options) {
  check_counts(design, y);
  CurvedFit fit;
  fit.total = std::accumulate(y.begin(), y.end(), 0.0);
  fit.t = sufficient_statistic(design, y);
  const Vector& t = fit.t;
  fit.loglinear = fit_loglinear(design, t, Vector(), options.inner);
  ++fit.inner_fits;

  LogLinearOptions inner = options.inner;
  inner.tolerance = std::min(inner.tolerance, 1e-12);

  Vector warm;
  auto excess = [&](double gamma) {
    PoissonFit pf = fit_poisson_mixed(design, gamma * t, warm, inner);
    ++fit.inner_fits;
    warm = pf.theta;
    return std::make_pair(std::log(pf.mu.sum()), std::move(pf));
  };

  constexpr double kMinGamma = 1e-3;
  constexpr double kMaxGamma = 1e3;
  double a = options.gamma_start;
  auto [ha, fa] = excess(a);
  double b = a;
  double hb = ha;
  PoissonFit fb = fa;
  // Step outward from the start until log(1'mu) changes sign.
  const double factor = ha > 0.0 ? 0.5 : 2.0;
  while ((ha > 0.0) == (hb > 0.0) && hb != 0.0) {
    a = b;
    ha = hb;
    fa = fb;
    b *= factor;
    if (b < kMinGamma || b > kMaxGamma) {
      throw Error(ErrorKind::convergence,
                  "bisection fitter could not bracket the adjustment factor "
                  "in [1e-3, 1e3]");
    }
    warm = fa.theta;
    std::tie(hb, fb) = excess(b);
  }
  double lo = std::min(a, b);
  double hi = std::max(a, b);
  PoissonFit best = std::abs(ha) < std::abs(hb) ? fa : fb;
  double best_gamma = std::abs(ha) < std::abs(hb) ? a : b;
  double best_h = std::min(std::abs(ha), std::abs(hb));
  const bool increasing = (a < b) == (hb > ha);

  int steps = 0;
  while (best_h > 1e-14 && hi - lo > 1e-15 * hi && steps < 200) {
    const double mid = 0.5 * (lo + hi);
    auto [hm, fm] = excess(mid);
    ++steps;
    if (std::abs(hm) < best_h) {
      best_h = std::abs(hm);
      best = fm;
      best_gamma = mid;
    }
    if ((hm > 0.0) == increasing) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  fit.outer_steps = steps;
  fit.gamma = best_gamma;
  fit.theta = best.theta;
  fit.pi = best.mu / best.mu.sum();
  finish(fit, y);
  return fit;
}

FeasibleRange feasible_range(const DesignMatrix& design, const Vector& s,
                             double precision) {
  const Matrix& x = design.matrix();
  if (s.size() != design.params() || !s.allFinite()) {
    throw Error(ErrorKind::domain, "feasible_range: bad mean vector");
  }
  auto feasible = [&](double gamma) {
    return simplex_feasible(x, s / gamma);
  };
  if (!feasible(1.0)) {
    throw Error(ErrorKind::domain,
                "s is not a mean vector of the design (infeasible at 1)");
  }

  auto search = [&](double outward) {
    double inside = 1.0;
    double outside = outward;
    int doublings = 0;
    while (feasible(outside)) {
      inside = outside;
      outside = outward > 1.0 ? outside * 2.0 : outside * 0.5;
      if (++doublings > 200) {
        throw Error(ErrorKind::domain, "feasible range is unbounded");
      }
    }
    while (std::abs(outside - inside) > precision) {
      const double mid = 0.5 * (inside + outside);
      if (feasible(mid)) {
        inside = mid;
      } else {
        outside = mid;
      }
    }
    return 0.5 * (inside + outside);
  };

  FeasibleRange out;
  out.s = s;
  out.lower = search(0.5);
  out.upper = search(2.0);
  if (out.upper - out.lower <= std::max(1e-6, 4.0 * precision)) {
    std::ostringstream msg;
    msg << "feasible range collapses to gamma = " << 0.5 * (out.lower + out.upper)
        << ": s is on the boundary of the convex hull of the design rows";
    throw Error(ErrorKind::boundary, msg.str());
  }
  return out;
}

std::vector<double> loglik_along_ray(const DesignMatrix& design,
                                     const Vector& s, double n,
                                     std::span<const double> gamma_grid) {
  const LogLinearFit at_s = fit_loglinear(design, s);
  if (std::abs(at_s.log_normalizer) > 1e-8) {
    throw Error(ErrorKind::domain,
                "s is not the mean parameter of a point in the multiplicative "
                "model");
  }
  const double numerator = n * s.dot(at_s.theta);
  std::vector<double> out;
  out.reserve(gamma_grid.size());
  for (double gamma : gamma_grid) {
    if (!(gamma > 0.0) || !simplex_feasible(design.matrix(), s / gamma)) {
      std::ostringstream msg;
      msg << "gamma = " << gamma << " is outside the feasible range";
      throw Error(ErrorKind::feasibility, msg.str());
    }
    out.push_back(numerator / gamma);
  }
  return out;
}

}  // namespace relmodel
