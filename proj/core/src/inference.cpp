#include "relmodel/inference.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace relmodel {

double deviance_curved(std::span<const double> y, const Vector& pi_tilde,
                       const Vector& pi_hat, bool* clipped) {
  if (static_cast<Index>(y.size()) != pi_tilde.size() ||
      pi_tilde.size() != pi_hat.size()) {
    throw Error(ErrorKind::domain, "deviance_curved: dimension mismatch");
  }
  double dev = 0.0;
  for (std::size_t j = 0; j < y.size(); ++j) {
    if (y[j] == 0.0) continue;
    const auto i = static_cast<Index>(j);
    dev += y[j] * (std::log(pi_tilde(i)) - std::log(pi_hat(i)));
  }
  dev *= 2.0;
  if (clipped) *clipped = dev < 0.0;
  return std::max(dev, 0.0);
}

AsymptoticVariances asymptotic_variances(const Vector& pi_hat,
                                         const DesignMatrix& design, double n,
                                         double gamma_hat) {
  if (!(n > 0.0) || !(gamma_hat > 0.0)) {
    throw Error(ErrorKind::domain,
                "asymptotic variances need n > 0 and gamma > 0");
  }
  const InfoMatrix info(pi_hat, design);
  const Vector s = design.margins(pi_hat);
  AsymptoticVariances out;
  out.alpha = 1.0 / (n * info.quadratic_inverse(s));
  out.gamma = out.alpha / std::pow(gamma_hat, 4);
  return out;
}

ScoreStatistics score_and_gamma_statistics(double gamma_hat, double alpha_hat,
                                           const AsymptoticVariances& var) {
  if (!(var.alpha > 0.0) || !(var.gamma > 0.0)) {
    throw Error(ErrorKind::domain, "variances must be positive");
  }
  ScoreStatistics out;
  out.lagrange = alpha_hat * alpha_hat / var.alpha;
  out.adjustment = (gamma_hat - 1.0) * (gamma_hat - 1.0) / var.gamma;
  return out;
}

double normal_two_sided_quantile(double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw Error(ErrorKind::domain, "confidence level must be in (0,1)");
  }
  return std::sqrt(chisq_isf(1.0 - level, 1));
}

Interval gamma_acceptance_interval(double var_gamma, double level) {
  if (var_gamma < 0.0) throw Error(ErrorKind::domain, "negative variance");
  const double half = normal_two_sided_quantile(level) * std::sqrt(var_gamma);
  return {1.0 - half, 1.0 + half};
}

TestReport make_test_report(const DesignMatrix& design,
                            std::span<const double> y, const CurvedFit& fit,
                            double level) {
  TestReport rep;
  rep.cells = design.cells();
  rep.params = design.params();
  rep.total = fit.total;
  rep.level = level;

  const int df_loglinear = static_cast<int>(rep.cells - rep.params - 1);
  rep.loglinear_deviance.value =
      std::max(0.0, deviance_loglinear(y, fit.loglinear.pi));
  rep.loglinear_deviance.df = df_loglinear;
  rep.loglinear_deviance.p_value =
      df_loglinear > 0 ? chisq_sf(rep.loglinear_deviance.value, df_loglinear)
                       : 1.0;

  rep.curved_deviance.value = deviance_curved(
      y, fit.loglinear.pi, fit.pi, &rep.curved_deviance_clipped);
  rep.curved_deviance.p_value = chisq_sf(rep.curved_deviance.value, 1);

  rep.gamma_hat = fit.gamma;
  rep.alpha_hat = fit.alpha;
  rep.variances = asymptotic_variances(fit.pi, design, fit.total, fit.gamma);
  const auto stats =
      score_and_gamma_statistics(fit.gamma, fit.alpha, rep.variances);
  rep.lagrange.value = stats.lagrange;
  rep.lagrange.p_value = chisq_sf(stats.lagrange, 1);
  rep.adjustment.value = stats.adjustment;
  rep.adjustment.p_value = chisq_sf(stats.adjustment, 1);
  rep.gamma_interval = gamma_acceptance_interval(rep.variances.gamma, level);

  if (df_loglinear == 0) {
    rep.warnings.push_back(
        "log-linear model is saturated (r - k - 1 = 0); D_L is not a test");
  } else if (rep.loglinear_deviance.p_value < 1.0 - level) {
    std::ostringstream msg;
    msg << "the log-linear model is rejected (D_L = "
        << rep.loglinear_deviance.value << ", p = "
        << rep.loglinear_deviance.p_value
        << "); tests of the multiplicative model assume it fits";
    rep.warnings.push_back(msg.str());
  }
  if (rep.curved_deviance_clipped) {
    rep.warnings.push_back("D_M was slightly negative from round-off; "
                           "clipped to 0");
  }
  return rep;
}

TestReport run_tests(const DesignMatrix& design, std::span<const double> y,
                     double level, const CurvedOptions& options) {
  if (!(level > 0.0 && level < 1.0)) {
    throw Error(ErrorKind::domain, "level must be in (0,1)");
  }
  const CurvedFit fit = fit_curved_newton(design, y, options);
  return make_test_report(design, y, fit, level);
}

namespace {

struct ProfileContext {
  const DesignMatrix& design;
  const Vector& s;
  double n;
  Vector theta_hat;

  ProfilePoint evaluate(double gamma) const {
    ProfilePoint pt;
    pt.gamma = gamma;
    try {
      if (!(gamma > 0.0) || !simplex_feasible(design.matrix(), s / gamma)) {
        throw Error(ErrorKind::feasibility, "infeasible gamma");
      }
      const LogLinearFit fit =
          fit_loglinear_unchecked(design, s / gamma, theta_hat, {});
      pt.scaling = fit.log_normalizer;
      pt.curved_deviance =
          2.0 * n * (s.dot(fit.theta - theta_hat) / gamma - pt.scaling);
      const InfoMatrix info(fit.pi, design);
      pt.scaling_slope = -info.quadratic_inverse(s) / std::pow(gamma, 3);
      pt.ok = true;
    } catch (const Error& e) {
      pt.ok = false;
      pt.error = e.what();
    }
    return pt;
  }

  // Crossing of D_M(gamma) = q between an inside and an outside point.
  double crossing(double inside, double outside, double q) const {
    for (int i = 0; i < 80 && std::abs(outside - inside) > 1e-12; ++i) {
      const double mid = 0.5 * (inside + outside);
      const ProfilePoint pt = evaluate(mid);
      if (pt.ok && pt.curved_deviance <= q) {
        inside = mid;
      } else {
        outside = mid;
      }
    }
    return 0.5 * (inside + outside);
  }
};

}  // namespace

ProfileCurve dm_profile(const DesignMatrix& design, const Vector& s, double n,
                        std::span<const double> gamma_grid, double level) {
  if (!(n > 0.0)) throw Error(ErrorKind::domain, "profile needs n > 0");
  const LogLinearFit at_s = fit_loglinear(design, s);
  ProfileContext ctx{design, s, n, at_s.theta};

  ProfileCurve out;
  out.level = level;
  out.points.reserve(gamma_grid.size());
  for (double gamma : gamma_grid) out.points.push_back(ctx.evaluate(gamma));

  const double q = chisq_isf(1.0 - level, 1);
  std::size_t best = out.points.size();
  for (std::size_t i = 0; i < out.points.size(); ++i) {
    const auto& pt = out.points[i];
    if (!pt.ok) continue;
    if (best == out.points.size() ||
        pt.curved_deviance < out.points[best].curved_deviance) {
      best = i;
    }
  }
  if (best == out.points.size() || out.points[best].curved_deviance > q) {
    return out;
  }
  auto inside = [&](std::size_t i) {
    return out.points[i].ok && out.points[i].curved_deviance <= q;
  };
  std::size_t left = best;
  while (left > 0 && inside(left - 1)) --left;
  std::size_t right = best;
  while (right + 1 < out.points.size() && inside(right + 1)) ++right;

  Interval iv{out.points[left].gamma, out.points[right].gamma};
  if (left == 0) {
    out.interval_truncated = true;
  } else {
    iv.low = ctx.crossing(out.points[left].gamma, out.points[left - 1].gamma, q);
  }
  if (right + 1 == out.points.size()) {
    out.interval_truncated = true;
  } else {
    iv.high =
        ctx.crossing(out.points[right].gamma, out.points[right + 1].gamma, q);
  }
  out.likelihood_interval = iv;
  return out;
}

std::vector<double> default_profile_grid(const FeasibleRange& range,
                                         int points, double coverage) {
  if (points < 2) throw Error(ErrorKind::domain, "grid needs >= 2 points");
  const double mid = 0.5 * (range.lower + range.upper);
  const double half = 0.5 * coverage * (range.upper - range.lower);
  std::vector<double> grid(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) {
    grid[static_cast<std::size_t>(i)] =
        mid - half + 2.0 * half * i / (points - 1);
  }
  return grid;
}

}  // namespace relmodel
