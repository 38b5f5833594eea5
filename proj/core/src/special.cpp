#include "relmodel/errors.hpp"
#include "relmodel/numerics.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace relmodel {
namespace {

constexpr int kMaxTerms = 10000;
constexpr double kEps = 1e-16;
constexpr double kTiny = 1e-300;

// Series for P(a, x); converges quickly for x < a + 1.
double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  for (int n = 1; n < kMaxTerms; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::abs(term) < std::abs(sum) * kEps) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Continued fraction for Q(a, x) (modified Lentz); used for x >= a + 1.
double gamma_q_fraction(double a, double x) {
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxTerms; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

void check_gamma_args(double a, double x) {
  if (!(a > 0.0) || !std::isfinite(a)) {
    throw Error(ErrorKind::domain, "incomplete gamma: shape must be positive");
  }
  if (std::isnan(x)) {
    throw Error(ErrorKind::domain, "incomplete gamma: x is NaN");
  }
}

}  // namespace

double gamma_p(double a, double x) {
  check_gamma_args(a, x);
  if (x <= 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_fraction(a, x);
}

double gamma_q(double a, double x) {
  check_gamma_args(a, x);
  if (x <= 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_fraction(a, x);
}

double chisq_sf(double x, int df) {
  if (df <= 0) {
    throw Error(ErrorKind::domain,
                "chi-square tail needs a positive number of degrees of freedom");
  }
  if (std::isnan(x)) throw Error(ErrorKind::domain, "chi-square tail of NaN");
  return gamma_q(0.5 * df, 0.5 * x);
}

double chisq_isf(double tail, int df) {
  if (!(tail > 0.0 && tail < 1.0)) {
    std::ostringstream msg;
    msg << "chi-square quantile needs a tail probability in (0,1), got "
        << tail;
    throw Error(ErrorKind::domain, msg.str());
  }
  double lo = 0.0;
  double hi = 1.0;
  while (chisq_sf(hi, df) > tail) hi *= 2.0;
  for (int i = 0; i < 200 && hi - lo > 1e-13 * std::max(1.0, hi); ++i) {
    const double mid = 0.5 * (lo + hi);
    if (chisq_sf(mid, df) > tail) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace relmodel
