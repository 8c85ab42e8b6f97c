#include "risbeam/special_functions.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "risbeam/common.hpp"

namespace risbeam {

namespace {

constexpr double kEps = 1e-16;
constexpr int kMaxSeries = 100000;
constexpr int kMaxPoissonTerms = 200000;
constexpr double kTailTolerance = 1e-14;

// Series for P(a, x), accurate for x < a + 1.
double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  for (int n = 1; n < kMaxSeries; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::abs(term) < std::abs(sum) * kEps) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Continued fraction for Q(a, x) (modified Lentz), accurate for x >= a + 1.
double gamma_q_fraction(double a, double x) {
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxSeries; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

void check_gamma_args(double a, double x) {
  if (!(a > 0.0)) throw std::invalid_argument("incomplete gamma: a must be > 0");
  if (!(x >= 0.0)) throw std::invalid_argument("incomplete gamma: x must be >= 0");
}

double log_poisson(double mean, int j) {
  if (mean == 0.0) return j == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
  return -mean + j * std::log(mean) - std::lgamma(j + 1.0);
}

// Sum of Poisson(nc / 2) weighted central terms term(j), walking down and up
// from the mode until the remaining Poisson mass is below the tolerance.
template <class Term>
double poisson_mixture(double nc, Term term) {
  const double mean = 0.5 * nc;
  const int mode = static_cast<int>(std::floor(mean));
  double sum = 0.0;
  int used = 0;
  // Walks away from the Poisson mode until the contributions fall off; once
  // they shrink by a ratio r < 1 per step the rest is bounded by c r / (1 - r).
  auto walk = [&](int start, int step) {
    double prev = 0.0;
    for (int j = start; j >= 0; j += step) {
      const double w = std::exp(log_poisson(mean, j));
      const double c = w * term(j);
      sum += c;
      if (++used > kMaxPoissonTerms) throw NumericalError("detection", used, "noncentral chi-square series did not converge");
      if (w == 0.0) break;
      if (prev > 0.0 && c < prev) {
        const double r = c / prev;
        if (c * r / (1.0 - r) <= kTailTolerance * sum) break;
      }
      if (c == 0.0 && prev > 0.0) break;
      prev = c;
    }
  };
  walk(mode, -1);
  walk(mode + 1, +1);
  return sum;
}

void check_chi2_args(double k, double nc, double x) {
  if (!(k > 0.0)) throw std::invalid_argument("chi-square: degrees of freedom must be > 0");
  if (!(nc >= 0.0) || !std::isfinite(nc)) throw std::invalid_argument("chi-square: noncentrality must be finite and >= 0");
  if (std::isnan(x)) throw std::invalid_argument("chi-square: x is NaN");
}

}  // namespace

double q_function(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

double q_inverse(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("q_inverse: p must lie in (0, 1)");
  // Acklam's rational approximation of the normal quantile at 1 - p.
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                 1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                 6.680131188771972e+01,  -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                 -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                 3.754408661907416e+00};
  const double lower = p;  // quantile of 1 - p is minus the quantile of p
  double z;
  if (lower < 0.02425) {
    const double q = std::sqrt(-2.0 * std::log(lower));
    z = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (lower > 1.0 - 0.02425) {
    const double q = std::sqrt(-2.0 * std::log1p(-lower));
    z = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else {
    const double q = lower - 0.5;
    const double r = q * q;
    z = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  }
  // z approximates Phi^{-1}(p); Q^{-1}(p) = -Phi^{-1}(p). Newton on Q(x) = p.
  double x = -z;
  for (int i = 0; i < 4; ++i) {
    const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * kPi);
    if (pdf == 0.0) break;
    const double step = (q_function(x) - p) / pdf;
    x += step;
    if (std::abs(step) < 1e-15 * (1.0 + std::abs(x))) break;
  }
  return x;
}

double gamma_p(double a, double x) {
  check_gamma_args(a, x);
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  return x < a + 1.0 ? gamma_p_series(a, x) : 1.0 - gamma_q_fraction(a, x);
}

double gamma_q(double a, double x) {
  check_gamma_args(a, x);
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  return x < a + 1.0 ? 1.0 - gamma_p_series(a, x) : gamma_q_fraction(a, x);
}

double chi2_cdf(double k, double x) {
  check_chi2_args(k, 0.0, x);
  return x <= 0.0 ? 0.0 : gamma_p(0.5 * k, 0.5 * x);
}

double chi2_sf(double k, double x) {
  check_chi2_args(k, 0.0, x);
  return x <= 0.0 ? 1.0 : gamma_q(0.5 * k, 0.5 * x);
}

double chi2_sf_inverse(double k, double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("chi2_sf_inverse: p must lie in (0, 1)");
  check_chi2_args(k, 0.0, 0.0);
  double lo = 0.0;
  double hi = std::max(1.0, k);
  while (chi2_sf(k, hi) > p) hi *= 2.0;
  for (int i = 0; i < 200 && hi - lo > 1e-14 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (chi2_sf(k, mid) > p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double ncx2_cdf(double k, double nc, double x) {
  check_chi2_args(k, nc, x);
  if (x <= 0.0) return 0.0;
  if (nc == 0.0) return chi2_cdf(k, x);
  return std::min(1.0, poisson_mixture(nc, [&](int j) { return gamma_p(0.5 * k + j, 0.5 * x); }));
}

double ncx2_sf(double k, double nc, double x) {
  check_chi2_args(k, nc, x);
  if (x <= 0.0) return 1.0;
  if (nc == 0.0) return chi2_sf(k, x);
  return std::min(1.0, poisson_mixture(nc, [&](int j) { return gamma_q(0.5 * k + j, 0.5 * x); }));
}

}  // namespace risbeam
