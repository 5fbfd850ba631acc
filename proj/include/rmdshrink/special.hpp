#pragma once

// Chi-squared quantiles via the regularized incomplete gamma function.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "rmdshrink/common.hpp"

namespace rmd {
namespace special {

namespace detail {

// Series expansion of P(a, x); converges quickly for x < a + 1.
inline double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  for (int k = 1; k < 10000; ++k) {
    term *= x / (a + k);
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * 1e-17) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Continued fraction for Q(a, x) (modified Lentz); used for x >= a + 1.
inline double gamma_q_fraction(double a, double x) {
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 10000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < 1e-16) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace detail

/// Regularized lower incomplete gamma P(a, x).
inline double gamma_p(double a, double x) {
  ::rmd::detail::require(a > 0.0, "gamma_p: shape must be positive");
  if (x <= 0.0) return 0.0;
  if (x < a + 1.0) return detail::gamma_p_series(a, x);
  return 1.0 - detail::gamma_q_fraction(a, x);
}

/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x), without cancellation in the tail.
inline double gamma_q(double a, double x) {
  ::rmd::detail::require(a > 0.0, "gamma_q: shape must be positive");
  if (x <= 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - detail::gamma_p_series(a, x);
  return detail::gamma_q_fraction(a, x);
}

inline double chi2_cdf(double dof, double q) { return gamma_p(0.5 * dof, 0.5 * q); }

inline double chi2_log_pdf(double dof, double q) {
  const double k = 0.5 * dof;
  return (k - 1.0) * std::log(q) - 0.5 * q - k * std::numbers::ln2 - std::lgamma(k);
}

/// Standard normal quantile (Acklam's rational approximation plus one Halley step).
inline double normal_quantile(double prob) {
  ::rmd::detail::require(prob > 0.0 && prob < 1.0, "normal_quantile: probability outside (0,1)");
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double low = 0.02425;
  double x;
  if (prob < low) {
    const double q = std::sqrt(-2.0 * std::log(prob));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (prob <= 1.0 - low) {
    const double q = prob - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - prob));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double e = 0.5 * std::erfc(-x / std::numbers::sqrt2) - prob;
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

}  // namespace special

/// Quantile of the chi-squared distribution with `dof` degrees of freedom.
///
/// Starts from the Wilson-Hilferty approximation and refines with safeguarded
/// Newton steps on the regularized incomplete gamma function. The returned q
/// satisfies P(dof/2, q/2) = prob to about 1e-12 relative.
inline double chi2_quantile(int dof, double prob) {
  detail::require(dof >= 1, "chi2_quantile: degrees of freedom must be >= 1");
  detail::require(prob > 0.0 && prob < 1.0, "chi2_quantile: probability outside (0,1)");
  const double k = dof;

  const double z = special::normal_quantile(prob);
  const double h = 2.0 / (9.0 * k);
  double q = k * std::pow(1.0 - h + z * std::sqrt(h), 3);
  if (!(q > 0.0)) q = std::max(1e-3 * k, 1e-8);

  // Bracket [lo, hi] keeps Newton steps honest when the start is poor.
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();
  const bool upper_tail = prob > 0.5;
  for (int iter = 0; iter < 200; ++iter) {
    // Work on the smaller tail to avoid cancellation near 1.
    const double resid = upper_tail ? (1.0 - prob) - special::gamma_q(0.5 * k, 0.5 * q)
                                    : special::gamma_p(0.5 * k, 0.5 * q) - prob;
    if (resid == 0.0) return q;
    if (resid > 0.0) hi = std::min(hi, q);
    else lo = std::max(lo, q);

    const double pdf = std::exp(special::chi2_log_pdf(k, q));
    double next = q - resid / pdf;
    if (!(next > lo && next < hi) || !std::isfinite(next))
      next = std::isfinite(hi) ? 0.5 * (lo + hi) : 2.0 * q;
    if (std::fabs(next - q) <= 1e-15 * q) return next;
    q = next;
  }
  return q;
}

}  // namespace rmd
