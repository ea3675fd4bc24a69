#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "mcs/error.hpp"

namespace mcs {

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

namespace detail {

// Acklam's rational approximation for p <= 0.5 (relative error ~1e-9),
// polished with one Halley step on the normal CDF.
inline double normal_quantile_lower(double p) {
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                 1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                 6.680131188771972e+01,  -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                 -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  double x = 0.0;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  }
  const double e = normal_cdf(x) - p;
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

}  // namespace detail

inline double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw ConfigError("normal quantile needs p in (0,1), got " + std::to_string(p));
  if (p == 0.5) return 0.0;
  // 1 - p is exact for p >= 0.5, so the upper half reuses the lower branch.
  return p < 0.5 ? detail::normal_quantile_lower(p) : -detail::normal_quantile_lower(1.0 - p);
}

struct IncompleteGamma {
  double lower;  // P(a, x)
  double upper;  // Q(a, x) = 1 - P(a, x)
};

// Regularized incomplete gamma by series (x < a + 1) or Lentz's continued
// fraction (otherwise).
inline IncompleteGamma regularized_gamma(double a, double x) {
  if (!(a > 0.0)) throw ConfigError("incomplete gamma needs a > 0");
  if (x <= 0.0) return {0.0, 1.0};
  if (std::isinf(x)) return {1.0, 0.0};
  const double log_prefix = a * std::log(x) - x - std::lgamma(a);
  constexpr double eps = 1e-17;
  if (x < a + 1.0) {
    double term = 1.0 / a;
    double sum = term;
    for (int n = 1; n < 100000; ++n) {
      term *= x / (a + n);
      sum += term;
      if (std::abs(term) < std::abs(sum) * eps) break;
    }
    const double p = sum * std::exp(log_prefix);
    return {p, 1.0 - p};
  }
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 100000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < eps) break;
  }
  const double q = h * std::exp(log_prefix);
  return {1.0 - q, q};
}

inline double chisq_cdf(double x, int df) { return regularized_gamma(0.5 * df, 0.5 * x).lower; }

inline double chisq_density(double x, int df) {
  if (x <= 0.0) return 0.0;
  const double k = 0.5 * df;
  return std::exp((k - 1.0) * std::log(x) - 0.5 * x - k * std::numbers::ln2 - std::lgamma(k));
}

// Inverse chi-squared CDF by Newton iteration safeguarded with a bracket.
// The residual uses whichever tail is smaller so upper quantiles keep full
// relative accuracy.
inline double chisq_quantile(double p, int df) {
  if (!(p > 0.0 && p < 1.0)) throw ConfigError("chi-squared quantile needs p in (0,1), got " + std::to_string(p));
  if (df < 1) throw ConfigError("chi-squared quantile needs df >= 1, got " + std::to_string(df));
  const bool use_upper = p > 0.5;
  const double target = use_upper ? 1.0 - p : p;
  // residual(x) is increasing in x in both branches
  auto residual = [&](double x) {
    const auto g = regularized_gamma(0.5 * df, 0.5 * x);
    return use_upper ? target - g.upper : g.lower - target;
  };

  const double k = df;
  const double z = normal_quantile(p);
  const double wh = 1.0 - 2.0 / (9.0 * k) + z * std::sqrt(2.0 / (9.0 * k));
  double x = k * wh * wh * wh;
  if (!(x > 0.0)) x = std::max(1e-8, std::pow(p * std::tgamma(0.5 * k + 1.0), 2.0 / k) * 2.0);

  double lo = 0.0;
  double hi = std::max(2.0 * x, 1.0);
  while (residual(hi) < 0.0) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e300) throw NumericError("chi-squared quantile bracket overflow");
  }
  if (!(x > lo && x < hi)) x = 0.5 * (lo + hi);

  for (int iter = 0; iter < 200; ++iter) {
    const double r = residual(x);
    if (r == 0.0) return x;
    if (r < 0.0) {
      lo = x;
    } else {
      hi = x;
    }
    const double dens = chisq_density(x, df);
    double next = dens > 0.0 ? x - r / dens : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 1e-15 * x || hi - lo <= 1e-15 * hi) return next;
    x = next;
  }
  return x;
}

}  // namespace mcs
