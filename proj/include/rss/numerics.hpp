#pragma once

// Special functions, distribution functions and a safeguarded scalar root
// finder. Everything here is pure and reentrant.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>

#include "rss/errors.hpp"

namespace rss {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// ---------------------------------------------------------------------------
// Normal distribution
// ---------------------------------------------------------------------------

inline double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

// erfc keeps full relative precision in the lower tail; the upper tail is
// obtained by reflection.
inline double normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

// Upper tail 1 - Phi(x) without cancellation.
inline double normal_sf(double x) {
  return 0.5 * std::erfc(x / std::numbers::sqrt2);
}

// Acklam's rational approximation (relative error ~1e-9) polished with
// Newton steps against normal_cdf.
inline double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw DataError("normal_quantile: probability must lie in (0,1), got " +
                    std::to_string(p));
  }
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
  constexpr double p_low = 0.02425;

  double x;
  if (p < p_low) {
    double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    double q = p - 0.5;
    double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }

  // Work on the tail that carries the precision.
  for (int i = 0; i < 4; ++i) {
    double err = (p < 0.5) ? normal_cdf(x) - p : (1.0 - p) - normal_sf(x);
    double step = err / normal_pdf(x);
    if (!std::isfinite(step)) break;
    x -= step;
    if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(x))) break;
  }
  return x;
}

// ---------------------------------------------------------------------------
// Root finding
// ---------------------------------------------------------------------------

struct RootBracket {
  double lo = 0.0;
  double hi = 1.0;
  double tol = 1e-10;  // relative to max(1, |x|)
  int max_iter = 200;
};

// Regula falsi with the Illinois modification. Any step that fails to halve
// the bracket forces a bisection on the next iteration, so the bracket width
// at least halves every two evaluations. Infinite function values are
// accepted as signs; NaN is not.
template <class F>
double find_root(F&& f, const RootBracket& br) {
  if (!(br.lo < br.hi)) throw DataError("find_root: bracket requires lo < hi");
  if (!(br.tol > 0.0)) throw DataError("find_root: tolerance must be positive");

  double a = br.lo, b = br.hi;
  double fa = f(a), fb = f(b);
  if (std::isnan(fa) || std::isnan(fb)) throw NumericalError("find_root: NaN at bracket end");
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if (std::signbit(fa) == std::signbit(fb)) {
    throw NumericalError("find_root: no sign change in bracket [" + std::to_string(a) + ", " +
                         std::to_string(b) + "]");
  }

  // Illinois-scaled copies used only for the secant step.
  double ga = fa, gb = fb;
  int last_side = 0;
  bool force_bisect = false;
  double x = a;
  for (int iter = 0; iter < br.max_iter; ++iter) {
    const double width = b - a;
    bool bisect = force_bisect || !std::isfinite(ga) || !std::isfinite(gb);
    x = bisect ? a + 0.5 * width : a - ga * width / (gb - ga);
    if (!(x > a && x < b)) x = a + 0.5 * width;
    if (!(x > a && x < b)) return std::abs(fa) < std::abs(fb) ? a : b;  // adjacent doubles

    double fx = f(x);
    if (std::isnan(fx)) throw NumericalError("find_root: NaN at x=" + std::to_string(x));
    if (fx == 0.0) return x;

    if (std::signbit(fx) == std::signbit(fa)) {
      a = x;
      fa = ga = fx;
      if (last_side == -1) gb *= 0.5;
      last_side = -1;
    } else {
      b = x;
      fb = gb = fx;
      if (last_side == +1) ga *= 0.5;
      last_side = +1;
    }
    force_bisect = (b - a) > 0.5 * width;
    if (b - a <= br.tol * std::max(1.0, std::abs(x))) {
      return std::abs(fa) < std::abs(fb) ? a : b;
    }
  }
  throw NumericalError("find_root: max_iter (" + std::to_string(br.max_iter) +
                       ") exceeded; bracket [" + std::to_string(a) + ", " + std::to_string(b) +
                       "]");
}

// ---------------------------------------------------------------------------
// Student t
// ---------------------------------------------------------------------------

namespace detail {

// Continued fraction for the regularized incomplete beta (modified Lentz).
inline double betacf(double a, double b, double x) {
  constexpr double tiny = 1e-300;
  constexpr double eps = 4e-16;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 100000; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < eps) return h;
  }
  throw NumericalError("incomplete beta: continued fraction did not converge");
}

}  // namespace detail

// Regularized incomplete beta I_x(a, b).
inline double incomplete_beta(double x, double a, double b) {
  if (!(a > 0.0 && b > 0.0)) throw DataError("incomplete_beta: shape parameters must be positive");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * detail::betacf(a, b, x) / a;
  return 1.0 - front * detail::betacf(b, a, 1.0 - x) / b;
}

inline void check_df(double df) {
  if (!(df > 0.0) || std::isnan(df)) {
    throw DataError("t distribution: degrees of freedom must be positive, got " +
                    std::to_string(df));
  }
}

inline double t_pdf(double x, double df) {
  check_df(df);
  const double lognorm = std::lgamma(0.5 * (df + 1.0)) - std::lgamma(0.5 * df) -
                         0.5 * std::log(df * std::numbers::pi);
  return std::exp(lognorm - 0.5 * (df + 1.0) * std::log1p(x * x / df));
}

inline double t_cdf(double x, double df) {
  check_df(df);
  if (std::isnan(x)) return kNaN;
  if (x == 0.0) return 0.5;
  if (std::isinf(x)) return x > 0 ? 1.0 : 0.0;
  // Lower tail mass below -|x| is 0.5 * I_{df/(df+x^2)}(df/2, 1/2). For
  // large |x| relative to df use the complementary argument directly.
  const double x2 = x * x;
  double tail;
  if (x2 < df) {
    tail = 0.5 * (1.0 - incomplete_beta(x2 / (df + x2), 0.5, 0.5 * df));
  } else {
    tail = 0.5 * incomplete_beta(df / (df + x2), 0.5 * df, 0.5);
  }
  return x > 0 ? 1.0 - tail : tail;
}

inline double t_quantile(double p, double df) {
  check_df(df);
  if (!(p > 0.0 && p < 1.0)) {
    throw DataError("t_quantile: probability must lie in (0,1), got " + std::to_string(p));
  }
  if (p == 0.5) return 0.0;
  // Solve on the lower half and reflect.
  const bool upper = p > 0.5;
  const double q = upper ? 1.0 - p : p;

  double guess = normal_quantile(q);
  double lo = std::min(guess, -1e-12), hi = std::min(guess * 0.5, -1e-13);
  int expand = 0;
  while (t_cdf(lo, df) > q) {
    lo *= 2.0;
    if (++expand > 2000) throw NumericalError("t_quantile: could not bracket");
  }
  while (t_cdf(hi, df) < q) {
    hi *= 0.5;
    if (++expand > 4000) throw NumericalError("t_quantile: could not bracket");
  }
  double x = lo;
  if (lo < hi) {
    x = find_root([&](double v) { return t_cdf(v, df) - q; },
                  RootBracket{lo, hi, 1e-14, 400});
  }
  for (int i = 0; i < 3; ++i) {
    const double dens = t_pdf(x, df);
    if (!(dens > 0.0)) break;
    const double step = (t_cdf(x, df) - q) / dens;
    if (!std::isfinite(step)) break;
    x -= step;
    if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(x))) break;
  }
  return upper ? -x : x;
}

// ---------------------------------------------------------------------------
// Chi-square with one degree of freedom
// ---------------------------------------------------------------------------

// P(chi2_1 > x) = 2 (1 - Phi(sqrt x)) = erfc(sqrt(x/2)).
inline double chisq1_sf(double x) {
  if (std::isnan(x) || x < 0.0) {
    throw DataError("chisq1_sf: argument must be non-negative, got " + std::to_string(x));
  }
  if (std::isinf(x)) return 0.0;
  return std::erfc(std::sqrt(0.5 * x));
}

inline double chisq1_quantile(double p) {
  const double z = normal_quantile(0.5 + 0.5 * p);
  return z * z;
}

// ---------------------------------------------------------------------------
// Binomial tail and beta(h, H-h+1) at one half
// ---------------------------------------------------------------------------

inline double binomial_coefficient(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return std::round(c);
}

// sum_{l=k}^{H} C(H,l) q^l (1-q)^{H-l}
inline double binomial_tail(int H, int k, double q) {
  if (H < 0) throw DataError("binomial_tail: H must be non-negative");
  if (k < 0 || k > H) {
    throw DataError("binomial_tail: k must lie in [0, H], got k=" + std::to_string(k) +
                    " H=" + std::to_string(H));
  }
  if (!(q >= 0.0 && q <= 1.0)) {
    throw DataError("binomial_tail: q must lie in [0,1], got " + std::to_string(q));
  }
  if (k == 0) return 1.0;
  if (q == 0.0) return 0.0;
  if (q == 1.0) return 1.0;
  double sum = 0.0;
  for (int l = k; l <= H; ++l) {
    sum += binomial_coefficient(H, l) * std::pow(q, l) * std::pow(1.0 - q, H - l);
  }
  return std::clamp(sum, 0.0, 1.0);
}

// beta_h = B(h, H-h+1, 1/2), the CDF of the h-th of H uniform order statistics
// at one half, via P(Beta(h, H-h+1) <= q) = P(Bin(H, q) >= h). The sum of
// binomial coefficients is an integer and the scaling is a power of two, so
// the result is exact for H <= 52.
inline double beta_half_cdf(int h, int H) {
  if (H < 1 || h < 1 || h > H) {
    throw DataError("beta_half_cdf: need 1 <= h <= H, got h=" + std::to_string(h) +
                    " H=" + std::to_string(H));
  }
  if (H > 52) return binomial_tail(H, h, 0.5);
  std::uint64_t count = 0;
  for (int l = h; l <= H; ++l) count += static_cast<std::uint64_t>(binomial_coefficient(H, l));
  return std::ldexp(static_cast<double>(count), -H);
}

}  // namespace rss
