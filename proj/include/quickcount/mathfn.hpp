#ifndef QUICKCOUNT_MATHFN_HPP
#define QUICKCOUNT_MATHFN_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "quickcount/common.hpp"
#include "quickcount/rng.hpp"

namespace quickcount {

inline constexpr double kSqrt2 = 1.4142135623730951;
inline constexpr double kSqrt2Pi = 2.5066282746310002;

/// Standard normal CDF. erfc keeps absolute error near machine epsilon in
/// both tails, well inside the 1e-12 contract.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }

inline double normal_pdf(double x) { return std::exp(-0.5 * x * x) / kSqrt2Pi; }

/// Inverse standard normal CDF: Acklam's rational approximation (~1e-9)
/// polished by one Halley step against normal_cdf, which lands the result at
/// full double precision for u in (0,1).
inline double normal_quantile(double u) {
  require(u > 0.0 && u < 1.0, "normal_quantile: u must lie in (0,1), got ", u);
  static constexpr double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                  -2.759285104469687e+02, 1.383577518672690e+02,
                                  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                  -1.556989798598866e+02, 6.680131188771972e+01,
                                  -1.328068155288572e+01};
  static constexpr double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                  -2.400758277161838e+00, -2.549732539343734e+00,
                                  4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                  2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  double x;
  if (u < p_low) {
    const double q = std::sqrt(-2.0 * std::log(u));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (u <= 1.0 - p_low) {
    const double q = u - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-u));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double e = normal_cdf(x) - u;
  const double t = e * kSqrt2Pi * std::exp(0.5 * x * x);
  return x - t / (1.0 + 0.5 * x * t);
}

inline double log_beta(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

namespace detail {

// Continued fraction for the regularized incomplete beta (modified Lentz).
inline double inc_beta_cf(double a, double b, double x) {
  constexpr double tiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  // Convergence needs O(sqrt(a x (1-x))) terms, so census-scale shapes
  // (a + b ~ 1e7) can take a few thousand iterations.
  for (int m = 1; m <= 40000; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) <= 3e-16) return h;
  }
  fail("inc_beta: continued fraction failed to converge at a=", a, " b=", b, " x=", x);
}

}  // namespace detail

namespace detail {

// lnB passed in so batch workloads pay for the three lgamma calls once.
inline double inc_beta_with(double log_norm, double x, double a, double b) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double front = std::exp(a * std::log(x) + b * std::log1p(-x) - log_norm);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * inc_beta_cf(a, b, x) / a;
  return 1.0 - front * inc_beta_cf(b, a, 1.0 - x) / b;
}

}  // namespace detail

/// Regularized incomplete beta I_x(a,b).
inline double inc_beta(double x, double a, double b) {
  require(a > 0.0 && b > 0.0, "inc_beta: shapes must be positive, got a=", a, " b=", b);
  return detail::inc_beta_with(log_beta(a, b), x, a, b);
}

/// Beta distribution with positive shapes; quantiles solved by a bracketed
/// Newton/bisection hybrid against inc_beta.
struct BetaDist {
  double a = 1.0;
  double b = 1.0;

  double mean() const { return a / (a + b); }
  double variance() const {
    const double s = a + b;
    return a * b / (s * s * (s + 1.0));
  }
  double cdf(double x) const { return inc_beta(x, a, b); }
  double log_pdf(double x) const {
    return (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) - log_beta(a, b);
  }
  double pdf(double x) const { return std::exp(log_pdf(x)); }

  double quantile(double u) const {
    require(a > 0.0 && b > 0.0, "beta_quantile: shapes must be positive");
    require(u > 0.0 && u < 1.0, "beta_quantile: u must lie in (0,1), got ", u);
    return solve_quantile(initial_guess(u), 0.0, 1.0, u);
  }

  /// Quantiles for a whole batch of probabilities. Processing in sorted
  /// order lets every solve start from the previous solution, which cuts
  /// the Newton iteration count to two or three on Monte Carlo workloads.
  std::vector<double> quantiles(std::span<const double> u) const {
    std::vector<std::size_t> order(u.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&u](std::size_t i, std::size_t j) { return u[i] < u[j]; });
    std::vector<double> out(u.size());
    double lo = 0.0;
    double x = initial_guess(0.5);
    for (const std::size_t idx : order) {
      x = solve_quantile(std::max(x, lo), lo, 1.0, u[idx]);
      out[idx] = x;
      lo = x;
    }
    return out;
  }

private:
  // Numerical Recipes style starting point.
  double initial_guess(double u) const {
    if (a >= 1.0 && b >= 1.0) {
      const double z = normal_quantile(u);
      const double al = (z * z - 3.0) / 6.0;
      const double h = 2.0 / (1.0 / (2.0 * a - 1.0) + 1.0 / (2.0 * b - 1.0));
      const double w = z * std::sqrt(al + h) / h -
                       (1.0 / (2.0 * b - 1.0) - 1.0 / (2.0 * a - 1.0)) *
                           (al + 5.0 / 6.0 - 2.0 / (3.0 * h));
      return a / (a + b * std::exp(2.0 * w));
    }
    const double lna = std::log(a / (a + b));
    const double lnb = std::log(b / (a + b));
    const double t = std::exp(a * lna) / a;
    const double s = std::exp(b * lnb) / b;
    const double w = t + s;
    if (u < t / w) return std::pow(a * w * u, 1.0 / a);
    return 1.0 - std::pow(b * w * (1.0 - u), 1.0 / b);
  }

  double solve_quantile(double x, double lo, double hi, double u) const {
    constexpr int max_iter = 200;
    constexpr double f_tol = 1e-13;
    const double eps = std::numeric_limits<double>::epsilon();
    if (!(x > lo && x < hi)) x = 0.5 * (lo + hi);
    double f = 0.0;
    for (int it = 0; it < max_iter; ++it) {
      f = cdf(x) - u;
      if (std::fabs(f) <= f_tol) return x;
      if (f > 0.0) {
        hi = x;
      } else {
        lo = x;
      }
      if (hi - lo <= eps * std::max(1e-12, lo)) return x;
      const double dens = pdf(x);
      double next = (dens > 0.0 && std::isfinite(dens)) ? x - f / dens : lo;
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      x = next;
    }
    if (std::fabs(f) <= 1e-10) return x;
    fail("beta_quantile: no convergence for a=", a, " b=", b, " u=", u);
  }
};

/// Beta distribution matching a target mean and variance.
inline BetaDist beta_from_moments(double mu, double var) {
  require(mu > 0.0 && mu < 1.0, "beta_from_moments: mean must lie in (0,1), got ", mu);
  require(var > 0.0 && var < mu * (1.0 - mu),
          "beta_from_moments: variance ", var, " is not attainable by a Beta with mean ", mu);
  const double nu = mu * (1.0 - mu) / var - 1.0;
  return BetaDist{mu * nu, (1.0 - mu) * nu};
}

inline double draw_normal(Engine& eng) { return normal_quantile(uniform01(eng)); }

/// Gamma variate, unit scale (Marsaglia-Tsang, with the shape<1 boost).
inline double draw_gamma(Engine& eng, double shape) {
  require(shape > 0.0, "draw_gamma: shape must be positive, got ", shape);
  if (shape < 1.0) {
    const double g = draw_gamma(eng, shape + 1.0);
    return g * std::pow(uniform01(eng), 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x;
    double v;
    do {
      x = draw_normal(eng);
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform01(eng);
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

/// Normal(mean, sd) truncated to (lo, hi), drawn by inverse CDF on the
/// truncated range; cost is bounded no matter how little mass survives.
inline double draw_truncated_normal(Engine& eng, double mean, double sd, double lo, double hi) {
  require(sd > 0.0 && lo < hi, "draw_truncated_normal: bad arguments");
  const double plo = normal_cdf((lo - mean) / sd);
  const double phi = normal_cdf((hi - mean) / sd);
  require(phi > plo, "draw_truncated_normal: no probability mass in (", lo, ",", hi, ")");
  double u = plo + uniform01(eng) * (phi - plo);
  u = std::clamp(u, std::numeric_limits<double>::min(), 1.0 - 1e-16);
  const double x = mean + sd * normal_quantile(u);
  return std::clamp(x, std::nextafter(lo, hi), std::nextafter(hi, lo));
}

/// Sample Pearson correlation. Degenerate inputs (fewer than two points or a
/// zero-variance series) return 0 by convention.
inline double pearson(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size(), "pearson: series length mismatch");
  const std::size_t n = x.size();
  if (n < 2) return 0.0;
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    mx += x[k];
    my += y[k];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0;
  double syy = 0.0;
  double sxy = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double dx = x[k] - mx;
    const double dy = y[k] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  // Constant series leave O(eps^2) residue after centering; treat anything
  // at that scale as zero variance.
  const double eps = std::numeric_limits<double>::epsilon();
  const double floor_x = static_cast<double>(n) * std::pow(4.0 * eps * (std::fabs(mx) + 1.0), 2);
  const double floor_y = static_cast<double>(n) * std::pow(4.0 * eps * (std::fabs(my) + 1.0), 2);
  if (sxx <= floor_x || syy <= floor_y) return 0.0;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

}  // namespace quickcount

#endif
