#pragma once

// Tail probabilities for the chi-square and Student t distributions, via the
// regularized incomplete gamma and beta functions (series + Lentz continued
// fractions).

#include <cmath>
#include <limits>

#include "cclass/error.hpp"

namespace cclass {

namespace detail {

constexpr double kEps = 1e-16;
constexpr double kTiny = 1e-300;
constexpr int kMaxIter = 10000;

// Lower regularized gamma P(a, x) by its power series; converges fast for x < a + 1.
inline double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  for (int n = 1; n < kMaxIter; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * kEps) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Upper regularized gamma Q(a, x) by its continued fraction; for x >= a + 1.
inline double gamma_q_fraction(double a, double x) {
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxIter; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < kEps) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

// Continued fraction for the incomplete beta function.
inline double beta_fraction(double a, double b, double x) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m < kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace detail

/// Upper regularized incomplete gamma Q(a, x) = Γ(a, x) / Γ(a).
inline double gamma_q(double a, double x) {
  if (!(a > 0.0)) fail(ErrorKind::InvalidArgument, "gamma_q requires a > 0");
  if (x < 0.0 || std::isnan(x)) fail(ErrorKind::InvalidArgument, "gamma_q requires x >= 0");
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  if (x < a + 1.0) return 1.0 - detail::gamma_p_series(a, x);
  return detail::gamma_q_fraction(a, x);
}

/// Lower regularized incomplete gamma P(a, x).
inline double gamma_p(double a, double x) {
  if (!(a > 0.0)) fail(ErrorKind::InvalidArgument, "gamma_p requires a > 0");
  if (x < 0.0 || std::isnan(x)) fail(ErrorKind::InvalidArgument, "gamma_p requires x >= 0");
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  if (x < a + 1.0) return detail::gamma_p_series(a, x);
  return 1.0 - detail::gamma_q_fraction(a, x);
}

/// Upper tail P(X > x) of a chi-square variable with `dof` degrees of freedom.
inline double chi_square_sf(double x, int dof) {
  if (dof < 1) fail(ErrorKind::InvalidDof, "chi-square needs dof >= 1, got " + std::to_string(dof));
  if (x < 0.0 || std::isnan(x)) fail(ErrorKind::InvalidArgument, "chi-square statistic must be >= 0");
  return gamma_q(0.5 * dof, 0.5 * x);
}

/// Regularized incomplete beta I_x(a, b).
inline double beta_inc(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) fail(ErrorKind::InvalidArgument, "beta_inc requires a, b > 0");
  if (x < 0.0 || x > 1.0 || std::isnan(x)) fail(ErrorKind::InvalidArgument, "beta_inc requires x in [0,1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double front = std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                                a * std::log(x) + b * std::log1p(-x));
  if (x < (a + 1.0) / (a + b + 2.0)) return front * detail::beta_fraction(a, b, x) / a;
  return 1.0 - front * detail::beta_fraction(b, a, 1.0 - x) / b;
}

/// Two-sided tail P(|T| > |t|) of Student's t with `dof` degrees of freedom.
inline double student_t_two_sided(double t, double dof) {
  if (!(dof > 0.0)) fail(ErrorKind::InvalidDof, "Student t needs dof > 0");
  if (std::isnan(t)) fail(ErrorKind::InvalidArgument, "t statistic is NaN");
  if (std::isinf(t)) return 0.0;
  return beta_inc(0.5 * dof, 0.5, dof / (dof + t * t));
}

}  // namespace cclass
