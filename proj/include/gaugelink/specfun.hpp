#pragma once
// Parabolic cylinder functions D_nu(z) for real order and argument, and a
// signed log-Gamma.
//
// D_nu solves w'' - (z^2/4 - nu - 1/2) w = 0 and decays for z -> +inf.
// Evaluation regimes:
//   series      Kummer-function expansion about z = 0 (any sign of z),
//               accepted when the estimated cancellation loss is small;
//   asymptotic  large-z expansion z^nu exp(-z^2/4) sum_k ..., accepted when
//               the terms fall below round-off before they start to grow;
//   recurrence  two seed orders in [-2, 0) from the integral representation,
//               then upward recurrence D_{nu+1} = z D_nu - nu D_{nu-1}
//               (stable for z > 0);
//   integral    D_{-mu}(z) = exp(-z^2/4)/Gamma(mu) int_0^inf t^{mu-1}
//               exp(-z t - t^2/2) dt directly, for negative orders.
// Intermediate arithmetic is long double; the series falls back to
// quadruple precision when cancellation is severe.

#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include <boost/math/constants/constants.hpp>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <fmt/format.h>

#include "gaugelink/errors.hpp"

namespace gaugelink::specfun {

enum class PcfMethod { series, asymptotic, recurrence, integral };

inline const char* to_string(PcfMethod m) {
  switch (m) {
    case PcfMethod::series: return "series";
    case PcfMethod::asymptotic: return "asymptotic";
    case PcfMethod::recurrence: return "recurrence";
    case PcfMethod::integral: return "integral";
  }
  return "?";
}

struct PcfEval {
  double value = 0.0;
  double derivative = 0.0;
  PcfMethod method_tag = PcfMethod::series;
};

inline constexpr double kMinOrder = -30.0;
inline constexpr double kMaxOrder = 60.0;
inline constexpr double kMaxArgument = 60.0;

struct LogGamma {
  double value = 0.0;  // ln|Gamma(x)|
  int sign = 1;        // sign of Gamma(x)
};

inline bool is_nonpositive_integer(double x) { return x <= 0.0 && x == std::floor(x); }

inline LogGamma log_gamma(double x) {
  if (!std::isfinite(x)) throw DomainError(fmt::format("log_gamma: non-finite argument {}", x));
  if (is_nonpositive_integer(x)) throw PoleError(fmt::format("log_gamma: pole at x = {}", x));
  int sign = 1;
  const double v = boost::math::lgamma(x, &sign);
  return {v, sign};
}

namespace detail {

using real = long double;

template <class T>
T recip_gamma(T x) {
  using std::floor;
  if (x <= 0 && x == floor(x)) return T(0);
  if (x > 1700) return T(0);
  return 1 / boost::math::tgamma(x);
}

struct Approx {
  real value = 0;
  real rel_error = 0;
};

// Kummer M(a, b, x) summed together with the sum of absolute terms.
template <class T>
void kummer_sum(T a, T b, T x, T& sum, T& abs_sum) {
  using std::fabs;
  T term = 1;
  sum = 1;
  abs_sum = 1;
  const T kmin = (fabs(a) > x ? fabs(a) : x) + 2;
  for (int k = 0; k < 20000; ++k) {
    term *= (a + k) / ((b + k) * (k + 1)) * x;
    sum += term;
    abs_sum += fabs(term);
    if (term == 0) return;
    if (k > kmin && fabs(term) <= std::numeric_limits<T>::epsilon() * 1e-3 * fabs(sum)) return;
  }
  throw NumericalError(fmt::format("pcf series: Kummer sum did not converge (a={}, x={})",
                                   static_cast<double>(a), static_cast<double>(x)));
}

// Power series about z = 0 via
// D_nu(z) = e^{-z^2/4} [A M(-nu/2, 1/2, z^2/2) + B z M((1-nu)/2, 3/2, z^2/2)].
template <class T>
Approx series_in(real nu_in, real z_in) {
  using std::exp, std::fabs, std::pow;
  const T nu = nu_in, z = z_in;
  const T sqrt_pi = boost::math::constants::root_pi<T>();
  const T A = pow(T(2), nu / 2) * sqrt_pi * recip_gamma<T>((1 - nu) / 2);
  const T B = -pow(T(2), (nu + 1) / 2) * sqrt_pi * recip_gamma<T>(-nu / 2);
  const T x = z * z / 2;
  T m1 = 0, m1abs = 0, m2 = 0, m2abs = 0;
  if (A != 0) kummer_sum<T>(-nu / 2, T(0.5), x, m1, m1abs);
  if (B != 0) kummer_sum<T>((1 - nu) / 2, T(1.5), x, m2, m2abs);
  const T pref = exp(-z * z / 4);
  const T value = pref * (A * m1 + B * z * m2);
  const T magnitude = pref * (fabs(A) * m1abs + fabs(B * z) * m2abs);
  const real rel = value == 0 ? (magnitude == 0 ? real(0) : std::numeric_limits<real>::infinity())
                              : static_cast<real>(64 * std::numeric_limits<T>::epsilon() *
                                                  magnitude / fabs(value));
  return {static_cast<real>(value), rel};
}

inline Approx series(real nu, real z) {
  Approx s = series_in<real>(nu, z);
  if (s.rel_error > 1e-14L) {
    const Approx q = series_in<boost::multiprecision::cpp_bin_float_quad>(nu, z);
    if (q.rel_error < s.rel_error) s = q;
  }
  return s;
}

// Large-z expansion, z > 0. Empty when the terms start to grow before
// reaching round-off.
inline std::optional<real> asymptotic(real nu, real z) {
  if (z <= 0) return std::nullopt;
  const real z2 = z * z;
  real term = 1, sum = 1;
  real prev = std::numeric_limits<real>::infinity();
  for (int k = 0; k < 400; ++k) {
    term *= -(nu - 2 * k) * (nu - 2 * k - 1) / (2 * (k + 1) * z2);
    if (term == 0) break;
    const real a = std::fabs(term);
    if (a > prev) return std::nullopt;
    prev = a;
    sum += term;
    if (a <= 1e-20L * std::fabs(sum)) break;
    if (k == 399) return std::nullopt;
  }
  return std::exp(nu * std::log(z) - z2 / 4) * sum;
}

// e^{z^2/4} D_{-mu}(z) for mu > 0, z >= 0.
inline real scaled_negative_order(real mu, real z) {
  boost::math::quadrature::exp_sinh<real> integrator;
  auto f = [&](real t) -> real {
    if (t <= 0) return 0;
    return std::exp((mu - 1) * std::log(t) - z * t - t * t / 2);
  };
  real err = 0, l1 = 0;
  const real val = integrator.integrate(f, 1e-17L, &err, &l1);
  if (!(err <= 1e-13L * std::fabs(val))) {
    throw NumericalError(fmt::format("pcf integral: poor convergence (mu={}, z={}, err={})",
                                     static_cast<double>(mu), static_cast<double>(z),
                                     static_cast<double>(err)));
  }
  return val * recip_gamma(mu);
}

struct Raw {
  real value;
  PcfMethod method;
};

// Upward recurrence from seeds nu0 in [-2,-1) and nu0 + 1, z > 0.
inline real recurrence(real nu, real z) {
  const int steps = static_cast<int>(std::floor(nu + 2));
  const real nu0 = nu - steps;
  real lo = scaled_negative_order(-nu0, z);       // D_{nu0}
  real hi = scaled_negative_order(-(nu0 + 1), z); // D_{nu0+1}
  if (steps == 0) return lo * std::exp(-z * z / 4);
  // After k iterations hi holds D_{nu0+1+k}.
  for (int k = 1; k < steps; ++k) {
    const real order = nu0 + k;  // order of hi before the update
    const real next = z * hi - order * lo;
    lo = hi;
    hi = next;
  }
  return hi * std::exp(-z * z / 4);
}

inline Raw evaluate_positive(real nu, real z) {
  if (z >= 6) {
    if (auto a = asymptotic(nu, z)) return {*a, PcfMethod::asymptotic};
  }
  if (z * z / 2 < 200) {
    const Approx s = series(nu, z);
    if (s.rel_error <= 1e-14L) return {s.value, PcfMethod::series};
  }
  if (z < 6) {
    if (auto a = asymptotic(nu, z)) return {*a, PcfMethod::asymptotic};
  }
  if (nu < -1) return {scaled_negative_order(-nu, z) * std::exp(-z * z / 4), PcfMethod::integral};
  return {recurrence(nu, z), PcfMethod::recurrence};
}

inline Raw evaluate(real nu, real z) {
  if (z < 0) {
    if (nu >= 0 && nu == std::floor(nu)) {
      Raw r = evaluate_positive(nu, -z);
      if (static_cast<long long>(nu) % 2 != 0) r.value = -r.value;
      return r;
    }
    const Approx s = series(nu, z);
    if (!(s.rel_error <= 1e-8L)) {
      throw NumericalError(fmt::format(
          "pcf series: cancellation too severe at nu={}, z={} (estimated relative error {:.3g})",
          static_cast<double>(nu), static_cast<double>(z), static_cast<double>(s.rel_error)));
    }
    return {s.value, PcfMethod::series};
  }
  return evaluate_positive(nu, z);
}

inline double to_double(real v, double nu, double z) {
  if (!(std::fabs(v) <= static_cast<real>(std::numeric_limits<double>::max()))) {
    throw NumericalError(fmt::format("pcf: D_{}({}) is not representable in double precision", nu, z));
  }
  return static_cast<double>(v);
}

inline void check_domain(double nu, double z) {
  if (!std::isfinite(nu) || !std::isfinite(z) || nu < kMinOrder || nu > kMaxOrder ||
      std::fabs(z) > kMaxArgument) {
    throw DomainError(fmt::format("pcf: (nu={}, z={}) outside [{}, {}] x [-{}, {}]", nu, z,
                                  kMinOrder, kMaxOrder, kMaxArgument, kMaxArgument));
  }
}

}  // namespace detail

/// D_nu(z).
inline double pcf_d(double nu, double z) {
  detail::check_domain(nu, z);
  return detail::to_double(detail::evaluate(nu, z).value, nu, z);
}

/// Value, derivative and the regime used for the value.
/// The derivative is dD_nu/dz = nu/2 D_{nu-1} - 1/2 D_{nu+1}.
inline PcfEval pcf_eval(double nu, double z) {
  detail::check_domain(nu, z);
  const auto mid = detail::evaluate(nu, z);
  const auto lower = detail::evaluate(nu - 1, z);
  const auto upper = detail::evaluate(nu + 1, z);
  const detail::real d = 0.5L * nu * lower.value - 0.5L * upper.value;
  return {detail::to_double(mid.value, nu, z), detail::to_double(d, nu, z), mid.method};
}

inline double pcf_d_prime(double nu, double z) { return pcf_eval(nu, z).derivative; }

}  // namespace gaugelink::specfun
