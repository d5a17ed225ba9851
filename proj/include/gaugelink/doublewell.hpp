#pragma once
// Piecewise double-harmonic well
//   V(x) = (x + d_L)^2 / 2              x < 0
//   V(x) = r^2 (x - d_R)^2 / 2 + delta  x >= 0
// in units hbar = m = omega_L = 1, solved exactly with parabolic cylinder
// functions, optionally with an even/odd contact interaction at x = 0.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <fmt/format.h>

#include "gaugelink/errors.hpp"
#include "gaugelink/specfun.hpp"

namespace gaugelink::doublewell {

struct DoubleWellParams {
  double r = 1.0;
  double d_R = 0.0;
  double d_L = 0.0;
  double delta = 0.0;

  double barrier() const { return 0.5 * d_L * d_L; }
};

inline DoubleWellParams from_geometry(double d_R, double r, double delta) {
  if (!(r > 0.0) || !std::isfinite(r)) throw GeometryError(fmt::format("ratio r must be positive, got {}", r));
  if (!(d_R >= 0.0) || !std::isfinite(d_R)) throw GeometryError(fmt::format("d_R must be non-negative, got {}", d_R));
  const double rad = r * r * d_R * d_R + 2.0 * delta;
  if (!(rad > 0.0) && !(rad == 0.0 && d_R == 0.0 && delta == 0.0)) {
    throw GeometryError(fmt::format("r^2 d_R^2 + 2 delta = {} is not positive", rad));
  }
  return {r, d_R, std::sqrt(rad), delta};
}

inline double potential_value(const DoubleWellParams& p, double x) {
  if (x < 0.0) return 0.5 * (x + p.d_L) * (x + p.d_L);
  return 0.5 * p.r * p.r * (x - p.d_R) * (x - p.d_R) + p.delta;
}

// Contact interaction at the origin in the form of the jump conditions
//   psi'(0+) - psi'(0-) = -inv_a_e [psi(0+) + psi(0-)]
//   psi(0+) - psi(0-)   = -a_o [psi'(0+) + psi'(0-)].
// For a static impurity (reduced mass 1) inv_a_e = -g_e and a_o = -g_o.
struct ChannelInteraction {
  double inv_a_e = 0.0;
  double a_o = 0.0;

  static ChannelInteraction none() { return {}; }
  static ChannelInteraction from_scattering_lengths(double a_e, double a_o) {
    return {std::isinf(a_e) ? 0.0 : 1.0 / a_e, a_o};
  }
  static ChannelInteraction from_static_couplings(double g_e, double g_o) { return {-g_e, -g_o}; }
  bool decoupled() const { return inv_a_e == 0.0 && a_o == 0.0; }
};

// Value and one-sided derivatives at the origin.
struct BoundaryValues {
  double u_minus = 0.0;
  double u_plus = 0.0;
  double p_minus = 0.0;
  double p_plus = 0.0;
};

struct EigenState {
  double nu1 = 0.0;
  double nu2 = 0.0;
  double energy = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  BoundaryValues at_origin;
  bool near_degenerate = false;
};

struct SolveOptions {
  double scan_step = 0.01;        // in nu2
  double root_tolerance = 1e-12;  // in nu2
  double norm_tolerance = 1e-12;
};

struct Amplitude {
  double value = 0.0;
  double derivative = 0.0;
};

namespace detail {

struct Orders {
  double nu1, nu2, energy;
};

inline Orders orders_from_nu2(const DoubleWellParams& p, double nu2) {
  const double e = p.r * (nu2 + 0.5) + p.delta;
  return {e - 0.5, nu2, e};
}

struct Matching {
  double D1, D1p, D2, D2p;  // D and dD/dz at z1 = -sqrt2 d_L and z2 = -sqrt(2r) d_R
};

inline Matching matching(const DoubleWellParams& p, const Orders& o) {
  const auto a = specfun::pcf_eval(o.nu1, -std::sqrt(2.0) * p.d_L);
  const auto b = specfun::pcf_eval(o.nu2, -std::sqrt(2.0 * p.r) * p.d_R);
  return {a.value, a.derivative, b.value, b.derivative};
}

// Determinant of the 2x2 system for (c1, c2).
inline double determinant(const DoubleWellParams& p, const ChannelInteraction& ch, const Matching& m) {
  const double s1 = std::sqrt(2.0), s2 = std::sqrt(2.0 * p.r);
  const double k = ch.inv_a_e, a = ch.a_o;
  return (s1 * m.D1p + k * m.D1) * (m.D2 + a * s2 * m.D2p) +
         (s2 * m.D2p + k * m.D2) * (m.D1 + a * s1 * m.D1p);
}

inline double matching_function(const DoubleWellParams& p, const ChannelInteraction& ch, double nu2) {
  return determinant(p, ch, matching(p, orders_from_nu2(p, nu2)));
}

inline double left_piece(const DoubleWellParams& p, double nu1, double x, double* deriv) {
  const double s = std::sqrt(2.0);
  const double z = -s * (x + p.d_L);
  if (deriv) {
    const auto e = specfun::pcf_eval(nu1, z);
    *deriv = -s * e.derivative;
    return e.value;
  }
  return specfun::pcf_d(nu1, z);
}

inline double right_piece(const DoubleWellParams& p, double nu2, double x, double* deriv) {
  const double s = std::sqrt(2.0 * p.r);
  const double z = s * (x - p.d_R);
  if (deriv) {
    const auto e = specfun::pcf_eval(nu2, z);
    *deriv = s * e.derivative;
    return e.value;
  }
  return specfun::pcf_d(nu2, z);
}

inline double clamp_arg(double z) { return std::clamp(z, -specfun::kMaxArgument, specfun::kMaxArgument); }

inline double domain_half_width(const DoubleWellParams& p, double energy) {
  const double spec_cut = std::max(p.d_L, p.d_R) + 12.0 / std::sqrt(std::min(1.0, p.r));
  const double turning = std::max(p.d_L, p.d_R) + std::sqrt(2.0 * std::max(energy, 0.0) + 2.0) /
                                                      std::min(1.0, p.r) + 8.0 / std::sqrt(std::min(1.0, p.r));
  return std::max(spec_cut, turning);
}

inline EigenState build_state(const DoubleWellParams& p, const ChannelInteraction& ch, double nu2,
                              const SolveOptions& opt) {
  const Orders o = orders_from_nu2(p, nu2);
  const Matching m = matching(p, o);
  const double s1 = std::sqrt(2.0), s2 = std::sqrt(2.0 * p.r);
  const double k = ch.inv_a_e, a = ch.a_o;
  // Row 1: c1 (s1 D1' + k D1) + c2 (s2 D2' + k D2) = 0
  // Row 2: -c1 (D1 + a s1 D1') + c2 (D2 + a s2 D2') = 0
  const double r1a = s1 * m.D1p + k * m.D1, r1b = s2 * m.D2p + k * m.D2;
  const double r2a = -(m.D1 + a * s1 * m.D1p), r2b = m.D2 + a * s2 * m.D2p;
  double ratio;  // c2 / c1
  if (std::fabs(r1b) * (std::fabs(r2a) + std::fabs(r2b)) >= std::fabs(r2b) * (std::fabs(r1a) + std::fabs(r1b))) {
    ratio = -r1a / r1b;
  } else {
    ratio = -r2a / r2b;
  }

  const double X = domain_half_width(p, o.energy);
  const double zl = clamp_arg(s1 * (X - p.d_L));       // left integrand runs z in [z1, zl]
  const double zr = clamp_arg(s2 * (X - p.d_R));
  using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
  auto sq1 = [&](double z) { const double d = specfun::pcf_d(o.nu1, z); return d * d; };
  auto sq2 = [&](double z) { const double d = specfun::pcf_d(o.nu2, z); return d * d; };
  double err1 = 0.0, err2 = 0.0;
  const double z1 = -s1 * p.d_L, z2 = -s2 * p.d_R;
  const double i1 = zl > z1 ? GK::integrate(sq1, z1, zl, 20, 1e-14, &err1) / s1 : 0.0;
  const double i2 = zr > z2 ? GK::integrate(sq2, z2, zr, 20, 1e-14, &err2) / s2 : 0.0;
  const double norm = i1 + ratio * ratio * i2;
  if (!(norm > 0.0) || !std::isfinite(norm) || err1 / s1 + ratio * ratio * err2 / s2 > opt.norm_tolerance * std::max(1.0, norm) * 1e3) {
    throw NumericalError(fmt::format("doublewell: normalization quadrature failed at nu2 = {}", nu2));
  }
  EigenState st;
  st.nu1 = o.nu1;
  st.nu2 = o.nu2;
  st.energy = o.energy;
  st.c1 = 1.0 / std::sqrt(norm);
  st.c2 = ratio * st.c1;
  st.at_origin.u_minus = st.c1 * m.D1;
  st.at_origin.p_minus = -s1 * st.c1 * m.D1p;
  st.at_origin.u_plus = st.c2 * m.D2;
  st.at_origin.p_plus = s2 * st.c2 * m.D2p;
  return st;
}

inline double bisect(const DoubleWellParams& p, const ChannelInteraction& ch, double lo, double hi,
                     double flo, double tol) {
  for (int it = 0; it < 200 && hi - lo > tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = matching_function(p, ch, mid);
    if (fm == 0.0) return mid;
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

inline double lowest_energy_bound(const DoubleWellParams& p, const ChannelInteraction& ch) {
  double e = std::min(0.0, p.delta);
  if (ch.inv_a_e > 0.0) e -= 0.5 * ch.inv_a_e * ch.inv_a_e;  // attractive even channel
  if (ch.a_o > 0.0) e -= 0.5 / (ch.a_o * ch.a_o);           // attractive odd channel
  return e - 0.05;
}

}  // namespace detail

/// Matching function whose zeros in nu2 are the eigenstates.
inline double matching_function(const DoubleWellParams& p, const ChannelInteraction& ch, double nu2) {
  return detail::matching_function(p, ch, nu2);
}

inline std::vector<EigenState> solve_interacting(const DoubleWellParams& p, const ChannelInteraction& ch,
                                                 int n_levels, const SolveOptions& opt = {}) {
  if (n_levels < 1 || n_levels > 40) throw DomainError(fmt::format("n_levels must be in [1, 40], got {}", n_levels));
  const double r = p.r;
  double nu2 = (detail::lowest_energy_bound(p, ch) - p.delta) / r - 0.5;
  // Keep both orders inside the supported range.
  nu2 = std::max(nu2, std::max(specfun::kMinOrder + 1.0, (specfun::kMinOrder + 1.0 + 0.5 - p.delta) / r - 0.5));
  const double nu2_max = std::min(specfun::kMaxOrder - 1.0, (specfun::kMaxOrder - 1.0 + 0.5 - p.delta) / r - 0.5);

  std::vector<double> roots;
  std::vector<bool> flagged;
  const double h = opt.scan_step;
  double x0 = nu2, f0 = detail::matching_function(p, ch, x0);
  double xm = x0 - h, fm = std::numeric_limits<double>::quiet_NaN();
  while (static_cast<int>(roots.size()) < n_levels) {
    const double x1 = x0 + h;
    if (x1 > nu2_max) {
      throw NumericalError(fmt::format(
          "doublewell: found only {} of {} levels while scanning nu2 in [{}, {}]", roots.size(), n_levels, nu2, nu2_max));
    }
    const double f1 = detail::matching_function(p, ch, x1);
    if (f0 == 0.0) {
      roots.push_back(x0);
      flagged.push_back(false);
    } else if ((f0 < 0.0) != (f1 < 0.0) && f1 != 0.0) {
      const double root = detail::bisect(p, ch, x0, x1, f0, opt.root_tolerance);
      const double fr = std::fabs(detail::matching_function(p, ch, root));
      if (fr <= std::max(std::fabs(f0), std::fabs(f1))) {
        roots.push_back(root);
        flagged.push_back(false);
      }
    } else if (std::isfinite(fm) && (fm < 0.0) == (f0 < 0.0) && (f0 < 0.0) == (f1 < 0.0) &&
               std::fabs(f0) < std::fabs(fm) && std::fabs(f0) < std::fabs(f1)) {
      // |f| dips without a sign change: look for a closely spaced pair.
      const int sub = 200;
      const double hs = (x1 - xm) / sub;
      double a = xm, fa = fm;
      std::vector<double> pair;
      for (int i = 1; i <= sub; ++i) {
        const double b = xm + i * hs;
        const double fb = detail::matching_function(p, ch, b);
        if ((fa < 0.0) != (fb < 0.0)) pair.push_back(detail::bisect(p, ch, a, b, fa, opt.root_tolerance));
        a = b;
        fa = fb;
      }
      if (pair.size() == 2) {
        // The earlier scan step may already hold the first member.
        for (double rt : pair) {
          bool dup = false;
          for (double q : roots) dup = dup || std::fabs(q - rt) < 10 * opt.root_tolerance;
          if (!dup) {
            roots.push_back(rt);
            flagged.push_back(true);
          }
        }
      }
    }
    xm = x0;
    fm = f0;
    x0 = x1;
    f0 = f1;
  }
  std::vector<EigenState> out;
  for (int i = 0; i < n_levels; ++i) {
    EigenState st = detail::build_state(p, ch, roots[i], opt);
    st.near_degenerate = flagged[i];
    out.push_back(st);
  }
  std::sort(out.begin(), out.end(), [](const EigenState& a, const EigenState& b) { return a.energy < b.energy; });
  return out;
}

inline std::vector<EigenState> solve_noninteracting(const DoubleWellParams& p, int n_levels,
                                                    const SolveOptions& opt = {}) {
  return solve_interacting(p, ChannelInteraction::none(), n_levels, opt);
}

inline Amplitude eval_wavefunction(const EigenState& st, const DoubleWellParams& p, double x) {
  double d = 0.0;
  if (x < 0.0) {
    const double z = -std::sqrt(2.0) * (x + p.d_L);
    if (std::fabs(z) > specfun::kMaxArgument) return {};
    const double v = detail::left_piece(p, st.nu1, x, &d);
    return {st.c1 * v, st.c1 * d};
  }
  const double z = std::sqrt(2.0 * p.r) * (x - p.d_R);
  if (std::fabs(z) > specfun::kMaxArgument) return {};
  const double v = detail::right_piece(p, st.nu2, x, &d);
  return {st.c2 * v, st.c2 * d};
}

inline double eval_value(const EigenState& st, const DoubleWellParams& p, double x) {
  if (x < 0.0) {
    const double z = -std::sqrt(2.0) * (x + p.d_L);
    if (std::fabs(z) > specfun::kMaxArgument) return 0.0;
    return st.c1 * specfun::pcf_d(st.nu1, z);
  }
  const double z = std::sqrt(2.0 * p.r) * (x - p.d_R);
  if (std::fabs(z) > specfun::kMaxArgument) return 0.0;
  return st.c2 * specfun::pcf_d(st.nu2, z);
}

/// Symmetric window outside which every listed state is negligible.
inline double support_half_width(const DoubleWellParams& p, double energy) {
  return detail::domain_half_width(p, energy);
}

namespace detail {

inline double busch_ratio(double E) {
  // Gamma(-E/2 + 1/4) / Gamma(-E/2 + 3/4); pole of the numerator raises.
  const double a = -0.5 * E + 0.25, b = -0.5 * E + 0.75;
  const auto la = specfun::log_gamma(a);
  if (specfun::is_nonpositive_integer(b)) return 0.0;
  const auto lb = specfun::log_gamma(b);
  return la.sign * lb.sign * std::exp(la.value - lb.value);
}

inline double busch_inverse_ratio(double E) {
  const double a = -0.5 * E + 0.25, b = -0.5 * E + 0.75;
  const auto lb = specfun::log_gamma(b);
  if (specfun::is_nonpositive_integer(a)) return 0.0;
  const auto la = specfun::log_gamma(a);
  return la.sign * lb.sign * std::exp(lb.value - la.value);
}

}  // namespace detail

/// -1/g_e - Gamma(-E/2+1/4) / (2 Gamma(-E/2+3/4)); g_e = +-inf encodes -1/g_e = 0.
inline double busch_relation_residual(double E, double g_e) {
  return -1.0 / g_e - 0.5 * detail::busch_ratio(E);
}

/// -1/g_o - 2 Gamma(-E/2+3/4) / Gamma(-E/2+1/4).
inline double busch_odd_residual(double E, double g_o) {
  return -1.0 / g_o - 2.0 * detail::busch_inverse_ratio(E);
}

}  // namespace gaugelink::doublewell
