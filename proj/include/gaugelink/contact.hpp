#pragma once
// Spin-dependent contact interaction between the particle and the impurity:
// couplings, the static-impurity matrix elements between double-well states,
// and the two-body elements in a particle x impurity product basis.

#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <fmt/format.h>

#include "gaugelink/doublewell.hpp"
#include "gaugelink/errors.hpp"

namespace gaugelink::contact {

struct SpinContactCouplings {
  double g_e_up = 0.0;
  double g_e_down = 0.0;
  double g_o_up = 0.0;
  double g_o_down = 0.0;

  double g_e(int spin) const { return spin == 1 ? g_e_up : g_e_down; }
  double g_o(int spin) const { return spin == 1 ? g_o_up : g_o_down; }
  bool decoupled() const { return g_e_up == 0 && g_e_down == 0 && g_o_up == 0 && g_o_down == 0; }
};

// Masses in units of the particle mass.
struct MassConfig {
  double mass_ratio = 1.0;  // m_p / m_i

  double particle_mass() const { return 1.0; }
  double impurity_mass() const { return 1.0 / mass_ratio; }
  double reduced_mass() const { return 1.0 / (1.0 + mass_ratio); }
  void validate() const {
    if (!(mass_ratio > 0.0) || !std::isfinite(mass_ratio)) {
      throw DomainError(fmt::format("mass_ratio must be positive, got {}", mass_ratio));
    }
  }
};

struct Couplings {
  double g_e = 0.0;
  double g_o = 0.0;
};

/// g_e = -1/(mu a_e), g_o = -a_o/mu; a_e = +-inf decouples the even channel.
inline Couplings couplings_from_scattering_lengths(double a_e, double a_o, const MassConfig& mass) {
  mass.validate();
  if (a_e == 0.0) throw DomainError("a_e = 0 gives a singular even coupling");
  const double mu = mass.reduced_mass();
  const double g_e = std::isinf(a_e) ? 0.0 : -1.0 / (mu * a_e);
  return {g_e == 0.0 ? 0.0 : g_e, -a_o / mu};
}

/// Static-impurity element J_NM = g_e N(0) [M(0+)+M(0-)]/2 - g_o N'(0) [M'(0+)+M'(0-)]/2.
/// N(0) and N'(0) are taken as the mean of the one-sided limits.
inline double j_matrix_element(const doublewell::BoundaryValues& n, const doublewell::BoundaryValues& m,
                               double g_e, double g_o) {
  const double n0 = 0.5 * (n.u_plus + n.u_minus);
  const double n1 = 0.5 * (n.p_plus + n.p_minus);
  return g_e * n0 * 0.5 * (m.u_plus + m.u_minus) - g_o * n1 * 0.5 * (m.p_plus + m.p_minus);
}

inline double j_matrix_element(const doublewell::EigenState& n, const doublewell::EigenState& m, double g_e,
                               double g_o) {
  return j_matrix_element(n.at_origin, m.at_origin, g_e, g_o);
}

/// Static elements J_nm between all listed states for one spin channel.
inline Eigen::MatrixXd j_matrix(const std::vector<doublewell::EigenState>& states, double g_e, double g_o) {
  const int n = static_cast<int>(states.size());
  Eigen::MatrixXd J(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) J(i, j) = j_matrix_element(states[i], states[j], g_e, g_o);
  return 0.5 * (J + J.transpose());
}

// Harmonic-oscillator eigenfunctions of mass m and frequency w centred at 0.
class HarmonicBasis {
 public:
  HarmonicBasis(double mass, double omega, int size) : mass_(mass), omega_(omega), size_(size) {
    if (!(mass > 0.0) || !(omega > 0.0) || size < 1) {
      throw DomainError(fmt::format("harmonic basis needs mass, omega > 0 and size >= 1 (got {}, {}, {})", mass,
                                    omega, size));
    }
  }

  int size() const { return size_; }
  double mass() const { return mass_; }
  double omega() const { return omega_; }
  double length() const { return 1.0 / std::sqrt(mass_ * omega_); }

  // Values and derivatives of phi_0..phi_{size-1} at x.
  void eval(double x, double* phi, double* dphi) const {
    const double s = std::sqrt(mass_ * omega_);
    const double xi = s * x;
    const double g = std::exp(-0.5 * xi * xi);
    double prev = 0.0;
    double cur = std::pow(mass_ * omega_ / M_PI, 0.25) * g;
    for (int k = 0; k < size_; ++k) {
      phi[k] = cur;
      const double next = std::sqrt(2.0 / (k + 1)) * xi * cur - std::sqrt(static_cast<double>(k) / (k + 1)) * prev;
      prev = cur;
      cur = next;
    }
    // phi_k' = s (sqrt(k/2) phi_{k-1} - sqrt((k+1)/2) phi_{k+1})
    for (int k = 0; k < size_; ++k) {
      const double lower = k > 0 ? phi[k - 1] : 0.0;
      const double upper = k + 1 < size_ ? phi[k + 1] : cur;
      dphi[k] = s * (std::sqrt(0.5 * k) * lower - std::sqrt(0.5 * (k + 1)) * upper);
    }
  }

  // Half-width beyond which every basis function is negligible.
  double support() const { return (std::sqrt(2.0 * size_ + 1.0) + 9.0) * length(); }

  // <m| x^2 |m'>.
  Eigen::MatrixXd x2_matrix() const {
    Eigen::MatrixXd X = Eigen::MatrixXd::Zero(size_, size_);
    const double c = 1.0 / (2.0 * mass_ * omega_);
    for (int m = 0; m < size_; ++m) {
      X(m, m) = (2 * m + 1) * c;
      if (m + 2 < size_) {
        X(m, m + 2) = X(m + 2, m) = std::sqrt(static_cast<double>((m + 1) * (m + 2))) * c;
      }
    }
    return X;
  }

 private:
  double mass_;
  double omega_;
  int size_;
};

// Coupling-independent overlap integrals on the line x_p = x_i = y:
//   even(a, b) = int f_a f_b,  odd(a, b) = int (D_r f_a)(D_r f_b)
// for product functions f_{nm} = psi_n(x_p) phi_m(x_i) with index a = n*M + m.
// Derivative entering the odd channel on the contact line:
//   relative  D_r = (m_i d/dx_p - m_p d/dx_i) / (m_p + m_i)
//   particle  d/dx_p only, the static-impurity form for any impurity mass.
enum class OddDerivative { particle, relative };

struct TwoBodyIntegrals {
  Eigen::MatrixXd even;
  Eigen::MatrixXd odd;
  int n_particle = 0;
  int n_impurity = 0;

  Eigen::MatrixXd interaction(double g_e, double g_o) const { return g_e * even - g_o * odd; }
};

namespace detail {

using Sample = std::function<void(double, Eigen::VectorXd&, Eigen::VectorXd&)>;

struct Accum {
  Eigen::MatrixXd even, odd;
};

constexpr double kXk[8] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                           0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                           0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                           0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double kWk[8] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                           0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                           0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                           0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                           0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

// One G7K15 panel for the vector-valued integrand; returns the error estimate.
inline double panel(const Sample& f, double a, double b, Accum& out) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  Eigen::VectorXd u, v;
  Accum kron, gauss;
  auto add = [](Accum& acc, const Eigen::VectorXd& u, const Eigen::VectorXd& v, double w) {
    if (acc.even.size() == 0) {
      acc.even = Eigen::MatrixXd::Zero(u.size(), u.size());
      acc.odd = Eigen::MatrixXd::Zero(u.size(), u.size());
    }
    acc.even.noalias() += w * u * u.transpose();
    acc.odd.noalias() += w * v * v.transpose();
  };
  for (int i = 0; i < 8; ++i) {
    const int reps = i == 7 ? 1 : 2;
    for (int s = 0; s < reps; ++s) {
      const double x = c + (s == 0 ? 1.0 : -1.0) * h * kXk[i];
      f(x, u, v);
      add(kron, u, v, h * kWk[i]);
      if (i % 2 == 1) add(gauss, u, v, h * kWg[i / 2]);
    }
  }
  out = kron;
  return std::max((kron.even - gauss.even).cwiseAbs().maxCoeff(), (kron.odd - gauss.odd).cwiseAbs().maxCoeff());
}

inline void adaptive(const Sample& f, double a, double b, double tol, int depth, Accum& total) {
  Accum part;
  const double err = panel(f, a, b, part);
  if (err <= tol || depth >= 30) {
    if (err > tol) {
      throw NumericalError(fmt::format("two-body quadrature did not converge on [{}, {}] (err {:.3g})", a, b, err));
    }
    if (total.even.size() == 0) {
      total = part;
    } else {
      total.even += part.even;
      total.odd += part.odd;
    }
    return;
  }
  const double m = 0.5 * (a + b);
  adaptive(f, a, m, 0.5 * tol, depth + 1, total);
  adaptive(f, m, b, 0.5 * tol, depth + 1, total);
}

}  // namespace detail

/// Even and odd overlap integrals for every pair of product functions.
inline TwoBodyIntegrals two_body_integrals(const std::vector<doublewell::EigenState>& states,
                                          const doublewell::DoubleWellParams& well, const HarmonicBasis& imp,
                                          const MassConfig& mass,
                                          OddDerivative odd_form = OddDerivative::particle, double tol = 1e-10) {
  mass.validate();
  const int N = static_cast<int>(states.size());
  const int M = imp.size();
  const double mp = mass.particle_mass(), mi = mass.impurity_mass();
  const bool rel = odd_form == OddDerivative::relative;
  const double wp = rel ? mi / (mp + mi) : 1.0, wi = rel ? mp / (mp + mi) : 0.0;
  std::vector<double> phi(M), dphi(M);
  detail::Sample f = [&](double y, Eigen::VectorXd& u, Eigen::VectorXd& v) {
    u.resize(N * M);
    v.resize(N * M);
    imp.eval(y, phi.data(), dphi.data());
    for (int n = 0; n < N; ++n) {
      const auto psi = doublewell::eval_wavefunction(states[n], well, y);
      for (int m = 0; m < M; ++m) {
        u(n * M + m) = psi.value * phi[m];
        v(n * M + m) = wp * psi.derivative * phi[m] - wi * psi.value * dphi[m];
      }
    }
  };
  double emax = 0.0;
  for (const auto& s : states) emax = std::max(emax, s.energy);
  const double Y = std::min(imp.support(), doublewell::support_half_width(well, emax));
  detail::Accum total;
  detail::adaptive(f, -Y, 0.0, 0.5 * tol, 0, total);
  detail::adaptive(f, 0.0, Y, 0.5 * tol, 0, total);
  TwoBodyIntegrals out;
  out.even = 0.5 * (total.even + total.even.transpose());
  out.odd = 0.5 * (total.odd + total.odd.transpose());
  out.n_particle = N;
  out.n_impurity = M;
  return out;
}

struct BasisFunction {
  std::function<doublewell::Amplitude(double)> eval;
};

/// Single element g_e int psi_n phi_m psi_n' phi_m' - g_o int D_r(psi_n phi_m) D_r(psi_n' phi_m')
/// on the line x_p = x_i = y, integrated over [-half_width, half_width].
inline double two_body_matrix_element(const BasisFunction& psi_n, const BasisFunction& phi_m,
                                      const BasisFunction& psi_np, const BasisFunction& phi_mp, double g_e,
                                      double g_o, const MassConfig& mass, double half_width,
                                      OddDerivative odd_form = OddDerivative::particle, double tol = 1e-10) {
  mass.validate();
  const double mp = mass.particle_mass(), mi = mass.impurity_mass();
  const bool rel = odd_form == OddDerivative::relative;
  const double wp = rel ? mi / (mp + mi) : 1.0, wi = rel ? mp / (mp + mi) : 0.0;
  auto pieces = [&](double y, double& even, double& odd) {
    const auto a = psi_n.eval(y), b = phi_m.eval(y), c = psi_np.eval(y), d = phi_mp.eval(y);
    even = a.value * b.value * c.value * d.value;
    odd = (wp * a.derivative * b.value - wi * a.value * b.derivative) *
          (wp * c.derivative * d.value - wi * c.value * d.derivative);
  };
  using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
  auto ev = [&](double y) { double e, o; pieces(y, e, o); return e; };
  auto od = [&](double y) { double e, o; pieces(y, e, o); return o; };
  double total = 0.0;
  for (auto [a, b] : {std::pair{-half_width, 0.0}, std::pair{0.0, half_width}}) {
    double err = 0.0;
    if (g_e != 0.0) total += g_e * GK::integrate(ev, a, b, 30, tol * 1e-3, &err);
    if (g_o != 0.0) total -= g_o * GK::integrate(od, a, b, 30, tol * 1e-3, &err);
  }
  return total;
}

}  // namespace gaugelink::contact
