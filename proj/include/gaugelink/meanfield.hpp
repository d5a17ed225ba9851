#pragma once
// Mean-field condensate of N bosons coupled to a static two-level impurity,
//   |Psi> = sum_a c_a prod_j |phi_a>_j |a>,
// propagated on a uniform grid through psi_a = C_a phi_a. Spin index a = 0 is |up>, a = 1 is |dn>.

#include <chrono>
#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/numeric/odeint.hpp>
#include <fmt/format.h>

#include "gaugelink/contact.hpp"
#include "gaugelink/doublewell.hpp"
#include "gaugelink/errors.hpp"
#include "gaugelink/fourlevel.hpp"

namespace gaugelink::meanfield {

using cplx = std::complex<double>;

struct Grid {
  double x_max = 10.0;
  int n_points = 512;
};

struct MeanFieldConfig {
  int N = 10;
  double g = 0.21;
  doublewell::DoubleWellParams well = doublewell::from_geometry(2.0, 1.0, 0.5);
  contact::SpinContactCouplings couplings = fourlevel::opposite_equal_couplings();
  Grid grid;
  double tol = 1e-9;

  void validate() const {
    if (N < 1) throw DomainError(fmt::format("N must be >= 1, got {}", N));
    const int n = grid.n_points;
    if (n < 256 || (n & (n - 1)) != 0) throw DomainError(fmt::format("n_points must be a power of two >= 256, got {}", n));
    const double need = std::max(well.d_L, well.d_R) + 6.0;
    if (grid.x_max < need) throw DomainError(fmt::format("x_max = {} is below {}", grid.x_max, need));
    if (!(tol > 0.0)) throw DomainError("tol must be positive");
  }
};

struct ModeEnergies {
  double E_L0 = 0.0;
  double E_R0 = 0.0;
  double U_L = 0.0;
  double U_R = 0.0;
};

/// Bare energies of the two lowest modes and g * int |mode|^4.
inline ModeEnergies well_mode_energies(const MeanFieldConfig& c) {
  const auto st = doublewell::solve_noninteracting(c.well, 2);
  ModeEnergies e{st[0].energy, st[1].energy, 0.0, 0.0};
  if (c.g == 0.0) return e;
  const double X = doublewell::support_half_width(c.well, st[1].energy);
  auto quartic = [&](const doublewell::EigenState& s) {
    auto f = [&](double x) {
      const double v = doublewell::eval_value(s, c.well, x);
      return v * v * v * v;
    };
    using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
    return GK::integrate(f, -X, 0.0, 15, 1e-13) + GK::integrate(f, 0.0, X, 15, 1e-13);
  };
  e.U_L = c.g * quartic(st[0]);
  e.U_R = c.g * quartic(st[1]);
  return e;
}

/// hbar Omega_R(t) = E_L0 - E_R0 + dU + U cos(J t), J = E_R0 - E_L0.
/// magnitude replaces the leading E_L0 - E_R0 by |E_R0 - E_L0|.
inline double compensating_pulse(double E_L0, double E_R0, double U_L, double U_R, double t, bool magnitude = false) {
  if (E_R0 == E_L0) throw DomainError("compensating pulse needs E_R0 != E_L0");
  const double J = E_R0 - E_L0;
  const double lead = magnitude ? std::fabs(J) : E_L0 - E_R0;
  return lead + (U_L - U_R) + 0.5 * (U_L + U_R) * std::cos(J * t);
}

inline std::function<double(double)> compensating_pulse(const ModeEnergies& e, bool magnitude = false) {
  return [e, magnitude](double t) { return compensating_pulse(e.E_L0, e.E_R0, e.U_L, e.U_R, t, magnitude); };
}

inline std::function<double(double)> constant_pulse(double omega) {
  return [omega](double) { return omega; };
}

// Uniform grid with hard walls, fourth-order Laplacian and per-spin diagonal potentials.
class Discretization {
 public:
  explicit Discretization(const MeanFieldConfig& c) : cfg_(c) {
    c.validate();
    n_ = c.grid.n_points;
    dx_ = 2.0 * c.grid.x_max / (n_ - 1);
    x_.resize(n_);
    for (int j = 0; j < n_; ++j) x_(j) = -c.grid.x_max + j * dx_;
    Eigen::VectorXd ext(n_);
    for (int j = 0; j < n_; ++j) ext(j) = doublewell::potential_value(c.well, x_(j));
    // Discrete delta at x = 0 split linearly between the neighbouring points.
    const double s = c.grid.x_max / dx_;
    const int j0 = static_cast<int>(std::floor(s));
    const double w1 = s - j0, w0 = 1.0 - w1;
    delta_ = Eigen::VectorXd::Zero(n_);
    delta_(j0) += w0 / dx_;
    if (w1 > 0.0) delta_(j0 + 1) += w1 / dx_;
    v_[0] = ext + c.couplings.g_e_up * delta_;
    v_[1] = ext + c.couplings.g_e_down * delta_;
    ext_ = ext;
    left_ = Eigen::VectorXd::Zero(n_);
    for (int j = 0; j < n_; ++j) left_(j) = x_(j) < 0.0 ? 1.0 : (x_(j) == 0.0 ? 0.5 : 0.0);
  }

  int size() const { return n_; }
  double dx() const { return dx_; }
  const Eigen::VectorXd& x() const { return x_; }
  const Eigen::VectorXd& potential(int a) const { return v_[a]; }
  const Eigen::VectorXd& external() const { return ext_; }
  const Eigen::VectorXd& delta() const { return delta_; }
  const Eigen::VectorXd& left_mask() const { return left_; }
  const MeanFieldConfig& config() const { return cfg_; }

  // out = -1/2 d^2 f / dx^2
  template <class In, class Out>
  void kinetic(const In& f, Out& out) const {
    const double k = -0.5 / (12.0 * dx_ * dx_);
    auto at = [&](int j) { return j < 0 || j >= n_ ? cplx(0.0) : cplx(f(j)); };
    for (int j = 0; j < n_; ++j) {
      out(j) = k * (-at(j - 2) + 16.0 * at(j - 1) - 30.0 * at(j) + 16.0 * at(j + 1) - at(j + 2));
    }
  }

  Eigen::MatrixXd linear_hamiltonian(const Eigen::VectorXd& v) const {
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(n_, n_);
    const double k = -0.5 / (12.0 * dx_ * dx_);
    const double st[5] = {-1.0, 16.0, -30.0, 16.0, -1.0};
    for (int j = 0; j < n_; ++j) {
      for (int o = -2; o <= 2; ++o) {
        if (j + o >= 0 && j + o < n_) H(j, j + o) += k * st[o + 2];
      }
      H(j, j) += v(j);
    }
    return H;
  }

  cplx inner(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) const { return dx_ * a.dot(b); }
  cplx inner_left(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) const {
    return dx_ * a.dot(left_.cast<cplx>().cwiseProduct(b));
  }
  double norm2(const Eigen::VectorXcd& a) const { return dx_ * a.squaredNorm(); }

 private:
  MeanFieldConfig cfg_;
  int n_ = 0;
  double dx_ = 0.0;
  Eigen::VectorXd x_, ext_, delta_, left_;
  Eigen::VectorXd v_[2];
};

// psi_a = C_a phi_a with C_a = |C_a| exp(i theta_a); theta_a is carried separately
// because the orbital overlaps enter through powers N and N - 1.
struct MeanFieldState {
  Eigen::VectorXcd psi[2];
  double theta[2] = {0.0, 0.0};

  cplx C(int a, const Discretization& d) const { return std::sqrt(d.norm2(psi[a])) * std::exp(cplx(0.0, theta[a])); }
  double total_norm(const Discretization& d) const { return d.norm2(psi[0]) + d.norm2(psi[1]); }
};

inline constexpr double kCoefficientFloor = 1e-12;

/// Normalized right-well orbital of the GP functional with the spin-averaged impurity potential,
/// relaxed inside the span orthogonal to the left-localized linear modes.
inline Eigen::VectorXcd relaxed_right_orbital(const Discretization& d, int max_iter = 1000000, double tol = 1e-10) {
  const auto& c = d.config();
  const Eigen::VectorXd v = d.external() + 0.5 * (c.couplings.g_e_up + c.couplings.g_e_down) * d.delta();
  const Eigen::MatrixXd H0 = d.linear_hamiltonian(v);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H0);
  const Eigen::MatrixXd& V = es.eigenvectors();
  auto left_weight = [&](int k) { return (V.col(k).array().square() * d.left_mask().array()).sum(); };
  std::vector<int> left_modes;
  int r = -1;
  for (int k = 0; k < 12; ++k) {
    if (left_weight(k) > 0.5) {
      left_modes.push_back(k);
    } else if (r < 0) {
      r = k;
    }
  }
  Eigen::MatrixXd Q(d.size(), static_cast<int>(left_modes.size()));
  for (int i = 0; i < Q.cols(); ++i) Q.col(i) = V.col(left_modes[i]);
  auto project = [&](Eigen::VectorXd u) -> Eigen::VectorXd { return u - Q * (Q.transpose() * u); };
  Eigen::VectorXd phi = V.col(r) / std::sqrt(d.dx());
  if (phi.sum() < 0.0) phi = -phi;
  const double gn = c.g * (c.N - 1);
  if (gn != 0.0) {
    // Normalized gradient flow (explicit imaginary time) inside the projected span.
    const Eigen::SparseMatrix<double> S0 = H0.sparseView();
    bool converged = false;
    double dtau = 0.0;
    for (int it = 0; it < max_iter && !converged; ++it) {
      const Eigen::VectorXd vnl = gn * phi.array().square().matrix();
      if (it == 0) dtau = 1.8 / (es.eigenvalues().maxCoeff() + vnl.maxCoeff());
      const Eigen::VectorXd Hphi = S0 * phi + vnl.cwiseProduct(phi);
      const double mu = d.dx() * phi.dot(Hphi);
      const Eigen::VectorXd grad = project(Hphi - mu * phi);
      converged = std::sqrt(d.dx()) * grad.norm() < tol;
      phi -= dtau * grad;
      phi /= std::sqrt(d.dx() * phi.squaredNorm());
    }
    if (!converged) throw NumericalError("mean-field relaxation did not converge");
  }
  return phi.cast<cplx>();
}

/// Both spin components on the relaxed right orbital, C_0 = 1/sqrt2, C_1 = -1/sqrt2.
inline MeanFieldState initial_state(const Discretization& d) {
  const Eigen::VectorXcd phi = relaxed_right_orbital(d);
  MeanFieldState s;
  s.psi[0] = M_SQRT1_2 * phi;
  s.psi[1] = -M_SQRT1_2 * phi;
  s.theta[0] = 0.0;
  s.theta[1] = M_PI;
  return s;
}

enum class Formulation { combined, split };

struct PropagateOptions {
  double dt_out = 0.5;
  double abs_tol = 1e-10;
  Formulation form = Formulation::combined;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<MeanFieldState> states;
  double max_norm_drift = 0.0;
  long steps = 0;
  double wall_seconds = 0.0;
};

namespace detail {

using State = std::vector<double>;

inline Eigen::Map<const Eigen::VectorXcd> view(const State& x, int offset, int n) {
  return {reinterpret_cast<const cplx*>(x.data()) + offset, n};
}
inline Eigen::Map<Eigen::VectorXcd> view(State& x, int offset, int n) {
  return {reinterpret_cast<cplx*>(x.data()) + offset, n};
}

inline void guard(double c2, double t) {
  if (c2 < kCoefficientFloor * kCoefficientFloor) {
    throw NumericalError(fmt::format("mean-field spin amplitude fell below {} at t = {:.6g}", kCoefficientFloor, t));
  }
}

// Layout [psi_0, psi_1, theta_0, theta_1 (with zero padding)]: 4n + 4 doubles.
struct CombinedRhs {
  const Discretization* d;
  std::function<double(double)> omega;
  void operator()(const State& x, State& dxdt, double t) const {
    const int n = d->size();
    const int N = d->config().N;
    const double g = d->config().g;
    dxdt.assign(x.size(), 0.0);
    const double w = 0.5 * omega(t);
    Eigen::VectorXcd psi[2] = {view(x, 0, n), view(x, n, n)};
    const double th[2] = {x[4 * n], x[4 * n + 2]};
    const double c2[2] = {d->norm2(psi[0]), d->norm2(psi[1])};
    guard(c2[0], t);
    guard(c2[1], t);
    const cplx C[2] = {std::sqrt(c2[0]) * std::exp(cplx(0.0, th[0])), std::sqrt(c2[1]) * std::exp(cplx(0.0, th[1]))};
    // s_a = <phi_a|phi_abar> with phi = psi / C
    const cplx s01 = d->inner(psi[0], psi[1]) / (std::conj(C[0]) * C[1]);
    const cplx s[2] = {s01, std::conj(s01)};
    Eigen::VectorXcd kin(n);
    for (int a = 0; a < 2; ++a) {
      const int b = 1 - a;
      d->kinetic(psi[a], kin);
      const Eigen::VectorXd dens = psi[a].cwiseAbs2() / c2[a];
      const double quart = d->dx() * dens.squaredNorm();
      Eigen::VectorXcd h = kin;
      h.array() += (d->potential(a).array() + g * (N - 1) * dens.array() - 0.5 * g * (N - 1) * quart) * psi[a].array();
      h += w * std::pow(s[a], N - 1) * psi[b];
      view(dxdt, a * n, n) = cplx(0.0, -1.0) * h;
      // i dC_a/dt = w C_abar s_a^N  =>  dtheta_a/dt = Im(dC_a/dt / C_a)
      const cplx cdot = cplx(0.0, -1.0) * w * C[b] * std::pow(s[a], N);
      dxdt[4 * n + 2 * a] = std::imag(cdot / C[a]);
    }
  }
};

// Layout [phi_0, phi_1, C_0, C_1]: 4n + 4 doubles.
struct SplitRhs {
  const Discretization* d;
  std::function<double(double)> omega;
  void operator()(const State& x, State& dxdt, double t) const {
    const int n = d->size();
    const int N = d->config().N;
    const double g = d->config().g;
    dxdt.assign(x.size(), 0.0);
    const double w = 0.5 * omega(t);
    Eigen::VectorXcd phi[2] = {view(x, 0, n), view(x, n, n)};
    const cplx C[2] = {cplx(x[4 * n], x[4 * n + 1]), cplx(x[4 * n + 2], x[4 * n + 3])};
    guard(std::norm(C[0]), t);
    guard(std::norm(C[1]), t);
    const cplx s01 = d->inner(phi[0], phi[1]);
    const cplx s[2] = {s01, std::conj(s01)};
    Eigen::VectorXcd kin(n);
    for (int a = 0; a < 2; ++a) {
      const int b = 1 - a;
      d->kinetic(phi[a], kin);
      const Eigen::VectorXd dens = phi[a].cwiseAbs2();
      const double quart = d->dx() * dens.squaredNorm();
      const cplx ratio = std::conj(C[a]) * C[b] / std::norm(C[a]);
      Eigen::VectorXcd h = kin;
      h.array() += (d->potential(a).array() + g * (N - 1) * dens.array()) * phi[a].array();
      h += ratio * w * std::pow(s[a], N - 1) * phi[b];
      h -= (0.5 * g * (N - 1) * quart + ratio * w * std::pow(s[a], N)) * phi[a];
      view(dxdt, a * n, n) = cplx(0.0, -1.0) * h;
      const cplx cdot = cplx(0.0, -1.0) * w * C[b] * std::pow(s[a], N);
      dxdt[4 * n + 2 * a] = cdot.real();
      dxdt[4 * n + 2 * a + 1] = cdot.imag();
    }
  }
};

inline State pack(const MeanFieldState& s, const Discretization& d, Formulation f) {
  const int n = d.size();
  State x(4 * n + 4, 0.0);
  if (f == Formulation::combined) {
    view(x, 0, n) = s.psi[0];
    view(x, n, n) = s.psi[1];
    x[4 * n] = s.theta[0];
    x[4 * n + 2] = s.theta[1];
  } else {
    for (int a = 0; a < 2; ++a) {
      const cplx C = s.C(a, d);
      view(x, a * n, n) = s.psi[a] / C;
      x[4 * n + 2 * a] = C.real();
      x[4 * n + 2 * a + 1] = C.imag();
    }
  }
  return x;
}

inline MeanFieldState unpack(const State& x, const Discretization& d, Formulation f) {
  const int n = d.size();
  MeanFieldState s;
  if (f == Formulation::combined) {
    s.psi[0] = view(x, 0, n);
    s.psi[1] = view(x, n, n);
    s.theta[0] = x[4 * n];
    s.theta[1] = x[4 * n + 2];
  } else {
    for (int a = 0; a < 2; ++a) {
      const cplx C(x[4 * n + 2 * a], x[4 * n + 2 * a + 1]);
      s.psi[a] = C * view(x, a * n, n);
      s.theta[a] = std::arg(C);
    }
  }
  return s;
}

}  // namespace detail

inline constexpr double kNormDriftLimit = 1e-6;

inline Trajectory propagate(const Discretization& d, const MeanFieldState& s0, std::function<double(double)> omega,
                            double t_final, const PropagateOptions& opt = {}) {
  namespace ode = boost::numeric::odeint;
  using Stepper = ode::runge_kutta_dopri5<detail::State>;
  const auto t_start = std::chrono::steady_clock::now();
  const double rel = d.config().tol;
  auto dense = ode::make_dense_output(opt.abs_tol, rel, Stepper());
  detail::State x = detail::pack(s0, d, opt.form), xs(x.size());
  std::function<void(const detail::State&, detail::State&, double)> rhs;
  if (opt.form == Formulation::combined) {
    rhs = detail::CombinedRhs{&d, omega};
  } else {
    rhs = detail::SplitRhs{&d, omega};
  }
  Trajectory tr;
  const double n0 = s0.total_norm(d);
  dense.initialize(x, 0.0, 1e-4);
  const long n = static_cast<long>(std::floor(t_final / opt.dt_out + 1e-9));
  for (long k = 0; k <= n; ++k) {
    const double T = k * opt.dt_out;
    while (dense.current_time() < T) {
      dense.do_step(rhs);
      ++tr.steps;
    }
    if (k == 0) {
      xs = x;
    } else {
      dense.calc_state(T, xs);
    }
    MeanFieldState s = detail::unpack(xs, d, opt.form);
    const double drift = std::fabs(s.total_norm(d) - n0);
    tr.max_norm_drift = std::max(tr.max_norm_drift, drift);
    if (drift > kNormDriftLimit) {
      throw NumericalError(fmt::format("mean-field norm drift {:.3g} at t = {:.6g}", drift, T));
    }
    tr.times.push_back(T);
    tr.states.push_back(std::move(s));
  }
  tr.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return tr;
}

struct Observables {
  double O_L = 0.0;  // left population per particle
  double O_R = 0.0;
  double O_L_plus = 0.0;
  double O_R_minus = 0.0;
  double correlation = 0.0;
  double g_L = 0.0;
  double sigma_x = 0.0;
};

inline Observables observe(const Discretization& d, const MeanFieldState& s) {
  const int N = d.config().N;
  Observables o;
  const cplx C0 = s.C(0, d), C1 = s.C(1, d);
  const Eigen::VectorXcd phi0 = s.psi[0] / C0, phi1 = s.psi[1] / C1;
  const cplx ov = d.inner(phi0, phi1);
  const cplx ovL = d.inner_left(phi0, phi1);
  const cplx ovR = ov - ovL;
  const cplx pre = std::conj(C0) * C1 * std::pow(ov, N - 1);
  const double total = s.total_norm(d);
  const double PL = std::real(d.inner_left(s.psi[0], s.psi[0]) + d.inner_left(s.psi[1], s.psi[1]));
  const double PR = total - PL;
  o.O_L = PL;
  o.O_R = PR;
  o.sigma_x = 2.0 * std::real(pre * ov);
  o.O_L_plus = 0.5 * (PL + 2.0 * std::real(pre * ovL));
  o.O_R_minus = 0.5 * (PR - 2.0 * std::real(pre * ovR));
  o.correlation = 2.0 * std::real(pre * (ovL - ovR)) - (PL - PR) * o.sigma_x;
  o.g_L = PL - 0.5 * o.sigma_x;
  return o;
}

inline std::vector<Observables> mf_observables(const Discretization& d, const Trajectory& tr) {
  std::vector<Observables> out;
  out.reserve(tr.states.size());
  for (const auto& s : tr.states) out.push_back(observe(d, s));
  return out;
}

}  // namespace gaugelink::meanfield
