#pragma once
// Two-body particle x impurity x spin propagation in a product basis
//   Psi = sum C_{n,m,p} psi_n(x_p) phi_m(x_i) chi_p,
// flat index p*(N*M) + n*M + m with p = 0 for |dn> and p = 1 for |up>.

#include <chrono>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/numeric/odeint.hpp>
#include <fmt/format.h>

#include "gaugelink/contact.hpp"
#include "gaugelink/doublewell.hpp"
#include "gaugelink/errors.hpp"
#include "gaugelink/fourlevel.hpp"

namespace gaugelink::tdse {

using cplx = std::complex<double>;

struct ImpurityMode {
  enum class Kind { Static, Harmonic, PaulTrap };
  Kind kind = Kind::Static;
  double omega_i = 0.0;   // Harmonic
  double omega_rf = 0.0;  // PaulTrap
  double a = 0.0;
  double q = 0.0;

  static ImpurityMode static_impurity() { return {}; }
  static ImpurityMode harmonic(double omega_i) { return {Kind::Harmonic, omega_i, 0.0, 0.0, 0.0}; }
  static ImpurityMode paul_trap(double omega_rf, double a, double q) { return {Kind::PaulTrap, 0.0, omega_rf, a, q}; }
};

/// omega_i = (Omega_rf / 2) sqrt(a + q^2/2).
inline double secular_frequency(double omega_rf, double a, double q) {
  const double rad = a + 0.5 * q * q;
  if (!(rad > 0.0)) throw DomainError(fmt::format("unstable Paul trap: a + q^2/2 = {} <= 0", rad));
  return 0.5 * omega_rf * std::sqrt(rad);
}

/// a such that the secular frequency equals omega_i.
inline double stability_a_for(double omega_rf, double omega_i, double q) {
  const double s = 2.0 * omega_i / omega_rf;
  return s * s - 0.5 * q * q;
}

/// Omega(t)^2 / (4 omega_i^2) - 1 with Omega(t)^2 = Omega_rf^2 (a + 2 q cos(Omega_rf t)).
inline double paul_coefficient(const ImpurityMode& mode, double t) {
  const double wi = secular_frequency(mode.omega_rf, mode.a, mode.q);
  const double om2 = mode.omega_rf * mode.omega_rf * (mode.a + 2.0 * mode.q * std::cos(mode.omega_rf * t));
  return om2 / (4.0 * wi * wi) - 1.0;
}

inline double impurity_frequency(const ImpurityMode& mode) {
  switch (mode.kind) {
    case ImpurityMode::Kind::Static: return 0.0;
    case ImpurityMode::Kind::Harmonic: return mode.omega_i;
    case ImpurityMode::Kind::PaulTrap: return secular_frequency(mode.omega_rf, mode.a, mode.q);
  }
  return 0.0;
}

struct Scenario {
  doublewell::DoubleWellParams initial_well;
  doublewell::DoubleWellParams evolve_well;
  contact::SpinContactCouplings couplings;
  contact::MassConfig mass;
  ImpurityMode impurity;
  double omega_R = 0.0;
  int n_particle_basis = 12;
  int n_impurity_basis = 8;
  contact::OddDerivative odd_form = contact::OddDerivative::particle;

  bool quenched() const {
    return initial_well.r != evolve_well.r || initial_well.d_R != evolve_well.d_R ||
           initial_well.d_L != evolve_well.d_L || initial_well.delta != evolve_well.delta;
  }
};

/// Shifted resonance of the two lowest evolve-well states.
inline double resonant_omega(const doublewell::DoubleWellParams& well, const contact::SpinContactCouplings& c) {
  return fourlevel::resonant_rabi(fourlevel::build(well, c, 0.0));
}

// Precomputed operators on the truncated space.
struct Model {
  Scenario scenario;
  std::vector<doublewell::EigenState> states;
  int n_particle = 0;
  int n_impurity = 1;
  Eigen::MatrixXd h_down;  // spin-diagonal blocks, dimension N*M
  Eigen::MatrixXd h_up;
  Eigen::MatrixXd x2;      // 1 (x) <m|x^2|m'>, only for PaulTrap
  double paul_scale = 0.0; // m_i omega_i^2 / 2
  Eigen::MatrixXd proj_left;  // P^L_{nn'}
  double truncation_weight = 0.0;

  int block() const { return n_particle * n_impurity; }
  int dim() const { return 2 * block(); }
  bool time_dependent() const { return scenario.impurity.kind == ImpurityMode::Kind::PaulTrap; }

  // Coefficient multiplying x2 at time t.
  double drive(double t) const {
    return time_dependent() ? paul_scale * paul_coefficient(scenario.impurity, t) : 0.0;
  }

  Eigen::MatrixXd generator(double t) const {
    const int B = block();
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(2 * B, 2 * B);
    H.topLeftCorner(B, B) = h_down;
    H.bottomRightCorner(B, B) = h_up;
    if (time_dependent()) {
      const double k = drive(t);
      H.topLeftCorner(B, B) += k * x2;
      H.bottomRightCorner(B, B) += k * x2;
    }
    for (int i = 0; i < B; ++i) H(i, B + i) = H(B + i, i) = 0.5 * scenario.omega_R;
    return H;
  }
};

namespace detail {

// int_a^b f_i f_j for the vector of functions sampled by `fill`.
inline Eigen::MatrixXd gram(const std::function<void(double, Eigen::VectorXd&)>& fill, double a, double b,
                            double tol = 1e-12) {
  contact::detail::Sample s = [&](double y, Eigen::VectorXd& u, Eigen::VectorXd& v) {
    fill(y, u);
    v = Eigen::VectorXd::Zero(u.size());
  };
  contact::detail::Accum acc;
  contact::detail::adaptive(s, a, b, tol, 0, acc);
  return 0.5 * (acc.even + acc.even.transpose());
}

inline double max_energy(const std::vector<doublewell::EigenState>& s) {
  double e = 0.0;
  for (const auto& x : s) e = std::max(e, x.energy);
  return e;
}

}  // namespace detail

inline Model build_model(const Scenario& sc) {
  if (sc.n_particle_basis < 2) throw DomainError("n_particle_basis must be at least 2");
  if (sc.impurity.kind != ImpurityMode::Kind::Static && sc.n_impurity_basis < 1) {
    throw DomainError("n_impurity_basis must be at least 1");
  }
  Model m;
  m.scenario = sc;
  m.states = doublewell::solve_noninteracting(sc.evolve_well, sc.n_particle_basis);
  const int N = sc.n_particle_basis;
  m.n_particle = N;
  const auto& c = sc.couplings;
  Eigen::VectorXd e(N);
  for (int n = 0; n < N; ++n) e(n) = m.states[n].energy;

  if (sc.impurity.kind == ImpurityMode::Kind::Static) {
    m.n_impurity = 1;
    m.h_down = e.asDiagonal();
    m.h_up = e.asDiagonal();
    m.h_down += contact::j_matrix(m.states, c.g_e_down, c.g_o_down);
    m.h_up += contact::j_matrix(m.states, c.g_e_up, c.g_o_up);
  } else {
    const int M = sc.n_impurity_basis;
    m.n_impurity = M;
    const double wi = impurity_frequency(sc.impurity);
    const contact::HarmonicBasis hb(sc.mass.impurity_mass(), wi, M);
    const auto I = contact::two_body_integrals(m.states, sc.evolve_well, hb, sc.mass, sc.odd_form);
    const int B = N * M;
    Eigen::MatrixXd h0 = Eigen::MatrixXd::Zero(B, B);
    for (int n = 0; n < N; ++n)
      for (int k = 0; k < M; ++k) h0(n * M + k, n * M + k) = e(n) + wi * (k + 0.5);
    m.h_down = h0 + I.interaction(c.g_e_down, c.g_o_down);
    m.h_up = h0 + I.interaction(c.g_e_up, c.g_o_up);
    if (sc.impurity.kind == ImpurityMode::Kind::PaulTrap) {
      const Eigen::MatrixXd xm = hb.x2_matrix();
      m.x2 = Eigen::MatrixXd::Zero(B, B);
      for (int n = 0; n < N; ++n) m.x2.block(n * M, n * M, M, M) = xm;
      m.paul_scale = 0.5 * hb.mass() * wi * wi;
    }
  }
  m.h_down = 0.5 * (m.h_down + m.h_down.transpose());
  m.h_up = 0.5 * (m.h_up + m.h_up.transpose());

  const double X = doublewell::support_half_width(sc.evolve_well, detail::max_energy(m.states));
  auto fill = [&](double y, Eigen::VectorXd& u) {
    u.resize(N);
    for (int n = 0; n < N; ++n) u(n) = doublewell::eval_value(m.states[n], sc.evolve_well, y);
  };
  m.proj_left = detail::gram(fill, -X, 0.0);

  // Share of the interaction carried by the highest particle level.
  const Eigen::MatrixXd V = m.h_up - Eigen::MatrixXd(m.h_up.diagonal().asDiagonal());
  const double total = V.norm();
  const int M = m.n_impurity;
  m.truncation_weight = total > 0.0 ? V.bottomRows(M).norm() / total : 0.0;
  return m;
}

struct InitialState {
  Eigen::VectorXcd coefficients;
  double completeness = 1.0;  // sum of squared overlaps before renormalization
};

/// First excited state of the initial well in the evolve basis, impurity ground
/// state, spin |-> = (|up> - |dn>)/sqrt2.
inline InitialState initial_state(const Model& m) {
  const auto& sc = m.scenario;
  const int N = m.n_particle, M = m.n_impurity, B = m.block();
  Eigen::VectorXd a = Eigen::VectorXd::Zero(N);
  double completeness = 1.0;
  if (!sc.quenched()) {
    a(1) = 1.0;
  } else {
    const auto init = doublewell::solve_noninteracting(sc.initial_well, 2);
    const double X = std::max(doublewell::support_half_width(sc.evolve_well, detail::max_energy(m.states)),
                              doublewell::support_half_width(sc.initial_well, init[1].energy));
    auto fill = [&](double y, Eigen::VectorXd& u) {
      u.resize(N + 1);
      for (int n = 0; n < N; ++n) u(n) = doublewell::eval_value(m.states[n], sc.evolve_well, y);
      u(N) = doublewell::eval_value(init[1], sc.initial_well, y);
    };
    const Eigen::MatrixXd G = detail::gram(fill, -X, 0.0) + detail::gram(fill, 0.0, X);
    a = G.col(N).head(N);
    completeness = a.squaredNorm();
    if (completeness < 0.999) {
      throw NumericalError(
          fmt::format("initial state expansion completeness {:.6f} < 0.999; enlarge n_particle_basis", completeness));
    }
    a /= std::sqrt(completeness);
  }
  InitialState out;
  out.completeness = completeness;
  out.coefficients = Eigen::VectorXcd::Zero(2 * B);
  for (int n = 0; n < N; ++n) {
    out.coefficients(n * M) = -M_SQRT1_2 * a(n);      // dn
    out.coefficients(B + n * M) = M_SQRT1_2 * a(n);   // up
  }
  return out;
}

struct PropagateOptions {
  double rel_tol = 1e-9;
  double abs_tol = 1e-12;
  double dt_out = 0.5;
  double min_step = 1e-14;
  bool stroboscopic = true;  // periodic drives: one-period propagator plus partial periods
};

struct Stats {
  long steps = 0;
  long rhs_calls = 0;
  double max_step = 0.0;
  double wall_seconds = 0.0;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Eigen::VectorXcd> states;
  Stats stats;
};

namespace detail {

using State = std::vector<double>;  // [Re(0..D-1), Im(0..D-1)]

struct Rhs {
  const Model* m;
  long* calls;
  void operator()(const State& x, State& dxdt, double t) const {
    ++*calls;
    const int B = m->block(), D = 2 * B;
    dxdt.resize(x.size());
    Eigen::Map<const Eigen::MatrixXd> Z(x.data(), D, 2);  // columns Re, Im
    Eigen::Map<Eigen::MatrixXd> Y(dxdt.data(), D, 2);
    Eigen::MatrixXd HZ(D, 2);
    HZ.topRows(B).noalias() = m->h_down * Z.topRows(B);
    HZ.bottomRows(B).noalias() = m->h_up * Z.bottomRows(B);
    if (m->time_dependent()) {
      const double k = m->drive(t);
      HZ.topRows(B).noalias() += k * (m->x2 * Z.topRows(B));
      HZ.bottomRows(B).noalias() += k * (m->x2 * Z.bottomRows(B));
    }
    const double w = 0.5 * m->scenario.omega_R;
    HZ.topRows(B) += w * Z.bottomRows(B);
    HZ.bottomRows(B) += w * Z.topRows(B);
    // d/dt (Re + i Im) = -i H (Re + i Im)
    Y.col(0) = HZ.col(1);
    Y.col(1) = -HZ.col(0);
  }
};

inline State pack(const Eigen::VectorXcd& c) {
  const int D = static_cast<int>(c.size());
  State x(2 * D);
  for (int i = 0; i < D; ++i) {
    x[i] = c(i).real();
    x[D + i] = c(i).imag();
  }
  return x;
}

inline Eigen::VectorXcd unpack(const State& x) {
  const int D = static_cast<int>(x.size() / 2);
  Eigen::VectorXcd c(D);
  for (int i = 0; i < D; ++i) c(i) = cplx(x[i], x[D + i]);
  return c;
}

}  // namespace detail

/// Maximum step for the rf drive, 2 pi / (20 Omega_rf).
inline double step_cap(const Model& m) {
  if (!m.time_dependent()) return 0.0;
  return 2.0 * M_PI / (20.0 * m.scenario.impurity.omega_rf);
}

inline double drive_period(const Model& m) { return 2.0 * M_PI / m.scenario.impurity.omega_rf; }

/// U(P, 0) over one rf period, projected onto the nearest unitary.
inline Eigen::MatrixXcd period_propagator(const Model& m, double rel_tol = 1e-12, double abs_tol = 1e-14) {
  namespace ode = boost::numeric::odeint;
  using State = std::vector<double>;
  const int D = m.dim();
  // U = A + iB stored as the D x 2D matrix [A B].
  State x(2 * D * D, 0.0);
  for (int i = 0; i < D; ++i) x[i * D + i] = 1.0;
  auto rhs = [&](const State& z, State& dz, double t) {
    dz.resize(z.size());
    Eigen::Map<const Eigen::MatrixXd> Z(z.data(), D, 2 * D);
    Eigen::Map<Eigen::MatrixXd> Y(dz.data(), D, 2 * D);
    const Eigen::MatrixXd HZ = m.generator(t) * Z;
    Y.leftCols(D) = HZ.rightCols(D);
    Y.rightCols(D) = -HZ.leftCols(D);
  };
  const double P = drive_period(m);
  ode::integrate_adaptive(ode::make_controlled(abs_tol, rel_tol, P / 20.0, ode::runge_kutta_dopri5<State>()), rhs, x,
                          0.0, P, P / 100.0);
  Eigen::Map<const Eigen::MatrixXd> Z(x.data(), D, 2 * D);
  Eigen::MatrixXcd U(D, D);
  U.real() = Z.leftCols(D);
  U.imag() = Z.rightCols(D);
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(U, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().adjoint();
}

namespace detail {

inline Trajectory propagate_stroboscopic(const Model& m, const Eigen::VectorXcd& c0, double t_final,
                                         const PropagateOptions& opt) {
  namespace ode = boost::numeric::odeint;
  using Stepper = ode::runge_kutta_dopri5<State>;
  const auto t_start = std::chrono::steady_clock::now();
  Trajectory tr;
  long calls = 0;
  Rhs rhs{&m, &calls};
  const double P = drive_period(m);
  const Eigen::MatrixXcd UP = period_propagator(m);
  Eigen::VectorXcd at_period = c0;
  long period = 0;
  const long n = static_cast<long>(std::floor(t_final / opt.dt_out + 1e-9));
  for (long k = 0; k <= n; ++k) {
    const double T = k * opt.dt_out;
    const long target = static_cast<long>(std::floor(T / P));
    for (; period < target; ++period) at_period = UP * at_period;
    const double tau = T - target * P;
    Eigen::VectorXcd c = at_period;
    if (tau > 0.0) {
      State x = pack(at_period);
      // The drive is P-periodic, so the remainder starts from t = 0.
      calls += ode::integrate_adaptive(ode::make_controlled(opt.abs_tol, opt.rel_tol, step_cap(m), Stepper()), rhs,
                                       x, 0.0, tau, std::min(tau, step_cap(m)));
      c = unpack(x);
    }
    tr.times.push_back(T);
    tr.states.push_back(c);
  }
  tr.stats.steps = period;
  tr.stats.rhs_calls = calls;
  tr.stats.max_step = P;
  tr.stats.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return tr;
}

}  // namespace detail

inline Trajectory propagate(const Model& m, const Eigen::VectorXcd& c0, double t_final,
                            const PropagateOptions& opt = {}) {
  if (m.time_dependent() && opt.stroboscopic) return detail::propagate_stroboscopic(m, c0, t_final, opt);
  namespace ode = boost::numeric::odeint;
  using Stepper = ode::runge_kutta_dopri5<detail::State>;
  const auto t_start = std::chrono::steady_clock::now();
  Trajectory tr;
  long calls = 0;
  detail::Rhs rhs{&m, &calls};
  const double cap = step_cap(m);
  // A zero max_dt leaves the step unbounded.
  auto dense = ode::make_dense_output(opt.abs_tol, opt.rel_tol, cap, Stepper());
  detail::State x = detail::pack(c0), xs(x.size());
  const double dt0 = cap > 0.0 ? std::min(cap, 1e-3) : 1e-3;
  dense.initialize(x, 0.0, dt0);
  const long n = static_cast<long>(std::floor(t_final / opt.dt_out + 1e-9));
  for (long k = 0; k <= n; ++k) {
    const double T = k * opt.dt_out;
    while (dense.current_time() < T) {
      dense.do_step(rhs);
      ++tr.stats.steps;
      const double h = dense.current_time() - dense.previous_time();
      tr.stats.max_step = std::max(tr.stats.max_step, h);
      if (!(h > opt.min_step)) {
        throw NumericalError(fmt::format("tdse: step size underflow ({:.3g}) at t = {:.6g}", h, dense.current_time()));
      }
    }
    if (k == 0) {
      xs = x;
    } else {
      dense.calc_state(T, xs);
    }
    tr.times.push_back(T);
    tr.states.push_back(detail::unpack(xs));
  }
  tr.stats.rhs_calls = calls;
  tr.stats.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return tr;
}

struct Observables {
  double O_L_plus = 0.0;
  double O_R_minus = 0.0;
  double correlation = 0.0;
  double g_L = 0.0;
  double g_R = 0.0;
  double n_L = 0.0;
  double sigma_x = 0.0;
  double norm = 0.0;
};

inline Observables observe(const Model& m, const Eigen::VectorXcd& c) {
  const int N = m.n_particle, M = m.n_impurity, B = m.block();
  const Eigen::MatrixXd& PL = m.proj_left;
  // Reshape each spin block to an N x M matrix (row n, column m).
  auto block = [&](int p) {
    Eigen::MatrixXcd A(N, M);
    for (int n = 0; n < N; ++n)
      for (int k = 0; k < M; ++k) A(n, k) = c(p * B + n * M + k);
    return A;
  };
  const Eigen::MatrixXcd dn = block(0), up = block(1);
  auto left = [&](const Eigen::MatrixXcd& X, const Eigen::MatrixXcd& Y) {  // sum_m X_m^H P^L Y_m
    return (X.adjoint() * PL.cast<cplx>() * Y).trace();
  };
  auto full = [&](const Eigen::MatrixXcd& X, const Eigen::MatrixXcd& Y) { return (X.adjoint() * Y).trace(); };
  Observables o;
  o.norm = c.squaredNorm();
  const double nL = std::real(left(dn, dn) + left(up, up));
  const double nR = o.norm - nL;
  const double sx = 2.0 * std::real(full(up, dn));
  const double sxL = 2.0 * std::real(left(up, dn));
  const double sxR = sx - sxL;
  const Eigen::MatrixXcd plus = (up + dn) * M_SQRT1_2, minus = (up - dn) * M_SQRT1_2;
  o.n_L = nL;
  o.sigma_x = sx;
  o.O_L_plus = std::real(left(plus, plus));
  o.O_R_minus = std::real(full(minus, minus) - left(minus, minus));
  o.correlation = (sxL - sxR) - (nL - nR) * sx;
  o.g_L = nL - 0.5 * sx;
  o.g_R = nR + 0.5 * sx;
  return o;
}

inline std::vector<Observables> observables(const Model& m, const Trajectory& tr) {
  std::vector<Observables> out;
  out.reserve(tr.states.size());
  for (const auto& c : tr.states) out.push_back(observe(m, c));
  return out;
}

inline double energy(const Model& m, const Eigen::VectorXcd& c, double t) {
  return std::real(c.dot(m.generator(t).cast<cplx>() * c));
}

// Preset two-body scenarios.
inline Scenario fig4_static() {
  Scenario s;
  s.evolve_well = doublewell::from_geometry(2.0, 1.0, 0.5);
  s.initial_well = s.evolve_well;
  s.couplings = fourlevel::opposite_equal_couplings();
  s.mass = {1.0};
  s.impurity = ImpurityMode::static_impurity();
  s.omega_R = resonant_omega(s.evolve_well, s.couplings);
  return s;
}

inline Scenario fig4_quench(double omega_i = 100.0) {
  Scenario s = fig4_static();
  s.initial_well = doublewell::from_geometry(2.0, 1.4, 0.49);
  s.impurity = ImpurityMode::harmonic(omega_i);
  return s;
}

inline Scenario fig4_micromotion(double omega_rf = 2500.0, double omega_i = 100.0, double q = 0.2) {
  Scenario s = fig4_static();
  s.impurity = ImpurityMode::paul_trap(omega_rf, stability_a_for(omega_rf, omega_i, q), q);
  return s;
}

}  // namespace gaugelink::tdse
